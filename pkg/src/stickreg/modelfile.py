"""Stable on-disk model format.

A saved model is a JSON header next to a raw binary sidecar.  The
header carries everything structural (construction, link recipes,
sampler settings, label values, pipeline layout, array manifest); the
sidecar holds the numeric arrays little-endian in manifest order.  A
loaded model reproduces predictions bit for bit, and saving the same
fitted model twice yields byte-identical files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .data import Pipeline, RbfExpansion, Standardizer, TransformRecord
from .errors import DataError
from .model import TraceStore, predict_probs

FORMAT_NAME = "stick-model"
FORMAT_VERSION = 1


def _collect_arrays(store: TraceStore, pipeline: Pipeline):
    arrays = {
        "trace/sticks": np.asarray(store.sticks_trace, np.int64),
        "trace/loglik": np.asarray(store.loglik_trace, np.float64),
        "pipeline/mean": np.asarray(pipeline.standardizer.mean, np.float64),
        "pipeline/scale": np.asarray(pipeline.standardizer.scale, np.float64),
    }
    for key, arr in store.arrays.items():
        arrays["trace/" + key] = np.asarray(arr, np.float64)
    if pipeline.rbf is not None:
        arrays["pipeline/centers"] = np.asarray(pipeline.rbf.centers,
                                                np.float64)
    if pipeline.transform is not None:
        arrays["pipeline/hyperplanes"] = np.asarray(
            pipeline.transform.hyperplanes, np.float64)
    return arrays


def save_model(path, store: TraceStore, pipeline: Pipeline, label_values):
    """Write header JSON to ``path`` and arrays to ``path`` + ".bin"."""
    path = str(path)
    bin_path = path + ".bin"
    arrays = _collect_arrays(store, pipeline)
    manifest = []
    offset = 0
    chunks = []
    for name in sorted(arrays):
        arr = arrays[name]
        code = "<i8" if arr.dtype.kind == "i" else "<f8"
        raw = np.ascontiguousarray(arr).astype(code).tobytes()
        manifest.append({"name": name, "dtype": code,
                         "shape": list(arr.shape), "offset": offset})
        chunks.append(raw)
        offset += len(raw)
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "binary": os.path.basename(bin_path),
        "construction": store.construction,
        "n_categories": store.n_categories,
        "label_values": list(label_values),
        "config": store.config,
        "link_meta": store.link_meta,
        "counters": {"proposed": int(store.proposed),
                     "accepted": int(store.accepted)},
        "rbf_width": pipeline.rbf.width if pipeline.rbf is not None else None,
        "arrays": manifest,
        "total_bytes": offset,
    }
    with open(bin_path, "wb") as fh:
        for raw in chunks:
            fh.write(raw)
    with open(path, "w") as fh:
        json.dump(header, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    return path


def load_model(path):
    """Read a saved model back; every structural problem is DataError."""
    path = str(path)
    try:
        with open(path) as fh:
            header = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read model header {path}: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT_NAME:
        raise DataError(f"{path} is not a saved model")
    if header.get("version") != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported model version "
                        f"{header.get('version')!r}")
    bin_path = os.path.join(os.path.dirname(path) or ".", header["binary"])
    try:
        with open(bin_path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read model arrays {bin_path}: {exc}") from exc
    if len(blob) != header["total_bytes"]:
        raise DataError(f"{bin_path}: expected {header['total_bytes']} bytes, "
                        f"found {len(blob)}")
    arrays = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        stop = start + count * 8
        if stop > len(blob):
            raise DataError(f"{bin_path}: array {entry['name']} overruns file")
        arr = np.frombuffer(blob, dtype=entry["dtype"], count=count,
                            offset=start).reshape(shape).copy()
        arrays[entry["name"]] = arr

    store = TraceStore(header["construction"], header["link_meta"],
                       header["config"], header["n_categories"])
    store.sticks_trace = arrays.pop("trace/sticks").astype(int)
    store.loglik_trace = arrays.pop("trace/loglik")
    store.proposed = header["counters"]["proposed"]
    store.accepted = header["counters"]["accepted"]

    standardizer = Standardizer(arrays.pop("pipeline/mean"),
                                arrays.pop("pipeline/scale"))
    rbf = None
    if "pipeline/centers" in arrays:
        rbf = RbfExpansion(arrays.pop("pipeline/centers"),
                           float(header["rbf_width"]))
    transform = None
    if "pipeline/hyperplanes" in arrays:
        transform = TransformRecord(arrays.pop("pipeline/hyperplanes"))
    pipeline = Pipeline(standardizer, rbf, transform)

    store.arrays = {key[len("trace/"):]: arr for key, arr in arrays.items()}
    return ModelFile(store, pipeline, header["label_values"])


@dataclass
class ModelFile:
    """A loaded (or about-to-be-saved) fitted model."""

    store: TraceStore
    pipeline: Pipeline
    label_values: list

    def predict(self, X_raw, mode="average"):
        """Category probabilities for raw covariate rows."""
        design = self.pipeline.design(X_raw)
        return predict_probs(self.store, design, mode=mode)

    def predict_labels(self, X_raw, mode="average"):
        probs = self.predict(X_raw, mode=mode)
        codes = np.argmax(probs, axis=1)
        return np.array([self.label_values[c] for c in codes])

    def transform_record(self, index=-1):
        """Softplus feature hyperplanes harvested from one retained
        sample (the last by default).  Requires softplus-mixture links."""
        arrays = self.store.arrays
        if "stick0/active" not in arrays:
            raise DataError("model has no softplus-mixture links; "
                            "nothing to harvest for a covariate transform")
        planes = []
        ncov = 1
        for j in range(self.store.n_categories):
            B = arrays[f"stick{j}/B"][index]
            active = arrays[f"stick{j}/active"][index]
            ncov = B.shape[2]
            for k in np.flatnonzero(active > 0.5):
                for t in range(B.shape[1]):
                    planes.append(B[k, t])
        if planes:
            return TransformRecord(np.array(planes))
        return TransformRecord(np.zeros((0, ncov)))

    def save(self, path):
        return save_model(path, self.store, self.pipeline, self.label_values)
