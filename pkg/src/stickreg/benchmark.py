"""Benchmark suite: datasets, fixed splits, and per-model protocols.

The suite mirrors the in-scope model columns of the headline
comparison: multinomial logistic, robit, kernel support vector
machine, four softplus-mixture sizes, and the two-stage transformed
softplus model.  Error rates for softplus models average the
predictive probabilities of both stick-breaking constructions; the
active-hyperplane count (layers times active experts on non-reference
sticks, summed over constructions) is reported alongside.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .data import (Dataset, Pipeline, load_dataset, rbf_width_grid,
                   write_csv)
from .diagnostics import error_rate
from .errors import DataError
from .model import (LinkSpec, McmcConfig, StickModel, collect_transform,
                    predict_probs, run_mcmc)
from .rng import RngStream

MODEL_NAMES = ("pasb-mlr", "pasb-robit", "pasb-msvm",
               "msr-1-1", "msr-1-3", "msr-5-1", "msr-5-3", "dt-msr")

# protocol: how train/test rows are produced; id: fixed split-stream key
DATASET_INFO = {
    "iris": {"id": 1, "protocol": "five-80-20", "builtin": True},
    "wine": {"id": 2, "protocol": "five-80-20", "builtin": True},
    "glass": {"id": 3, "protocol": "five-80-20", "builtin": False},
    "vehicle": {"id": 4, "protocol": "predefined", "builtin": False},
    "waveform": {"id": 5, "protocol": "single-10-90", "builtin": False},
    "segment": {"id": 6, "protocol": "single-10-90", "builtin": False},
    "dna": {"id": 7, "protocol": "predefined", "builtin": False},
    "satimage": {"id": 8, "protocol": "predefined", "builtin": False},
}

LONG_RUNNING = ("dna", "satimage")


# ---------------------------------------------------------------------------
# Split manifests
# ---------------------------------------------------------------------------

def split_indices(n, train_fraction, dataset_id, trial):
    """Deterministic train/test index pair; train size floor(frac*n)."""
    rng = RngStream(7_040_000, (300, dataset_id, trial)).generator
    order = rng.permutation(n)
    n_train = int(np.floor(train_fraction * n))
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def manifest_for(name, n):
    """All (train, test) index pairs for a dataset under its protocol."""
    info = DATASET_INFO[name]
    proto = info["protocol"]
    if proto == "five-80-20":
        return [split_indices(n, 0.8, info["id"], t) for t in range(5)]
    if proto == "single-10-90":
        return [split_indices(n, 0.1, info["id"], 0)]
    if proto == "single-70-30":
        return [split_indices(n, 0.7, info["id"], 0)]
    raise DataError(f"{name} uses predefined files, not generated splits")


# ---------------------------------------------------------------------------
# Dataset resolution
# ---------------------------------------------------------------------------

_EXTENSIONS = (".csv", ".libsvm", ".txt")


def _find_file(data_dir, stem):
    for ext in _EXTENSIONS:
        path = os.path.join(data_dir, stem + ext)
        if os.path.exists(path):
            return path
    return None


def materialize_builtin(name, data_dir):
    """Write iris or wine to CSV from the bundled sklearn copies."""
    try:
        from sklearn import datasets as skdata
    except ImportError as exc:
        raise DataError("scikit-learn not installed; supply "
                        f"{name}.csv instead") from exc
    if name == "iris":
        raw = skdata.load_iris()
    elif name == "wine":
        raw = skdata.load_wine()
    else:
        raise DataError(f"no builtin source for {name}")
    ds = Dataset(np.asarray(raw.data, float),
                 np.asarray(raw.target, int),
                 [int(v) + 1 for v in np.unique(raw.target)])
    os.makedirs(data_dir, exist_ok=True)
    path = os.path.join(data_dir, name + ".csv")
    write_csv(path, ds)
    return path


def resolve_dataset(name, data_dir):
    """List of (train, test) Dataset pairs for one suite row.

    Files are searched as <name>.csv / <name>.libsvm / <name>.txt (or
    <name>.train.* plus <name>.test.* for predefined-split sets) under
    ``data_dir``.  iris and wine are materialized automatically when
    absent.  DataError carries what is missing.
    """
    if name not in DATASET_INFO:
        raise ValueError(f"unknown dataset {name!r}")
    info = DATASET_INFO[name]
    if info["protocol"] == "predefined":
        tr = _find_file(data_dir, name + ".train")
        te = _find_file(data_dir, name + ".test")
        if tr is None or te is None:
            raise DataError(f"missing {name}.train.*/{name}.test.* "
                            f"under {data_dir}")
        train = load_dataset(tr)
        test = load_dataset(te)
        if train.n_cov != test.n_cov:
            raise DataError(f"{name}: train/test covariate mismatch")
        return [(train, test)]
    path = _find_file(data_dir, name)
    if path is None and info["builtin"]:
        path = materialize_builtin(name, data_dir)
    if path is None:
        raise DataError(f"missing {name}.csv (or .libsvm) under {data_dir}")
    full = load_dataset(path)
    pairs = []
    for tr_idx, te_idx in manifest_for(name, full.n_obs):
        pairs.append((full.subset(tr_idx), full.subset(te_idx)))
    return pairs


# ---------------------------------------------------------------------------
# Model protocols
# ---------------------------------------------------------------------------

@dataclass
class SuiteSettings:
    """Run-length control.  scale shrinks every protocol's iteration
    counts proportionally for desk-scale runs; floors keep chains
    usable.  pg_method feeds the softplus models."""

    scale: float = 1.0
    seed: int = 0
    pg_method: str = "exact"
    cv_scale: float | None = None  # defaults to scale

    def lengths(self, iters, burn_in, scale=None):
        sc = self.scale if scale is None else scale
        it = max(60, int(round(iters * sc)))
        bu = max(30, int(round(burn_in * sc)))
        return it, min(bu, it - 20)


def _fit_predict(train, test, spec, construction, iters, burn_in, seed,
                 permute=True, init_sticks=None, rbf_width=None,
                 transform=None):
    pipe = Pipeline.fit(train.X, rbf_width=rbf_width)
    pipe.transform = transform
    D_train = pipe.design(train.X)
    cfg = McmcConfig(iters=iters, burn_in=burn_in, thin=1,
                     construction=construction, permute=permute,
                     init_sticks=init_sticks, seed=seed)
    model, store = run_mcmc(D_train, train.y, train.n_categories, spec, cfg)
    probs = predict_probs(store, pipe.design(test.X))
    return model, store, probs, pipe


def _msr_active(model: StickModel):
    """Layers times active experts, non-reference sticks only."""
    total = 0
    for pos in range(model.n_categories - 1):
        link = model.links[pos]
        total += link.B.shape[1] * len(link.active_experts())
    return total


def _svm_active(model: StickModel):
    total = 0
    for pos in range(model.n_categories - 1):
        total += int(np.count_nonzero(model.links[pos].included))
    return total


def _cv_svm_width(train, settings: SuiteSettings, seed):
    """3-fold cross-validated kernel width over 2^-10 .. 2^10."""
    rng = RngStream(seed, (77,)).generator
    n = train.n_obs
    order = rng.permutation(n)
    folds = [np.sort(order[f::3]) for f in range(3)]
    sc = settings.scale if settings.cv_scale is None else settings.cv_scale
    iters, burn_in = settings.lengths(1000, 500, sc)
    best_width, best_err = None, None
    for width in rbf_width_grid():
        errs = []
        for f, hold in enumerate(folds):
            keep = np.sort(np.concatenate(
                [folds[g] for g in range(3) if g != f]))
            _, _, probs, _ = _fit_predict(
                train.subset(keep), train.subset(hold),
                LinkSpec(kind="svm"), "pasb", iters, burn_in,
                seed + 13 * f, rbf_width=width)
            errs.append(error_rate(probs, train.subset(hold).y))
        err = float(np.mean(errs))
        if best_err is None or err < best_err:
            best_width, best_err = width, err
    return best_width


def run_model(name, train, test, settings: SuiteSettings, seed):
    """(error rate, active hyperplane count) for one split."""
    if name == "pasb-mlr":
        iters, burn_in = settings.lengths(8000, 5000)
        model, _, probs, _ = _fit_predict(train, test, LinkSpec(kind="logistic"),
                                          "pasb", iters, burn_in, seed)
        return error_rate(probs, test.y), train.n_categories - 1
    if name == "pasb-robit":
        iters, burn_in = settings.lengths(8000, 5000)
        model, _, probs, _ = _fit_predict(train, test,
                                          LinkSpec(kind="robit", dof=6.0),
                                          "pasb", iters, burn_in, seed)
        return error_rate(probs, test.y), train.n_categories - 1
    if name == "pasb-msvm":
        width = _cv_svm_width(train, settings, seed)
        iters, burn_in = settings.lengths(1000, 500)
        model, _, probs, _ = _fit_predict(train, test, LinkSpec(kind="svm"),
                                          "pasb", iters, burn_in, seed,
                                          rbf_width=width)
        return error_rate(probs, test.y), _svm_active(model)
    if name.startswith("msr-"):
        _, k, t = name.split("-")
        return _run_msr(train, test, int(k), int(t), settings, seed)
    if name == "dt-msr":
        return _run_dt_msr(train, test, settings, seed)
    raise ValueError(f"unknown model {name!r}")


def _run_msr(train, test, k, t, settings: SuiteSettings, seed):
    iters, burn_in = settings.lengths(10000, 5000)
    spec = LinkSpec(kind="msr", n_experts=k, n_layers=t,
                    pg_method=settings.pg_method)
    acc = np.zeros((test.n_obs, train.n_categories))
    active = 0
    for c_idx, construction in enumerate(("pasb", "parsb")):
        model, _, probs, _ = _fit_predict(train, test, spec, construction,
                                          iters, burn_in, seed + 101 * c_idx)
        acc += probs
        active += _msr_active(model)
    return error_rate(acc / 2.0, test.y), active


def _run_dt_msr(train, test, settings: SuiteSettings, seed):
    """Two stages: a deep softplus fit learns the mapping and feature
    hyperplanes, then a single-layer softplus model runs on the
    augmented covariates."""
    stage1_iters, _ = settings.lengths(3000, 1500)
    iters, burn_in = settings.lengths(10000, 5000)
    acc = np.zeros((test.n_obs, train.n_categories))
    active = 0
    for c_idx, construction in enumerate(("pasb", "parsb")):
        spec1 = LinkSpec(kind="msr", n_experts=5, n_layers=3,
                         pg_method=settings.pg_method)
        model1, _, _, pipe1 = _fit_predict(
            train, test, spec1, construction, stage1_iters,
            max(30, stage1_iters // 2), seed + 101 * c_idx)
        transform = collect_transform(model1)
        spec2 = LinkSpec(kind="msr", n_experts=5, n_layers=1,
                         pg_method=settings.pg_method)
        model2, _, probs, _ = _fit_predict(
            train, test, spec2, construction, iters, burn_in,
            seed + 101 * c_idx + 7, init_sticks=model1.sticks,
            transform=transform)
        acc += probs
        active += _msr_active(model2)
    return error_rate(acc / 2.0, test.y), active


# ---------------------------------------------------------------------------
# Suite runner
# ---------------------------------------------------------------------------

@dataclass
class SuiteRow:
    dataset: str
    n_categories: int | None
    status: str
    errors: dict = field(default_factory=dict)
    active: dict = field(default_factory=dict)


def run_suite(datasets, models, data_dir, settings: SuiteSettings,
              progress=None):
    """Per-dataset, per-model mean error over that dataset's splits.

    A missing dataset produces a row whose status names the gap; the
    rest of the suite still runs.
    """
    for m in models:
        if m not in MODEL_NAMES:
            raise ValueError(f"unknown model {m!r}; choose from "
                             f"{', '.join(MODEL_NAMES)}")
    for name in datasets:
        if name not in DATASET_INFO:
            raise ValueError(f"unknown dataset {name!r}; choose from "
                             f"{', '.join(DATASET_INFO)}")
    rows = []
    for name in datasets:
        try:
            pairs = resolve_dataset(name, data_dir)
        except DataError as exc:
            rows.append(SuiteRow(name, None, f"missing ({exc})"))
            continue
        row = SuiteRow(name, pairs[0][0].n_categories, "ok")
        for m in models:
            errs, acts = [], []
            for s_idx, (train, test) in enumerate(pairs):
                if progress is not None:
                    progress(name, m, s_idx, len(pairs))
                err, act = run_model(m, train, test, settings,
                                     settings.seed + 1000 * s_idx)
                errs.append(err)
                acts.append(act)
            row.errors[m] = float(np.mean(errs))
            row.active[m] = float(np.mean(acts))
        rows.append(row)
    return rows


def suite_table(rows, models):
    """CSV-ready table: header plus one line per dataset."""
    header = ["dataset", "categories", "status"]
    for m in models:
        header += [f"{m}_error_pct", f"{m}_active"]
    lines = [",".join(header)]
    for row in rows:
        cells = [row.dataset,
                 "" if row.n_categories is None else str(row.n_categories),
                 row.status]
        for m in models:
            if m in row.errors:
                cells.append(f"{100.0 * row.errors[m]:.2f}")
                cells.append(f"{row.active[m]:g}")
            else:
                cells += ["", ""]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
