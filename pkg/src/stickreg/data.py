"""Datasets, design matrices, and replayable feature pipelines.

Covariates are stored raw; every transformation fitted on training
data (standardization, radial basis expansion, learned softplus
features) is recorded so it can be replayed exactly on query rows at
prediction time.  Labels are remapped to contiguous internal codes
0..S-1 with the original values kept for reporting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


def _softplus(w):
    w = np.asarray(w, float)
    return np.where(w > 30.0, w, np.log1p(np.exp(np.minimum(w, 30.0))))


# ---------------------------------------------------------------------------
# Dataset container and loaders
# ---------------------------------------------------------------------------

@dataclass
class Dataset:
    """Raw covariates (no intercept), internal labels, and the original
    label values positioned by internal code."""

    X: np.ndarray
    y: np.ndarray
    label_values: list

    @property
    def n_obs(self):
        return self.X.shape[0]

    @property
    def n_cov(self):
        return self.X.shape[1]

    @property
    def n_categories(self):
        return len(self.label_values)

    def subset(self, idx):
        return Dataset(self.X[idx], self.y[idx], list(self.label_values))


def remap_labels(raw):
    """Map arbitrary numeric labels onto 0..S-1 by sorted value.

    Returns (codes, label_values); label_values[k] is the original
    value encoded as k.
    """
    raw = np.asarray(raw)
    values = np.unique(raw)
    codes = np.searchsorted(values, raw)
    out_values = []
    for v in values.tolist():
        if float(v).is_integer():
            out_values.append(int(v))
        else:
            out_values.append(float(v))
    return codes.astype(int), out_values


def from_arrays(X, y_raw):
    X = np.asarray(X, float)
    if X.ndim != 2:
        raise DataError("covariate array must be 2-D")
    if not np.isfinite(X).all():
        raise DataError("covariates contain NaN or infinity")
    codes, values = remap_labels(y_raw)
    if codes.shape[0] != X.shape[0]:
        raise DataError(f"{X.shape[0]} covariate rows but "
                        f"{codes.shape[0]} labels")
    if len(values) < 2:
        raise DataError("need at least two distinct labels")
    return Dataset(X, codes, values)


def load_libsvm(path):
    """Sparse 'label index:value' rows, 1-based indices, dense result."""
    rows = []
    labels = []
    max_index = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad label {parts[0]!r}") from exc
            entries = []
            for tok in parts[1:]:
                try:
                    idx, val = tok.split(":")
                    idx = int(idx)
                    val = float(val)
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: bad entry {tok!r}") from exc
                if idx < 1:
                    raise DataError(f"{path}:{lineno}: index {idx} not 1-based")
                entries.append((idx, val))
                max_index = max(max_index, idx)
            rows.append(entries)
    if not rows:
        raise DataError(f"{path}: no data rows")
    X = np.zeros((len(rows), max_index))
    for i, entries in enumerate(rows):
        for idx, val in entries:
            X[i, idx - 1] = val
    return from_arrays(X, labels)


def load_csv(path, label_col=-1, delimiter=","):
    """Numeric CSV with one label column (last by default).  A single
    leading header line is detected and skipped."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")
    start = 0
    try:
        [float(tok) for tok in lines[0].split(delimiter)]
    except ValueError:
        start = 1
    if start >= len(lines):
        raise DataError(f"{path}: no data rows")
    width = len(lines[start].split(delimiter))
    data = np.empty((len(lines) - start, width))
    for i, ln in enumerate(lines[start:], start):
        toks = ln.split(delimiter)
        if len(toks) != width:
            raise DataError(f"{path}:{i + 1}: expected {width} fields, "
                            f"got {len(toks)}")
        try:
            data[i - start] = [float(t) for t in toks]
        except ValueError as exc:
            raise DataError(f"{path}:{i + 1}: non-numeric field") from exc
    if not np.isfinite(data).all():
        raise DataError(f"{path}: NaN or infinite values present")
    lc = label_col if label_col >= 0 else width + label_col
    if not 0 <= lc < width:
        raise DataError(f"label column {label_col} out of range for "
                        f"{width} columns")
    mask = np.ones(width, bool)
    mask[lc] = False
    return from_arrays(data[:, mask], data[:, lc])


def load_dataset(path, fmt=None, label_col=-1):
    """Dispatch on file extension unless ``fmt`` forces a format."""
    if fmt is None:
        fmt = "csv" if str(path).endswith(".csv") else "libsvm"
    if fmt == "csv":
        return load_csv(path, label_col=label_col)
    if fmt == "libsvm":
        return load_libsvm(path)
    raise DataError(f"unknown dataset format {fmt!r}")


def write_csv(path, dataset: Dataset):
    """Covariates then the original label value, one row per line."""
    with open(path, "w") as fh:
        for i in range(dataset.n_obs):
            vals = [repr(float(v)) for v in dataset.X[i]]
            vals.append(str(dataset.label_values[dataset.y[i]]))
            fh.write(",".join(vals) + "\n")


# ---------------------------------------------------------------------------
# Fitted, replayable transforms
# ---------------------------------------------------------------------------

@dataclass
class Standardizer:
    """Center and scale by training moments; population denominator.

    Constant columns get unit scale so they pass through centered.
    """

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X):
        X = np.asarray(X, float)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)  # ddof=0
        scale = np.where(scale > 0, scale, 1.0)
        return cls(mean, scale)

    def apply(self, X):
        return (np.asarray(X, float) - self.mean) / self.scale


@dataclass
class RbfExpansion:
    """Gaussian kernel features exp(-width * ||x - c||^2) against the
    stored training centers."""

    centers: np.ndarray
    width: float

    @classmethod
    def fit(cls, X_std, width):
        return cls(np.array(X_std, float), float(width))

    def apply(self, X_std):
        X_std = np.asarray(X_std, float)
        x2 = (X_std**2).sum(axis=1)[:, None]
        c2 = (self.centers**2).sum(axis=1)[None, :]
        d2 = np.maximum(x2 + c2 - 2.0 * X_std @ self.centers.T, 0.0)
        return np.exp(-self.width * d2)


def rbf_width_grid():
    """Candidate kernel widths 2^-10 .. 2^10."""
    return [2.0**p for p in range(-10, 11)]


@dataclass
class TransformRecord:
    """Learned softplus features appended to a design matrix.

    Each stored hyperplane h contributes the column ln(1 + e^{x h});
    appended entries are therefore strictly positive.  Hyperplanes act
    on the same design the model was trained on (intercept included),
    so the output is a ready design for a second-stage model.
    """

    hyperplanes: np.ndarray  # (H, D_design)

    def apply(self, design):
        design = np.asarray(design, float)
        if self.hyperplanes.size == 0:
            return design.copy()
        feats = _softplus(design @ self.hyperplanes.T)
        return np.column_stack([design, feats])

    @property
    def n_features(self):
        return self.hyperplanes.shape[0]


@dataclass
class Pipeline:
    """The full covariate path from raw rows to a model design matrix:
    standardize, optional kernel expansion, intercept, then optional
    learned softplus features."""

    standardizer: Standardizer
    rbf: RbfExpansion | None = None
    transform: TransformRecord | None = None

    @classmethod
    def fit(cls, X_train, rbf_width=None):
        std = Standardizer.fit(X_train)
        rbf = None
        if rbf_width is not None:
            rbf = RbfExpansion.fit(std.apply(X_train), rbf_width)
        return cls(std, rbf)

    def design(self, X):
        feats = self.standardizer.apply(X)
        if self.rbf is not None:
            feats = self.rbf.apply(feats)
        out = np.column_stack([np.ones(feats.shape[0]), feats])
        if self.transform is not None:
            out = self.transform.apply(out)
        return out
