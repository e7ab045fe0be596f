"""Synthetic dataset generators.

All generators are deterministic in their seed and return Dataset
objects whose label values start at 1.
"""

from __future__ import annotations

import math

import numpy as np

from .data import Dataset
from .errors import DataError
from .rng import RngStream

OUTLIER_RATIOS = (0.0, 0.1, 0.2, 0.3, 0.5)


def square_grid(k, n_points=None, seed=0):
    """Uniform points over a square frame around a grid of unit squares.

    k must be a perfect square g^2.  The inner g-by-g block of unit
    squares is centered at the origin with a frame of width 1 around
    it, so the outer region spans [-(g+2)/2, (g+2)/2]^2.  Frame points
    get label 1; the inner square at grid row r, column c (from the
    lower left) gets label 2 + r*g + c.  Default point count keeps the
    density of the 101-category variant, about 55.6 points per unit
    area.
    """
    k = int(k)
    g = math.isqrt(k)
    if g * g != k or k < 1:
        raise DataError(f"square count {k} is not a positive perfect square")
    if n_points is None:
        n_points = max(1, round(8000 * (g + 2) ** 2 / 144))
    rng = RngStream(seed, (100, k)).generator
    half = (g + 2) / 2.0
    X = rng.uniform(-half, half, size=(int(n_points), 2))
    y = np.zeros(X.shape[0], int)
    inner = np.max(np.abs(X), axis=1) < g / 2.0
    col = np.floor(X[inner, 0] + g / 2.0).astype(int)
    row = np.floor(X[inner, 1] + g / 2.0).astype(int)
    col = np.clip(col, 0, g - 1)
    row = np.clip(row, 0, g - 1)
    y[inner] = 1 + row * g + col
    return Dataset(X, y, list(range(1, k + 2)))


def square101(n_points=8000, seed=0):
    """The 101-category benchmark: 12-wide frame region, 100 unit
    squares inside the 10-wide inner block."""
    return square_grid(100, n_points=n_points, seed=seed)


def swiss_roll(n_points=600, n_arms=2, noise=0.08, turns=1.75, seed=0):
    """Interleaved spiral arms in the plane, one category per arm."""
    n_arms = int(n_arms)
    if n_arms < 2:
        raise DataError("need at least two spiral arms")
    rng = RngStream(seed, (101,)).generator
    per = int(n_points) // n_arms
    counts = [per + (1 if a < int(n_points) - per * n_arms else 0)
              for a in range(n_arms)]
    rows = []
    labels = []
    for arm, cnt in enumerate(counts):
        t = rng.uniform(0.35, 1.0, size=cnt) ** 0.85 * (2 * np.pi * turns)
        phase = 2 * np.pi * arm / n_arms
        radius = 0.15 + 0.85 * t / (2 * np.pi * turns)
        x = radius * np.cos(t + phase) + rng.normal(0, noise, cnt)
        yv = radius * np.sin(t + phase) + rng.normal(0, noise, cnt)
        rows.append(np.column_stack([x, yv]))
        labels.append(np.full(cnt, arm))
    X = np.vstack(rows)
    y = np.concatenate(labels)
    order = rng.permutation(X.shape[0])
    return Dataset(X[order], y[order], list(range(1, n_arms + 1)))


def contaminate(dataset: Dataset, ratio, seed=0, hot_covariates=(3, 4, 5)):
    """Append label-noise outliers after the inlier rows.

    Outliers carry magnitudes in (2, 3) with random sign on the hot
    covariates, uniform (-1, 1) values elsewhere, and a uniformly
    random label.  The outlier:inlier count ratio must be one of
    0, 0.1, 0.2, 0.3, 0.5; ratio 0 returns the input unchanged.
    """
    ratio = float(ratio)
    if not any(abs(ratio - r) < 1e-12 for r in OUTLIER_RATIOS):
        raise DataError(f"outlier ratio {ratio} not in {OUTLIER_RATIOS}")
    if ratio == 0.0:
        return dataset.subset(np.arange(dataset.n_obs))
    ncov = dataset.n_cov
    hot = [h for h in hot_covariates if h < ncov]
    rng = RngStream(seed, (102,)).generator
    n_out = int(round(ratio * dataset.n_obs))
    X_out = rng.uniform(-1.0, 1.0, size=(n_out, ncov))
    for h in hot:
        mag = rng.uniform(2.0, 3.0, size=n_out)
        sign = np.where(rng.random(n_out) < 0.5, -1.0, 1.0)
        X_out[:, h] = sign * mag
    y_out = rng.integers(0, dataset.n_categories, size=n_out)
    return Dataset(np.vstack([dataset.X, X_out]),
                   np.concatenate([dataset.y, y_out]),
                   list(dataset.label_values))
