"""Fit quality and chain mixing summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import LinkSpec, StickModel, TraceStore


def log_pointwise(probs, labels):
    """Log probability assigned to each realized label."""
    probs = np.asarray(probs, float)
    labels = np.asarray(labels, int)
    p = probs[np.arange(labels.size), labels]
    return np.log(np.clip(p, 1e-300, None))


def error_rate(probs, labels):
    """Fraction of rows whose most probable category is not the label."""
    labels = np.asarray(labels, int)
    return float(np.mean(np.argmax(probs, axis=1) != labels))


def _autocovariance(x):
    """Biased (1/L) autocovariances at all lags via FFT."""
    L = x.size
    centered = x - x.mean()
    nfft = 1 << (2 * L - 1).bit_length()
    f = np.fft.rfft(centered, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:L]
    return acov / L


def effective_sample_size(chain):
    """Effective number of independent draws in a scalar chain.

    Autocovariances are summed in adjacent pairs and the sum truncated
    at the first nonpositive pair, so the estimate stays stable when
    the empirical autocorrelation turns to noise.  A constant chain
    counts every draw, matching its zero-variance degenerate limit.
    """
    x = np.asarray(chain, float).ravel()
    L = x.size
    if L < 4:
        return float(L)
    acov = _autocovariance(x)
    if acov[0] <= 0 or not np.isfinite(acov[0]):
        return float(L)
    rho = acov / acov[0]
    n_pairs = L // 2
    pair = rho[0 : 2 * n_pairs : 2] + rho[1 : 2 * n_pairs : 2]
    pos = np.nonzero(pair <= 0)[0]
    cut = pos[0] if pos.size else n_pairs
    tau = 2.0 * pair[:cut].sum() - 1.0
    tau = max(tau, 1e-12)
    return float(L / tau)


def ess_batch_means(chain, n_batches=30):
    """Independent cross-check: L * Var(x) / (b * Var(batch means))."""
    x = np.asarray(chain, float).ravel()
    L = x.size
    b = L // n_batches
    if b < 2:
        return float(L)
    trimmed = x[: b * n_batches].reshape(n_batches, b)
    vx = x.var(ddof=1)
    if vx <= 0:
        return float(L)
    vm = trimmed.mean(axis=1).var(ddof=1)
    if vm <= 0:
        return float(L)
    return float(L * vx / (b * vm))


@dataclass
class EssReport:
    """Distribution of per-probability effective sample sizes."""

    ess: np.ndarray
    chain_length: int
    degenerate: int

    @property
    def q10(self):
        return float(np.quantile(self.ess, 0.10))

    @property
    def q50(self):
        return float(np.quantile(self.ess, 0.50))

    @property
    def q90(self):
        return float(np.quantile(self.ess, 0.90))

    def summary_row(self):
        return {"q10": self.q10, "q50": self.q50, "q90": self.q90,
                "chain_length": self.chain_length,
                "degenerate": self.degenerate}


def probability_chains(store: TraceStore, X):
    """(n_samples, N, S) category probabilities along the trace."""
    X = np.asarray(X, float)
    links = [LinkSpec.from_dict(meta["spec"]).build(meta["ncov"], 0)
             for meta in store.link_meta]
    model = StickModel(links, construction=store.construction)
    out = np.empty((store.n_samples, X.shape[0], store.n_categories))
    for idx in range(store.n_samples):
        model.restore(store.snapshot_at(idx), store.sticks_trace[idx])
        out[idx] = model.category_probs(X)
    return out


def ess_report(store: TraceStore, X):
    """ESS of every per-row category probability under the trace."""
    chains = probability_chains(store, X)
    n_samples, n_obs, n_cat = chains.shape
    flat = chains.reshape(n_samples, n_obs * n_cat)
    ess = np.empty(flat.shape[1])
    degenerate = 0
    for k in range(flat.shape[1]):
        col = flat[:, k]
        if col.var() == 0:
            degenerate += 1
            ess[k] = float(n_samples)
        else:
            ess[k] = effective_sample_size(col)
    return EssReport(ess, n_samples, degenerate)
