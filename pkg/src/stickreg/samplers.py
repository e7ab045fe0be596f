"""Exact samplers for latent-variable augmentation.

Everything here is vectorized over parameter arrays and reads
randomness from an explicit ``numpy.random.Generator``, so draws are
reproducible and independent of batching or execution order.  The
Polya-Gamma sampler is exact: Devroye alternating-series rejection for
unit shape, summation for integer shape, and a truncated infinite-sum
representation with a moment-matched gamma remainder for fractional
shape.  A moment-matched shortcut exists only behind the explicit
``method="approximate"`` flag.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import log_ndtr, ndtr, ndtri

from .errors import NumericError

# Devroye's threshold splitting the two proposal pieces.  0.64 is close
# to the optimal switch point between the exponential tail and the
# inverse-Gaussian body.
_TRUNC = 0.64

_PI2 = np.pi**2
_PI4 = np.pi**4
_PI6 = np.pi**6


# ---------------------------------------------------------------------------
# Polya-Gamma
# ---------------------------------------------------------------------------

def _jstar_coef(n, x):
    """Piecewise coefficients a_n(x) of the alternating series bounding
    the J*(1, 0) density.  x may be an array."""
    x = np.asarray(x, float)
    k = n + 0.5
    out = np.empty_like(x)
    left = x <= _TRUNC
    if np.any(left):
        xl = x[left]
        out[left] = np.pi * k * (2.0 / (np.pi * xl)) ** 1.5 * np.exp(-2.0 * k * k / xl)
    if np.any(~left):
        xr = x[~left]
        out[~left] = np.pi * k * np.exp(-k * k * _PI2 * xr / 2.0)
    return out


def _rtigauss(z, rng):
    """Inverse-Gaussian(1/z, 1) truncated to (0, TRUNC], elementwise.

    Follows the two-case scheme: for small z (mean above the truncation
    point) propose from the scale-free limit and thin by exp(-z^2 x/2);
    otherwise draw straight inverse-Gaussians until one lands inside.
    """
    z = np.asarray(z, float)
    t = _TRUNC
    out = np.empty_like(z)
    pending = np.arange(z.size)
    while pending.size:
        zc = z[pending]
        m = pending.size
        x = np.empty(m)
        small = zc < 1.0 / t  # mean 1/z exceeds t
        ns = int(small.sum())
        if ns:
            # proposal: X = t / (1 + t E1)^2 with E1 constrained against E2
            e1 = np.empty(ns)
            need = np.arange(ns)
            while need.size:
                c1 = rng.standard_exponential(need.size)
                c2 = rng.standard_exponential(need.size)
                ok = c1 * c1 <= 2.0 * c2 / t
                e1[need[ok]] = c1[ok]
                need = need[~ok]
            xs = t / (1.0 + t * e1) ** 2
            zs = zc[small]
            keep = rng.random(ns) <= np.exp(-0.5 * zs * zs * xs)
            x[small] = np.where(keep, xs, np.nan)
        nl = int((~small).sum())
        if nl:
            mu = 1.0 / zc[~small]
            y = rng.standard_normal(nl) ** 2
            w = mu * y
            # rationalized root of the Michael-Schucany-Haas quadratic
            x1 = mu * (1.0 - 2.0 * w / (w + np.sqrt(w * (4.0 + w))))
            flip = rng.random(nl) * (mu + x1) > mu
            xl = np.where(flip, mu * mu / x1, x1)
            x[~small] = np.where(xl <= t, xl, np.nan)
        good = ~np.isnan(x)
        out[pending[good]] = x[good]
        pending = pending[~good]
    return out


def _jstar_one(z, rng):
    """Draw J*(1, z) elementwise by Devroye rejection; PG(1, c) is
    J*(1, |c|/2) / 4."""
    z = np.abs(np.asarray(z, float))
    t = _TRUNC
    fz = _PI2 / 8.0 + z * z / 2.0
    # log masses of the exponential (right) and inverse-Gaussian (left)
    # proposal pieces; ratio computed in log space to survive large z
    logp = np.log(np.pi / (2.0 * fz)) - fz * t
    rt = np.sqrt(t)
    a_arg = (t * z - 1.0) / rt
    b_arg = -(t * z + 1.0) / rt
    logq = np.log(2.0) - z + np.logaddexp(log_ndtr(a_arg), 2.0 * z + log_ndtr(b_arg))
    with np.errstate(over="ignore"):
        p_exp = 1.0 / (1.0 + np.exp(logq - logp))

    out = np.empty_like(z)
    pending = np.arange(z.size)
    while pending.size:
        m = pending.size
        zc = z[pending]
        pick = rng.random(m) < p_exp[pending]
        x = np.empty(m)
        ne = int(pick.sum())
        if ne:
            x[pick] = t + rng.standard_exponential(ne) / fz[pending][pick]
        if m - ne:
            x[~pick] = _rtigauss(zc[~pick], rng)
        # alternating-series accept/reject
        s = _jstar_coef(0, x)
        y = rng.random(m) * s
        status = np.zeros(m, np.int8)  # 0 undecided, 1 accept, 2 reject
        und = np.arange(m)
        n = 0
        while und.size:
            n += 1
            a = _jstar_coef(n, x[und])
            if n % 2 == 1:
                s[und] -= a
                hit = y[und] <= s[und]
                status[und[hit]] = 1
            else:
                s[und] += a
                hit = y[und] > s[und]
                status[und[hit]] = 2
            und = und[~hit]
            if n > 300:
                # series terms are below double precision by here
                status[und] = 1
                und = und[:0]
        acc = status == 1
        out[pending[acc]] = x[acc]
        pending = pending[~acc]
    return out / 4.0


def _tilted_sum_totals(s):
    """Closed forms of sum_k 1/((k-1/2)^2+s) and its squared version,
    with small-s series to avoid 0/0."""
    s = np.asarray(s, float)
    tiny = s < 1e-8
    ss = np.where(tiny, 1.0, s)
    rs = np.sqrt(ss)
    s1 = np.pi / (2.0 * rs) * np.tanh(np.pi * rs)
    sech2 = 1.0 / np.cosh(np.pi * rs) ** 2
    s2 = np.pi / (4.0 * rs**3) * np.tanh(np.pi * rs) - _PI2 / (4.0 * ss) * sech2
    s1 = np.where(tiny, _PI2 / 2.0 - s * _PI4 / 6.0, s1)
    s2 = np.where(tiny, _PI4 / 6.0 - 2.0 * s * _PI6 / 15.0, s2)
    return s1, s2


def _pg_gamma_sum(b, c, rng, terms=200):
    """PG(b, c) for real b > 0 via the weighted infinite sum of gammas,
    truncated at ``terms`` with a moment-matched gamma remainder.

    Work proceeds in fixed-size element blocks: the intermediate
    (terms, block) arrays would otherwise scale with the full request.
    """
    b = np.asarray(b, float)
    c = np.asarray(c, float)
    m = b.size
    if m == 0:
        return np.zeros(0)
    out = np.empty(m)
    k = np.arange(1, terms + 1, dtype=float)
    block = 32768
    for lo in range(0, m, block):
        hi = min(lo + block, m)
        bb = b[lo:hi]
        s = (c[lo:hi] / (2.0 * np.pi)) ** 2
        denom = (k - 0.5)[:, None] ** 2 + s[None, :]
        g = rng.standard_gamma(np.broadcast_to(bb, (terms, hi - lo)))
        core = (g / denom).sum(axis=0) / (2.0 * _PI2)
        s1_tot, s2_tot = _tilted_sum_totals(s)
        tail1 = np.maximum(s1_tot - (1.0 / denom).sum(axis=0), 0.0)
        tail2 = np.maximum(s2_tot - (1.0 / denom**2).sum(axis=0), 0.0)
        mean_r = bb * tail1 / (2.0 * _PI2)
        var_r = bb * tail2 / (4.0 * _PI4)
        rem = np.zeros(hi - lo)
        ok = (mean_r > 0) & (var_r > 0)
        if np.any(ok):
            shape = mean_r[ok] ** 2 / var_r[ok]
            scale = var_r[ok] / mean_r[ok]
            rem[ok] = rng.standard_gamma(shape) * scale
        out[lo:hi] = core + rem
    return out


def polya_gamma(b, c, rng, method="exact"):
    """Draw PG(b, c) elementwise over broadcast ``b`` and ``c``.

    ``method="exact"`` (default): Devroye rejection for each unit of the
    integer part of b, plus the truncated-sum construction for any
    fractional remainder; shapes above 64 come from the truncated-sum
    construction in one shot, since unit repetition costs O(b) per
    element while the series error shrinks as the shape grows.
    ``method="approximate"`` draws every element from a gamma matched to
    the exact mean and variance, the speed valve for large runs.
    """
    if method not in ("exact", "approximate"):
        raise ValueError(f"unknown method {method!r}")
    b_arr, c_arr = np.broadcast_arrays(np.asarray(b, float), np.asarray(c, float))
    shape = b_arr.shape
    bf = b_arr.ravel().copy()
    cf = c_arr.ravel()
    if np.any(bf <= 0):
        raise ValueError("shape parameter b must be positive")

    if method == "approximate":
        mu = pg_mean(bf, cf)
        var = pg_var(bf, cf)
        out = (rng.standard_gamma(mu * mu / var) * (var / mu)).reshape(shape)
        if np.ndim(b) == 0 and np.ndim(c) == 0:
            return float(out)
        return out

    out = np.zeros(bf.size)
    nint = np.floor(bf)
    frac = bf - nint
    # absorb float fuzz on near-integer shapes
    roll = frac > 1.0 - 1e-9
    nint[roll] += 1.0
    frac[roll] = 0.0
    frac[frac < 1e-12] = 0.0

    counts = nint.astype(np.int64)
    big = bf > 64.0
    if np.any(big):
        out[big] = _pg_gamma_sum(bf[big], cf[big], rng)
        counts[big] = 0
        frac[big] = 0.0
    if counts.sum() > 0:
        idx = np.repeat(np.arange(bf.size), counts)
        draws = _jstar_one(cf[idx] / 2.0, rng)
        np.add.at(out, idx, draws)

    fm = frac > 0
    if np.any(fm):
        out[fm] += _pg_gamma_sum(frac[fm], cf[fm], rng)

    out = out.reshape(shape)
    if np.ndim(b) == 0 and np.ndim(c) == 0:
        return float(out)
    return out


def pg_mean(b, c):
    """E[PG(b, c)] = b tanh(c/2) / (2c), continuous at c = 0."""
    b = np.asarray(b, float)
    c = np.asarray(c, float)
    t = np.abs(c) / 2.0
    small = t < 1e-4
    ts = np.where(small, 1.0, t)
    ratio = np.where(small, 1.0 - t * t / 3.0 + 2.0 * t**4 / 15.0,
                     np.tanh(ts) / ts)
    return b / 4.0 * ratio


def pg_var(b, c):
    """Var[PG(b, c)] from the spectral sum, continuous at c = 0."""
    b = np.asarray(b, float)
    c = np.asarray(c, float)
    s = (c / (2.0 * np.pi)) ** 2
    _, s2 = _tilted_sum_totals(s)
    return b / (4.0 * _PI4) * s2


# ---------------------------------------------------------------------------
# One-sided truncated normal
# ---------------------------------------------------------------------------

def truncated_normal(mean, sd, bound, side, rng):
    """Draw N(mean, sd^2) conditioned to one side of ``bound``.

    side="above" keeps x > bound, side="below" keeps x < bound.  Uses
    the inverse CDF for moderate standardized truncation and Robert's
    exponential rejection beyond 5 standard deviations, where inverse
    CDF evaluation runs out of floating-point resolution.
    """
    if side not in ("above", "below"):
        raise ValueError(f"side must be 'above' or 'below', got {side!r}")
    mean_a, sd_a, bound_a = np.broadcast_arrays(
        np.asarray(mean, float), np.asarray(sd, float), np.asarray(bound, float))
    shape = mean_a.shape
    mu = mean_a.ravel()
    sig = sd_a.ravel()
    bd = bound_a.ravel()
    # reduce to standardized lower truncation x > a
    if side == "above":
        a = (bd - mu) / sig
        sign = 1.0
    else:
        a = (mu - bd) / sig
        sign = -1.0
    z = np.empty(a.size)
    easy = a <= 5.0
    if np.any(easy):
        ae = a[easy]
        tail = ndtr(-ae)  # mass above a
        u = rng.random(int(easy.sum()))
        z[easy] = -ndtri(tail * u)
    hard = ~easy
    if np.any(hard):
        ah = a[hard]
        lam = (ah + np.sqrt(ah * ah + 4.0)) / 2.0
        zh = np.empty(ah.size)
        need = np.arange(ah.size)
        while need.size:
            prop = ah[need] + rng.standard_exponential(need.size) / lam[need]
            ok = rng.random(need.size) <= np.exp(-0.5 * (prop - lam[need]) ** 2)
            zh[need[ok]] = prop[ok]
            need = need[~ok]
        z[hard] = zh
    x = mu + sign * sig * z
    if np.ndim(mean) == 0 and np.ndim(sd) == 0 and np.ndim(bound) == 0:
        return float(x[0])
    return x.reshape(shape)


# ---------------------------------------------------------------------------
# Inverse Gaussian
# ---------------------------------------------------------------------------

def inverse_gaussian(mean, shape_lam, rng):
    """Draw InverseGaussian(mean, shape) elementwise.

    Michael-Schucany-Haas transform with the smaller root written in
    rationalized form, which stays accurate when mean/shape is large.
    """
    mean_a, lam_a = np.broadcast_arrays(
        np.asarray(mean, float), np.asarray(shape_lam, float))
    shape = mean_a.shape
    mu = mean_a.ravel()
    lam = lam_a.ravel()
    y = rng.standard_normal(mu.size) ** 2
    w = mu * y
    x1 = mu * (1.0 - 2.0 * w / (w + np.sqrt(w * (4.0 * lam + w))))
    u = rng.random(mu.size)
    x = np.where(u * (mu + x1) <= mu, x1, mu * mu / np.where(x1 > 0, x1, 1.0))
    # w == 0 gives x1 == mu exactly; the where-guard above only dodges 0/0
    x = np.where(x1 > 0, x, mu)
    if np.ndim(mean) == 0 and np.ndim(shape_lam) == 0:
        return float(x[0])
    return x.reshape(shape)


# ---------------------------------------------------------------------------
# Chinese restaurant table counts
# ---------------------------------------------------------------------------

def crt(count, conc, rng):
    """Number of occupied tables after seating ``count`` customers at a
    Chinese restaurant with concentration ``conc``, elementwise.

    Distributed as sum_{i=1}^{count} Bernoulli(conc / (conc + i - 1)).
    """
    count_a, conc_a = np.broadcast_arrays(
        np.asarray(count), np.asarray(conc, float))
    shape = count_a.shape
    m = count_a.ravel().astype(np.int64)
    r = conc_a.ravel()
    if np.any(m < 0):
        raise ValueError("counts must be non-negative")
    out = np.zeros(m.size, np.int64)
    mmax = int(m.max(initial=0))
    # customer index blocks keep the trial matrices bounded even when a
    # stray element carries a very large count
    block = 4096
    for lo in range(0, mmax, block):
        hi = min(lo + block, mmax)
        alive = m > lo
        if not np.any(alive):
            break
        idx = np.flatnonzero(alive)
        i = np.arange(lo, hi, dtype=float)[:, None]
        ra = r[idx][None, :]
        p = ra / (ra + i)
        live = i < m[idx][None, :]
        u = rng.random((hi - lo, idx.size))
        out[idx] += ((u < p) & live).sum(axis=0)
    if np.ndim(count) == 0 and np.ndim(conc) == 0:
        return int(out[0])
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Zero-truncated Poisson
# ---------------------------------------------------------------------------

def truncated_poisson(rate, rng):
    """Poisson(rate) conditioned on being >= 1, elementwise.

    Large rates use straight rejection (acceptance 1 - e^-rate); small
    rates use sequential inversion, which cannot loop forever because
    the truncated pmf decays factorially.
    """
    rate_a = np.asarray(rate, float)
    shape = rate_a.shape
    lam = rate_a.ravel()
    if np.any(lam < 0):
        raise ValueError("rate must be non-negative")
    out = np.zeros(lam.size, np.int64)
    big = lam > 1.0
    if np.any(big):
        idx = np.flatnonzero(big)
        while idx.size:
            draw = rng.poisson(lam[idx])
            ok = draw >= 1
            out[idx[ok]] = draw[ok]
            idx = idx[~ok]
    small = ~big
    if np.any(small):
        ls = lam[small]
        # inversion on P(k | k >= 1); degenerate rates give k = 1
        res = np.ones(ls.size, np.int64)
        wide = ls > 1e-10
        if np.any(wide):
            lw = ls[wide]
            u = rng.random(lw.size)
            norm = -np.expm1(-lw)
            pk = lw * np.exp(-lw) / norm  # P(1 | >= 1)
            cum = pk.copy()
            k = np.ones(lw.size, np.int64)
            und = np.flatnonzero(u > cum)
            while und.size:
                k[und] += 1
                pk[und] *= lw[und] / k[und]
                cum[und] += pk[und]
                und = und[u[und] > cum[und]]
            res[wide] = k
        out[small] = res
    if np.ndim(rate) == 0:
        return int(out[0])
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Gaussian draw parameterized by precision
# ---------------------------------------------------------------------------

def mvn_draw(prec, lin, rng):
    """Draw from N(prec^-1 lin, prec^-1) given precision matrix ``prec``
    and linear term ``lin``.

    One jitter retry (1e-10 of the mean diagonal) is attempted if the
    Cholesky factorization fails; a second failure raises NumericError
    rather than silently regularizing further.
    """
    prec = np.asarray(prec, float)
    lin = np.asarray(lin, float)
    d = lin.size
    try:
        low = np.linalg.cholesky(prec)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * float(np.mean(np.diag(prec)))
        try:
            low = np.linalg.cholesky(prec + jitter * np.eye(d))
        except np.linalg.LinAlgError as exc:
            raise NumericError(
                "precision matrix not positive definite after jitter retry"
            ) from exc
    half = solve_triangular(low, lin, lower=True)
    mu = solve_triangular(low.T, half, lower=False)
    z = rng.standard_normal(d)
    return mu + solve_triangular(low.T, z, lower=False)
