"""Multilayer softplus-regression mixture as a stick classifier.

The success probability is pi(x) = 1 - exp(-lambda(x)) with

    lambda(x) = sum_k r_k * stack_softplus(x b_k1, ..., x b_kT)

where stack_softplus nests ln(1 + e^x ...) T layers deep.  Each of the
K experts carries a chain of gamma-distributed layer activations; a
latent count m_ik ~ Poisson(innermost activation) per observation and
expert turns the Bernoulli outcome into b = 1(sum_k m_ik >= 1).  With
one expert, one layer and unit weight the curve collapses to the
logistic.

The Gibbs sweep is partially collapsed.  Counts are thinned to experts;
an upward pass then walks the layers, seating Chinese-restaurant table
counts under the next layer's shape and drawing each hyperplane by
Polya-Gamma augmentation of the negative-binomial form, with that
layer's activation integrated out.  Seating counts depend only on the
shape, never the scale, which is what lets the coefficient draw
condition on them while the activation is collapsed.  Top-level weights
are conjugate gamma, and a downward pass reinstates the activation
chain.  Activations dropped mid-sweep are always redrawn before
anything conditions on them again.
"""

from __future__ import annotations

import numpy as np

from .links import PriorSpec, _clamp
from .samplers import crt, mvn_draw, polya_gamma, truncated_poisson

_FLOOR = 1e-300
# Activation ceiling: beyond it the outcome law is saturated at 1 to
# double precision, so capping cannot change any likelihood value; it
# only stops transient gamma draws with near-zero rate from running to
# infinity and dragging the latent counts with them.
_CEIL = 1e4
# Coefficient cap: an expert holding no counts sees a flat likelihood,
# and its coefficient-precision pair then random-walks the heavy joint
# prior tail out to astronomical magnitudes, which poisons the weight
# rate sum_i q and blocks the expert from ever re-entering.  Outcomes
# only see coefficients through x'beta, which saturates far inside the
# cap, so clipping binds only where the likelihood is flat.
_BMAX = 1e3


def _softplus(w):
    w = np.asarray(w, float)
    out = np.where(w > 30.0, w, np.log1p(np.exp(np.minimum(w, 30.0))))
    return np.maximum(out, _FLOOR)


def stack_softplus(args):
    """Nested softplus ln(1 + e^{x_T} ln(1 + ... ln(1 + e^{x_1})))
    evaluated innermost-first over the leading axis of ``args``."""
    args = np.asarray(args, float)
    q = np.ones(args.shape[1:])
    for layer in args:
        q = _softplus(layer + np.log(q))
    return q


def _mvn_draw_stack(precs, lins, rng):
    """One normal draw per (precision, linear-term) pair in a stack of
    small systems, batched through stacked Cholesky factors.  Any
    factorization or solve failure in the stack drops the whole batch
    to the scalar path, which jitters near-singular systems."""
    try:
        chol = np.linalg.cholesky(precs)
        mean = np.linalg.solve(precs, lins[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.stack([mvn_draw(precs[i], lins[i], rng)
                         for i in range(precs.shape[0])])
    z = rng.standard_normal(lins.shape)
    noise = np.linalg.solve(np.swapaxes(chol, -1, -2), z[..., None])[..., 0]
    return mean + noise


class MsrLink:
    """Softplus mixture stick with K experts of T layers each.

    ``B[k, j]`` is the hyperplane applied at depth j+1 of expert k
    (j = 0 is innermost).  ``r`` holds the expert weights with prior
    Gamma(gamma0/K, 1/c0); ``fix_weights=True`` pins them at 1, which
    the single-expert logistic reduction relies on.
    """

    kind = "msr"

    def __init__(self, ncov: int, nobs: int, n_experts: int = 1,
                 n_layers: int = 1, gamma0: float = 1.0, c0: float = 1.0,
                 prior: PriorSpec | None = None, fix_weights: bool = False,
                 pg_method: str = "exact"):
        if n_experts < 1 or n_layers < 1:
            raise ValueError("need at least one expert and one layer")
        self.K = int(n_experts)
        self.T = int(n_layers)
        self.gamma0 = float(gamma0)
        self.c0 = float(c0)
        self.prior = prior if prior is not None else PriorSpec()
        self.fix_weights = bool(fix_weights)
        self.pg_method = pg_method
        self.B = np.zeros((self.K, self.T, ncov))
        self.alpha = np.tile(self.prior.initial(ncov), (self.K, self.T, 1))
        if fix_weights:
            self.r = np.ones(self.K)
        else:
            self.r = np.full(self.K, self.gamma0 / (self.K * self.c0))
        # theta[t-1] is the layer-t activation chain; counts live at layer 1
        self.theta = np.maximum(
            np.broadcast_to(self.r, (self.T, nobs, self.K)).copy(), _FLOOR)
        self.m1 = np.zeros((nobs, self.K), np.int64)

    # -- probability ------------------------------------------------------

    def _depths(self, X):
        """q_k^(t), t = 0..T: progressive stack-softplus per expert,
        shaped (T+1, N, K)."""
        n = X.shape[0]
        q = np.empty((self.T + 1, n, self.K))
        q[0] = 1.0
        for t in range(1, self.T + 1):
            xb = X @ self.B[:, t - 1, :].T
            q[t] = _softplus(xb + np.log(q[t - 1]))
        return q

    def rate(self, X):
        """lambda(x) = sum_k r_k q_k^(T)."""
        return self._depths(X)[-1] @ self.r

    def pi(self, X):
        return _clamp(-np.expm1(-self.rate(X)))

    # -- Gibbs ------------------------------------------------------------

    def _draw_counts(self, b, rng):
        """m_ik | b_i, theta^(1): zero rows stay zero; positive rows get
        a zero-truncated Poisson total thinned binomially to experts."""
        n = b.size
        K = self.K
        theta1 = self.theta[0]
        m = np.zeros((n, K), np.int64)
        pos = np.asarray(b, bool)
        if not np.any(pos):
            return m
        rates = theta1[pos]
        tot = rates.sum(axis=1)
        total = truncated_poisson(np.maximum(tot, _FLOOR), rng)
        remaining = total.copy()
        rem_rate = tot.copy()
        cols = np.zeros((rates.shape[0], K), np.int64)
        for k in range(K - 1):
            p = np.where(rem_rate > _FLOOR,
                         rates[:, k] / np.maximum(rem_rate, _FLOOR), 0.0)
            draw = rng.binomial(remaining, np.clip(p, 0.0, 1.0))
            cols[:, k] = draw
            remaining -= draw
            rem_rate = np.maximum(rem_rate - rates[:, k], 0.0)
        cols[:, K - 1] = remaining
        m[pos] = cols
        return m

    def update(self, X, b, rng):
        n, _ = X.shape
        if n == 0:
            self._prior_param_draw(rng)
            return
        if self.theta.shape[1] != n:
            self.theta = np.maximum(
                np.broadcast_to(self.r, (self.T, n, self.K)).copy(), _FLOOR)
            self.m1 = np.zeros((n, self.K), np.int64)
        K, T = self.K, self.T

        m = self._draw_counts(np.asarray(b), rng)
        self.m1 = m

        # upward pass; retain the count ladder and the per-depth q's
        # (computed with the refreshed hyperplanes) for the way down
        l_levels = [m]
        q_levels = [np.ones((n, K))]
        lnq_prev = np.zeros((n, K))
        l_prev = m
        for t in range(1, T + 1):
            if t < T:
                shape_a = np.maximum(self.theta[t], _FLOOR)
            else:
                shape_a = np.broadcast_to(self.r, (n, K))
            l_cur = crt(l_prev, shape_a, rng)
            xb = X @ self.B[:, t - 1, :].T
            eta = np.clip(xb + lnq_prev, -500.0, 500.0)
            omega = polya_gamma(l_prev + shape_a, eta, rng,
                                method=self.pg_method)
            kappa = (l_prev - shape_a) / 2.0 - omega * lnq_prev
            precs = np.einsum("nk,np,nq->kpq", omega, X, X)
            diag = np.arange(X.shape[1])
            precs[:, diag, diag] += self.alpha[:, t - 1]
            self.B[:, t - 1] = np.clip(
                _mvn_draw_stack(precs, kappa.T @ X, rng), -_BMAX, _BMAX)
            for k in range(K):
                self.alpha[k, t - 1] = self.prior.resample(
                    self.alpha[k, t - 1], self.B[k, t - 1], rng)
            xb = X @ self.B[:, t - 1, :].T
            q_prev = _softplus(xb + lnq_prev)
            lnq_prev = np.log(q_prev)
            q_levels.append(q_prev)
            l_levels.append(l_cur)
            l_prev = l_cur

        if not self.fix_weights:
            shape = self.gamma0 / K + l_levels[T].sum(axis=0)
            rate = self.c0 + q_levels[T].sum(axis=0)
            self.r = np.maximum(rng.standard_gamma(shape) / rate, _FLOOR)

        # downward pass: reinstate activations top to bottom
        for t in range(T, 0, -1):
            if t == T:
                shape_up = np.broadcast_to(self.r, (n, K))
            else:
                shape_up = self.theta[t]  # fresh draw from this pass
            xb = X @ self.B[:, t - 1, :].T
            rate = np.exp(np.clip(-xb, -700.0, 700.0)) + q_levels[t - 1]
            shape = shape_up + l_levels[t - 1]
            self.theta[t - 1] = np.clip(
                rng.standard_gamma(shape) / rate, _FLOOR, _CEIL)

    def _prior_param_draw(self, rng):
        for k in range(self.K):
            for t in range(self.T):
                self.B[k, t] = np.clip(
                    rng.standard_normal(self.B.shape[2])
                    / np.sqrt(self.alpha[k, t]), -_BMAX, _BMAX)
        if not self.fix_weights:
            self.r = np.maximum(
                rng.standard_gamma(np.full(self.K, self.gamma0 / self.K))
                / self.c0, _FLOOR)

    # -- forward model (used by simulation-based tests and demos) ---------

    def forward_draw(self, X, rng):
        """Draw (parameters, activations, counts, outcomes) from the
        generative model and install them as the current state.  Returns
        the outcome vector b."""
        n = X.shape[0]
        self._prior_param_draw(rng)
        self.theta = np.empty((self.T, n, self.K))
        for t in range(self.T, 0, -1):
            xb = X @ self.B[:, t - 1, :].T
            scale = np.exp(np.clip(xb, -700.0, 700.0))
            if t == self.T:
                shape = np.broadcast_to(self.r, (n, self.K))
            else:
                shape = self.theta[t]
            self.theta[t - 1] = np.clip(
                rng.standard_gamma(np.maximum(shape, _FLOOR)) * scale,
                _FLOOR, _CEIL)
        self.m1 = rng.poisson(self.theta[0])
        return (self.m1.sum(axis=1) >= 1).astype(float)

    def outcome_probability(self):
        """P(b_i = 1 | theta^(1)) = 1 - exp(-sum_k theta1_ik), the
        exact outcome law with counts marginalized."""
        return _clamp(-np.expm1(-self.theta[0].sum(axis=1)))

    def snapshot(self):
        active = np.zeros(self.K)
        active[self.active_experts()] = 1.0
        return {"r": self.r.copy(), "B": self.B.copy(), "active": active}

    def restore(self, snap):
        self.r = np.array(snap["r"], float).ravel()
        self.B = np.array(snap["B"], float).reshape(self.B.shape)

    def active_experts(self):
        """Indices of experts holding at least one latent count."""
        return np.flatnonzero(self.m1.sum(axis=0) > 0)
