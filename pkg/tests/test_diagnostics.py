import numpy as np

from stickreg.diagnostics import (EssReport, effective_sample_size,
                                  error_rate, ess_batch_means, ess_report,
                                  log_pointwise, probability_chains)
from stickreg.model import LinkSpec, McmcConfig, run_mcmc


class TestPointwiseScores:
    def test_log_pointwise_sums_label_probabilities(self):
        probs = np.array([[0.2, 0.8], [0.5, 0.5]])
        labels = np.array([1, 0])
        np.testing.assert_allclose(log_pointwise(probs, labels),
                                   [np.log(0.8), np.log(0.5)], atol=1e-12)

    def test_zero_probability_clipped(self):
        probs = np.array([[0.0, 1.0]])
        val = log_pointwise(probs, np.array([0]))
        assert np.isfinite(val)
        assert val < -600

    def test_error_rate(self):
        probs = np.array([[0.9, 0.1], [0.3, 0.7], [0.6, 0.4]])
        labels = np.array([0, 1, 1])
        np.testing.assert_allclose(error_rate(probs, labels), 1 / 3)


class TestEffectiveSampleSize:
    def test_iid_chain_near_nominal(self):
        rng = np.random.default_rng(31)
        L = 4000
        ratios = [effective_sample_size(rng.normal(size=L)) / L
                  for _ in range(20)]
        assert min(ratios) > 0.85
        assert max(ratios) < 1.15

    def test_ar1_matches_theory(self):
        # ESS for AR(1) with coefficient rho is L*(1-rho)/(1+rho)
        rho = 0.9
        rng = np.random.default_rng(32)
        L = 60000
        eps = rng.normal(size=L)
        x = np.empty(L)
        x[0] = eps[0]
        for t in range(1, L):
            x[t] = rho * x[t - 1] + eps[t]
        expect = L * (1 - rho) / (1 + rho)
        got = effective_sample_size(x)
        assert 0.7 * expect < got < 1.3 * expect

    def test_constant_chain_returns_length(self):
        assert effective_sample_size(np.full(500, 2.5)) == 500

    def test_short_chain_returns_length(self):
        assert effective_sample_size(np.array([1.0, 2.0, 1.5])) == 3

    def test_batch_means_same_order(self):
        rho = 0.9
        rng = np.random.default_rng(33)
        L = 60000
        eps = rng.normal(size=L)
        x = np.empty(L)
        x[0] = eps[0]
        for t in range(1, L):
            x[t] = rho * x[t - 1] + eps[t]
        expect = L * (1 - rho) / (1 + rho)
        got = ess_batch_means(x)
        assert 0.5 * expect < got < 2.0 * expect


class TestChainReports:
    def _store(self):
        rng = np.random.default_rng(34)
        X = np.column_stack([np.ones(60), rng.normal(size=(60, 2))])
        y = np.digitize(X[:, 1], [-0.5, 0.5])
        cfg = McmcConfig(iters=60, burn_in=20, thin=1, seed=35)
        _, store = run_mcmc(X, y, 3, LinkSpec(kind="logistic"), cfg)
        return store, X

    def test_probability_chain_shape(self):
        store, X = self._store()
        chains = probability_chains(store, X)
        assert chains.shape == (store.n_samples, X.shape[0], 3)
        np.testing.assert_allclose(chains.sum(axis=2), 1.0, atol=1e-9)

    def test_report_quantiles_ordered(self):
        store, X = self._store()
        rep = ess_report(store, X)
        assert isinstance(rep, EssReport)
        assert rep.chain_length == store.n_samples
        assert rep.q10 <= rep.q50 <= rep.q90
        assert rep.ess.size == X.shape[0] * 3
        assert np.all(rep.ess <= store.n_samples + 1e-9)

    def test_summary_row_fields(self):
        store, X = self._store()
        row = ess_report(store, X).summary_row()
        assert isinstance(row, dict)
        for key in ("q10", "q50", "q90"):
            assert key in row
