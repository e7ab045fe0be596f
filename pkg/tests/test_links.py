import numpy as np
import pytest
from scipy import special, stats

from stickreg.links import (LogisticLink, PriorSpec, RobitLink, SvmLink,
                            logistic_pi, robit_pi, student_t_cdf, svm_pi)
from stickreg.rng import RngStream


class TestLogisticCurve:
    def test_matches_expit(self):
        # compare where the 1e-12 tail clamp cannot bind
        eta = np.linspace(-25, 25, 401)
        np.testing.assert_allclose(logistic_pi(eta), special.expit(eta),
                                   rtol=0, atol=1e-15)

    def test_extreme_arguments_clamped(self):
        p = logistic_pi(np.array([-1e4, 1e4]))
        assert p[0] >= 1e-12
        assert p[1] <= 1 - 1e-12
        assert np.isfinite(p).all()


class TestStudentTCurve:
    def test_matches_reference_cdf(self):
        t = np.linspace(-30, 30, 301)
        for dof in (0.5, 1.0, 2.0, 6.0, 30.0):
            np.testing.assert_allclose(student_t_cdf(t, dof),
                                       special.stdtr(dof, t),
                                       rtol=0, atol=1e-12)

    def test_cauchy_closed_form(self):
        # dof 1 is arctan; at t=1 the value is exactly 3/4
        np.testing.assert_allclose(student_t_cdf(np.array([1.0]), 1.0),
                                   [0.75], atol=1e-12)

    def test_robit_symmetry(self):
        eta = np.linspace(-8, 8, 81)
        p = robit_pi(eta, 4.0)
        np.testing.assert_allclose(p + robit_pi(-eta, 4.0), 1.0, atol=1e-12)


class TestSvmCurve:
    def test_piecewise_formula(self):
        # inside the margin the slope doubles: sigma(2 eta) vs sigma(eta - 1)
        inside = np.array([-0.99, -0.3, 0.0, 0.4, 0.99])
        np.testing.assert_allclose(svm_pi(inside), special.expit(2 * inside),
                                   atol=1e-14)
        outside = np.array([-5.0, -1.5, 1.5, 5.0])
        expect = special.expit(outside + np.sign(outside))
        np.testing.assert_allclose(svm_pi(outside), expect, atol=1e-14)

    def test_continuous_at_margin(self):
        for edge in (-1.0, 1.0):
            lo = svm_pi(np.array([edge - 1e-13]))
            hi = svm_pi(np.array([edge + 1e-13]))
            assert abs(hi[0] - lo[0]) < 1e-12

    def test_monotone(self):
        eta = np.linspace(-6, 6, 600)
        assert (np.diff(svm_pi(eta)) > 0).all()


class TestPriorSpec:
    def test_fixed_mode_constant(self):
        spec = PriorSpec(mode="fixed", fixed_precision=2.5)
        np.testing.assert_allclose(spec.initial(4), 2.5)
        rng = RngStream(0, (1,)).generator
        alpha = spec.initial(4)
        out = spec.resample(alpha, np.ones(4), rng)
        np.testing.assert_allclose(out, 2.5)

    def test_gamma_mode_posterior_moments(self):
        # alpha | beta ~ Gamma(shape + 1/2, rate + beta^2/2) per coefficient
        spec = PriorSpec(shape=2.0, rate=3.0)
        beta = np.array([2.0])
        rng = RngStream(1, (2,)).generator
        draws = np.array([spec.resample(np.ones(1), beta, rng)[0]
                          for _ in range(40000)])
        a, b = 2.5, 5.0
        se = np.sqrt(a / b**2 / draws.size)
        assert abs(draws.mean() - a / b) < 4 * se


class TestLogisticLink:
    def test_posterior_slope_sign(self):
        rng = np.random.default_rng(0)
        n = 200
        X = np.column_stack([np.ones(n), rng.normal(size=n)])
        b = (rng.random(n) < special.expit(2.0 * X[:, 1])).astype(float)
        link = LogisticLink(2)
        stream = RngStream(3, (0,)).generator
        slopes = []
        for sweep in range(400):
            link.update(X, b, stream)
            if sweep >= 200:
                slopes.append(link.beta[1])
        assert np.mean(slopes) > 0.5

    def test_empty_update_draws_from_prior(self):
        link = LogisticLink(3, prior=PriorSpec(mode="fixed",
                                               fixed_precision=4.0))
        stream = RngStream(5, (0,)).generator
        draws = []
        for _ in range(4000):
            link.update(np.zeros((0, 3)), np.zeros(0), stream)
            draws.append(link.beta.copy())
        draws = np.array(draws)
        # N(0, 1/4) coordinates
        assert abs(draws.mean()) < 4 * 0.5 / np.sqrt(draws.size)
        np.testing.assert_allclose(draws.var(), 0.25, rtol=0.1)

    def test_update_deterministic_in_stream(self):
        X = np.column_stack([np.ones(30), np.linspace(-1, 1, 30)])
        b = (X[:, 1] > 0).astype(float)
        out = []
        for _ in range(2):
            link = LogisticLink(2)
            stream = RngStream(9, (4,)).generator
            for _ in range(20):
                link.update(X, b, stream)
            out.append(link.beta.copy())
        np.testing.assert_array_equal(out[0], out[1])


class TestRobitLink:
    def test_posterior_slope_sign(self):
        rng = np.random.default_rng(2)
        n = 150
        X = np.column_stack([np.ones(n), rng.normal(size=n)])
        b = (rng.random(n) < robit_pi(1.5 * X[:, 1], 6.0)).astype(float)
        link = RobitLink(2, n, dof=6.0)
        stream = RngStream(4, (0,)).generator
        slopes = []
        for sweep in range(400):
            link.update(X, b, stream)
            if sweep >= 200:
                slopes.append(link.beta[1])
        assert np.mean(slopes) > 0.4

    def test_latent_signs_respect_outcomes(self):
        rng = np.random.default_rng(3)
        n = 60
        X = np.column_stack([np.ones(n), rng.normal(size=n)])
        b = rng.integers(0, 2, n).astype(float)
        link = RobitLink(2, n, dof=1.0)
        stream = RngStream(6, (0,)).generator
        link.update(X, b, stream)
        assert ((link.u > 0) == (b > 0.5)).all()

    def test_adapts_to_new_row_count(self):
        link = RobitLink(2, 10, dof=2.0)
        X = np.column_stack([np.ones(25), np.linspace(-1, 1, 25)])
        b = (X[:, 1] > 0).astype(float)
        link.update(X, b, RngStream(7, (0,)).generator)
        assert link.lam.size == 25

    def test_snapshot_restore_round_trip(self):
        link = RobitLink(3, 5, dof=2.0)
        link.beta = np.array([0.3, -0.2, 1.0])
        snap = link.snapshot()
        other = RobitLink(3, 5, dof=2.0)
        other.restore(snap)
        np.testing.assert_array_equal(other.beta, link.beta)
        x = np.array([[1.0, 0.5, -0.5]])
        np.testing.assert_array_equal(other.pi(x), link.pi(x))


class TestSvmLink:
    def _xor_data(self, n=120, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-1, 1, size=(n, 2))
        b = ((X[:, 0] * X[:, 1]) > 0).astype(float)
        return X, b

    def test_intercept_always_included(self):
        rng = np.random.default_rng(1)
        n = 80
        X = np.column_stack([np.ones(n), rng.normal(size=(n, 4))])
        b = rng.integers(0, 2, n).astype(float)
        link = SvmLink(5)
        stream = RngStream(8, (0,)).generator
        for _ in range(50):
            link.update(X, b, stream)
            assert link.included[0]

    def test_prunes_null_covariates(self):
        # 8 pure-noise columns next to one informative column
        rng = np.random.default_rng(4)
        n = 250
        signal = rng.normal(size=n)
        X = np.column_stack([np.ones(n), signal, rng.normal(size=(n, 8))])
        b = (signal > 0).astype(float)
        link = SvmLink(10)
        stream = RngStream(11, (0,)).generator
        keep_signal = 0
        keep_noise = 0
        for sweep in range(300):
            link.update(X, b, stream)
            if sweep >= 100:
                keep_signal += int(link.included[1])
                keep_noise += int(link.included[2:].sum())
        assert keep_signal / 200 > 0.95
        assert keep_noise / (200 * 8) < 0.5

    def test_excluded_coefficients_are_zero(self):
        rng = np.random.default_rng(5)
        n = 60
        X = np.column_stack([np.ones(n), rng.normal(size=(n, 3))])
        b = rng.integers(0, 2, n).astype(float)
        link = SvmLink(4)
        stream = RngStream(12, (0,)).generator
        for _ in range(30):
            link.update(X, b, stream)
            assert (link.beta[~link.included] == 0).all()

    def test_restore_recovers_inclusion(self):
        link = SvmLink(4)
        link.beta = np.array([0.5, 0.0, -1.2, 0.0])
        link.included = link.beta != 0
        snap = link.snapshot()
        other = SvmLink(4)
        other.restore(snap)
        np.testing.assert_array_equal(other.included,
                                      [True, False, True, False])


class TestClampedProbabilities:
    @pytest.mark.parametrize("fn", [
        lambda eta: logistic_pi(eta),
        lambda eta: robit_pi(eta, 1.0),
        lambda eta: svm_pi(eta),
    ])
    def test_stays_inside_open_interval(self, fn):
        eta = np.array([-1e6, -50.0, 0.0, 50.0, 1e6])
        p = fn(eta)
        assert (p >= 1e-12).all()
        assert (p <= 1 - 1e-12).all()
