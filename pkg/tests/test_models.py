"""Cycle distribution families: moments, quantile hooks, parameter guards."""
import numpy as np
import pytest
from scipy import stats

from regenlab.greeks import DegenerateTauError, GreeksUnavailableError
from regenlab.models import (CompoundJumpModel, GammaGaussianModel,
                             IidSumModel, InvalidParameterError,
                             MM1BusyCycleModel, ModeUnsupportedHookError,
                             ParetoCycleModel, eta_moment, reference_greeks,
                             true_greeks)
from regenlab.rng import RngStream


def _batch(model, n, seed=0, index=50):
    return model.sample_cycles(n, RngStream(seed, index))


class TestIidSums:
    def test_durations_constant(self):
        model = IidSumModel(xi_mean=np.array([0.5]), xi_cov=np.array([[2.0]]),
                            tau_const=1.5, dim=1)
        batch = _batch(model, 100)
        np.testing.assert_array_equal(batch.tau, np.full(100, 1.5))

    def test_true_greeks_degenerate(self):
        model = IidSumModel(xi_mean=np.array([0.0]), xi_cov=np.array([[1.0]]))
        with pytest.raises(DegenerateTauError):
            true_greeks(model, 3.0)

    def test_no_coupling_modes(self):
        model = IidSumModel(xi_mean=np.array([0.0]), xi_cov=np.array([[1.0]]))
        assert model.coupling_modes == ()
        with pytest.raises(ModeUnsupportedHookError):
            model.tau_from_gaussian(np.zeros(3))

    def test_sample_mean_and_cov(self):
        mean = np.array([1.0, -2.0])
        cov = np.array([[2.0, 0.5], [0.5, 1.0]])
        model = IidSumModel(xi_mean=mean, xi_cov=cov, tau_const=1.0, dim=2)
        batch = _batch(model, 200_000)
        np.testing.assert_allclose(batch.xi.mean(axis=0), mean, atol=0.02)
        np.testing.assert_allclose(np.cov(batch.xi.T, bias=True), cov,
                                   atol=0.03)


class TestGammaGaussian:
    def test_true_vs_estimated(self, gg2_model):
        from regenlab.greeks import estimate_greeks
        exact = true_greeks(gg2_model, 3.0)
        batch = _batch(gg2_model, 200_000)
        est = estimate_greeks(batch, 3.0)
        np.testing.assert_allclose(est.mu, exact.mu, rtol=0.02)
        np.testing.assert_allclose(est.kappa, exact.kappa, atol=0.02)
        np.testing.assert_allclose(est.beta, exact.beta, atol=0.03)
        np.testing.assert_allclose(est.sigma2, exact.sigma2, atol=0.05)

    def test_duration_quantile_matches_scipy(self, gg1_model):
        # dual route: model's Gaussian-to-duration map vs scipy's gamma ppf
        g = np.linspace(-3.0, 3.0, 25)
        ours = gg1_model.tau_from_gaussian(g)
        oracle = stats.gamma.ppf(stats.norm.cdf(g), a=gg1_model.tau_shape,
                                 scale=gg1_model.tau_scale)
        np.testing.assert_allclose(ours, oracle, rtol=1e-10)

    def test_increments_regression_structure(self, gg1_model):
        batch = _batch(gg1_model, 100_000)
        slope = np.cov(batch.xi[:, 0], batch.tau)[0, 1] / np.var(batch.tau)
        assert slope == pytest.approx(float(gg1_model.beta[0]), abs=0.03)

    def test_parameter_guards(self):
        with pytest.raises(InvalidParameterError):
            GammaGaussianModel(tau_shape=2.0, tau_scale=1.0, dim=0)
        with pytest.raises(InvalidParameterError):
            GammaGaussianModel(tau_shape=2.0, tau_scale=1.0,
                               noise_cov=np.eye(3), dim=2)
        with pytest.raises(InvalidParameterError):
            GammaGaussianModel(tau_shape=-1.0, tau_scale=1.0, dim=1)


class TestParetoCycle:
    def test_tail_probability(self):
        model = ParetoCycleModel(tail_index=3.5)
        batch = _batch(model, 200_000)
        # P(tau > 1 + x) = x^(-a): at tau > 10 the exact value is 9^(-3.5)
        p_hat = float(np.mean(batch.tau > 10.0))
        exact = 9.0 ** -3.5
        se = np.sqrt(exact * (1 - exact) / 200_000)
        assert abs(p_hat - exact) <= 4 * se

    def test_increment_equals_duration(self):
        model = ParetoCycleModel(tail_index=3.5)
        batch = _batch(model, 1000)
        np.testing.assert_array_equal(batch.xi[:, 0], batch.tau)

    def test_p_max_is_tail_index(self):
        model = ParetoCycleModel(tail_index=3.5)
        assert model.p_max == 3.5
        with pytest.raises(InvalidParameterError):
            model._check_p(4.0)

    def test_tail_index_guard(self):
        with pytest.raises(InvalidParameterError):
            ParetoCycleModel(tail_index=2.0)

    def test_duration_quantile_matches_closed_form(self):
        model = ParetoCycleModel(tail_index=3.5)
        g = np.array([-2.0, -0.5, 0.0, 1.0, 2.5])
        ours = model.tau_from_gaussian(g)
        u = stats.norm.cdf(g)
        oracle = 1.0 + (1.0 - u) ** (-1.0 / 3.5)
        np.testing.assert_allclose(ours, oracle, rtol=1e-10)


class TestMM1BusyCycle:
    def test_cycle_mean(self):
        model = MM1BusyCycleModel(arrival_rate=0.5, service_rate=1.0)
        batch = _batch(model, 200_000)
        # idle mean 1/arrival + busy period mean 1/(service - arrival) = 4
        se = batch.tau.std() / np.sqrt(batch.tau.size)
        assert abs(batch.tau.mean() - 4.0) <= 4 * se

    def test_increment_counts_departures(self):
        model = MM1BusyCycleModel(arrival_rate=0.5, service_rate=1.0)
        batch = _batch(model, 5000)
        assert np.all(batch.xi[:, 0] >= 1)
        np.testing.assert_array_equal(batch.xi[:, 0],
                                      np.round(batch.xi[:, 0]))
        # the path only steps upward, so the cycle maximum is the increment
        np.testing.assert_array_equal(batch.eta, batch.xi[:, 0])

    def test_true_greeks_unavailable(self):
        model = MM1BusyCycleModel(arrival_rate=0.5, service_rate=1.0)
        with pytest.raises(GreeksUnavailableError):
            true_greeks(model, 3.0)

    def test_reference_greeks_oracle(self):
        model = MM1BusyCycleModel(arrival_rate=0.5, service_rate=1.0)
        g = reference_greeks(model, 3.0)
        # long-run departure rate must equal the arrival rate
        assert float(g.kappa[0]) == pytest.approx(0.5, abs=0.01)

    def test_stability_guard(self):
        with pytest.raises(InvalidParameterError):
            MM1BusyCycleModel(arrival_rate=1.0, service_rate=1.0)

    def test_intra_cycle_trajectory(self):
        model = MM1BusyCycleModel(arrival_rate=0.5, service_rate=1.0)
        path = model.sample_path(200, RngStream(0, 51))
        assert path.event_times.size > path.n_cycles  # busy periods add events


class TestCompoundJump:
    def test_true_vs_estimated(self):
        model = CompoundJumpModel(cycle_rate=1.0, jump_rate=2.0,
                                  jump_mean=np.array([0.5]),
                                  jump_cov=np.array([[1.5]]), dim=1)
        from regenlab.greeks import estimate_greeks
        exact = true_greeks(model, 3.0)
        est = estimate_greeks(_batch(model, 200_000), 3.0)
        np.testing.assert_allclose(est.mu, exact.mu, rtol=0.02)
        np.testing.assert_allclose(est.kappa, exact.kappa, rtol=0.05)
        np.testing.assert_allclose(est.var_xi, exact.var_xi, rtol=0.1)

    def test_drift_is_jump_rate_times_jump_mean(self):
        model = CompoundJumpModel(cycle_rate=1.0, jump_rate=2.0,
                                  jump_mean=np.array([0.5]),
                                  jump_cov=np.array([[1.0]]), dim=1)
        g = true_greeks(model, 3.0)
        np.testing.assert_allclose(g.kappa, [1.0])

    def test_dim_guard(self):
        with pytest.raises(InvalidParameterError):
            CompoundJumpModel(dim=4)


class TestEtaMoment:
    def test_reproducible(self, gg1_model):
        a = eta_moment(gg1_model, 3.0, n=20_000)
        b = eta_moment(gg1_model, 3.0, n=20_000)
        assert a == b
        assert np.isfinite(a) and a > 0

    def test_single_event_family_matches_increment_moment(self, gg1_model):
        batch = _batch(gg1_model, 200_000)
        direct = float(np.mean(np.abs(batch.xi[:, 0]) ** 3))
        via_eta = eta_moment(gg1_model, 3.0, n=200_000)
        assert via_eta == pytest.approx(direct, rel=0.1)
