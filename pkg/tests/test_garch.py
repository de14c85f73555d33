import numpy as np
import pytest

from synthvol import (
    CovariateModel,
    GarchParams,
    InsufficientHistory,
    InvalidShockWindow,
    NonpositiveVariance,
    NonstationaryParams,
    ShockSpec,
    ValidationError,
    forecast,
    simulate_path,
    unconditional_variance,
    variance_step,
)
from synthvol.garch import filter_variance

P = GarchParams(0.2, [0.1], [0.82])


class TestVarianceStep:
    def test_hand_arithmetic(self):
        assert variance_step(P, [1.0], [1.0]) == pytest.approx(1.12, abs=1e-12)

    def test_zero_feedback(self):
        p = GarchParams(0.2, [0.0], [0.0])
        assert variance_step(p, [3.7], [9.1]) == pytest.approx(0.2, abs=1e-15)

    def test_additive_shock(self):
        assert variance_step(P, [1.0], [1.0], omega_star_t=3.0) == pytest.approx(4.12)

    def test_covariate_term(self):
        p = GarchParams(0.2, [0.1], [0.82], gamma=[0.5, -0.25])
        got = variance_step(p, [1.0], [1.0], v_t=[2.0, 4.0])
        assert got == pytest.approx(1.12 + 1.0 - 1.0)

    def test_nonpositive_raises(self):
        with pytest.raises(NonpositiveVariance):
            variance_step(P, [0.0], [0.01], omega_star_t=-1.0)

    def test_lag_length_checked(self):
        with pytest.raises(ValidationError):
            variance_step(P, [1.0, 1.0], [1.0])


class TestUnconditionalVariance:
    def test_hand_arithmetic(self):
        assert unconditional_variance(P) == pytest.approx(2.5, rel=1e-12)

    def test_white_noise(self):
        assert unconditional_variance(GarchParams(1.0, [0.0], [0.0])) == 1.0

    def test_boundary_nonstationary(self):
        with pytest.raises(NonstationaryParams):
            unconditional_variance(GarchParams(0.2, [0.5], [0.5]))


class TestSimulatePath:
    def test_no_shock_zero_omega_star(self):
        path = simulate_path(P, None, 500, seed=0)
        assert np.all(path.omega_star_path == 0.0)
        assert np.all(path.sigma2 > 0)

    def test_deterministic_shock_values(self):
        shock = ShockSpec(t_star=100, len_vol=3, mu_omega_star=4.5)
        path = simulate_path(P, shock, 200, seed=0)
        window = np.arange(100, 103)
        assert np.all(path.omega_star_path[window] == 4.5)
        mask = np.ones(200, bool)
        mask[window] = False
        assert np.all(path.omega_star_path[mask] == 0.0)

    def test_long_run_mean_matches_unconditional(self):
        path = simulate_path(P, None, 1_000_000, seed=7)
        assert abs(path.sigma2.mean() - 2.5) / 2.5 < 0.02

    def test_zero_delta_equals_empty_delta(self):
        cm = CovariateModel(3, 0.5, 0.25)
        a = ShockSpec(t_star=400, len_vol=2, mu_omega_star=1.0, delta=np.zeros(3))
        b = ShockSpec(t_star=400, len_vol=2, mu_omega_star=1.0)
        pa = simulate_path(P, a, 500, cm, seed=5)
        pb = simulate_path(P, b, 500, cm, seed=5)
        assert np.array_equal(pa.returns, pb.returns)
        assert np.array_equal(pa.sigma2, pb.sigma2)
        assert np.array_equal(pa.omega_star_path, pb.omega_star_path)

    def test_shock_free_equals_zero_shock(self):
        # A zero-mean, zero-noise shock spec leaves the path identical to no shock.
        spec = ShockSpec(t_star=300, len_vol=1, mu_omega_star=0.0, sigma_u=0.0)
        pa = simulate_path(P, spec, 400, seed=9)
        pb = simulate_path(P, None, 400, seed=9)
        assert np.array_equal(pa.returns, pb.returns)

    def test_level_shock_replaces_innovation(self):
        spec = ShockSpec(
            t_star=200, len_vol=1, len_return=2, mu_eps_star=3.0, sigma_eps_star=0.0
        )
        path = simulate_path(P, spec, 300, seed=2)
        ratio = path.returns[200:202] / np.sqrt(path.sigma2[200:202])
        np.testing.assert_allclose(ratio, 3.0, rtol=1e-12)

    def test_window_outside_series(self):
        with pytest.raises(InvalidShockWindow):
            simulate_path(P, ShockSpec(t_star=95, len_vol=10), 100, seed=0)

    def test_nonstationary_rejected(self):
        with pytest.raises(NonstationaryParams):
            simulate_path(GarchParams(0.2, [0.6], [0.5]), None, 100, seed=0)

    def test_gamma_requires_covariates(self):
        p = GarchParams(0.2, [0.1], [0.82], gamma=[0.1])
        with pytest.raises(ValidationError):
            simulate_path(p, None, 100, seed=0)


class TestFilterVariance:
    def test_reproduces_simulation_exactly(self):
        path = simulate_path(P, None, 800, seed=3)
        s2 = filter_variance(P, path.returns)
        np.testing.assert_array_equal(s2, path.sigma2)

    def test_shock_dummy_matches_simulated_shock(self):
        spec = ShockSpec(t_star=500, len_vol=2, mu_omega_star=3.0)
        path = simulate_path(P, spec, 700, seed=4)
        s2 = filter_variance(P, path.returns, omega_star=3.0, window=spec.vol_window)
        np.testing.assert_allclose(s2, path.sigma2, rtol=1e-12)

    def test_higher_orders(self):
        p22 = GarchParams(0.1, [0.05, 0.03], [0.5, 0.2])
        path = simulate_path(p22, None, 600, seed=8)
        s2 = filter_variance(p22, path.returns)
        np.testing.assert_allclose(s2, path.sigma2, rtol=1e-10)


class TestForecast:
    def test_one_step_formula(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal(10)
        s2 = np.abs(rng.standard_normal(10)) + 0.5
        got = forecast(P, a, s2, 1)[0]
        want = 0.2 + 0.1 * a[-1] ** 2 + 0.82 * s2[-1]
        assert got == pytest.approx(want, abs=1e-15)

    def test_one_step_with_covariates(self):
        p = GarchParams(0.2, [0.1], [0.82], gamma=[0.3])
        got = forecast(p, [1.0], [1.0], 1, v_t=[2.0])[0]
        assert got == pytest.approx(1.12 + 0.6, abs=1e-14)

    def test_recursion_identity(self):
        f = forecast(P, [1.4], [2.0], 8)
        for k in range(7):
            assert f[k + 1] == pytest.approx(0.2 + 0.92 * f[k], abs=1e-12)

    def test_additive_correction_definition(self):
        base = forecast(P, [1.0], [1.0], 1)[0]
        adj = forecast(P, [1.0], [1.0], 1, adjustment=0.7, adjustment_length=1)[0]
        assert adj == pytest.approx(base + 0.7, abs=1e-14)

    def test_zero_adjustment_is_bitwise_unadjusted(self):
        a = forecast(P, [1.3], [0.9], 5)
        b = forecast(P, [1.3], [0.9], 5, adjustment=0.0, adjustment_length=1)
        assert np.array_equal(a, b)

    def test_adjustment_shifts_intercept_then_releases(self):
        f = forecast(P, [1.0], [1.0], 4, adjustment=2.0, adjustment_length=2)
        assert f[0] == pytest.approx(1.12 + 2.0)
        assert f[1] == pytest.approx(0.2 + 2.0 + 0.92 * f[0])
        assert f[2] == pytest.approx(0.2 + 0.92 * f[1])

    def test_monotone_convergence_to_unconditional(self):
        for a0, s0 in [(0.1, 0.1), (4.0, 6.0), (0.0, 2.5)]:
            f = forecast(P, [a0], [s0], 400)
            gaps = np.abs(f - 2.5)
            assert np.all(np.diff(gaps) <= 1e-12)
            assert gaps[-1] < 1e-8
        p22 = GarchParams(0.1, [0.05, 0.03], [0.5, 0.2])
        f = forecast(p22, [1.0, 2.0], [1.0, 2.0], 300)
        assert f[-1] == pytest.approx(unconditional_variance(p22), rel=1e-8)

    def test_positivity_and_clamp_warning(self):
        with pytest.warns(RuntimeWarning):
            f = forecast(P, [1.0], [1.0], 2, adjustment=-50.0, adjustment_length=1)
        assert np.all(f > 0)

    def test_insufficient_history(self):
        with pytest.raises(InsufficientHistory):
            forecast(P, [], [1.0], 1)

    def test_adjustment_length_bounds(self):
        with pytest.raises(ValidationError):
            forecast(P, [1.0], [1.0], 1, adjustment=1.0, adjustment_length=2)


def test_params_invariants_enforced():
    with pytest.raises(ValidationError):
        GarchParams(0.0, [0.1], [0.8])
    with pytest.raises(ValidationError):
        GarchParams(0.2, [-0.1], [0.8])
    with pytest.raises(ValidationError):
        ShockSpec(t_star=0)
