import numpy as np
import pytest

from synthvol import (
    Donor,
    FitResult,
    GarchParams,
    MultiverseConfig,
    TargetSeries,
    ValidationError,
    enumerate_configs,
    run_forecast_pipeline,
    run_multiverse,
    simulate_path,
)
from synthvol.evaluation import ape_loss, mse_loss, ql_loss
from synthvol.multiverse import MEAN_LABEL, MEDIAN_LABEL, UNADJUSTED_LABEL, write_multiverse_csv

P = GarchParams(0.2, [0.1], [0.82])


def preset_fit(effect):
    return FitResult(P, float(effect), -1.0, True, 0, None, 0.0)


def fixed_effect_bundle():
    """Handcrafted bundle with pre-fitted donors and a known geometry.

    Donor 'mid' sits exactly at the event mean, so it standardizes to the
    zero vector and draws no weight; covariate c4 is constant across all
    events, so it standardizes to an all-zero row.
    """
    a = np.array([2.0, -1.0, 0.5, 7.0])
    b = np.array([-1.0, 2.0, 0.3, 7.0])
    c = np.array([1.5, 1.8, -0.9, 7.0])
    e = np.array([0.3, 0.4, 1.4, 7.0])
    target_vec = 0.4 * a + 0.35 * b + 0.25 * c
    target_vec[3] = 7.0
    mid = (target_vec + a + b + c + e) / 5.0
    names = ("c1", "c2", "c3", "c4")

    path = simulate_path(P, None, 1000, seed=99)
    target = TargetSeries("study", path.returns, target_vec, 800)
    vectors = {"a": a, "b": b, "c": c, "e": e, "mid": mid}
    effects = {"a": 1.0, "b": 2.0, "c": 3.0, "e": 4.0, "mid": 5.0}
    donors = tuple(
        Donor(name, path.returns, vec, 800, fit=preset_fit(effects[name]))
        for name, vec in vectors.items()
    )
    return target, donors, names


@pytest.fixture(scope="module")
def mv_result_and_config():
    target, donors, names = fixed_effect_bundle()
    config = MultiverseConfig(
        donors=donors, covariates=names, target=target, ground_truth=3.0
    )
    return run_multiverse(config), config


class TestEnumerate:
    def test_fifty_configurations(self):
        target, donors, _ = fixed_effect_bundle()
        names9 = tuple(f"k{i}" for i in range(9))
        donors4 = donors[:4]
        cfg = MultiverseConfig(
            donors=donors4, covariates=names9, target=target, ground_truth=1.0
        )
        configs = enumerate_configs(cfg)
        assert len(configs) == 50
        assert configs[0] == (None, None)
        assert len(set(configs)) == 50

    def test_minimal_case_counts(self):
        target, donors, names = fixed_effect_bundle()
        cfg = MultiverseConfig(
            donors=donors[:2], covariates=names[:2], target=target, ground_truth=1.0
        )
        assert len(enumerate_configs(cfg)) == 9

    def test_requires_two_donors_and_covariates(self):
        target, donors, names = fixed_effect_bundle()
        with pytest.raises(ValidationError):
            MultiverseConfig(
                donors=donors[:1], covariates=names, target=target, ground_truth=1.0
            )


class TestRunMultiverse:
    def test_row_count(self, mv_result_and_config):
        result, config = mv_result_and_config
        n_d, n_c = len(config.donors), len(config.covariates)
        assert len(result.rows) == (n_d + 1) * (n_c + 1) + 3
        assert not result.infeasible

    def test_baseline_matches_pipeline_bitwise(self, mv_result_and_config):
        result, config = mv_result_and_config
        report = run_forecast_pipeline(
            config.target,
            config.donors,
            config.covariates,
            ground_truth=config.ground_truth,
        )
        base = [
            r
            for r in result.rows
            if r.kind == "config" and r.omitted_covariate is None and r.omitted_donor is None
        ]
        assert len(base) == 1
        assert base[0].adjusted_forecast == float(report.adjusted[0])
        assert base[0].omega_star_hat == report.omega_star

    def test_inactive_elements_leave_forecast_unchanged(self, mv_result_and_config):
        result, _ = mv_result_and_config
        rows = {
            (r.omitted_covariate, r.omitted_donor): r
            for r in result.rows
            if r.kind == "config"
        }
        base = rows[(None, None)]
        # donor 'mid' carries zero weight; covariate c4 standardizes to zeros
        assert abs(rows[(None, "mid")].adjusted_forecast - base.adjusted_forecast) < 1e-9
        assert abs(rows[("c4", None)].adjusted_forecast - base.adjusted_forecast) < 1e-9
        assert abs(rows[("c4", "mid")].adjusted_forecast - base.adjusted_forecast) < 1e-9

    def test_outlier_donor_shifts_weights_when_dropped(self):
        # Needs an inexact fit: an exact convex identity survives any
        # per-row rescaling, so the target must sit outside the hull for
        # the recomputed z-scores to move the weights.
        _, donors, names = fixed_effect_bundle()
        target = TargetSeries(
            "study", donors[0].returns, np.array([3.5, -2.0, 2.2, 7.0]), 800
        )
        outlier_vec = np.array([80.0, -120.0, 55.0, 7.0])
        donors = donors[:3] + (
            Donor("outlier", donors[0].returns, outlier_vec, 800, fit=preset_fit(0.5)),
        )
        config = MultiverseConfig(
            donors=donors, covariates=names, target=target, ground_truth=3.0
        )
        result = run_multiverse(config)
        rows = {
            (r.omitted_covariate, r.omitted_donor): r
            for r in result.rows
            if r.kind == "config"
        }
        with_outlier = np.array(rows[(None, None)].weights[:3])
        without = np.array(rows[(None, "outlier")].weights)
        assert np.abs(with_outlier - without).max() > 1e-3

    def test_mean_and_median_rows(self, mv_result_and_config):
        result, config = mv_result_and_config
        config_rows = [r for r in result.rows if r.kind == "config"]
        forecasts = np.array([r.adjusted_forecast for r in config_rows])
        mean_row = next(r for r in result.rows if r.kind == "mean")
        median_row = next(r for r in result.rows if r.kind == "median")
        assert mean_row.adjusted_forecast == pytest.approx(forecasts.mean(), rel=1e-12)
        assert median_row.adjusted_forecast == pytest.approx(
            np.median(forecasts), rel=1e-12
        )
        assert mean_row.omitted_covariate == MEAN_LABEL
        assert median_row.omitted_covariate == MEDIAN_LABEL

    def test_unadjusted_reference_row(self, mv_result_and_config):
        result, config = mv_result_and_config
        row = next(r for r in result.rows if r.kind == "unadjusted")
        assert row.omitted_covariate == UNADJUSTED_LABEL
        assert row.adjusted_forecast == result.unadjusted_forecast
        assert row.loss == pytest.approx(
            ql_loss(result.unadjusted_forecast, config.ground_truth), rel=1e-12
        )

    def test_losses_recompute(self, mv_result_and_config):
        result, config = mv_result_and_config
        for row in result.rows:
            want = ql_loss(row.adjusted_forecast, config.ground_truth)
            assert row.loss == pytest.approx(want, abs=1e-12)

    def test_ranking_sorted_with_stable_ties(self, mv_result_and_config):
        result, _ = mv_result_and_config
        losses = [r.loss for r in result.rows]
        assert losses == sorted(losses)

    def test_alternative_losses(self):
        target, donors, names = fixed_effect_bundle()
        for loss_name, fn in (("MSE", mse_loss), ("APE", ape_loss)):
            config = MultiverseConfig(
                donors=donors,
                covariates=names,
                target=target,
                ground_truth=3.0,
                loss=loss_name,
            )
            result = run_multiverse(config)
            for row in result.rows[:5]:
                assert row.loss == pytest.approx(
                    fn(row.adjusted_forecast, 3.0), rel=1e-12
                )

    def test_csv_export(self, mv_result_and_config, tmp_path):
        result, _ = mv_result_and_config
        out = tmp_path / "mv.csv"
        write_multiverse_csv(result, out)
        lines = out.read_text().splitlines()
        assert lines[0] == "loss,omitted_covariate,omitted_donor"
        assert len(lines) == 1 + len(result.rows)
        first_loss = float(lines[1].split(",")[0])
        assert first_loss == result.rows[0].loss
