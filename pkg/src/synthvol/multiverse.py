"""Leave-one-out sensitivity analysis over donors and covariates.

Every configuration drops at most one donor and one covariate, rebuilds
and restandardizes the profile, re-solves the weights and recomputes the
adjusted forecast.  Donor fixed effects are never refit: they come from
the GARCH fits, which do not use the profile covariates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationInfeasible, SynthvolError, ValidationError
from .estimation import FitConfig
from .evaluation import ape_loss, mse_loss, ql_loss
from .garch import VARIANCE_FLOOR, forecast
from .pipeline import Donor, TargetSeries, fit_donor, fit_target, solve_adjustment

LOSS_FUNCTIONS = {"QL": ql_loss, "MSE": mse_loss, "APE": ape_loss}

MEAN_LABEL = "NA (mean forecast)"
MEDIAN_LABEL = "NA (median forecast)"
UNADJUSTED_LABEL = "All"


@dataclass(frozen=True)
class MultiverseConfig:
    """Inputs for the leave-one-out sweep."""

    donors: tuple
    covariates: tuple[str, ...]
    target: TargetSeries
    ground_truth: float
    loss: str = "QL"
    adjustment_length: int = 1
    estimation_window: int | None = None
    fit_config: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        object.__setattr__(self, "donors", tuple(self.donors))
        object.__setattr__(self, "covariates", tuple(self.covariates))
        if len(self.donors) < 2 or len(self.covariates) < 2:
            raise ValidationError(
                "a nontrivial leave-one-out needs at least 2 donors and 2 covariates"
            )
        if self.loss not in LOSS_FUNCTIONS:
            raise ValidationError(f"loss must be one of {sorted(LOSS_FUNCTIONS)}")
        if self.ground_truth <= 0:
            raise ValidationError("ground_truth must be > 0")


@dataclass(frozen=True)
class MultiverseRow:
    """One evaluated configuration (or a synthetic combination row)."""

    omitted_covariate: str | None
    omitted_donor: str | None
    adjusted_forecast: float
    loss: float
    weights: tuple[float, ...]
    omega_star_hat: float | None
    kind: str = "config"  # config | mean | median | unadjusted


@dataclass(frozen=True)
class MultiverseResult:
    rows: tuple[MultiverseRow, ...]  # ranked by loss, ties in enumeration order
    unadjusted_forecast: float
    infeasible: tuple[tuple[str | None, str | None, str], ...]


def enumerate_configs(config: MultiverseConfig) -> list[tuple[str | None, str | None]]:
    """All (omitted_covariate, omitted_donor) pairs, None first, input order."""
    covs = [None, *config.covariates]
    donors = [None, *(d.name for d in config.donors)]
    return [(c, d) for c in covs for d in donors]


def run_multiverse(config: MultiverseConfig) -> MultiverseResult:
    """Evaluate every leave-one-out configuration plus the combination rows.

    Appends a mean-combined and a median-combined forecast over all
    configuration rows and the unadjusted forecast as the reference row,
    then ranks everything by the configured loss (ascending, ties broken
    by enumeration order).
    """
    loss_fn = LOSS_FUNCTIONS[config.loss]
    donors = tuple(
        fit_donor(d, config.fit_config, config.estimation_window) for d in config.donors
    )
    target_fit, a, sigma2 = fit_target(config.target, config.fit_config, config.estimation_window)

    def adjusted_path(omega_star: float) -> float:
        path = forecast(
            target_fit.params,
            a,
            sigma2,
            1,
            adjustment=omega_star,
            adjustment_length=min(config.adjustment_length, 1),
        )
        return float(path[0])

    unadjusted = adjusted_path(0.0)

    rows: list[MultiverseRow] = []
    infeasible: list[tuple[str | None, str | None, str]] = []
    for omit_cov, omit_donor in enumerate_configs(config):
        try:
            _, solution, omega_star = solve_adjustment(
                config.target,
                donors,
                config.covariates,
                omit_covariate=omit_cov,
                omit_donor=omit_donor,
            )
            value = max(adjusted_path(omega_star), VARIANCE_FLOOR)
            rows.append(
                MultiverseRow(
                    omitted_covariate=omit_cov,
                    omitted_donor=omit_donor,
                    adjusted_forecast=value,
                    loss=float(loss_fn(value, config.ground_truth)),
                    weights=tuple(float(w) for w in solution.weights),
                    omega_star_hat=omega_star,
                )
            )
        except SynthvolError as exc:
            infeasible.append((omit_cov, omit_donor, str(exc)))

    if not rows:
        raise ConfigurationInfeasible("every leave-one-out configuration failed")

    forecasts = np.array([r.adjusted_forecast for r in rows])
    combos = [
        (MEAN_LABEL, float(forecasts.mean()), "mean"),
        (MEDIAN_LABEL, float(np.median(forecasts)), "median"),
    ]
    extra = [
        MultiverseRow(label, label, value, float(loss_fn(value, config.ground_truth)), (), None, kind)
        for label, value, kind in combos
    ]
    extra.append(
        MultiverseRow(
            UNADJUSTED_LABEL,
            UNADJUSTED_LABEL,
            unadjusted,
            float(loss_fn(unadjusted, config.ground_truth)),
            (),
            None,
            "unadjusted",
        )
    )

    everything = rows + extra
    order = sorted(range(len(everything)), key=lambda i: (everything[i].loss, i))
    ranked = tuple(everything[i] for i in order)
    return MultiverseResult(ranked, unadjusted, tuple(infeasible))


def _label(value: str | None) -> str:
    return "None" if value is None else value


def multiverse_rows(result: MultiverseResult) -> list[dict]:
    return [
        {
            "loss": row.loss,
            "omitted_covariate": _label(row.omitted_covariate),
            "omitted_donor": _label(row.omitted_donor),
        }
        for row in result.rows
    ]


def write_multiverse_csv(result: MultiverseResult, path) -> None:
    """Ranked table mirroring the leave-one-out report columns."""
    lines = ["loss,omitted_covariate,omitted_donor"]
    for row in multiverse_rows(result):
        lines.append(
            ",".join([repr(row["loss"]), row["omitted_covariate"], row["omitted_donor"]])
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
