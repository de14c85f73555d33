"""End-to-end adjusted-forecast workflow shared by the CLI and the multiverse.

One run: fit each donor's GARCH with a shock dummy, build the volatility
profile from the per-event covariates, standardize, solve the simplex
weights, aggregate the donor fixed effects into a single correction, and
apply it to the target's forecast as an intercept shift.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import SynthvolError, ValidationError
from .estimation import FitConfig, FitResult, fit_garch, fit_shock_fixed_effect
from .evaluation import loss_triple
from .garch import VARIANCE_FLOOR, filter_variance, forecast
from .similarity import (
    OlsContrast,
    VolatilityProfile,
    WeightSolution,
    aggregate_shock,
    mean_shock,
    ols_covariate_contrast,
    singular_value_shares,
    solve_weights,
    standardize,
)


@dataclass(frozen=True)
class Donor:
    """One donor event: returns covering its shock, plus profile covariates."""

    name: str
    returns: np.ndarray
    profile_covariates: np.ndarray
    t_star: int
    len_vol: int = 1
    fit: FitResult | None = None

    def __post_init__(self):
        object.__setattr__(self, "returns", np.asarray(self.returns, dtype=float))
        object.__setattr__(
            self, "profile_covariates", np.asarray(self.profile_covariates, dtype=float)
        )

    @property
    def omega_star_hat(self) -> float:
        if self.fit is None or self.fit.omega_star_hat is None:
            raise ValidationError(f"donor {self.name!r} has not been fitted")
        return self.fit.omega_star_hat


@dataclass(frozen=True)
class TargetSeries:
    """The series under study: only pre-shock data is used for fitting."""

    name: str
    returns: np.ndarray
    profile_covariates: np.ndarray
    t_star: int

    def __post_init__(self):
        object.__setattr__(self, "returns", np.asarray(self.returns, dtype=float))
        object.__setattr__(
            self, "profile_covariates", np.asarray(self.profile_covariates, dtype=float)
        )


@dataclass(frozen=True)
class ForecastReport:
    """Everything the forecast workflow produces for one target."""

    unadjusted: np.ndarray
    adjusted: np.ndarray
    mean_adjusted: np.ndarray
    omega_star: float
    mean_omega_star: float
    donor_names: tuple[str, ...]
    donor_effects: np.ndarray
    weights: WeightSolution
    profile: VolatilityProfile
    target_fit: FitResult
    singular_shares: np.ndarray
    ols_contrast: OlsContrast
    clamped: bool
    seed: int
    ground_truth: float | None = None
    losses: dict | None = None


def _estimation_slice(t_star: int, window: int | None) -> int:
    return 0 if window is None else max(0, t_star - int(window))


def fit_donor(
    donor: Donor,
    config: FitConfig | None = None,
    estimation_window: int | None = None,
) -> Donor:
    """Fit the donor's GARCH(1,1) plus shock dummy on data through its window."""
    if donor.fit is not None:
        return donor
    start = _estimation_slice(donor.t_star, estimation_window)
    end = donor.t_star + donor.len_vol
    if end > donor.returns.size:
        raise ValidationError(
            f"donor {donor.name!r}: returns end before the shock window does"
        )
    sample = donor.returns[start:end]
    try:
        fit = fit_shock_fixed_effect(
            sample,
            t_star=donor.t_star - start,
            len_vol=donor.len_vol,
            orders=(1, 1),
            config=config,
        )
    except SynthvolError as exc:
        raise type(exc)(f"donor {donor.name!r}: {exc}") from exc
    return replace(donor, fit=fit)


def fit_target(
    target: TargetSeries,
    config: FitConfig | None = None,
    estimation_window: int | None = None,
) -> tuple[FitResult, np.ndarray, np.ndarray]:
    """Fit the target on its pre-shock sample; return (fit, a, sigma2)."""
    if target.t_star < 1 or target.t_star > target.returns.size:
        raise ValidationError(
            f"target t_star={target.t_star} outside series of length {target.returns.size}"
        )
    start = _estimation_slice(target.t_star, estimation_window)
    sample = target.returns[start : target.t_star]
    fit = fit_garch(sample, orders=(1, 1), config=config)
    a = sample - fit.mean
    sigma2 = filter_variance(fit.params, a)
    return fit, a, sigma2


def build_profile(
    target: TargetSeries,
    donors,
    covariate_names,
    omit_covariate: str | None = None,
    omit_donor: str | None = None,
) -> VolatilityProfile:
    """Raw profile from per-event covariate vectors, with optional omissions."""
    names = list(covariate_names)
    keep_rows = [i for i, c in enumerate(names) if c != omit_covariate]
    if omit_covariate is not None and len(keep_rows) == len(names):
        raise ValidationError(f"unknown covariate {omit_covariate!r}")
    kept = [d for d in donors if d.name != omit_donor]
    if omit_donor is not None and len(kept) == len(donors):
        raise ValidationError(f"unknown donor {omit_donor!r}")
    if not kept:
        raise ValidationError("no donors left in the profile")
    p = len(names)
    for series in (target, *donors):
        if series.profile_covariates.size != p:
            raise ValidationError(
                f"{series.name!r} supplies {series.profile_covariates.size} covariates, "
                f"expected {p}"
            )
    rows = np.asarray(keep_rows, dtype=int)
    return VolatilityProfile(
        target=target.profile_covariates[rows],
        donors=np.column_stack([d.profile_covariates[rows] for d in kept]),
        covariate_names=tuple(names[i] for i in keep_rows),
        donor_names=tuple(d.name for d in kept),
    )


def solve_adjustment(
    target: TargetSeries,
    donors,
    covariate_names,
    seminorm=None,
    omit_covariate: str | None = None,
    omit_donor: str | None = None,
) -> tuple[VolatilityProfile, WeightSolution, float]:
    """Standardize the (possibly reduced) profile, solve weights, aggregate.

    Standardization is recomputed inside every configuration: dropping a
    donor changes the z-scores of the remaining events.
    """
    profile = standardize(
        build_profile(target, donors, covariate_names, omit_covariate, omit_donor)
    )
    solution = solve_weights(profile, seminorm=seminorm)
    effects = np.array([d.omega_star_hat for d in donors if d.name != omit_donor])
    return profile, solution, aggregate_shock(solution, effects)


def run_forecast_pipeline(
    target: TargetSeries,
    donors,
    covariate_names,
    horizon: int = 1,
    adjustment_length: int = 1,
    config: FitConfig | None = None,
    seminorm=None,
    ground_truth: float | None = None,
    estimation_window: int | None = None,
    seed: int = 0,
    floor: float = VARIANCE_FLOOR,
) -> ForecastReport:
    """The full similarity-adjusted forecast for one study bundle."""
    donors = [fit_donor(d, config, estimation_window) for d in donors]
    effects = np.array([d.omega_star_hat for d in donors])
    target_fit, a, sigma2 = fit_target(target, config, estimation_window)

    def path(adjustment: float) -> np.ndarray:
        return forecast(
            target_fit.params,
            a,
            sigma2,
            horizon,
            adjustment=adjustment,
            adjustment_length=adjustment_length,
            floor=floor,
        )

    unadjusted = path(0.0)
    profile, solution, omega_star = solve_adjustment(
        target, donors, covariate_names, seminorm=seminorm
    )
    mean_star = mean_shock(effects)
    adjusted = path(omega_star)
    mean_adjusted = path(mean_star)
    clamped = bool(np.any(adjusted <= floor) or np.any(mean_adjusted <= floor))

    losses = None
    if ground_truth is not None:
        losses = {
            "unadjusted": loss_triple(float(unadjusted[0]), ground_truth),
            "adjusted": loss_triple(float(adjusted[0]), ground_truth),
            "mean_adjusted": loss_triple(float(mean_adjusted[0]), ground_truth),
        }

    return ForecastReport(
        unadjusted=unadjusted,
        adjusted=adjusted,
        mean_adjusted=mean_adjusted,
        omega_star=omega_star,
        mean_omega_star=mean_star,
        donor_names=tuple(d.name for d in donors),
        donor_effects=effects,
        weights=solution,
        profile=profile,
        target_fit=target_fit,
        singular_shares=singular_value_shares(profile),
        ols_contrast=ols_covariate_contrast(profile, effects),
        clamped=clamped,
        seed=seed,
        ground_truth=ground_truth,
        losses=losses,
    )
