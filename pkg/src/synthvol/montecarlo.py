"""Seeded Monte Carlo study: adjusted vs unadjusted forecasts over a 2-D grid.

Every replication simulates a target and a donor pool under the shocked
DGP (no level shocks on returns), runs the full pipeline, and scores both
one-step forecasts against the target's true next variance with QL loss.
Replication seeds derive from the cell's parameter values rather than its
grid position, so results are independent of evaluation order and
transposing the axes transposes the result matrix exactly.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ReplicationFailed, SynthvolError, ValidationError
from .estimation import FitConfig, fit_garch, fit_shock_fixed_effect
from .evaluation import ql_loss
from .garch import (
    VARIANCE_FLOOR,
    CovariateModel,
    GarchParams,
    ShockSpec,
    filter_variance,
    forecast,
    simulate_path,
)
from .similarity import VolatilityProfile, aggregate_shock, solve_weights, standardize

PARAM_NAMES = ("mu_V", "sigma_V", "mu_delta", "mu_omega_star", "sigma_u")

GRID_CSV_HEADER = "axis1,axis2,win_fraction,mean_ql_adj,mean_ql_unadj,reps,failures"


def build_delta(p: int, mu_delta: float) -> np.ndarray:
    """Covariate loadings proportional to (1, ..., p) with mean mu_delta.

    Entry j is 2 * mu_delta * j / (p + 1), so the loadings are heterogeneous
    but a uniformly drawn entry has mean mu_delta.
    """
    if p < 1:
        raise ValidationError("p must be >= 1")
    j = np.arange(1, p + 1, dtype=float)
    return 2.0 * mu_delta * j / (p + 1.0)


@dataclass(frozen=True)
class GridConfig:
    """One simulation sweep: two varying parameters, the rest fixed."""

    axis1: tuple[str, tuple[float, ...]]
    axis2: tuple[str, tuple[float, ...]]
    fixed: dict = field(default_factory=dict)
    replications: int = 200
    n_donors: int = 3
    p: int = 9
    t_range: tuple[int, int] = (756, 2520)
    len_vol: int = 1
    base_params: GarchParams = field(
        default_factory=lambda: GarchParams(0.2, [0.1], [0.82])
    )
    seed: int = 0
    fit_config: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        a1, v1 = self.axis1
        a2, v2 = self.axis2
        object.__setattr__(self, "axis1", (a1, tuple(float(v) for v in v1)))
        object.__setattr__(self, "axis2", (a2, tuple(float(v) for v in v2)))
        object.__setattr__(self, "fixed", dict(self.fixed))
        for name in (a1, a2, *self.fixed):
            if name not in PARAM_NAMES:
                raise ValidationError(
                    f"unknown parameter {name!r}; choose from {PARAM_NAMES}"
                )
        if a1 == a2:
            raise ValidationError("axis1 and axis2 must vary different parameters")
        covered = {a1, a2, *self.fixed}
        missing = [n for n in PARAM_NAMES if n not in covered]
        if missing:
            raise ValidationError(f"parameters not pinned by axes or fixed: {missing}")
        extra = set(self.fixed) & {a1, a2}
        if extra:
            raise ValidationError(f"parameters both fixed and on an axis: {sorted(extra)}")
        if self.replications < 1 or self.n_donors < 1 or self.p < 1:
            raise ValidationError("replications, n_donors and p must be >= 1")
        lo, hi = self.t_range
        if not (0 < lo <= hi):
            raise ValidationError("t_range must satisfy 0 < lo <= hi")

    def cell_values(self, v1: float, v2: float) -> dict:
        values = dict(self.fixed)
        values[self.axis1[0]] = float(v1)
        values[self.axis2[0]] = float(v2)
        return values


@dataclass(frozen=True)
class CellResult:
    """Outcome of one grid cell over its replications."""

    win_fraction: float
    mean_ql_adjusted: float
    mean_ql_unadjusted: float
    replications: int
    failures: int


@dataclass(frozen=True)
class GridResult:
    axis1: tuple[str, tuple[float, ...]]
    axis2: tuple[str, tuple[float, ...]]
    cells: tuple  # rows indexed by axis1 values, columns by axis2 values
    seed: int


def replication_seed(master_seed: int, values: dict, rep: int) -> np.random.SeedSequence:
    """Deterministic seed from the cell's parameter values and the rep index."""
    canon = tuple(float(values[name]) for name in PARAM_NAMES)
    payload = struct.pack("<5d", *canon) + struct.pack("<q", int(rep))
    payload += struct.pack("<q", int(master_seed))
    digest = hashlib.sha256(payload).digest()
    words = list(struct.unpack("<8I", digest))
    return np.random.SeedSequence(words)


def run_replication(config: GridConfig, values: dict, seed) -> tuple[float, float]:
    """One replication: returns (ql_adjusted, ql_unadjusted).

    Simulates n_donors + 1 shocked series with a shared delta vector,
    series lengths uniform on t_range and shock times uniform on the
    middle 80% of each series, fits the donors' fixed effects, weights
    them by profile similarity, and scores the target's one-step
    forecasts against its true simulated variance.
    """
    rng = np.random.default_rng(seed)
    missing = [n for n in PARAM_NAMES if n not in values]
    if missing:
        raise ValidationError(f"missing parameter values: {missing}")
    delta = build_delta(config.p, values["mu_delta"])
    cov_model = CovariateModel(config.p, values["mu_V"], values["sigma_V"])
    lo, hi = config.t_range
    min_pre = 10 * 3 + 1  # fit_garch needs more than 10 * (m + s + 1) observations

    try:
        paths = []
        stars = []
        for _ in range(config.n_donors + 1):
            T = int(rng.integers(lo, hi + 1))
            t_lo = max(int(0.1 * T), min_pre)
            t_hi = max(int(0.9 * T) - config.len_vol, t_lo)
            t_star = int(rng.integers(t_lo, t_hi + 1))
            shock = ShockSpec(
                t_star=t_star,
                len_vol=config.len_vol,
                len_return=0,
                mu_omega_star=values["mu_omega_star"],
                delta=delta,
                sigma_u=values["sigma_u"],
            )
            paths.append(simulate_path(config.base_params, shock, T, cov_model, seed=rng))
            stars.append(t_star)

        effects = np.empty(config.n_donors)
        for i in range(1, config.n_donors + 1):
            fit = fit_shock_fixed_effect(
                paths[i].returns,
                t_star=stars[i],
                len_vol=config.len_vol,
                orders=(1, 1),
                config=config.fit_config,
            )
            effects[i - 1] = fit.omega_star_hat

        profile = standardize(
            VolatilityProfile(
                target=paths[0].covariates[stars[0]],
                donors=np.column_stack(
                    [paths[i].covariates[stars[i]] for i in range(1, config.n_donors + 1)]
                ),
                covariate_names=tuple(f"v{j}" for j in range(1, config.p + 1)),
                donor_names=tuple(f"donor{i}" for i in range(1, config.n_donors + 1)),
            )
        )
        omega_star = aggregate_shock(solve_weights(profile), effects)

        t1 = stars[0]
        target_fit = fit_garch(
            paths[0].returns[:t1], orders=(1, 1), config=config.fit_config
        )
        a = paths[0].returns[:t1] - target_fit.mean
        sigma2 = filter_variance(target_fit.params, a)
        unadjusted = float(forecast(target_fit.params, a, sigma2, 1)[0])
        adjusted = max(unadjusted + omega_star, VARIANCE_FLOOR)
        truth = float(paths[0].sigma2[t1])
        return ql_loss(adjusted, truth), ql_loss(unadjusted, truth)
    except SynthvolError as exc:
        raise ReplicationFailed(str(exc)) from exc


def run_cell(config: GridConfig, values: dict) -> CellResult:
    """All replications for one parameter assignment."""
    wins = 0
    ql_adj = []
    ql_unadj = []
    failures = 0
    for rep in range(config.replications):
        seed = replication_seed(config.seed, values, rep)
        try:
            qa, qu = run_replication(config, values, seed)
        except ReplicationFailed:
            failures += 1
            continue
        ql_adj.append(qa)
        ql_unadj.append(qu)
        if qa <= qu:
            wins += 1
    done = config.replications - failures
    return CellResult(
        win_fraction=wins / done if done else float("nan"),
        mean_ql_adjusted=float(np.mean(ql_adj)) if ql_adj else float("nan"),
        mean_ql_unadjusted=float(np.mean(ql_unadj)) if ql_unadj else float("nan"),
        replications=config.replications,
        failures=failures,
    )


def run_grid(config: GridConfig) -> GridResult:
    """Evaluate every (axis1 x axis2) cell."""
    rows = []
    for v1 in config.axis1[1]:
        row = []
        for v2 in config.axis2[1]:
            row.append(run_cell(config, config.cell_values(v1, v2)))
        rows.append(tuple(row))
    return GridResult(config.axis1, config.axis2, tuple(rows), config.seed)


def grid_rows(result: GridResult) -> list[dict]:
    """Flat one-row-per-cell view of a grid result."""
    out = []
    for v1, row in zip(result.axis1[1], result.cells):
        for v2, cell in zip(result.axis2[1], row):
            out.append(
                {
                    "axis1": v1,
                    "axis2": v2,
                    "win_fraction": cell.win_fraction,
                    "mean_ql_adj": cell.mean_ql_adjusted,
                    "mean_ql_unadj": cell.mean_ql_unadjusted,
                    "reps": cell.replications,
                    "failures": cell.failures,
                }
            )
    return out


def write_grid_csv(result: GridResult, path) -> None:
    """Delimited export, one row per cell, repr-precision floats."""
    lines = [GRID_CSV_HEADER]
    for row in grid_rows(result):
        lines.append(
            ",".join(
                [
                    repr(row["axis1"]),
                    repr(row["axis2"]),
                    repr(row["win_fraction"]),
                    repr(row["mean_ql_adj"]),
                    repr(row["mean_ql_unadj"]),
                    str(row["reps"]),
                    str(row["failures"]),
                ]
            )
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
