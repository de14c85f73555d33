"""Volatility profiles, simplex-constrained donor weighting, shock aggregation.

The weight problem is a convex quadratic program on the unit simplex:
minimize ||v1 - V pi||_S over pi >= 0, sum(pi) = 1.  It is solved exactly
with a primal active-set method; when the minimizer is not unique the
minimum-Euclidean-norm minimizer is returned (a second projection QP
restricted to the optimal face, the exact limit of a vanishing ridge).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ValidationError

ACTIVE_WEIGHT = 1e-6
_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class VolatilityProfile:
    """Shock-time covariates: one p-vector per event, donors as columns."""

    target: np.ndarray
    donors: np.ndarray
    covariate_names: tuple[str, ...]
    donor_names: tuple[str, ...]
    standardized: bool = False
    raw_target: np.ndarray | None = None
    raw_donors: np.ndarray | None = None
    constant_rows: np.ndarray | None = None

    def __post_init__(self):
        target = np.asarray(self.target, dtype=float)
        donors = np.asarray(self.donors, dtype=float)
        if target.ndim != 1:
            raise ValidationError("target must be a vector")
        if donors.ndim != 2:
            raise ValidationError("donors must be a p x n matrix")
        if donors.shape[0] != target.size:
            raise DimensionMismatch(
                f"target has {target.size} covariates but donors have {donors.shape[0]} rows"
            )
        if not (np.all(np.isfinite(target)) and np.all(np.isfinite(donors))):
            raise ValidationError("profile entries must be finite (no missing values)")
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names))
        object.__setattr__(self, "donor_names", tuple(self.donor_names))
        if len(self.covariate_names) != target.size:
            raise DimensionMismatch("covariate_names length must equal p")
        if len(self.donor_names) != donors.shape[1]:
            raise DimensionMismatch("donor_names length must equal n")
        target.flags.writeable = False
        donors.flags.writeable = False
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "donors", donors)

    @property
    def p(self) -> int:
        return self.target.size

    @property
    def n(self) -> int:
        return self.donors.shape[1]


@dataclass(frozen=True)
class WeightSolution:
    """Simplex weights with the achieved residual semi-norm."""

    weights: np.ndarray
    objective: float
    unique_hint: bool
    active_support: tuple[int, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


def standardize(profile: VolatilityProfile) -> VolatilityProfile:
    """Z-score each covariate across all n+1 events (target included).

    Rows with no dispersion are zeroed and flagged so one covariate's
    scale cannot dominate the distance.  The raw values are retained on
    the returned profile for reporting.
    """
    if profile.n < 1:
        raise ValidationError("standardize requires at least one donor")
    events = np.column_stack([profile.target, profile.donors])
    mean = events.mean(axis=1)
    sd = events.std(axis=1, ddof=1)
    constant = (sd == 0.0) | (sd < 1e-12 * np.maximum(1.0, np.abs(mean)))
    safe_sd = np.where(constant, 1.0, sd)
    z = (events - mean[:, None]) / safe_sd[:, None]
    z[constant] = 0.0
    raw_target = profile.raw_target if profile.standardized else profile.target
    raw_donors = profile.raw_donors if profile.standardized else profile.donors
    return VolatilityProfile(
        target=z[:, 0],
        donors=z[:, 1:],
        covariate_names=profile.covariate_names,
        donor_names=profile.donor_names,
        standardized=True,
        raw_target=raw_target,
        raw_donors=raw_donors,
        constant_rows=constant,
    )


def _solve_kkt(Q, b, C, d, free):
    """Equality-constrained subproblem on the free index set."""
    nf = free.size
    k = C.shape[0]
    kkt = np.zeros((nf + k, nf + k))
    kkt[:nf, :nf] = Q[np.ix_(free, free)]
    kkt[:nf, nf:] = C[:, free].T
    kkt[nf:, :nf] = C[:, free]
    rhs = np.concatenate([b[free], d])
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    return sol[:nf], sol[nf:]


def _active_set_qp(Q, b, C, d, x0, max_iter=None):
    """Minimize 0.5 x'Qx - b'x s.t. Cx = d, x >= 0 from a feasible x0.

    Primal active-set iteration: solve the equality-constrained problem on
    the free variables, step to it if nonnegative, otherwise step to the
    first blocking bound; release the most negative multiplier when the
    candidate is optimal on the current face.  Singular KKT systems are
    resolved by least squares, which keeps the method deterministic.
    """
    n = x0.size
    x = np.maximum(x0.astype(float).copy(), 0.0)
    clamped = x <= _ZERO_TOL
    x[clamped] = 0.0
    if max_iter is None:
        max_iter = 50 * (n + 1)
    for _ in range(max_iter):
        free = np.flatnonzero(~clamped)
        if free.size == 0:
            clamped[int(np.argmax(x0))] = False
            continue
        cand_f, mult = _solve_kkt(Q, b, C, d, free)
        cand = np.zeros(n)
        cand[free] = cand_f
        if np.all(cand_f >= -1e-11):
            x = np.maximum(cand, 0.0)
            grad = Q @ x - b + C.T @ mult
            blocked = np.flatnonzero(clamped)
            if blocked.size == 0 or np.all(grad[blocked] >= -1e-9):
                return x
            release = blocked[int(np.argmin(grad[blocked]))]
            clamped[release] = False
        else:
            diff = x - cand
            neg = np.flatnonzero((cand < -1e-11) & (~clamped))
            steps = x[neg] / np.maximum(diff[neg], _ZERO_TOL)
            i_min = int(np.argmin(steps))
            t = max(min(float(steps[i_min]), 1.0), 0.0)
            x = x + t * (cand - x)
            block = neg[i_min]
            x[block] = 0.0
            clamped[block] = True
    return x


def _seminorm_root(S, p):
    if S is None:
        return None
    S = np.asarray(S, dtype=float)
    if S.shape != (p, p):
        raise DimensionMismatch(f"seminorm must be {p} x {p}, got {S.shape}")
    S = 0.5 * (S + S.T)
    vals, vecs = np.linalg.eigh(S)
    if vals.min() < -1e-10 * max(1.0, vals.max()):
        raise ValidationError("seminorm matrix must be positive semidefinite")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def solve_weights(profile: VolatilityProfile, seminorm=None) -> WeightSolution:
    """Donor weights minimizing the S-weighted residual over the simplex.

    Deterministic two-stage solve: the exact minimizer set is located
    first, then the minimum-norm point of that set is returned.  Donors
    with weight above 1e-6 form ``active_support``.
    """
    v1 = profile.target
    V = profile.donors
    n = profile.n
    root = _seminorm_root(seminorm, profile.p)
    A = V if root is None else root @ V
    y = v1 if root is None else root @ v1

    ones = np.ones((1, n))
    if n == 1:
        weights = np.ones(1)
    else:
        Q = A.T @ A
        b = A.T @ y
        x0 = np.full(n, 1.0 / n)
        pi1 = _active_set_qp(Q, b, ones, np.array([1.0]), x0)
        # Minimum-norm point of the minimizer face {pi in simplex: A pi = A pi1}.
        C2 = np.vstack([A, ones])
        d2 = np.concatenate([A @ pi1, [1.0]])
        weights = _active_set_qp(np.eye(n), np.zeros(n), C2, d2, pi1)
    weights = np.maximum(weights, 0.0)
    weights = weights / weights.sum()
    resid = y - A @ weights
    objective = float(np.linalg.norm(resid))
    unique_hint = bool(np.linalg.matrix_rank(A) >= n)
    support = tuple(int(i) for i in np.flatnonzero(weights > ACTIVE_WEIGHT))
    return WeightSolution(weights, objective, unique_hint, support)


def aggregate_shock(weights: WeightSolution, donor_effects) -> float:
    """Weighted combination of donor shock estimates, pi . omega_hat."""
    effects = np.asarray(donor_effects, dtype=float)
    if effects.shape != weights.weights.shape:
        raise DimensionMismatch(
            f"{effects.size} donor effects but {weights.weights.size} weights"
        )
    return float(weights.weights @ effects)


def mean_shock(donor_effects) -> float:
    """Arithmetic-mean aggregate, the cautionary equal-weight baseline."""
    effects = np.asarray(donor_effects, dtype=float)
    if effects.size == 0:
        raise DimensionMismatch("no donor effects to average")
    return float(effects.mean())


@dataclass(frozen=True)
class OlsContrast:
    """Diagnostic regression of donor effects on covariates (not a forecast path)."""

    coefficients: np.ndarray
    target_effect: float


def ols_covariate_contrast(profile: VolatilityProfile, donor_effects) -> OlsContrast:
    """Least-squares fit of effects on donor profiles, applied to the target.

    Risky with few donors; reported for diagnostics only.
    """
    effects = np.asarray(donor_effects, dtype=float)
    if effects.size != profile.n:
        raise DimensionMismatch("donor effect count must equal the number of donors")
    coef, *_ = np.linalg.lstsq(profile.donors.T, effects, rcond=None)
    return OlsContrast(coef, float(coef @ profile.target))


def singular_value_shares(profile: VolatilityProfile) -> np.ndarray:
    """Donor-diversity diagnostic: singular values of the donor matrix as shares."""
    svals = np.linalg.svd(profile.donors, compute_uv=False)
    total = svals.sum()
    if total == 0:
        return np.zeros_like(svals)
    return svals / total
