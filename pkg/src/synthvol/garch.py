"""GARCH(m,s)/GARCH-X variance recursion, shocked-path simulation, forecasting.

Time is 0-based throughout.  A shock described by ``t_star`` and ``length``
occupies array indices ``t_star, ..., t_star + length - 1``: ``t_star``
observations precede the news arrival, so index ``t_star`` is the first
observation recorded after it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter, lfiltic

from .errors import (
    InsufficientHistory,
    InvalidShockWindow,
    NonpositiveVariance,
    NonstationaryParams,
    ValidationError,
)

VARIANCE_FLOOR = 1e-12


def _vector(x, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def shock_window(t_star: int, length: int) -> np.ndarray:
    """0-based indices of the shocked observations."""
    return np.arange(t_star, t_star + length)


@dataclass(frozen=True)
class GarchParams:
    """Variance-equation coefficients for one series.

    ``alpha`` weights the m lagged squared residuals, ``beta`` the s lagged
    variances, ``gamma`` the exogenous covariates (may be empty).
    """

    omega: float
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))
        for name in ("alpha", "beta", "gamma"):
            arr = _vector(getattr(self, name), name)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not self.omega > 0:
            raise ValidationError(f"omega must be > 0, got {self.omega}")
        if np.any(self.alpha < 0):
            raise ValidationError("all alpha coefficients must be >= 0")
        if np.any(self.beta < 0):
            raise ValidationError("all beta coefficients must be >= 0")

    @property
    def m(self) -> int:
        return self.alpha.size

    @property
    def s(self) -> int:
        return self.beta.size

    @property
    def p(self) -> int:
        return self.gamma.size

    @property
    def persistence(self) -> float:
        return float(self.alpha.sum() + self.beta.sum())

    def is_stationary(self) -> bool:
        return self.persistence < 1.0


@dataclass(frozen=True)
class ShockSpec:
    """Timing and law of a news shock.

    The volatility shock adds ``mu_omega_star + delta . v_t + u_t`` to the
    variance intercept on ``len_vol`` consecutive indices starting at
    ``t_star``.  The level shock replaces the innovation by a single draw
    ``eps_star`` on ``len_return`` indices.
    """

    t_star: int
    len_vol: int = 1
    len_return: int = 0
    mu_omega_star: float = 0.0
    delta: np.ndarray = field(default_factory=lambda: np.empty(0))
    sigma_u: float = 0.0
    mu_eps_star: float = 0.0
    sigma_eps_star: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "t_star", int(self.t_star))
        object.__setattr__(self, "len_vol", int(self.len_vol))
        object.__setattr__(self, "len_return", int(self.len_return))
        delta = _vector(self.delta, "delta")
        delta.flags.writeable = False
        object.__setattr__(self, "delta", delta)
        if self.t_star < 1:
            raise ValidationError("t_star must be >= 1 (at least one pre-shock observation)")
        if self.len_vol < 1:
            raise ValidationError("len_vol must be >= 1")
        if self.len_return < 0:
            raise ValidationError("len_return must be >= 0")
        if self.sigma_u < 0 or self.sigma_eps_star < 0:
            raise ValidationError("sigma_u and sigma_eps_star must be >= 0")

    @property
    def vol_window(self) -> np.ndarray:
        return shock_window(self.t_star, self.len_vol)

    @property
    def return_window(self) -> np.ndarray:
        return shock_window(self.t_star, self.len_return)


@dataclass(frozen=True)
class CovariateModel:
    """i.i.d. normal covariates: each entry N(mean, sd^2), independent."""

    p: int = 0
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if self.p < 0:
            raise ValidationError("p must be >= 0")
        if self.sd < 0:
            raise ValidationError("sd must be >= 0")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.p == 0:
            return np.empty((n, 0))
        return self.mean + self.sd * rng.standard_normal((n, self.p))


@dataclass(frozen=True)
class SimulatedPath:
    """One simulated series: mean-zero returns, true variances, covariates."""

    returns: np.ndarray
    sigma2: np.ndarray
    covariates: np.ndarray
    omega_star_path: np.ndarray

    def __post_init__(self):
        for name in ("returns", "sigma2", "omega_star_path"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        cov = np.asarray(self.covariates, dtype=float)
        cov.flags.writeable = False
        object.__setattr__(self, "covariates", cov)
        n = self.returns.size
        if not (self.sigma2.size == n == self.omega_star_path.size == cov.shape[0]):
            raise ValidationError("path components must share the same length")
        if np.any(self.sigma2 <= 0):
            raise ValidationError("sigma2 must be strictly positive")

    def __len__(self) -> int:
        return self.returns.size


def unconditional_variance(params: GarchParams) -> float:
    """Long-run variance omega / (1 - sum(alpha) - sum(beta)).

    Ignores the covariate term, so it is exact only for empty gamma or
    mean-zero covariates.
    """
    if not params.is_stationary():
        raise NonstationaryParams(
            f"sum(alpha) + sum(beta) = {params.persistence:.6f} >= 1"
        )
    return params.omega / (1.0 - params.persistence)


def variance_step(
    params: GarchParams,
    lagged_a2,
    lagged_sigma2,
    v_t=None,
    omega_star_t: float = 0.0,
) -> float:
    """One step of the variance recursion.

    Lag vectors are ordered most-recent-first.  Returns
    ``omega + omega_star_t + sum_k alpha_k a2_{t-k} + sum_j beta_j s2_{t-j}
    + gamma . v_t`` and raises ``NonpositiveVariance`` if the result is
    not strictly positive.
    """
    a2 = _vector(lagged_a2, "lagged_a2")
    s2 = _vector(lagged_sigma2, "lagged_sigma2")
    if a2.size != params.m:
        raise ValidationError(f"lagged_a2 must have length m={params.m}")
    if s2.size != params.s:
        raise ValidationError(f"lagged_sigma2 must have length s={params.s}")
    if np.any(s2 <= 0):
        raise ValidationError("lagged_sigma2 entries must be > 0")
    value = params.omega + float(omega_star_t)
    value += float(params.alpha @ a2) + float(params.beta @ s2)
    if params.p:
        v = _vector(v_t if v_t is not None else [], "v_t")
        if v.size != params.p:
            raise ValidationError(f"v_t must have length p={params.p}")
        value += float(params.gamma @ v)
    if value <= 0:
        raise NonpositiveVariance(
            f"variance step produced {value}; check gamma/omega_star configuration"
        )
    return value


def simulate_path(
    params: GarchParams,
    shock: ShockSpec | None,
    T: int,
    covariate_model: CovariateModel | None = None,
    seed=None,
) -> SimulatedPath:
    """Simulate ``T`` observations with standard normal innovations.

    The recursion starts from the unconditional variance (stationarity is
    required).  Draw order is fixed (covariates, innovations, then shock
    draws) so paths with and without a shock share the same innovation
    stream under the same seed.
    """
    T = int(T)
    if T < 1:
        raise ValidationError("T must be >= 1")
    if not params.is_stationary():
        raise NonstationaryParams("simulation requires sum(alpha) + sum(beta) < 1")
    model = covariate_model if covariate_model is not None else CovariateModel(p=0)
    if params.p and params.p != model.p:
        raise ValidationError(
            f"gamma has length {params.p} but the covariate model supplies p={model.p}"
        )
    if shock is not None:
        if shock.delta.size and shock.delta.size != model.p:
            raise ValidationError(
                f"delta has length {shock.delta.size} but the covariate model supplies p={model.p}"
            )
        if shock.t_star + shock.len_vol > T or shock.t_star + shock.len_return > T:
            raise InvalidShockWindow(
                f"shock window exceeds series length {T} "
                f"(t_star={shock.t_star}, len_vol={shock.len_vol}, len_return={shock.len_return})"
            )

    rng = np.random.default_rng(seed)
    covariates = model.draw(T, rng)
    eps = rng.standard_normal(T)
    omega_star_path = np.zeros(T)
    if shock is not None:
        eps_star = shock.mu_eps_star + shock.sigma_eps_star * rng.standard_normal()
        u = shock.sigma_u * rng.standard_normal(shock.len_vol)
        w = shock.vol_window
        level = shock.mu_omega_star + u
        if shock.delta.size:
            level = level + covariates[w] @ shock.delta
        omega_star_path[w] = level
        if shock.len_return:
            eps[shock.return_window] = eps_star

    base = params.omega + omega_star_path
    if params.p:
        base = base + covariates @ params.gamma

    init = unconditional_variance(params)
    sigma2 = np.empty(T)
    a = np.empty(T)
    m, s = params.m, params.s
    if m == 1 and s == 1:
        alpha0 = float(params.alpha[0])
        beta0 = float(params.beta[0])
        prev_a2 = init
        prev_s2 = init
        for t in range(T):
            v = base[t] + alpha0 * prev_a2 + beta0 * prev_s2
            if v <= 0:
                raise NonpositiveVariance(f"sigma2[{t}] = {v} <= 0 during simulation")
            at = math.sqrt(v) * eps[t]
            sigma2[t] = v
            a[t] = at
            prev_a2 = at * at
            prev_s2 = v
    else:
        alpha = params.alpha
        beta = params.beta
        for t in range(T):
            v = base[t]
            for k in range(m):
                idx = t - 1 - k
                v += alpha[k] * (a[idx] * a[idx] if idx >= 0 else init)
            for j in range(s):
                idx = t - 1 - j
                v += beta[j] * (sigma2[idx] if idx >= 0 else init)
            if v <= 0:
                raise NonpositiveVariance(f"sigma2[{t}] = {v} <= 0 during simulation")
            sigma2[t] = v
            a[t] = math.sqrt(v) * eps[t]

    return SimulatedPath(a, sigma2, covariates, omega_star_path)


def filter_variance(
    params: GarchParams,
    a: np.ndarray,
    covariates: np.ndarray | None = None,
    omega_star: float = 0.0,
    window: np.ndarray | None = None,
    init: float | None = None,
) -> np.ndarray:
    """Conditional variances implied by demeaned returns ``a``.

    ``omega_star`` is added to the intercept on the indices in ``window``.
    Pre-sample squared returns and variances are set to ``init``
    (unconditional variance when the parameters are stationary, otherwise
    the sample variance of ``a``).
    """
    a = np.asarray(a, dtype=float)
    T = a.size
    if T == 0:
        raise ValidationError("empty return series")
    if init is None:
        init = unconditional_variance(params) if params.is_stationary() else float(np.var(a))
    c = np.full(T, params.omega)
    if window is not None and omega_star != 0.0:
        w = np.asarray(window, dtype=int)
        if w.size and (w.min() < 0 or w.max() >= T):
            raise InvalidShockWindow("shock window outside the series")
        c[w] += omega_star
    a2 = a * a
    for k in range(params.m):
        lag = k + 1
        shifted = np.empty(T)
        fill = min(lag, T)
        shifted[:fill] = init
        if lag < T:
            shifted[lag:] = a2[:-lag]
        c += params.alpha[k] * shifted
    if params.p:
        if covariates is None:
            raise ValidationError("gamma is nonempty but no covariates were supplied")
        cov = np.asarray(covariates, dtype=float)
        if cov.shape != (T, params.p):
            raise ValidationError(f"covariates must have shape ({T}, {params.p})")
        c += cov @ params.gamma
    if params.s == 0:
        sigma2 = c
    else:
        poly = np.concatenate(([1.0], -params.beta))
        zi = lfiltic([1.0], poly, y=np.full(params.s, init))
        sigma2, _ = lfilter([1.0], poly, c, zi=zi)
    if np.any(sigma2 <= 0):
        t_bad = int(np.argmax(sigma2 <= 0))
        raise NonpositiveVariance(f"filtered sigma2[{t_bad}] = {sigma2[t_bad]} <= 0")
    return sigma2


def forecast(
    params: GarchParams,
    a: np.ndarray,
    sigma2: np.ndarray,
    horizon: int,
    v_t: np.ndarray | None = None,
    adjustment: float = 0.0,
    adjustment_length: int = 1,
    floor: float = VARIANCE_FLOOR,
) -> np.ndarray:
    """Recursive h-step conditional-expectation variance forecast.

    ``a`` and ``sigma2`` are the observed demeaned returns and conditional
    variances through the forecast origin (natural time order; only the
    last m and s values are used).  ``adjustment`` shifts the variance
    intercept for the first ``adjustment_length`` steps; with 0 this is
    the plain GARCH forecast.  The covariate term ``gamma . v_t`` is held
    at its last observed value over the horizon.  Nonpositive values are
    clamped to ``floor`` with a warning.
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    if not 0 <= adjustment_length <= horizon:
        raise ValidationError("adjustment_length must lie in [0, horizon]")
    a = np.asarray(a, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    if a.size < params.m or sigma2.size < params.s:
        raise InsufficientHistory(
            f"need at least m={params.m} returns and s={params.s} variances, "
            f"got {a.size} and {sigma2.size}"
        )
    cov_term = 0.0
    if params.p:
        if v_t is None:
            raise ValidationError("gamma is nonempty: v_t is required for forecasting")
        v = _vector(v_t, "v_t")
        if v.size != params.p:
            raise ValidationError(f"v_t must have length p={params.p}")
        cov_term = float(params.gamma @ v)

    # Most-recent-last buffers; future E[a^2] equals the forecast variance.
    a2_hist = list((a[a.size - params.m:] ** 2) if params.m else [])
    s2_hist = list(sigma2[sigma2.size - params.s:]) if params.s else []
    out = np.empty(horizon)
    clamped = False
    for k in range(1, horizon + 1):
        value = params.omega + (adjustment if k <= adjustment_length else 0.0) + cov_term
        for i in range(params.m):
            value += params.alpha[i] * a2_hist[-1 - i]
        for j in range(params.s):
            value += params.beta[j] * s2_hist[-1 - j]
        if value <= 0:
            value = floor
            clamped = True
        out[k - 1] = value
        if params.m:
            a2_hist.append(value)
        if params.s:
            s2_hist.append(value)
    if clamped:
        warnings.warn(
            "forecast clamped to the variance floor; adjustment drove the "
            "recursion nonpositive",
            RuntimeWarning,
            stacklevel=2,
        )
    return out
