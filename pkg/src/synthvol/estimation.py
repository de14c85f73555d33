"""Gaussian quasi-maximum-likelihood fitting of GARCH(m,s)/GARCH-X.

The optimizer works on an unconstrained reparameterization (log intercept,
softmax-style map keeping sum(alpha) + sum(beta) < 1), so every evaluated
point satisfies the positivity and stationarity constraints.  A volatility
shock is estimated as the coefficient of an indicator regressor that is
constant over the shock window.  No QMLE regularity or moment conditions
are verified; they are assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DegenerateData,
    InsufficientHistory,
    InvalidShockWindow,
    NonpositiveVariance,
    ValidationError,
)
from .garch import GarchParams, filter_variance, shock_window

_PENALTY = 1e10
_COEF_EPS = 1e-12


@dataclass(frozen=True)
class FitConfig:
    """Optimizer and preprocessing settings for one fit."""

    max_iterations: int = 800
    tolerance: float = 1e-7
    demean: str = "sample-mean"  # sample-mean | zero | supplied
    mean: float | None = None
    variance_init: str = "unconditional"  # unconditional | sample-variance
    compute_stderr: bool = False

    def __post_init__(self):
        if self.max_iterations <= 0:
            raise ValidationError("max_iterations must be > 0")
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be > 0")
        if self.demean not in ("sample-mean", "zero", "supplied"):
            raise ValidationError(f"unknown demean mode {self.demean!r}")
        if self.demean == "supplied" and self.mean is None:
            raise ValidationError("demean='supplied' requires a mean value")
        if self.variance_init not in ("unconditional", "sample-variance"):
            raise ValidationError(f"unknown variance_init mode {self.variance_init!r}")


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters plus diagnostics.

    ``omega_star_hat`` is populated only when a shock window was supplied.
    ``mean`` is the value subtracted from the raw returns before fitting.
    """

    params: GarchParams
    omega_star_hat: float | None
    loglik: float
    converged: bool
    iterations: int
    stderr_proxy: np.ndarray | None
    mean: float


def gaussian_qml_loglik(
    params: GarchParams,
    omega_star: float,
    window: np.ndarray | None,
    returns: np.ndarray,
    covariates: np.ndarray | None = None,
    init: float | None = None,
) -> float:
    """Gaussian QML log-likelihood, constants dropped.

    ``returns`` must already be demeaned.  ``omega_star`` enters the
    intercept on the indices in ``window``.
    """
    a = np.asarray(returns, dtype=float)
    sigma2 = filter_variance(
        params, a, covariates=covariates, omega_star=omega_star, window=window, init=init
    )
    return float(-0.5 * np.sum(np.log(sigma2) + a * a / sigma2))


def _coefs_to_raw(coefs: np.ndarray) -> np.ndarray:
    free = max(1.0 - float(coefs.sum()), _COEF_EPS)
    return np.log(np.maximum(coefs, _COEF_EPS)) - math.log(free)


def _raw_to_coefs(z: np.ndarray) -> np.ndarray:
    if z.size == 0:
        return z
    shift = max(0.0, float(z.max()))
    e = np.exp(z - shift)
    return e / (math.exp(-shift) + e.sum())


def _pack(omega, coefs, gamma, omega_star, with_shock):
    parts = [np.array([math.log(omega)]), _coefs_to_raw(coefs), np.asarray(gamma, dtype=float)]
    if with_shock:
        parts.append(np.array([omega_star]))
    return np.concatenate(parts)


def _unpack(theta, m, s, p, with_shock):
    omega = math.exp(min(float(theta[0]), 60.0))
    coefs = _raw_to_coefs(theta[1 : 1 + m + s])
    gamma = theta[1 + m + s : 1 + m + s + p]
    omega_star = float(theta[-1]) if with_shock else 0.0
    params = GarchParams(omega, coefs[:m], coefs[m:], gamma)
    return params, omega_star


def _stderr_proxy(nll_natural, x_opt: np.ndarray) -> np.ndarray | None:
    """Finite-difference Hessian inverse in the natural parameter space."""
    k = x_opt.size
    h = 1e-4 * np.maximum(np.abs(x_opt), 1e-2)
    hess = np.empty((k, k))
    try:
        for i in range(k):
            for j in range(i, k):
                ei = np.zeros(k)
                ej = np.zeros(k)
                ei[i] = h[i]
                ej[j] = h[j]
                f_pp = nll_natural(x_opt + ei + ej)
                f_pm = nll_natural(x_opt + ei - ej)
                f_mp = nll_natural(x_opt - ei + ej)
                f_mm = nll_natural(x_opt - ei - ej)
                hess[i, j] = hess[j, i] = (f_pp - f_pm - f_mp + f_mm) / (4 * h[i] * h[j])
        cov = np.linalg.pinv(hess)
        diag = np.diag(cov)
        if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
            return None
        return np.sqrt(diag)
    except (ValidationError, NonpositiveVariance, FloatingPointError):
        return None


def _fit(a, covariates, orders, config, window, with_shock):
    m, s = int(orders[0]), int(orders[1])
    if m < 0 or s < 0 or m + s == 0:
        raise ValidationError(f"invalid GARCH orders ({m}, {s})")
    p = 0 if covariates is None else covariates.shape[1]
    sample_var = float(np.var(a))
    if sample_var <= 0 or np.ptp(a) == 0:
        raise DegenerateData("returns have zero variance")

    init_value = None if config.variance_init == "unconditional" else sample_var
    alpha0 = np.full(m, 0.05 / m) if m else np.empty(0)
    beta0 = np.full(s, 0.85 / s) if s else np.empty(0)
    coefs0 = np.concatenate([alpha0, beta0])
    omega0 = sample_var * max(1.0 - coefs0.sum(), 0.05)
    x0 = _pack(omega0, coefs0, np.zeros(p), 0.0, with_shock)

    def nll(theta):
        try:
            params, omega_star = _unpack(theta, m, s, p, with_shock)
            ll = gaussian_qml_loglik(params, omega_star, window, a, covariates, init_value)
        except (NonpositiveVariance, ValidationError, OverflowError):
            return _PENALTY
        if not np.isfinite(ll):
            return _PENALTY
        return -ll

    nm = minimize(
        nll,
        x0,
        method="Nelder-Mead",
        options=dict(
            maxiter=config.max_iterations,
            maxfev=4 * config.max_iterations,
            xatol=1e-6,
            fatol=1e-8,
            adaptive=True,
        ),
    )
    bfgs = minimize(
        nll,
        nm.x,
        method="BFGS",
        options=dict(gtol=config.tolerance, maxiter=200),
    )
    candidates = [
        (nll(x0), x0, False),
        (nm.fun, nm.x, bool(nm.success)),
        (bfgs.fun, bfgs.x, bool(bfgs.success)),
    ]
    best_fun, best_x, converged = min(candidates, key=lambda c: c[0])
    if not np.isfinite(best_fun) or best_fun >= _PENALTY:
        raise DegenerateData("likelihood could not be evaluated at any candidate point")
    params, omega_star = _unpack(best_x, m, s, p, with_shock)
    iterations = int(nm.nit) + int(bfgs.nit)

    stderr = None
    if config.compute_stderr:

        def nll_natural(x):
            om = x[0]
            al = x[1 : 1 + m]
            be = x[1 + m : 1 + m + s]
            ga = x[1 + m + s : 1 + m + s + p]
            os_ = float(x[-1]) if with_shock else 0.0
            pars = GarchParams(om, al, be, ga)
            return -gaussian_qml_loglik(pars, os_, window, a, covariates, init_value)

        x_nat = np.concatenate(
            [
                [params.omega],
                params.alpha,
                params.beta,
                params.gamma,
                [omega_star] if with_shock else [],
            ]
        )
        stderr = _stderr_proxy(nll_natural, x_nat)

    return params, omega_star, -best_fun, converged, iterations, stderr


def _prepare(returns, config):
    r = np.asarray(returns, dtype=float)
    if config.demean == "sample-mean":
        mean = float(r.mean())
    elif config.demean == "zero":
        mean = 0.0
    else:
        mean = float(config.mean)
    return r - mean, mean


def fit_garch(
    returns,
    covariates=None,
    orders=(1, 1),
    config: FitConfig | None = None,
) -> FitResult:
    """Fit a GARCH(m,s)/GARCH-X by Gaussian QML.

    Nelder-Mead on the reparameterized space followed by a BFGS refinement
    pass; the reported point is the best of start, simplex and refinement,
    so the log-likelihood never falls below its value at initialization.
    """
    config = config or FitConfig()
    a, mean = _prepare(returns, config)
    m, s = int(orders[0]), int(orders[1])
    if a.size <= 10 * (m + s + 1):
        raise InsufficientHistory(
            f"need more than {10 * (m + s + 1)} observations for orders ({m}, {s}), got {a.size}"
        )
    cov = None if covariates is None else np.asarray(covariates, dtype=float)
    params, _, loglik, converged, iterations, stderr = _fit(
        a, cov, (m, s), config, window=None, with_shock=False
    )
    return FitResult(params, None, loglik, converged, iterations, stderr, mean)


def fit_shock_fixed_effect(
    returns,
    covariates=None,
    t_star: int = None,
    len_vol: int = 1,
    orders=(1, 1),
    config: FitConfig | None = None,
) -> FitResult:
    """Jointly fit GARCH parameters and a scalar shock fixed effect.

    The shock enters as a single coefficient on the indicator of the
    window ``t_star, ..., t_star + len_vol - 1`` (constant over the
    window).  The sample must contain the whole window.
    """
    config = config or FitConfig()
    a, mean = _prepare(returns, config)
    m, s = int(orders[0]), int(orders[1])
    if a.size <= 10 * (m + s + 1):
        raise InsufficientHistory(
            f"need more than {10 * (m + s + 1)} observations for orders ({m}, {s}), got {a.size}"
        )
    if t_star is None:
        raise ValidationError("t_star is required")
    t_star = int(t_star)
    len_vol = int(len_vol)
    if len_vol < 1:
        raise ValidationError("len_vol must be >= 1")
    if t_star < 1 or t_star + len_vol > a.size:
        raise InvalidShockWindow(
            f"window [{t_star}, {t_star + len_vol}) does not fit a series of length {a.size} "
            "with at least one pre-shock observation"
        )
    window = shock_window(t_star, len_vol)
    cov = None if covariates is None else np.asarray(covariates, dtype=float)
    params, omega_star, loglik, converged, iterations, stderr = _fit(
        a, cov, (m, s), config, window=window, with_shock=True
    )
    return FitResult(params, omega_star, loglik, converged, iterations, stderr, mean)
