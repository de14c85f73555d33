"""Realized-volatility ground truth and forecast loss functions."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, time, timedelta

import numpy as np

from .errors import (
    BlockCountMismatch,
    DomainError,
    NonpositiveGroundTruth,
    NonpositiveInput,
    ValidationError,
)


@dataclass(frozen=True)
class RVConfig:
    """Realized-volatility layout: K days of m intraday blocks each.

    ``m`` is the post-omission block count (77 for a 6.5-hour session in
    5-minute blocks with the opening block dropped).  Set
    ``drop_first_block`` when the supplied block returns still include the
    opening block, i.e. m+1 values per day.
    """

    K: int = 1
    m: int = 77
    drop_first_block: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ValidationError("K must be >= 1")
        if self.m < 1:
            raise ValidationError("m must be >= 1")


@dataclass(frozen=True)
class LossTriple:
    mse: float
    ape: float
    ql: float


def realized_volatility(block_returns, config: RVConfig) -> float:
    """Average daily sum of squared block log returns.

    ``block_returns`` is a K x m array (or K x (m+1) before the optional
    first-block drop); a single day may be passed as a flat vector.
    """
    blocks = np.asarray(block_returns, dtype=float)
    if blocks.ndim == 1:
        blocks = blocks[None, :]
    if blocks.ndim != 2:
        raise ValidationError("block_returns must be a vector or a K x m matrix")
    expected_cols = config.m + (1 if config.drop_first_block else 0)
    if blocks.shape[0] != config.K or blocks.shape[1] != expected_cols:
        raise BlockCountMismatch(
            f"expected {config.K} day(s) of {expected_cols} block(s), "
            f"got {blocks.shape[0]} x {blocks.shape[1]}"
        )
    if config.drop_first_block:
        blocks = blocks[:, 1:]
    return float(np.sum(blocks * blocks) / config.K)


def intraday_block_returns(
    timestamps,
    prices,
    block_minutes: int = 5,
    session_start: time = time(9, 35),
    session_end: time = time(16, 0),
) -> np.ndarray:
    """Block log returns from a tick series on a fixed intraday grid.

    Prices are sampled last-tick-before-boundary on the grid from
    ``session_start`` to ``session_end``; starting at 9:35 drops the
    opening 9:30-9:35 block.  Days with a boundary not covered by any
    tick are a hard error, never imputed.
    """
    ts = [t if isinstance(t, datetime) else datetime.fromisoformat(str(t)) for t in timestamps]
    px = np.asarray(prices, dtype=float)
    if len(ts) != px.size:
        raise ValidationError("timestamps and prices must have the same length")
    if px.size == 0:
        raise ValidationError("empty intraday series")
    if np.any(px <= 0):
        raise ValidationError("prices must be strictly positive")
    order = sorted(range(len(ts)), key=lambda i: ts[i])
    ts = [ts[i] for i in order]
    px = px[order]

    days: dict = {}
    for t, p in zip(ts, px):
        days.setdefault(t.date(), []).append((t, p))

    span = datetime.combine(datetime.min, session_end) - datetime.combine(
        datetime.min, session_start
    )
    n_blocks = int(span.total_seconds() // (60 * block_minutes))
    if n_blocks < 1:
        raise ValidationError("session is shorter than one block")

    out = []
    for day in sorted(days):
        ticks = days[day]
        boundaries = [
            datetime.combine(day, session_start) + timedelta(minutes=block_minutes * i)
            for i in range(n_blocks + 1)
        ]
        sampled = np.empty(n_blocks + 1)
        j = 0
        last = None
        for i, bound in enumerate(boundaries):
            while j < len(ticks) and ticks[j][0] <= bound:
                last = ticks[j][1]
                j += 1
            if last is None:
                raise BlockCountMismatch(
                    f"{day}: no tick at or before {bound.time()}; day has a missing block"
                )
            sampled[i] = last
        logp = np.log(sampled)
        out.append(np.diff(logp))
    return np.vstack(out)


def _positive_pair(prediction, ground_truth):
    p = np.asarray(prediction, dtype=float)
    g = np.asarray(ground_truth, dtype=float)
    if np.any(p <= 0) or np.any(g <= 0):
        raise NonpositiveInput("prediction and ground truth must be strictly positive")
    return p, g


def ql_loss(prediction, ground_truth):
    """Quasi-likelihood loss x - log(x) - 1 with x = truth / prediction."""
    p, g = _positive_pair(prediction, ground_truth)
    x = g / p
    out = x - np.log(x) - 1.0
    return float(out) if out.ndim == 0 else out


def mse_loss(prediction, ground_truth):
    """Squared error."""
    p = np.asarray(prediction, dtype=float)
    g = np.asarray(ground_truth, dtype=float)
    out = (p - g) ** 2
    return float(out) if out.ndim == 0 else out


def ape_loss(prediction, ground_truth):
    """Absolute percentage error |prediction - truth| / truth."""
    p = np.asarray(prediction, dtype=float)
    g = np.asarray(ground_truth, dtype=float)
    if np.any(g <= 0):
        raise NonpositiveGroundTruth("APE requires a strictly positive ground truth")
    out = np.abs(p - g) / g
    return float(out) if out.ndim == 0 else out


def loss_triple(prediction: float, ground_truth: float) -> LossTriple:
    """All three losses for one (prediction, truth) pair."""
    return LossTriple(
        mse=mse_loss(prediction, ground_truth),
        ape=ape_loss(prediction, ground_truth),
        ql=ql_loss(prediction, ground_truth),
    )


def ql_advantage(omega_star: float, sigma2: float) -> float:
    """Asymptotic QL improvement of the adjusted over the unadjusted forecast.

    g(x) = x / (sigma2 - x) + log((sigma2 - x) / sigma2), nonnegative and
    convex on x < sigma2 with its minimum g(0) = 0.
    """
    omega_star = float(omega_star)
    sigma2 = float(sigma2)
    if sigma2 <= 0:
        raise DomainError("sigma2 must be > 0")
    if omega_star >= sigma2:
        raise DomainError(f"omega_star={omega_star} must be < sigma2={sigma2}")
    return omega_star / (sigma2 - omega_star) + np.log1p(-omega_star / sigma2)
