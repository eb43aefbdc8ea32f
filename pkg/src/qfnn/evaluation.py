"""Scoring and diagnostics for quantile forecasts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forecast import QuantileForecast, QuantileGrid
from .quantile_loss import pinball

__all__ = [
    "QuantileGrid",
    "QuantileForecast",
    "PredictionInterval",
    "quantile_score",
    "empirical_coverage",
    "coverage_table",
    "build_intervals",
    "crossing_rate",
    "rearrange",
]


@dataclass(frozen=True)
class PredictionInterval:
    """Band between the quantile curves at levels ``tau_lower < tau_upper``.

    ``beta`` follows the labelling ``tau_upper - tau_lower = 1 - beta``.
    ``nominal_coverage`` is the probability mass between the two levels,
    ``tau_upper - tau_lower``, i.e. the usual coverage label.
    """

    beta: float
    nominal_coverage: float
    tau_lower: float
    tau_upper: float
    lower: np.ndarray
    upper: np.ndarray


def _actuals(actuals, forecast: QuantileForecast) -> np.ndarray:
    y = np.asarray(actuals, dtype=float).reshape(-1)
    if y.size != forecast.horizon:
        raise ValueError(f"{y.size} actuals for a forecast of {forecast.horizon} steps")
    return y


def quantile_score(actuals, forecast: QuantileForecast, averaged: bool = True) -> float:
    """Pinball loss summed over every step and level; ``averaged`` divides by N*M."""
    y = _actuals(actuals, forecast)
    losses = pinball(y[:, None] - forecast.values, forecast.grid.taus[None, :])
    total = float(np.sum(losses))
    if averaged:
        if losses.size == 0:
            raise ValueError("cannot average the score of an empty forecast")
        return total / losses.size
    return total


def empirical_coverage(actuals, forecast: QuantileForecast, m: int) -> float:
    """Fraction of steps where the observation is at or below quantile ``m``."""
    y = _actuals(actuals, forecast)
    if not 0 <= m < len(forecast.grid):
        raise ValueError(f"quantile index {m} out of range for {len(forecast.grid)} levels")
    if y.size == 0:
        raise ValueError("coverage of an empty forecast is undefined")
    return float(np.mean(y <= forecast.values[:, m]))


def coverage_table(actuals, forecast: QuantileForecast) -> np.ndarray:
    """Empirical coverage for every level of the grid."""
    y = _actuals(actuals, forecast)
    if y.size == 0:
        raise ValueError("coverage of an empty forecast is undefined")
    return np.mean(y[:, None] <= forecast.values, axis=0)


def build_intervals(forecast: QuantileForecast) -> list[PredictionInterval]:
    """Pair level ``i`` with level ``M-1-i`` (0-based) into M/2 nested bands,
    outermost first."""
    taus = forecast.grid.taus
    m = taus.size
    if m % 2:
        raise ValueError(f"interval pairing needs an even number of levels, got {m}")
    out = []
    for i in range(m // 2):
        lo, hi = i, m - 1 - i
        width = float(taus[hi] - taus[lo])
        out.append(PredictionInterval(
            beta=1.0 - width,
            nominal_coverage=width,
            tau_lower=float(taus[lo]),
            tau_upper=float(taus[hi]),
            lower=forecast.values[:, lo].copy(),
            upper=forecast.values[:, hi].copy(),
        ))
    return out


def crossing_rate(forecast: QuantileForecast) -> float:
    """Share of adjacent level pairs (over all steps) whose order is inverted."""
    if len(forecast.grid) < 2:
        raise ValueError("crossing rate needs at least two quantile levels")
    steps = np.diff(forecast.values, axis=1)
    if steps.size == 0:
        return 0.0
    return float(np.mean(steps < 0.0))


def rearrange(forecast: QuantileForecast) -> QuantileForecast:
    """Monotone rearrangement: sort each step's quantile values ascending."""
    return QuantileForecast(
        times=forecast.times.copy(),
        grid=forecast.grid,
        values=np.sort(forecast.values, axis=1),
    )
