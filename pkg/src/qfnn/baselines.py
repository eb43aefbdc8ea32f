"""Reference density forecasts: uniform, persistence and climatology.

Each baseline is a single distribution, so the returned forecast repeats the
same quantile row at every requested time.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erfc

from .forecast import QuantileForecast, QuantileGrid

# Acklam's rational approximation coefficients (relative error ~1e-9 before refinement)
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _lower_half_ppf(p: np.ndarray) -> np.ndarray:
    """Inverse normal CDF for ``0 < p <= 0.5``."""
    x = np.empty_like(p)
    tail = p < _P_LOW
    if np.any(tail):
        q = np.sqrt(-2.0 * np.log(p[tail]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[tail] = num / den
    mid = ~tail
    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num / den
    # one Halley step against the erfc-based CDF
    err = 0.5 * erfc(-x / np.sqrt(2.0)) - p
    u = err * np.sqrt(2.0 * np.pi) * np.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def inverse_normal_cdf(p):
    """Standard normal quantile function for ``p`` strictly inside (0, 1).

    The upper half is obtained by symmetry, which keeps the result exactly
    antisymmetric and avoids cancellation in ``Phi(x) - p`` near 1.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise ValueError("p must lie strictly inside (0, 1)")
    flat = arr.reshape(-1)
    upper = flat > 0.5
    lower_p = np.where(upper, 1.0 - flat, flat)
    x = _lower_half_ppf(lower_p)
    x = np.where(upper, -x, x)
    x[flat == 0.5] = 0.0
    x = x.reshape(arr.shape)
    return x if x.ndim else float(x)


def _replicate(row: np.ndarray, grid: QuantileGrid, times) -> QuantileForecast:
    times = np.zeros(1) if times is None else np.asarray(times, dtype=float).reshape(-1)
    return QuantileForecast(times=times, grid=grid, values=np.tile(row, (times.size, 1)))


def _values(values, minimum: int, name: str) -> np.ndarray:
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size < minimum:
        raise ValueError(f"{name} needs at least {minimum} value(s), got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} values must be finite")
    return v


def climatology(train_values, grid: QuantileGrid, times=None) -> QuantileForecast:
    """Empirical quantiles of every training value (linear interpolation
    between order statistics at 0-based position ``(n-1)*tau``)."""
    v = _values(train_values, 1, "climatology")
    row = np.quantile(v, grid.taus, method="linear")
    # interpolation can round a hair below the previous level on ties
    row = np.maximum.accumulate(row)
    return _replicate(row, grid, times)


def persistence(recent_values, grid: QuantileGrid, times=None) -> QuantileForecast:
    """Normal distribution fitted to a recent window (sample mean, n-1 std)."""
    v = _values(recent_values, 2, "persistence")
    mu = float(v.mean())
    sigma = float(v.std(ddof=1))
    if sigma == 0.0:
        row = np.full(len(grid), mu)
    else:
        row = mu + sigma * inverse_normal_cdf(grid.taus)
    return _replicate(row, grid, times)


def uniform(train_values, grid: QuantileGrid, times=None) -> QuantileForecast:
    """Uniform distribution over the observed ``[min, max]`` range."""
    v = _values(train_values, 1, "uniform")
    lo, hi = float(v.min()), float(v.max())
    return _replicate(lo + grid.taus * (hi - lo), grid, times)


BASELINES = {
    "uniform": uniform,
    "persistence": persistence,
    "climatology": climatology,
}
