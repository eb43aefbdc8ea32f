"""Quantile grid and forecast containers shared across the package."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class QuantileGrid:
    """Strictly increasing quantile levels, all inside (0, 1)."""

    taus: np.ndarray

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float).reshape(-1)
        if taus.size == 0:
            raise ValueError("quantile grid must contain at least one level")
        if not np.all(np.isfinite(taus)) or taus[0] <= 0.0 or taus[-1] >= 1.0:
            raise ValueError("quantile levels must lie strictly inside (0, 1)")
        if np.any(np.diff(taus) <= 0.0):
            raise ValueError("quantile levels must be strictly increasing")
        taus.setflags(write=False)
        object.__setattr__(self, "taus", taus)

    @classmethod
    def uniform(cls, m: int = 100, low: float = 0.01, high: float = 0.99) -> QuantileGrid:
        """``m`` equally spaced levels from ``low`` to ``high`` inclusive."""
        if m < 1:
            raise ValueError("m must be positive")
        if m == 1:
            return cls(np.array([0.5 * (low + high)]))
        return cls(np.linspace(low, high, m))

    def __len__(self) -> int:
        return self.taus.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantileGrid):
            return NotImplemented
        return np.array_equal(self.taus, other.taus)

    def __hash__(self) -> int:
        return hash(self.taus.tobytes())


@dataclass(frozen=True)
class QuantileForecast:
    """An N x M matrix of quantile estimates at ``times`` for levels ``grid``."""

    times: np.ndarray
    grid: QuantileGrid
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float)
        if values.size == 0:
            values = values.reshape(times.size, len(self.grid))
        if values.shape != (times.size, len(self.grid)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"({times.size}, {len(self.grid)})"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("forecast values must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def horizon(self) -> int:
        return self.times.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantileForecast):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


class ForecastFileError(ValueError):
    """A forecast CSV does not follow the ``time,tau_<level>,...`` layout."""


def _level_label(tau: float) -> str:
    return f"tau_{float(tau)!r}"


def write_forecast_csv(path, forecast: QuantileForecast) -> None:
    """One row per time: ``time,tau_<level>,...`` with round-trip float text."""
    header = ",".join(["time"] + [_level_label(t) for t in forecast.grid.taus])
    lines = [header]
    for t, row in zip(forecast.times, forecast.values):
        lines.append(",".join([repr(float(t))] + [repr(float(v)) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_forecast_csv(path) -> QuantileForecast:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"forecast file not found: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ForecastFileError(f"{path} is empty")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2 or header[0] != "time" or not all(h.startswith("tau_") for h in header[1:]):
        raise ForecastFileError(f"{path}: header must be 'time,tau_<level>,...'")
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise ForecastFileError(
                f"{path}: row {lineno} has {len(r)} fields, expected {len(header)}")
    try:
        grid = QuantileGrid(np.array([float(h[4:]) for h in header[1:]]))
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ForecastFileError(f"{path}: {exc}") from None
    data = data.reshape(-1, len(header))
    return QuantileForecast(times=data[:, 0], grid=grid, values=data[:, 1:])
