"""Time series container, CSV ingestion and train/test preparation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np


class CSVFormatError(ValueError):
    """Raised when an input CSV cannot be turned into a time series."""


@dataclass(frozen=True)
class TimeSeries:
    """Observations ``values`` at strictly increasing ``raw_times``.

    ``times`` (the model's input axis) is ``(raw_times - norm_offset) / norm_scale``.
    ``value_offset``/``value_scale`` describe an optional min-max scaling of
    the values; with the defaults (0, 1) values are used as-is.
    """

    raw_times: np.ndarray
    values: np.ndarray
    norm_offset: float = 0.0
    norm_scale: float = 1.0
    value_offset: float = 0.0
    value_scale: float = 1.0

    def __post_init__(self):
        t = np.asarray(self.raw_times, dtype=float).reshape(-1)
        y = np.asarray(self.values, dtype=float).reshape(-1)
        if t.shape != y.shape:
            raise ValueError(f"{t.size} times but {y.size} values")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
            raise ValueError("times and values must be finite")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if not (self.norm_scale > 0 and math.isfinite(self.norm_scale)):
            raise ValueError("norm_scale must be positive")
        if not (self.value_scale > 0 and math.isfinite(self.value_scale)):
            raise ValueError("value_scale must be positive")
        object.__setattr__(self, "raw_times", t)
        object.__setattr__(self, "values", y)

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        """Normalized time axis."""
        return (self.raw_times - self.norm_offset) / self.norm_scale

    @property
    def scaled_values(self) -> np.ndarray:
        """Values after the (optional) min-max scaling."""
        return (self.values - self.value_offset) / self.value_scale

    def normalize_time(self, raw_times) -> np.ndarray:
        return (np.asarray(raw_times, dtype=float) - self.norm_offset) / self.norm_scale

    def denormalize_time(self, times) -> np.ndarray:
        return np.asarray(times, dtype=float) * self.norm_scale + self.norm_offset

    def unscale_values(self, scaled) -> np.ndarray:
        return np.asarray(scaled, dtype=float) * self.value_scale + self.value_offset


def _parse_float(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell.strip())
    except ValueError:
        raise CSVFormatError(f"row {row}: cannot parse {cell!r} in column {column} as a number") from None
    if not math.isfinite(value):
        raise CSVFormatError(f"row {row}: non-finite value {cell!r} in column {column}")
    return value


def _resolve_column(selector, header, width):
    if selector is None:
        return None
    if isinstance(selector, int) or (isinstance(selector, str) and selector.lstrip("-").isdigit()):
        idx = int(selector)
        if not -width <= idx < width:
            raise CSVFormatError(f"column index {idx} out of range for {width} columns")
        return idx % width
    if header is None:
        raise CSVFormatError(f"column {selector!r} given by name but the file has no header")
    try:
        return header.index(selector)
    except ValueError:
        raise CSVFormatError(f"no column named {selector!r}; header is {header}") from None


def load_csv(path, time_column=None, value_column=None, has_header=None) -> TimeSeries:
    """Read a ``time,value`` (or single value column) CSV into a TimeSeries.

    Columns may be selected by name or 0-based index.  ``value_column``
    defaults to the last column.  ``time_column`` defaults to the first column
    when that is not the value column; ``"index"`` (or a single-column file)
    uses the row index 0..N-1 as time.  ``has_header=None`` sniffs the header: the first row
    counts as a header when any of its cells fails to parse as a number.
    Parsing always uses ``.`` as the decimal separator.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise CSVFormatError(f"{path} is empty")

    if has_header is None:
        has_header = any(_is_not_number(c) for c in rows[0])
    header = [c.strip() for c in rows[0]] if has_header else None
    body = rows[1:] if has_header else rows
    if not body:
        raise CSVFormatError(f"{path} has no data rows")
    width = len(header) if header else len(body[0])

    v_idx = _resolve_column(value_column, header, width)
    if v_idx is None:
        v_idx = width - 1
    if time_column == "index":
        t_idx = None
    elif time_column is None:
        # auto: first column is time unless it is the only column or the value column
        t_idx = 0 if width >= 2 and v_idx != 0 else None
    else:
        t_idx = _resolve_column(time_column, header, width)

    first_row = 2 if has_header else 1
    times, values = [], []
    for offset, row in enumerate(body):
        lineno = first_row + offset
        if len(row) != width:
            raise CSVFormatError(f"row {lineno}: expected {width} columns, found {len(row)}")
        values.append(_parse_float(row[v_idx], lineno, header[v_idx] if header else str(v_idx)))
        if t_idx is None:
            times.append(float(offset))
        else:
            times.append(_parse_float(row[t_idx], lineno, header[t_idx] if header else str(t_idx)))

    t = np.array(times)
    bad = np.flatnonzero(np.diff(t) <= 0.0)
    if bad.size:
        raise CSVFormatError(f"row {first_row + bad[0] + 1}: times must be strictly increasing")
    return TimeSeries(t, np.array(values))


def _is_not_number(cell: str) -> bool:
    try:
        float(cell.strip())
    except ValueError:
        return True
    return False


def split_and_normalize(series: TimeSeries, train_fraction: float,
                        scale_values: bool = False) -> tuple[TimeSeries, TimeSeries]:
    """Split at ``floor(N * train_fraction)`` and map the training span onto [0, 1].

    Both halves share the training normalization constants, so test times
    land beyond 1.  With ``scale_values`` the values are min-max scaled
    using the training range (constants stored on both halves).
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(series)
    n_train = math.floor(n * train_fraction)
    if n_train < 2 or n_train >= n:
        raise ValueError(f"split of {n} points at fraction {train_fraction} leaves an empty or "
                         "single-point partition")
    t = series.raw_times
    offset = float(t[0])
    scale = float(t[n_train - 1] - t[0])
    if not scale > 0:
        raise ValueError("training span has zero length")

    v_off, v_scale = 0.0, 1.0
    if scale_values:
        lo, hi = float(series.values[:n_train].min()), float(series.values[:n_train].max())
        v_off, v_scale = lo, (hi - lo) if hi > lo else 1.0

    base = replace(series, norm_offset=offset, norm_scale=scale,
                   value_offset=v_off, value_scale=v_scale)
    train = replace(base, raw_times=t[:n_train], values=series.values[:n_train])
    test = replace(base, raw_times=t[n_train:], values=series.values[n_train:])
    return train, test


def write_series_csv(path, series: TimeSeries) -> None:
    """Write raw times and values as ``time,value`` with round-trip float formatting."""
    with Path(path).open("w", newline="") as fh:
        fh.write("time,value\n")
        for t, y in zip(series.raw_times, series.values):
            fh.write(f"{float(t)!r},{float(y)!r}\n")
