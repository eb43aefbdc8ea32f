"""Plain-text model files.

A model file is a list of ``key = value`` lines.  Arrays are written as
space-separated floats, one amplitude row per ``amplitudes.<m>`` key.  Floats
use Python's shortest round-trip repr, so reading a file back reproduces
every parameter bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .forecast import QuantileGrid
from .fourier_network import NetworkParams
from .trainer import TrainConfig

FORMAT_NAME = "qfnn-model"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """The model file is missing, corrupt, or written by an unknown version."""


@dataclass(frozen=True)
class SavedModel:
    """Trained network plus everything needed to forecast in raw units."""

    params: NetworkParams
    config: TrainConfig
    time_offset: float
    time_scale: float
    cadence: float
    train_end: float
    value_offset: float = 0.0
    value_scale: float = 1.0

    @property
    def grid(self) -> QuantileGrid:
        return self.config.grid


def _fmt(x) -> str:
    return repr(float(x))


def _fmt_array(a) -> str:
    return " ".join(_fmt(x) for x in np.asarray(a).reshape(-1))


def dumps(model: SavedModel) -> str:
    p, c = model.params, model.config
    lines = [
        f"format = {FORMAT_NAME}",
        f"version = {FORMAT_VERSION}",
        f"hidden_sinusoids = {p.n_sinusoids}",
        f"n_quantiles = {p.n_quantiles}",
        f"taus = {_fmt_array(c.grid.taus)}",
        f"freqs = {_fmt_array(p.freqs)}",
        f"phases = {_fmt_array(p.phases)}",
        f"trend_in_weight = {_fmt(p.trend_in_weight)}",
        f"trend_in_bias = {_fmt(p.trend_in_bias)}",
    ]
    lines += [f"amplitudes.{m} = {_fmt_array(row)}" for m, row in enumerate(p.amplitudes)]
    lines += [
        f"out_bias = {_fmt_array(p.out_bias)}",
        f"time.offset = {_fmt(model.time_offset)}",
        f"time.scale = {_fmt(model.time_scale)}",
        f"time.cadence = {_fmt(model.cadence)}",
        f"time.train_end = {_fmt(model.train_end)}",
        f"value.offset = {_fmt(model.value_offset)}",
        f"value.scale = {_fmt(model.value_scale)}",
        f"config.epochs = {c.epochs}",
        f"config.learning_rate = {_fmt(c.learning_rate)}",
        f"config.alpha = {_fmt(c.alpha)}",
        f"config.lam = {_fmt(c.lam)}",
        f"config.mix = {_fmt(c.mix)}",
        f"config.l1_epsilon = {_fmt(c.l1_epsilon)}",
        f"config.phase_init = {c.phase_init}",
        f"config.regularize = {c.regularize}",
        "config.lr_overrides = " + ",".join(
            f"{k}:{_fmt(v)}" for k, v in sorted(c.lr_overrides.items())),
    ]
    return "\n".join(lines) + "\n"


def save(model: SavedModel, path) -> None:
    Path(path).write_text(dumps(model))


def _parse_lines(text: str) -> dict:
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ModelFormatError(f"line {lineno}: expected 'key = value'")
        entries[key.strip()] = value.strip()
    return entries


def loads(text: str) -> SavedModel:
    entries = _parse_lines(text)
    if entries.get("format") != FORMAT_NAME:
        raise ModelFormatError("not a qfnn model file (missing or wrong 'format' line)")
    try:
        version = int(entries.get("version", ""))
    except ValueError:
        raise ModelFormatError("model file has no valid 'version' line") from None
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model file version {version} (expected {FORMAT_VERSION})")

    def get(key):
        try:
            return entries[key]
        except KeyError:
            raise ModelFormatError(f"model file is missing {key!r}") from None

    def num(key):
        try:
            value = float(get(key))
        except ValueError:
            raise ModelFormatError(f"{key!r} is not a number") from None
        if not math.isfinite(value):
            raise ModelFormatError(f"{key!r} is not finite")
        return value

    def arr(key):
        raw = get(key)
        try:
            return np.array([float(x) for x in raw.split()])
        except ValueError:
            raise ModelFormatError(f"{key!r} holds a non-numeric entry") from None

    try:
        h = int(get("hidden_sinusoids"))
        m = int(get("n_quantiles"))
        overrides = {}
        for item in filter(None, get("config.lr_overrides").split(",")):
            name, _, value = item.partition(":")
            overrides[name.strip()] = float(value)
        grid = QuantileGrid(arr("taus"))
        params = NetworkParams(
            freqs=arr("freqs"),
            phases=arr("phases"),
            trend_in_weight=num("trend_in_weight"),
            trend_in_bias=num("trend_in_bias"),
            amplitudes=np.vstack([arr(f"amplitudes.{i}") for i in range(m)]),
            out_bias=arr("out_bias"),
        )
        if params.n_sinusoids != h or params.n_quantiles != m or len(grid) != m:
            raise ModelFormatError("declared sizes do not match the stored arrays")
        config = TrainConfig(
            epochs=int(get("config.epochs")),
            learning_rate=num("config.learning_rate"),
            alpha=num("config.alpha"),
            lam=num("config.lam"),
            mix=num("config.mix"),
            hidden_sinusoids=h,
            grid=grid,
            phase_init=get("config.phase_init"),
            l1_epsilon=num("config.l1_epsilon"),
            regularize=get("config.regularize"),
            lr_overrides=overrides,
        )
        return SavedModel(
            params=params,
            config=config,
            time_offset=num("time.offset"),
            time_scale=num("time.scale"),
            cadence=num("time.cadence"),
            train_end=num("time.train_end"),
            value_offset=num("value.offset"),
            value_scale=num("value.scale"),
        )
    except ModelFormatError:
        raise
    except ValueError as exc:
        raise ModelFormatError(f"invalid model file: {exc}") from None


def load(path) -> SavedModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model file not found: {path}")
    return loads(path.read_text())
