"""Bundled synthetic seasonal series with known quantiles.

``y_t = 10 + 2 r + 3 sin(8 pi r) + eps_t`` with ``r = t / 1000`` for
``t = 0 .. 1199``.  The noise comes from a recorded table of standard
normal draws shipped with the package, so every run sees the same data.
The first 1000 points are the training span, the last 200 the test span.
"""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .baselines import inverse_normal_cdf
from .data import TimeSeries, write_series_csv
from .trainer import TrainConfig

N_TRAIN = 1000
N_TEST = 200
TRAIN_FRACTION = N_TRAIN / (N_TRAIN + N_TEST)

# noise table generated once with numpy.random.default_rng(20180101).standard_normal(1200)
_NOISE_FILE = "noise_table.csv"
CONFIG_FILE = "synthetic.conf"


def config_path():
    """Location of the bundled ``qfnn train --config`` file for this series."""
    return resources.files("qfnn.resources").joinpath(CONFIG_FILE)


def training_config() -> TrainConfig:
    """The bundled config file as a :class:`TrainConfig`."""
    raw = {}
    for line in config_path().read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()
    overrides = {}
    for item in raw.get("lr_override", "").split(","):
        if item.strip():
            name, _, rate = item.partition("=")
            overrides[name.strip()] = float(rate)
    return TrainConfig(
        epochs=int(raw["epochs"]),
        learning_rate=float(raw["learning_rate"]),
        lam=float(raw["lam"]),
        lr_overrides=overrides,
    )


def noise_table() -> np.ndarray:
    text = resources.files("qfnn.resources").joinpath(_NOISE_FILE).read_text()
    return np.array([float(x) for x in text.split()[1:]])


def signal(times) -> np.ndarray:
    """Noise-free component at raw times ``t`` (mean and median of ``y_t``)."""
    r = np.asarray(times, dtype=float) / N_TRAIN
    return 10.0 + 2.0 * r + 3.0 * np.sin(2.0 * np.pi * r * 4.0)


def true_quantiles(times, taus) -> np.ndarray:
    """Exact ``(len(times), len(taus))`` quantiles of the noisy series."""
    return signal(times)[:, None] + inverse_normal_cdf(np.asarray(taus, dtype=float))[None, :]


def seasonal_series(noise=None) -> TimeSeries:
    eps = noise_table() if noise is None else np.asarray(noise, dtype=float)
    t = np.arange(eps.size, dtype=float)
    return TimeSeries(t, signal(t) + eps)


def main(argv=None) -> int:
    """``python -m qfnn.synthetic DIR`` writes ``synthetic.csv`` and ``synthetic.conf``."""
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m qfnn.synthetic OUTPUT_DIR", file=sys.stderr)
        return 1
    out = Path(argv[0])
    out.mkdir(parents=True, exist_ok=True)
    write_series_csv(out / "synthetic.csv", seasonal_series())
    (out / CONFIG_FILE).write_text(config_path().read_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
