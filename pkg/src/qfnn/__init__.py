"""Composite quantile forecasting with a Fourier neural network that takes
time as its only input."""

from .data import TimeSeries, load_csv, split_and_normalize
from .forecast import QuantileForecast, QuantileGrid
from .fourier_network import NetworkParams, backward, forward, init_params, predict_quantiles
from .quantile_loss import LossConfig, pinball, smooth_pinball, total_cost
from .trainer import TrainConfig, TrainReport, fit, gradient_check

__all__ = [
    "LossConfig",
    "NetworkParams",
    "QuantileForecast",
    "QuantileGrid",
    "TimeSeries",
    "TrainConfig",
    "TrainReport",
    "backward",
    "fit",
    "forward",
    "gradient_check",
    "init_params",
    "load_csv",
    "pinball",
    "predict_quantiles",
    "smooth_pinball",
    "split_and_normalize",
    "total_cost",
]

__version__ = "0.1.0"
