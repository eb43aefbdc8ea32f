"""Full-batch gradient descent for the quantile Fourier network."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np

from .data import TimeSeries
from .forecast import QuantileGrid
from .fourier_network import (
    PARAM_GROUPS,
    PHASE_INITS,
    REGULARIZE_CHOICES,
    Gradients,
    NetworkParams,
    backward,
    cost,
    forward,
    init_params,
)
from .quantile_loss import LossConfig, elastic_net_penalty, smooth_pinball


class TrainingDivergedError(RuntimeError):
    """The training cost (or a parameter) became non-finite."""

    def __init__(self, epoch: int, detail: str = "non-finite cost"):
        super().__init__(f"training diverged at epoch {epoch}: {detail}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters.

    ``lr_overrides`` maps parameter-group names (``freqs``, ``phases``,
    ``trend_in_weight``, ``trend_in_bias``, ``amplitudes``, ``out_bias``) to a
    learning rate that replaces ``learning_rate`` for that group.
    """

    epochs: int = 1000
    learning_rate: float = 0.1
    alpha: float = 0.01
    lam: float = 0.1
    mix: float = 0.5
    hidden_sinusoids: int = 20
    grid: QuantileGrid = field(default_factory=QuantileGrid.uniform)
    phase_init: str = "zero"
    l1_epsilon: float = 1e-8
    regularize: str = "amplitudes"
    lr_overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.epochs, (int, np.integer)) or self.epochs < 0:
            raise ValueError(f"epochs must be a nonnegative integer, got {self.epochs!r}")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not isinstance(self.hidden_sinusoids, (int, np.integer)) or self.hidden_sinusoids < 1:
            raise ValueError(f"hidden_sinusoids must be a positive integer, got {self.hidden_sinusoids!r}")
        if not isinstance(self.grid, QuantileGrid):
            object.__setattr__(self, "grid", QuantileGrid(self.grid))
        if self.phase_init not in PHASE_INITS:
            raise ValueError(f"phase_init must be one of {PHASE_INITS}, got {self.phase_init!r}")
        if self.regularize not in REGULARIZE_CHOICES:
            raise ValueError(f"regularize must be one of {REGULARIZE_CHOICES}, got {self.regularize!r}")
        for name, lr in self.lr_overrides.items():
            if name not in PARAM_GROUPS:
                raise ValueError(f"unknown parameter group {name!r} in lr_overrides")
            if not (lr >= 0 and math.isfinite(lr)):
                raise ValueError(f"learning rate for {name} must be nonnegative, got {lr}")
        object.__setattr__(self, "lr_overrides", dict(self.lr_overrides))
        self.loss_config()  # validates alpha / lam / mix / l1_epsilon

    def loss_config(self) -> LossConfig:
        return LossConfig(alpha=self.alpha, lam=self.lam, mix=self.mix, l1_epsilon=self.l1_epsilon)

    def lr_for(self, group: str) -> float:
        return self.lr_overrides.get(group, self.learning_rate)


@dataclass(frozen=True)
class TrainReport:
    cost_history: np.ndarray
    final_params: NetworkParams
    epochs_run: int
    initial_params: NetworkParams
    final_cost: float


def _step(params: NetworkParams, grads: Gradients, cfg: TrainConfig) -> dict:
    return {
        name: getattr(params, name) - cfg.lr_for(name) * getattr(grads, name)
        for name in PARAM_GROUPS
    }


def fit(train: TimeSeries, cfg: TrainConfig,
        on_epoch: Optional[Callable[[int, float], None]] = None) -> TrainReport:
    """Initialize and run exactly ``cfg.epochs`` full-batch descent steps.

    ``cost_history[i]`` is the cost evaluated before update ``i``.  The cost
    of the returned parameters is ``final_cost``.  ``on_epoch(epoch, cost)``
    is called once per epoch, before the update.
    """
    loss_cfg = cfg.loss_config()
    params = init_params(cfg.hidden_sinusoids, len(cfg.grid), train, cfg.phase_init)
    initial = params
    history = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        # overflow surfaces as a non-finite cost and is reported below
        with np.errstate(over="ignore", invalid="ignore"):
            value, grads = backward(params, train, cfg.grid, loss_cfg, cfg.regularize)
        if not math.isfinite(value):
            raise TrainingDivergedError(epoch)
        history[epoch] = value
        if on_epoch is not None:
            on_epoch(epoch, value)
        updated = _step(params, grads, cfg)
        if not all(np.all(np.isfinite(v)) for v in updated.values()):
            raise TrainingDivergedError(epoch, "non-finite parameter after update")
        params = NetworkParams(**updated)
    with np.errstate(over="ignore", invalid="ignore"):
        final_cost = cost(params, train, cfg.grid, loss_cfg, cfg.regularize)
    if not math.isfinite(final_cost):
        raise TrainingDivergedError(cfg.epochs)
    return TrainReport(history, params, cfg.epochs, initial, final_cost)


def numerical_gradient(params: NetworkParams, train: TimeSeries, cfg: TrainConfig,
                       step: float = 1e-6) -> Gradients:
    """Central finite differences of the training cost for every parameter.

    Shared parameters (frequencies, phases, trend unit) perturb the full cost.
    A per-head parameter only moves one output column, so for those the
    difference is taken over that column's loss sum and the penalty terms the
    parameter touches; this is the same difference of the same cost, with
    less cancellation error.
    """
    if not step > 0:
        raise ValueError(f"finite-difference step must be positive, got {step}")
    loss_cfg = cfg.loss_config()
    grid = cfg.grid

    def full_cost(**changes):
        return cost(replace(params, **changes), train, grid, loss_cfg, cfg.regularize)

    def shared(name):
        base = np.array(getattr(params, name), dtype=float)
        if base.ndim == 0:
            return (full_cost(**{name: float(base) + step})
                    - full_cost(**{name: float(base) - step})) / (2 * step)
        out = np.empty_like(base)
        for i in range(base.size):
            plus, minus = base.copy(), base.copy()
            plus[i] += step
            minus[i] -= step
            out[i] = (full_cost(**{name: plus}) - full_cost(**{name: minus})) / (2 * step)
        return out

    g_freqs = shared("freqs")
    g_phases = shared("phases")
    g_tw = shared("trend_in_weight")
    g_tb = shared("trend_in_bias")

    y = train.scaled_values
    qhat, hidden = forward(params, train.times)
    n, m = qhat.shape
    scale = 1.0 / (n * m)
    amps, bias = params.amplitudes, params.out_bias
    reg_all = cfg.regularize == "all"

    def penalty_delta(w):
        if cfg.lam == 0.0:
            return np.zeros_like(w)
        plus = np.array([elastic_net_penalty([x + step], loss_cfg) for x in w.reshape(-1)])
        minus = np.array([elastic_net_penalty([x - step], loss_cfg) for x in w.reshape(-1)])
        return (plus - minus).reshape(w.shape)

    g_amp = np.empty_like(amps)
    g_bias = np.empty_like(bias)
    for j in range(m):
        tau = grid.taus[j]
        col = qhat[:, j][:, None]
        # columns 0..H: amplitude perturbations; last column: output-bias perturbation
        direction = np.column_stack([hidden, np.ones(n)])
        up = np.sum(smooth_pinball(y[:, None] - (col + step * direction), tau, cfg.alpha), axis=0)
        down = np.sum(smooth_pinball(y[:, None] - (col - step * direction), tau, cfg.alpha), axis=0)
        diff = scale * (up - down)
        g_amp[j] = diff[:-1]
        g_bias[j] = diff[-1]
    g_amp = (g_amp + penalty_delta(amps)) / (2 * step) if cfg.lam else g_amp / (2 * step)
    g_bias = (g_bias + penalty_delta(bias)) / (2 * step) if (cfg.lam and reg_all) else g_bias / (2 * step)
    return Gradients(g_freqs, g_phases, g_tw, g_tb, g_amp, g_bias)


def gradient_errors(analytic: Gradients, numeric: Gradients, abs_floor: float = 1e-8) -> dict:
    """Worst relative error per parameter group.

    Entries whose absolute disagreement is at most ``abs_floor`` count as
    exact, which keeps near-zero gradients from producing meaningless ratios.
    """
    out = {}
    for name in PARAM_GROUPS:
        a = np.atleast_1d(np.asarray(getattr(analytic, name), dtype=float))
        b = np.atleast_1d(np.asarray(getattr(numeric, name), dtype=float))
        diff = np.abs(a - b)
        denom = np.maximum(np.abs(a), np.abs(b))
        rel = np.where(diff <= abs_floor, 0.0, diff / np.where(denom > 0, denom, 1.0))
        out[name] = float(rel.max()) if rel.size else 0.0
    return out


def gradient_check(params: NetworkParams, train: TimeSeries, cfg: TrainConfig,
                   step: float = 1e-6) -> float:
    """Largest relative disagreement between :func:`backward` and finite differences."""
    if not step > 0:
        raise ValueError(f"finite-difference step must be positive, got {step}")
    _, analytic = backward(params, train, cfg.grid, cfg.loss_config(), cfg.regularize)
    numeric = numerical_gradient(params, train, cfg, step)
    return max(gradient_errors(analytic, numeric).values())
