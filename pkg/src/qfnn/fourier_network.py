"""Quantile Fourier network: one hidden layer of cosine units plus an affine
trend unit, feeding M linear output heads (one per quantile level).

For normalized time ``t`` the hidden layer is::

    h_k(t) = cos(freqs[k] * t + phases[k])        k = 0 .. H-1
    h_H(t) = trend_in_weight * t + trend_in_bias

and quantile head ``m`` outputs ``amplitudes[m] @ h(t) + out_bias[m]``.
Frequencies, phases and the trend unit are shared by every head.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .data import TimeSeries
from .forecast import QuantileForecast, QuantileGrid
from .quantile_loss import (
    LossConfig,
    elastic_net_grad,
    elastic_net_penalty,
    mean_smooth_pinball,
    smooth_pinball_terms,
)

PHASE_INITS = ("zero", "quadrature")
REGULARIZE_CHOICES = ("amplitudes", "all")


@dataclass(frozen=True)
class NetworkParams:
    freqs: np.ndarray
    phases: np.ndarray
    trend_in_weight: float
    trend_in_bias: float
    amplitudes: np.ndarray
    out_bias: np.ndarray

    def __post_init__(self):
        freqs = np.array(self.freqs, dtype=float).reshape(-1)
        phases = np.array(self.phases, dtype=float).reshape(-1)
        amps = np.array(self.amplitudes, dtype=float, ndmin=2)
        bias = np.array(self.out_bias, dtype=float).reshape(-1)
        h = freqs.size
        if h < 1 or phases.size != h:
            raise ValueError(f"need H >= 1 frequencies and as many phases, got {h} and {phases.size}")
        if amps.shape != (bias.size, h + 1) or bias.size < 1:
            raise ValueError(f"amplitudes shape {amps.shape} does not match ({bias.size}, {h + 1})")
        for arr in (freqs, phases, amps, bias):
            if not np.all(np.isfinite(arr)):
                raise ValueError("network parameters must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "out_bias", bias)
        object.__setattr__(self, "trend_in_weight", float(self.trend_in_weight))
        object.__setattr__(self, "trend_in_bias", float(self.trend_in_bias))

    @property
    def n_sinusoids(self) -> int:
        return self.freqs.size

    @property
    def n_quantiles(self) -> int:
        return self.out_bias.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkParams):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name)) for f in fields(self))

    __hash__ = None


@dataclass(frozen=True)
class Gradients:
    """Partial derivatives of the cost, shaped like :class:`NetworkParams`."""

    freqs: np.ndarray
    phases: np.ndarray
    trend_in_weight: float
    trend_in_bias: float
    amplitudes: np.ndarray
    out_bias: np.ndarray


PARAM_GROUPS = tuple(f.name for f in fields(NetworkParams))


def init_params(H: int, M: int, train: TimeSeries, phase_init: str = "zero") -> NetworkParams:
    """Deterministic initialization.

    Node ``k`` (1-based) starts at frequency ``2*pi*floor(k/2)`` with zero
    phase and zero amplitude.  The trend unit carries the least-squares
    slope of the training values on normalized time, and every output head
    gets the least-squares intercept as bias and weight 1 on the trend unit,
    so the untrained network reproduces the OLS line at every level.

    ``phase_init="quadrature"`` shifts odd-``k`` phases by ``pi/2`` so each
    frequency pair behaves like a sine/cosine pair instead of two identical
    cosines.
    """
    if H < 1 or M < 1:
        raise ValueError(f"H and M must be positive, got H={H}, M={M}")
    if phase_init not in PHASE_INITS:
        raise ValueError(f"phase_init must be one of {PHASE_INITS}, got {phase_init!r}")
    if len(train) < 2:
        raise ValueError("initialization needs at least 2 training observations")
    t = train.times
    y = train.scaled_values
    t_mean = t.mean()
    dt = t - t_mean
    sxx = float(dt @ dt)
    if not sxx > 0:
        raise ValueError("training times have zero variance")
    slope = float(dt @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * t_mean)

    k = np.arange(1, H + 1)
    freqs = 2.0 * np.pi * (k // 2)
    phases = np.zeros(H)
    if phase_init == "quadrature":
        phases[k % 2 == 1] = 0.5 * np.pi
    amplitudes = np.zeros((M, H + 1))
    amplitudes[:, H] = 1.0
    return NetworkParams(
        freqs=freqs,
        phases=phases,
        trend_in_weight=slope,
        trend_in_bias=0.0,
        amplitudes=amplitudes,
        out_bias=np.full(M, intercept),
    )


def hidden_layer(params: NetworkParams, times) -> np.ndarray:
    t = np.asarray(times, dtype=float).reshape(-1)
    z = np.outer(t, params.freqs) + params.phases
    trend = params.trend_in_weight * t + params.trend_in_bias
    return np.column_stack([np.cos(z), trend])


def forward(params: NetworkParams, times) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(qhat, hidden)`` with shapes ``(N, M)`` and ``(N, H+1)``."""
    t = np.asarray(times, dtype=float).reshape(-1)
    if not np.all(np.isfinite(t)):
        raise ValueError("times must be finite")
    hidden = hidden_layer(params, t)
    qhat = hidden @ params.amplitudes.T + params.out_bias
    return qhat, hidden


def regularized_weights(params: NetworkParams, regularize: str = "amplitudes") -> np.ndarray:
    """Flat vector of the weights the elastic-net penalty acts on."""
    if regularize == "amplitudes":
        return params.amplitudes.reshape(-1)
    if regularize == "all":
        return np.concatenate([
            params.freqs, params.phases, [params.trend_in_weight, params.trend_in_bias],
            params.amplitudes.reshape(-1), params.out_bias,
        ])
    raise ValueError(f"regularize must be one of {REGULARIZE_CHOICES}, got {regularize!r}")


def cost(params: NetworkParams, train: TimeSeries, grid: QuantileGrid, cfg: LossConfig,
         regularize: str = "amplitudes") -> float:
    """Training cost of ``params`` on ``train`` (forward pass plus total cost)."""
    _check_grid(params, grid)
    qhat, _ = forward(params, train.times)
    return (mean_smooth_pinball(train.scaled_values, qhat, grid, cfg.alpha)
            + elastic_net_penalty(regularized_weights(params, regularize), cfg))


def _check_grid(params: NetworkParams, grid: QuantileGrid) -> None:
    if len(grid) != params.n_quantiles:
        raise ValueError(f"grid has {len(grid)} levels but the network has {params.n_quantiles} heads")


def backward(params: NetworkParams, train: TimeSeries, grid: QuantileGrid, cfg: LossConfig,
             regularize: str = "amplitudes") -> tuple[float, Gradients]:
    """Cost and its analytic gradient with respect to every parameter."""
    _check_grid(params, grid)
    t = train.times
    y = train.scaled_values
    if t.size == 0:
        raise ValueError("cannot differentiate over an empty batch")
    n, m = t.size, params.n_quantiles
    H = params.n_sinusoids

    z = np.outer(t, params.freqs) + params.phases
    cos_z = np.cos(z)
    trend = params.trend_in_weight * t + params.trend_in_bias
    hidden = np.column_stack([cos_z, trend])
    qhat = hidden @ params.amplitudes.T + params.out_bias
    u = y[:, None] - qhat

    terms, slopes = smooth_pinball_terms(u, grid.taus[None, :], cfg.alpha)
    loss = float(np.sum(terms) / terms.size)
    # dE/dqhat = -S'(u) / (N M)
    d_q = -slopes / (n * m)

    g_amp = d_q.T @ hidden
    g_bias = d_q.sum(axis=0)
    d_hidden = d_q @ params.amplitudes
    d_z = -np.sin(z) * d_hidden[:, :H]
    g_freqs = t @ d_z
    g_phases = d_z.sum(axis=0)
    d_trend = d_hidden[:, H]
    g_tw = float(t @ d_trend)
    g_tb = float(d_trend.sum())

    reg = regularized_weights(params, regularize)
    total = loss + elastic_net_penalty(reg, cfg)
    if cfg.lam > 0:
        reg_grad = elastic_net_grad(reg, cfg)
        if regularize == "amplitudes":
            g_amp = g_amp + reg_grad.reshape(g_amp.shape)
        else:
            parts = np.split(reg_grad, np.cumsum([H, H, 1, 1, g_amp.size]))
            g_freqs = g_freqs + parts[0]
            g_phases = g_phases + parts[1]
            g_tw += float(parts[2][0])
            g_tb += float(parts[3][0])
            g_amp = g_amp + parts[4].reshape(g_amp.shape)
            g_bias = g_bias + parts[5]

    return total, Gradients(g_freqs, g_phases, g_tw, g_tb, g_amp, g_bias)


def predict_quantiles(params: NetworkParams, times, grid: QuantileGrid) -> QuantileForecast:
    """Quantile forecast at normalized ``times``; no crossing correction applied."""
    _check_grid(params, grid)
    t = np.asarray(times, dtype=float).reshape(-1)
    qhat, _ = forward(params, t)
    return QuantileForecast(times=t, grid=grid, values=qhat)
