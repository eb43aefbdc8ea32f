"""Pinball loss, its smooth surrogate, and the regularized training cost.

All functions accept scalars or numpy arrays and broadcast elementwise.
The residual convention throughout is ``u = y - q`` (observation minus
quantile estimate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forecast import QuantileGrid


@dataclass(frozen=True)
class LossConfig:
    """Smoothing and elastic-net settings for the training cost.

    Attributes:
        alpha: smoothing width of the smooth pinball surrogate.
        lam: overall regularization strength.
        mix: fraction of the penalty assigned to the (smoothed) L1 term.
        l1_epsilon: width of the pseudo-Huber surrogate for ``|w|``.
    """

    alpha: float = 0.01
    lam: float = 0.1
    mix: float = 0.5
    l1_epsilon: float = 1e-8

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.lam >= 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if not 0.0 <= self.mix <= 1.0:
            raise ValueError(f"mix must lie in [0, 1], got {self.mix}")
        if not self.l1_epsilon > 0:
            raise ValueError(f"l1_epsilon must be positive, got {self.l1_epsilon}")


def _check_tau(tau):
    tau = np.asarray(tau, dtype=float)
    if np.any((tau <= 0.0) | (tau >= 1.0)):
        raise ValueError("tau must lie strictly inside (0, 1)")
    return tau


def _check_alpha(alpha):
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")


def pinball(u, tau):
    """Tilted absolute loss: ``tau*u`` for ``u >= 0``, ``(tau-1)*u`` otherwise."""
    tau = _check_tau(tau)
    u = np.asarray(u, dtype=float)
    out = _sharp(u, tau)
    return out if out.ndim else float(out)


def _sharp(u, tau):
    return np.where(u >= 0.0, tau * u, (tau - 1.0) * u)


def smooth_pinball(u, tau, alpha):
    """Smooth pinball ``tau*u + alpha*log(1 + exp(-u/alpha))``.

    Evaluated in the equivalent form ``pinball(u) + alpha*log1p(exp(-|u|/alpha))``:
    the exponent is never positive, so nothing overflows, and the computed
    value never drops below the computed pinball loss.
    """
    _check_alpha(alpha)
    tau = np.asarray(tau, dtype=float)
    u = np.asarray(u, dtype=float)
    out = _sharp(u, tau) + alpha * np.log1p(np.exp(-np.abs(u) / alpha))
    return out if out.ndim else float(out)


def smooth_pinball_excess(u, alpha, log=False):
    """Gap ``smooth_pinball(u) - pinball(u)``, independent of ``tau``.

    The gap equals ``alpha*log(1 + exp(-|u|/alpha))``.  Far from the origin it
    drops below the float64 range, so ``log=True`` returns its natural log,
    which stays finite for every finite ``u``.
    """
    _check_alpha(alpha)
    x = np.abs(np.asarray(u, dtype=float)) / alpha
    if not log:
        out = alpha * np.log1p(np.exp(-x))
        return out if out.ndim else float(out)
    # log(log1p(e^-x)) = -x + log1p(-e^-x/2 + ...) ; use the series once e^-x is tiny
    with np.errstate(divide="ignore"):
        direct = np.log(np.log1p(np.exp(-x)))
    series = -x + np.log1p(-0.5 * np.exp(-x))
    out = np.log(alpha) + np.where(x > 30.0, series, direct)
    return out if out.ndim else float(out)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def smooth_pinball_grad(u, tau, alpha):
    """Derivative of :func:`smooth_pinball` with respect to ``u``."""
    _check_alpha(alpha)
    tau = np.asarray(tau, dtype=float)
    u = np.asarray(u, dtype=float)
    # 1/(1+exp(u/alpha)) == sigmoid(-u/alpha); tanh form cannot overflow
    out = tau - _sigmoid(-u / alpha)
    return out if out.ndim else float(out)


def smooth_abs(w, epsilon):
    """Pseudo-Huber surrogate ``sqrt(w^2 + eps^2) - eps`` for ``|w|``."""
    w = np.asarray(w, dtype=float)
    return np.hypot(w, epsilon) - epsilon


def smooth_abs_grad(w, epsilon):
    w = np.asarray(w, dtype=float)
    return w / np.hypot(w, epsilon)


def elastic_net_penalty(weights, cfg: LossConfig) -> float:
    """``lam * (mix * sum smooth_abs(w) + (1 - mix) * sum w^2)``."""
    w = np.asarray(weights, dtype=float).reshape(-1)
    if cfg.lam == 0.0 or w.size == 0:
        return 0.0
    l1 = np.sum(smooth_abs(w, cfg.l1_epsilon))
    l2 = np.sum(w * w)
    return float(cfg.lam * (cfg.mix * l1 + (1.0 - cfg.mix) * l2))


def elastic_net_grad(weights, cfg: LossConfig) -> np.ndarray:
    """Elementwise gradient of :func:`elastic_net_penalty`, same shape as input."""
    w = np.asarray(weights, dtype=float)
    if cfg.lam == 0.0:
        return np.zeros_like(w)
    return cfg.lam * (cfg.mix * smooth_abs_grad(w, cfg.l1_epsilon) + 2.0 * (1.0 - cfg.mix) * w)


def _as_taus(grid) -> np.ndarray:
    if isinstance(grid, QuantileGrid):
        return grid.taus
    return QuantileGrid(grid).taus


def mean_smooth_pinball(y, qhat, grid, alpha: float) -> float:
    """Average smooth pinball loss over an N x M quantile matrix."""
    taus = _as_taus(grid)
    y = np.asarray(y, dtype=float).reshape(-1)
    qhat = np.asarray(qhat, dtype=float)
    if qhat.shape != (y.size, taus.size):
        raise ValueError(f"qhat shape {qhat.shape} does not match ({y.size}, {taus.size})")
    if y.size == 0:
        raise ValueError("cost needs at least one observation")
    u = y[:, None] - qhat
    # np.sum uses a fixed pairwise reduction, so repeated calls are bit-identical
    return float(np.sum(smooth_pinball(u, taus[None, :], alpha)) / u.size)


def smooth_pinball_terms(u, taus, alpha):
    """Return ``(smooth_pinball(u), smooth_pinball_grad(u))`` from one shared exp."""
    _check_alpha(alpha)
    u = np.asarray(u, dtype=float)
    e = np.exp(-np.abs(u) / alpha)
    loss = _sharp(u, taus) + alpha * np.log1p(e)
    inv = 1.0 / (1.0 + e)
    # sigmoid(-u/alpha) for either sign of u
    sig = np.where(u <= 0.0, inv, e * inv)
    return loss, taus - sig


def total_cost(y, qhat, grid, reg_weights, cfg: LossConfig) -> float:
    """Mean smooth pinball over all observations and levels plus elastic net."""
    return mean_smooth_pinball(y, qhat, grid, cfg.alpha) + elastic_net_penalty(reg_weights, cfg)
