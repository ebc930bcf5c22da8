"""Quantile (pinball) loss, scalar and as a differentiable tensor op."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..numerics import Tensor


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile must lie in (0, 1), got {q}")


def quantile_loss(y: float, yhat: float, q: float) -> float:
    _check_q(q)
    return q * max(y - yhat, 0.0) + (1.0 - q) * max(yhat - y, 0.0)


def pinball_array(y: np.ndarray, yhat: np.ndarray, quantiles: Sequence[float]) -> np.ndarray:
    """Elementwise loss; ``yhat`` has a trailing quantile axis, ``y`` does not."""
    q = np.asarray(quantiles, dtype=float)
    for v in q:
        _check_q(v)
    diff = np.asarray(y)[..., None] - np.asarray(yhat)
    return q * np.maximum(diff, 0.0) + (1.0 - q) * np.maximum(-diff, 0.0)


def pinball_loss(pred: Tensor, target: np.ndarray, quantiles: Sequence[float]) -> Tensor:
    """Summed over samples, quantiles and steps, divided by (M * horizon).

    pred: (M, horizon, |Q|); target: (M, horizon). At ties the subgradient is 0.
    """
    M, horizon, nq = pred.shape
    if target.shape != (M, horizon) or nq != len(quantiles):
        raise ValueError(f"pinball: pred {pred.shape} vs target {target.shape}, {len(quantiles)} quantiles")
    q = np.asarray(quantiles, dtype=float)
    norm = 1.0 / (M * horizon)
    value = pinball_array(target, pred.data, quantiles).sum() * norm
    diff = target[..., None] - pred.data

    def backward(g):
        d = np.where(diff > 0, -q, np.where(diff < 0, 1.0 - q, 0.0))
        return (g * norm * d,)

    return Tensor.from_op(np.asarray(value), (pred,), backward, "pinball")


@dataclass
class LossReport:
    total: float
    per_quantile: dict[float, float]
    n_samples: int
    horizon: int


def aggregate_loss(pairs, quantiles: Sequence[float]) -> LossReport:
    """Loss over (sample, forecast) pairs, compared in normalised units."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("aggregate_loss needs at least one (sample, forecast) pair")
    horizon = pairs[0][0].horizon
    y = np.stack([s.y_future for s, _ in pairs])
    yhat = np.stack([f.normalized for _, f in pairs])
    if yhat.shape[1] != horizon:
        raise ValueError("every forecast must cover steps 1..horizon")
    per = pinball_array(y, yhat, quantiles).sum(axis=(0, 1)) / (len(pairs) * horizon)
    per_q = {float(q): float(v) for q, v in zip(quantiles, per)}
    return LossReport(float(sum(per_q.values())), per_q, len(pairs), horizon)
