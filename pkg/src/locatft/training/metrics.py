"""Residual, coverage and crossing statistics for quantile forecasts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .loss import pinball_array


@dataclass
class EvalMetrics:
    residual_mean: float
    residual_variance: float
    coverage: float
    crossing_rate: float
    pinball: float
    n_cases: int
    per_case: dict[str, dict[str, float]] = field(default_factory=dict)

    @property
    def residual_std(self) -> float:
        return float(np.sqrt(self.residual_variance))

    def rows(self) -> list[tuple[str, float]]:
        return [
            ("residual_mean", self.residual_mean),
            ("residual_variance", self.residual_variance),
            ("coverage", self.coverage),
            ("crossing_rate", self.crossing_rate),
            ("pinball_loss", self.pinball),
        ]


def _band_indices(quantiles: Sequence[float]) -> tuple[int, int, int]:
    qs = list(quantiles)
    return qs.index(0.5), 0, len(qs) - 1


def _stats(pred: np.ndarray, truth: np.ndarray, quantiles) -> dict[str, float]:
    mid, lo, hi = _band_indices(quantiles)
    r = pred[..., mid] - truth
    inside = (pred[..., lo] <= truth) & (truth <= pred[..., hi])
    crossed = np.any(np.diff(pred, axis=-1) < 0, axis=-1)
    return {
        "residual_mean": float(r.mean()),
        "residual_variance": float(r.var()),
        "coverage": float(inside.mean()),
        "crossing_rate": float(crossed.mean()),
        "pinball": float(pinball_array(truth, pred, quantiles).sum(axis=-1).mean()),
    }


def evaluate_forecasts(
    pred: np.ndarray,
    truth: np.ndarray,
    quantiles: Sequence[float],
    case_ids: Sequence[str] | None = None,
) -> EvalMetrics:
    """Pool every step of every case.

    pred: (n_cases, horizon, |Q|), truth: (n_cases, horizon). Coverage uses the
    closed band [lowest quantile, highest quantile]. ``pinball`` is the
    aggregate loss: summed over quantiles, averaged over cases and steps.
    """
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape[0] == 0:
        raise ValueError("cannot evaluate an empty test set")
    if pred.shape[:2] != truth.shape or pred.shape[2] != len(quantiles):
        raise ValueError(f"prediction {pred.shape} does not match truth {truth.shape}")
    pooled = _stats(pred, truth, quantiles)
    per_case = {}
    if case_ids is not None:
        for i, cid in enumerate(case_ids):
            per_case[cid] = _stats(pred[i:i + 1], truth[i:i + 1], quantiles)
    return EvalMetrics(n_cases=pred.shape[0], per_case=per_case, **pooled)


def evaluate(model, params, samples, quantiles=None) -> EvalMetrics:
    if not samples:
        raise ValueError("cannot evaluate an empty test set")
    pred = model.predict(params, samples)
    truth = np.stack([s.y_future for s in samples])
    return evaluate_forecasts(pred, truth, quantiles or model.quantiles, [s.case_id for s in samples])
