"""CSV artifacts for training and evaluation runs."""

from __future__ import annotations

import numpy as np

from ..csvio import write_csv
from .metrics import EvalMetrics


def write_loss_curve(path, losses) -> None:
    write_csv(path, ["epoch", "loss"], ((i + 1, float(v)) for i, v in enumerate(losses)))


def write_metrics(path, metrics: EvalMetrics) -> None:
    write_csv(path, ["metric", "value"], metrics.rows())


def forecast_rows(samples, pred_normalized: np.ndarray, quantiles):
    """One row per (case, step) in physical units: case_id, step, q..., truth."""
    for s, p in zip(samples, pred_normalized):
        phys = s.denormalize(p)
        truth = s.denormalize(s.y_future)
        for step in range(s.horizon):
            yield [s.case_id, step + 1, *(float(v) for v in phys[step]), float(truth[step])]


def forecast_header(quantiles) -> list[str]:
    return ["case_id", "step", *(f"q{round(q * 100):02d}" for q in quantiles), "truth"]


def write_forecast_dump(path, samples, pred_normalized, quantiles) -> None:
    write_csv(path, forecast_header(quantiles), forecast_rows(samples, pred_normalized, quantiles))
