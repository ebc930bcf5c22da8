"""Train-and-score objective for one hyperparameter point."""

from __future__ import annotations

import math
from dataclasses import replace


from ..numerics import NumericError, OptimizerConfig
from ..tft import TemporalFusionTransformer, TftConfig
from ..training import EvalMetrics, TrainSchedule, evaluate, train

# returned instead of NaN when training a candidate blows up
DIVERGENCE_PENALTY = 1.0e6


def score(metrics: EvalMetrics) -> float:
    """|mean residual| + residual std + fraction of truths outside the q10..q90 band."""
    return abs(metrics.residual_mean) + metrics.residual_std + (1.0 - metrics.coverage)


class TftObjective:
    """Callable theta -> objective, with everything except theta held fixed."""

    def __init__(
        self,
        base: TftConfig,
        train_samples,
        eval_samples,
        epochs: int = 20,
        batch_size: int = 8,
        seed: int = 0,
        optimizer: OptimizerConfig | None = None,
    ):
        if not train_samples or not eval_samples:
            raise ValueError("objective needs non-empty training and evaluation samples")
        self.base = base
        self.train_samples = train_samples
        self.eval_samples = eval_samples
        self.schedule = TrainSchedule(epochs=epochs, batch_size=batch_size, seed=seed)
        self.optimizer = optimizer

    def config_for(self, theta: dict) -> TftConfig:
        return replace(
            self.base,
            d_model=int(theta["d_model"]),
            n_heads=int(theta["m_H"]),
            lstm_layers=int(theta["lstm_layers"]),
            full_attention=bool(theta["full_attention"]),
        )

    def __call__(self, theta: dict) -> float:
        model = TemporalFusionTransformer(self.config_for(theta))
        try:
            res = train(model, self.train_samples, self.schedule, self.optimizer)
            value = score(evaluate(model, res.params, self.eval_samples))
        except (NumericError, FloatingPointError):
            return DIVERGENCE_PENALTY
        return value if math.isfinite(value) else DIVERGENCE_PENALTY
