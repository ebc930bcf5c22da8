"""Seeded mini-batch training with the pinball loss and Adam."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data.sample import collate
from ..numerics import Adam, NumericError, OptimizerConfig
from .loss import pinball_loss


class TrainingDivergence(NumericError):
    """Raised when the loss or a gradient stops being finite."""

    def __init__(self, epoch: int, batch: int, reason: str):
        super().__init__(f"training diverged at epoch {epoch}, batch {batch}: {reason}")
        self.epoch = epoch
        self.batch = batch


@dataclass(frozen=True)
class TrainSchedule:
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class TrainResult:
    params: dict
    losses: list[float] = field(default_factory=list)


def train(
    model,
    samples,
    schedule: TrainSchedule = TrainSchedule(),
    optimizer_config: OptimizerConfig | None = None,
    params=None,
    init_seed: int | None = None,
) -> TrainResult:
    """Train ``model`` on ``samples`` and return the final params plus the curve.

    Each epoch visits a fresh seeded permutation in chunks of ``batch_size``.
    The recorded epoch loss is the sample-weighted mean of the batch losses
    seen during that epoch (i.e. before each corresponding update).
    """
    if not samples:
        raise ValueError("training set is empty")
    if params is None:
        params = model.init_params(schedule.seed if init_seed is None else init_seed)
    opt = Adam(params, optimizer_config or OptimizerConfig())
    rng = np.random.default_rng(schedule.seed)
    quantiles = model.quantiles
    losses: list[float] = []
    n = len(samples)
    for epoch in range(1, schedule.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, schedule.batch_size)):
            idx = order[start:start + schedule.batch_size]
            batch = collate([samples[i] for i in idx])
            opt.zero_grad()
            try:
                loss = pinball_loss(model.forward_batch(params, batch), batch.y_future, quantiles)
                loss.backward()
                opt.step()
            except NumericError as exc:
                raise TrainingDivergence(epoch, b, str(exc)) from exc
            total += float(loss.data) * len(idx)
        losses.append(total / n)
    opt.zero_grad()
    return TrainResult(params, losses)
