"""Comparison harness: every model gets the same splits, seeds and metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from ..csvio import write_csv
from ..numerics import OptimizerConfig
from ..training import EvalMetrics, TrainSchedule, evaluate_forecasts, train


class TrainedForecaster:
    """Wrap a model object (TFT or baseline) so the harness can fit it."""

    def __init__(self, model, schedule: TrainSchedule, optimizer: OptimizerConfig | None = None, name=None):
        self.model = model
        self.schedule = schedule
        self.optimizer = optimizer
        self.name = name or model.name
        self.losses: dict[str, list[float]] = {}

    @property
    def quantiles(self):
        return self.model.quantiles

    def fit(self, samples, tag: str = ""):
        res = train(self.model, samples, self.schedule, self.optimizer)
        self.losses[tag] = res.losses
        return res.params

    def predict(self, params, samples) -> np.ndarray:
        return self.model.predict(params, samples)


class OracleForecaster:
    """Returns the truth with a symmetric band; a sanity row for the table."""

    name = "Oracle"

    def __init__(self, quantiles=(0.1, 0.5, 0.9), pad: float = 1.0):
        self.quantiles = tuple(quantiles)
        self.pad = pad

    def fit(self, samples, tag: str = ""):
        return None

    def predict(self, params, samples) -> np.ndarray:
        y = np.stack([s.y_future for s in samples])
        offs = np.sign(np.asarray(self.quantiles) - 0.5) * self.pad
        return y[..., None] + offs


@dataclass
class ComparisonResult:
    targets: list[str]
    models: list[str]
    metrics: dict[tuple[str, str], EvalMetrics] = field(default_factory=dict)

    METRICS = ("residual_mean", "residual_variance", "coverage")

    def header(self) -> list[str]:
        cols = ["model"]
        for t in self.targets:
            for m in self.METRICS:
                cols += [f"{t}:{m}", f"{t}:{m}:rank"]
        return cols

    def ranks(self) -> dict[tuple[str, str], np.ndarray]:
        """Rank 1 is best: smallest |mean|, smallest variance, largest coverage."""
        out = {}
        for t in self.targets:
            for m in self.METRICS:
                v = np.array([getattr(self.metrics[(name, t)], m) for name in self.models])
                key = -v if m == "coverage" else np.abs(v)
                out[(t, m)] = rankdata(key, method="min").astype(int)
        return out

    def rows(self) -> list[list]:
        ranks = self.ranks()
        rows = []
        for i, name in enumerate(self.models):
            row: list = [name]
            for t in self.targets:
                for m in self.METRICS:
                    row += [getattr(self.metrics[(name, t)], m), int(ranks[(t, m)][i])]
            rows.append(row)
        return rows

    def write(self, path) -> None:
        write_csv(path, self.header(), self.rows())


def compare(models: Sequence, datasets: Mapping[str, tuple[list, list]]) -> ComparisonResult:
    """Fit and score every model on every target.

    ``datasets`` maps target code -> (train samples, test samples); the same
    lists are handed to every model. Names must be unique, so registering the
    same architecture twice needs distinct labels.
    """
    names = [m.name for m in models]
    if len(set(names)) != len(names):
        raise ValueError(f"model names must be unique, got {names}")
    result = ComparisonResult(list(datasets), names)
    for target, (train_s, test_s) in datasets.items():
        truth = np.stack([s.y_future for s in test_s])
        ids = [s.case_id for s in test_s]
        for m in models:
            params = m.fit(train_s, target)
            pred = m.predict(params, test_s)
            result.metrics[(m.name, target)] = evaluate_forecasts(pred, truth, m.quantiles, ids)
    return result
