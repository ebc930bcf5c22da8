"""Forecasting instances and their batched form."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class TimeSeriesSample:
    """One forecast problem, all channels already z-scored.

    ``y_hist`` covers t-k..t (k+1 values), ``x_all`` covers t-k..t+horizon.
    ``target_mean``/``target_std`` undo the target normalisation.
    """

    case_id: str
    static: np.ndarray  # (n_static,)
    y_hist: np.ndarray  # (k+1,)
    z_hist: np.ndarray  # (k+1, n_observed)
    x_all: np.ndarray  # (k+1+horizon, n_known)
    y_future: np.ndarray  # (horizon,)
    t: int
    target_mean: float = 0.0
    target_std: float = 1.0
    z_mean: np.ndarray | None = field(default=None, repr=False)
    z_std: np.ndarray | None = field(default=None, repr=False)

    @property
    def history_steps(self) -> int:
        return self.y_hist.shape[0] - 1

    @property
    def horizon(self) -> int:
        return self.y_future.shape[0]

    def with_static(self, static: np.ndarray) -> "TimeSeriesSample":
        return replace(self, static=np.asarray(static, dtype=float))

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values) * self.target_std + self.target_mean


@dataclass
class Batch:
    static: np.ndarray  # (B, n_static)
    hist: np.ndarray  # (B, k+1, 1 + n_observed + n_known): [y, z, x] per past step
    fut: np.ndarray  # (B, horizon, n_known)
    y_future: np.ndarray  # (B, horizon)
    y_hist: np.ndarray  # (B, k+1)
    z_hist: np.ndarray  # (B, k+1, n_observed)
    case_ids: list[str]

    def __len__(self) -> int:
        return self.static.shape[0]


def collate(samples: Sequence[TimeSeriesSample]) -> Batch:
    if not samples:
        raise ValueError("cannot collate an empty sample list")
    k1 = samples[0].y_hist.shape[0]
    static = np.stack([s.static for s in samples]).reshape(len(samples), -1)
    y_hist = np.stack([s.y_hist for s in samples])
    z_hist = np.stack([s.z_hist for s in samples]).reshape(len(samples), k1, -1)
    x_all = np.stack([s.x_all for s in samples])
    hist = np.concatenate([y_hist[..., None], z_hist, x_all[:, :k1]], axis=-1)
    return Batch(
        static=static,
        hist=hist,
        fut=x_all[:, k1:],
        y_future=np.stack([s.y_future for s in samples]),
        y_hist=y_hist,
        z_hist=z_hist,
        case_ids=[s.case_id for s in samples],
    )
