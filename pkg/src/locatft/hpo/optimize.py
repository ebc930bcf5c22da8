"""Sequential model-based optimisation with expected improvement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..csvio import read_csv, write_csv
from .space import SearchSpace, decode, encode
from .surrogate import ForestSurrogate, expected_improvement

ENUMERATION_LIMIT = 100_000
CANDIDATE_SAMPLES = 10_000
LOG_HEADER = ["n", "d_model", "m_H", "lstm_layers", "full_attention", "objective", "best_so_far"]


@dataclass(frozen=True)
class TrialRecord:
    n: int
    theta: dict
    y: float

    def __post_init__(self):
        if not math.isfinite(self.y):
            raise ValueError(f"trial {self.n}: objective must be finite, got {self.y}")


@dataclass
class OptimizeResult:
    best: TrialRecord
    trials: list[TrialRecord] = field(default_factory=list)

    @property
    def best_so_far(self) -> list[float]:
        return list(np.minimum.accumulate([t.y for t in self.trials]))


def best_trial(trials: list[TrialRecord]) -> TrialRecord:
    """argmin over observed y; the earliest trial wins ties."""
    return min(trials, key=lambda t: (t.y, t.n))


def _key(row) -> tuple:
    return tuple(float(v) for v in row)


def _candidates(space: SearchSpace, rng: np.random.Generator) -> np.ndarray:
    if space.size <= ENUMERATION_LIMIT:
        return space.enumerate()
    cand = space.sample(rng, CANDIDATE_SAMPLES)
    order = np.lexsort(cand.T[::-1])
    return np.unique(cand[order], axis=0)


def propose(space: SearchSpace, trials: list[TrialRecord], seed: int) -> dict:
    """Highest-EI unevaluated candidate; ties and duplicates resolve in lexicographic order."""
    n = len(trials)
    X = np.array([encode(t.theta) for t in trials])
    y = np.array([t.y for t in trials])
    rng = np.random.default_rng([seed, n])
    surrogate = ForestSurrogate(seed=int(rng.integers(2**31))).fit(X, y)
    cand = _candidates(space, rng)
    seen = {_key(r) for r in X}
    mean, std = surrogate.predict(cand)
    ei = expected_improvement(mean, std, float(y.min()))
    for i in np.argsort(-ei, kind="stable"):
        if _key(cand[i]) not in seen:
            return decode(cand[i])
    # every sampled candidate was already evaluated: fall back to the full space
    for row in space.enumerate():
        if _key(row) not in seen:
            return decode(row)
    raise ValueError("search space exhausted")


def _initial(space: SearchSpace, n_init: int, seed: int) -> list[dict]:
    rng = np.random.default_rng([seed, 2**20])
    if space.size <= ENUMERATION_LIMIT:
        rows = space.enumerate()[rng.choice(space.size, size=min(n_init, space.size), replace=False)]
        return [decode(r) for r in rows]
    out, seen = [], set()
    while len(out) < n_init:
        r = space.sample(rng, 1)[0]
        if _key(r) not in seen:
            seen.add(_key(r))
            out.append(decode(r))
    return out


def write_log(path, trials: list[TrialRecord]) -> None:
    best = np.minimum.accumulate([t.y for t in trials]) if trials else []
    rows = [
        [t.n, t.theta["d_model"], t.theta["m_H"], t.theta["lstm_layers"], t.theta["full_attention"], float(t.y), float(b)]
        for t, b in zip(trials, best)
    ]
    write_csv(path, LOG_HEADER, rows)


def read_log(path) -> list[TrialRecord]:
    header, rows = read_csv(path)
    if header != LOG_HEADER:
        raise ValueError(f"{path}: unexpected trajectory header {header}")
    out = []
    for r in rows:
        theta = {"d_model": int(r[1]), "m_H": int(r[2]), "lstm_layers": int(r[3]), "full_attention": r[4] == "true"}
        out.append(TrialRecord(int(r[0]), theta, float(r[5])))
    return out


def optimize(
    space: SearchSpace,
    objective: Callable[[dict], float],
    n_max: int = 100,
    n_init: int = 5,
    seed: int = 0,
    log_path=None,
    resume: bool = False,
) -> OptimizeResult:
    """Random start of ``n_init`` points, then one EI proposal per iteration.

    With ``log_path`` the trajectory CSV is rewritten after every trial.
    With ``resume`` the trials already in the log are replayed instead of
    re-evaluated; proposals depend only on (seed, observed trials), so a
    resumed run continues exactly where an uninterrupted one would.
    """
    if n_init < 2:
        raise ValueError("n_init must be at least 2")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    n_max = min(n_max, space.size)
    trials: list[TrialRecord] = []
    if resume and log_path is not None and Path(log_path).exists():
        trials = read_log(log_path)[:n_max]
    init = _initial(space, min(n_init, n_max), seed)
    while len(trials) < n_max:
        n = len(trials) + 1
        theta = init[n - 1] if n <= len(init) else propose(space, trials, seed)
        y = float(objective(theta))
        trials.append(TrialRecord(n, theta, y))
        if log_path is not None:
            write_log(log_path, trials)
    return OptimizeResult(best_trial(trials), trials)
