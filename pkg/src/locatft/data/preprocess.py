"""Correlation pruning, normalisation, windowing, noise injection and splits."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .generator import DIRECT_SIGNALS, LOCATIONS, SizeGrid, TransientCase
from .sample import TimeSeriesSample

DEFAULT_TARGET = "cntrlvar_2"


# -- correlation pruning ---------------------------------------------------

def pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float) - np.mean(a)
    b = np.asarray(b, dtype=float) - np.mean(b)
    den = math.sqrt(float(a @ a) * float(b @ b))
    if den == 0.0:
        raise ValueError("pearson correlation undefined for a zero-variance series")
    return float(np.clip((a @ b) / den, -1.0, 1.0))


@dataclass
class PruneResult:
    retained: list[str]
    dropped: list[str]
    degenerate: list[str]
    codes: list[str]
    matrix: np.ndarray  # |codes| x |codes|, NaN rows for degenerate signals


def correlation_matrix(series: np.ndarray) -> np.ndarray:
    """Pearson matrix of the rows of ``series``; symmetric, unit diagonal."""
    x = series - series.mean(axis=1, keepdims=True)
    norm = np.sqrt(np.einsum("ij,ij->i", x, x))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (x @ x.T) / np.outer(norm, norm)
    r = np.clip(0.5 * (r + r.T), -1.0, 1.0)
    ok = norm > 0
    r[np.ix_(ok, ok)] = np.where(np.eye(ok.sum(), dtype=bool), 1.0, r[np.ix_(ok, ok)])
    return r


def pearson_prune(
    cases: Sequence[TransientCase],
    threshold: float = 0.95,
    candidates: Sequence[str] = DIRECT_SIGNALS,
) -> PruneResult:
    """Greedy pruning in the order of ``candidates``.

    A signal is dropped when its |r| with any already retained signal exceeds
    ``threshold``. Correlations use all listed cases concatenated. Targets are
    simply not passed as candidates, so they can never be pruned.
    """
    if not cases:
        raise ValueError("pearson_prune needs at least one case")
    codes = list(candidates)
    series = np.stack([np.concatenate([c.signals[s] for c in cases]) for s in codes])
    if series.shape[1] < 2:
        raise ValueError("need at least two time points per signal")
    r = correlation_matrix(series)
    retained: list[int] = []
    dropped, degenerate = [], []
    for i, code in enumerate(codes):
        if not np.isfinite(r[i, i]):
            warnings.warn(f"signal {code} has zero variance and is dropped", stacklevel=2)
            degenerate.append(code)
            continue
        if any(abs(r[i, j]) > threshold for j in retained):
            dropped.append(code)
        else:
            retained.append(i)
    return PruneResult([codes[i] for i in retained], dropped, degenerate, codes, r)


# -- normalisation ---------------------------------------------------------

@dataclass
class NormStats:
    mean: dict[str, float]
    std: dict[str, float]

    @classmethod
    def from_cases(cls, cases: Sequence[TransientCase], signals: Sequence[str]) -> "NormStats":
        """Per-signal statistics over every time point of ``cases`` (training cases only)."""
        mean, std = {}, {}
        for s in signals:
            v = np.concatenate([c.signals[s] for c in cases])
            sd = float(v.std())
            if not sd > 0:
                warnings.warn(f"signal {s} is constant on the training cases and is dropped", stacklevel=2)
                continue
            mean[s], std[s] = float(v.mean()), sd
        return cls(mean, std)

    @property
    def signals(self) -> list[str]:
        return list(self.mean)

    def normalize(self, signal: str, values):
        return (np.asarray(values, dtype=float) - self.mean[signal]) / self.std[signal]

    def denormalize(self, signal: str, values):
        return np.asarray(values, dtype=float) * self.std[signal] + self.mean[signal]

    def to_dict(self) -> dict:
        return {"mean": dict(self.mean), "std": dict(self.std)}

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        return cls({k: float(v) for k, v in d["mean"].items()}, {k: float(v) for k, v in d["std"].items()})


# -- windowing -------------------------------------------------------------

def static_covariates(case: TransientCase, grid: SizeGrid) -> np.ndarray:
    onehot = [1.0 if case.break_location == loc else 0.0 for loc in LOCATIONS]
    return np.array([*onehot, grid.normalize(case.break_size_cm)])


def window(
    case: TransientCase,
    k: int,
    horizon: int,
    norm: NormStats,
    covariates: Sequence[str],
    target: str = DEFAULT_TARGET,
    t_start_s: float = 100.0,
    grid: SizeGrid | None = None,
) -> TimeSeriesSample:
    """Cut one forecasting instance starting at ``t_start_s``.

    History is the k+1 points ending at the start time, the horizon the next
    ``horizon`` points. The known covariate is elapsed time since the break
    divided by the transient duration, available over history and horizon.
    """
    grid = grid or SizeGrid()
    rate = case.sample_rate_hz
    t_idx = int(round((t_start_s - case.time_s[0]) * rate))
    if abs(case.time_s[0] + t_idx / rate - t_start_s) > 1e-6:
        raise ValueError(f"start time {t_start_s} s is not on the sampling grid")
    if t_idx < k:
        raise ValueError(f"{case.case_id}: need {k} history steps before t={t_start_s}s, have {t_idx}")
    if t_idx + horizon >= case.n_points:
        raise ValueError(f"{case.case_id}: horizon {horizon} runs past the end of the series")
    hist = slice(t_idx - k, t_idx + 1)
    fut = slice(t_idx + 1, t_idx + 1 + horizon)
    y = norm.normalize(target, case.signals[target])
    z = np.stack([norm.normalize(s, case.signals[s]) for s in covariates], axis=1)
    duration = float(case.time_s[-1])
    x = (case.time_s[t_idx - k:t_idx + 1 + horizon] / duration)[:, None]
    return TimeSeriesSample(
        case_id=case.case_id,
        static=static_covariates(case, grid),
        y_hist=y[hist].copy(),
        z_hist=z[hist].copy(),
        x_all=x,
        y_future=y[fut].copy(),
        t=t_idx,
        target_mean=norm.mean[target],
        target_std=norm.std[target],
        z_mean=np.array([norm.mean[s] for s in covariates]),
        z_std=np.array([norm.std[s] for s in covariates]),
    )


# -- noise -----------------------------------------------------------------

def noise_variance(power: np.ndarray, snr: float, linear: bool = False) -> np.ndarray:
    ratio = snr if linear else 10.0 ** (snr / 10.0)
    return np.asarray(power, dtype=float) / ratio


def inject_noise(sample: TimeSeriesSample, snr_db: float, seed: int, linear: bool = False) -> TimeSeriesSample:
    """Additive white Gaussian noise on the observed history only.

    Power is the physical mean square of each channel over the history
    window; noise variance is power / 10^(snr/10) (or power / snr when
    ``linear``). Static inputs, known covariates and future truth are
    returned untouched. ``snr_db = inf`` is the clean sentinel.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return sample
    rng = np.random.default_rng(seed)
    y_phys = sample.denormalize(sample.y_hist)
    z_mean = sample.z_mean if sample.z_mean is not None else np.zeros(sample.z_hist.shape[1])
    z_std = sample.z_std if sample.z_std is not None else np.ones(sample.z_hist.shape[1])
    z_phys = sample.z_hist * z_std + z_mean
    chans = np.concatenate([y_phys[:, None], z_phys], axis=1)
    power = np.mean(chans**2, axis=0)
    if np.any(power == 0):
        warnings.warn("all-zero channel in history: no noise added to it", stacklevel=2)
    sd = np.sqrt(noise_variance(power, snr_db, linear))
    noisy = chans + rng.normal(size=chans.shape) * sd
    return replace(
        sample,
        y_hist=(noisy[:, 0] - sample.target_mean) / sample.target_std,
        z_hist=(noisy[:, 1:] - z_mean) / z_std,
    )


# -- splits ----------------------------------------------------------------

def split(cases: Sequence, train_frac: float, seed: int) -> tuple[list, list]:
    """Seeded case-level split; the training side gets floor(n * train_frac)."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must lie in (0, 1)")
    n = len(cases)
    n_train = int(math.floor(n * train_frac + 1e-9))
    if n_train == 0 or n_train == n:
        raise ValueError(f"split of {n} cases at {train_frac} leaves one side empty")
    order = np.random.default_rng(seed).permutation(n)
    train = [cases[i] for i in sorted(order[:n_train])]
    test = [cases[i] for i in sorted(order[n_train:])]
    return train, test


def hpo_subsample(cases: Sequence[TransientCase], n: int = 10, lo: float = 6.5, hi: float = 10.5, seed: int = 0):
    """Up to ``n`` cases with break size in [lo, hi] cm, drawn without replacement."""
    pool = [c for c in cases if lo - 1e-9 <= c.break_size_cm <= hi + 1e-9]
    if len(pool) <= n:
        return list(pool)
    idx = np.random.default_rng(seed).choice(len(pool), size=n, replace=False)
    return [pool[i] for i in sorted(idx)]
