"""End-to-end steps shared by the command line and the acceptance suite.

Every function takes a resolved :class:`RunConfig` and derives all of its
randomness from ``rc.seed``, so the same config always yields the same
corpus, split, model and metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .baselines import BaselineConfig, OracleForecaster, RecurrentBaseline, TrainedForecaster
from .config import BASELINE_NAMES, RunConfig
from .data import (
    TARGETS,
    GeneratorConfig,
    NormStats,
    TimeSeriesSample,
    TransientCase,
    build_corpus,
    generate_case,
    hpo_subsample,
    inject_noise,
    pearson_prune,
    split,
    window,
)
from .numerics import OptimizerConfig
from .tft import TemporalFusionTransformer, TftConfig
from .training import EvalMetrics, TrainResult, TrainSchedule, evaluate_forecasts, train

_CELL = {"rnn": "elman", "gru": "gru", "lstm": "lstm"}


# -- corpus and samples ----------------------------------------------------

def gen_config(rc: RunConfig) -> GeneratorConfig:
    return GeneratorConfig(
        sample_rate_hz=rc.sample_rate_hz,
        duration_s=rc.duration_s,
        pre_s=rc.pre_s,
        noise=rc.generator_noise,
    )


def make_corpus(rc: RunConfig) -> list[TransientCase]:
    return build_corpus(rc.seed, gen_config(rc), every=rc.grid_every)


@dataclass
class Prepared:
    """Split, pruning and normalisation, all fitted on the training cases."""

    train_cases: list[TransientCase]
    test_cases: list[TransientCase]
    retained: list[str]
    norm: NormStats

    @property
    def covariates(self) -> list[str]:
        # a retained signal that is constant on the training side has no stats
        return [s for s in self.retained if s in self.norm.mean]

    @property
    def train_ids(self) -> list[str]:
        return [c.case_id for c in self.train_cases]

    @property
    def test_ids(self) -> list[str]:
        return [c.case_id for c in self.test_cases]


def prepare(rc: RunConfig, cases: Sequence[TransientCase]) -> Prepared:
    train_cases, test_cases = split(list(cases), rc.train_frac, rc.seed)
    pruned = pearson_prune(train_cases, rc.prune_threshold)
    norm = NormStats.from_cases(train_cases, [*TARGETS, *pruned.retained])
    return Prepared(train_cases, test_cases, pruned.retained, norm)


def prepared_from_manifest(manifest: dict, cases: Sequence[TransientCase]) -> Prepared:
    role = {e["case_id"]: e["split"] for e in manifest["cases"]}
    return Prepared(
        [c for c in cases if role[c.case_id] == "train"],
        [c for c in cases if role[c.case_id] == "test"],
        list(manifest["retained_signals"]),
        NormStats.from_dict(manifest["norm_stats"]),
    )


def make_windows(rc: RunConfig, prep: Prepared, cases, target: str | None = None) -> list[TimeSeriesSample]:
    target = target or rc.target
    return [
        window(c, rc.history_steps, rc.horizon, prep.norm, prep.covariates, target, rc.t_start_s)
        for c in cases
    ]


def samples(rc: RunConfig, prep: Prepared, target: str | None = None):
    """(train windows, test windows) for ``target``."""
    return make_windows(rc, prep, prep.train_cases, target), make_windows(rc, prep, prep.test_cases, target)


def drop_static(samples: Sequence[TimeSeriesSample]) -> list[TimeSeriesSample]:
    """Strip the static group entirely, for a model built with n_static = 0."""
    return [s.with_static(np.zeros(0)) for s in samples]


# -- models ----------------------------------------------------------------

def optimizer_config(rc: RunConfig) -> OptimizerConfig:
    return OptimizerConfig(learning_rate=rc.learning_rate, weight_decay=rc.weight_decay, decay_mode=rc.decay_mode)


def schedule(rc: RunConfig, epochs: int | None = None) -> TrainSchedule:
    return TrainSchedule(epochs=rc.epochs if epochs is None else epochs, batch_size=rc.batch_size, seed=rc.seed)


def tft_config(rc: RunConfig, n_observed: int, n_static: int = 3) -> TftConfig:
    return TftConfig(
        d_model=rc.d_model,
        n_heads=rc.n_heads,
        lstm_layers=rc.lstm_layers,
        full_attention=rc.full_attention,
        history_steps=rc.history_steps,
        horizon=rc.horizon,
        n_static=n_static,
        n_observed=n_observed,
        n_known=1,
    )


def baseline_config(rc: RunConfig, name: str, n_observed: int) -> BaselineConfig:
    key = name.lower()
    if key not in {n.lower() for n in BASELINE_NAMES}:
        raise ValueError(f"unknown baseline {name!r}")
    block = key.startswith("block-")
    return BaselineConfig(
        cell=_CELL[key.removeprefix("block-")],
        block_mode=block,
        hidden=rc.baseline_hidden,
        layers=rc.baseline_layers,
        history_steps=rc.history_steps,
        horizon=rc.horizon,
        n_observed=n_observed,
        n_known=1,
    )


def build_model(rc: RunConfig, n_observed: int, n_static: int = 3, kind: str | None = None):
    """Model object for ``kind`` (defaults to ``rc.model``)."""
    kind = (kind or rc.model).lower()
    if kind == "tft":
        return TemporalFusionTransformer(tft_config(rc, n_observed, n_static))
    if kind == "oracle":
        return OracleForecaster()
    return RecurrentBaseline(baseline_config(rc, kind, n_observed))


def fit(rc: RunConfig, model, train_samples, epochs: int | None = None) -> TrainResult:
    if isinstance(model, OracleForecaster):
        return TrainResult({}, [])
    return train(model, train_samples, schedule(rc, epochs), optimizer_config(rc))


def train_tft(rc: RunConfig, train_samples, static: bool = True) -> tuple[TemporalFusionTransformer, TrainResult]:
    if not static:
        train_samples = drop_static(train_samples)
    n_obs = train_samples[0].z_hist.shape[1]
    model = TemporalFusionTransformer(tft_config(rc, n_obs, train_samples[0].static.shape[0]))
    return model, fit(rc, model, train_samples)


def score(model, params, test_samples) -> tuple[np.ndarray, EvalMetrics]:
    pred = model.predict(params, test_samples)
    truth = np.stack([s.y_future for s in test_samples])
    return pred, evaluate_forecasts(pred, truth, model.quantiles, [s.case_id for s in test_samples])


# -- noise protocol --------------------------------------------------------

SWEEP_HEADER = ["snr_db", "residual_mean", "residual_variance", "coverage", "crossing_rate", "pinball_loss"]


def noisy_set(rc: RunConfig, test_samples, level: int, snr: float) -> list[TimeSeriesSample]:
    """History noise for SNR level ``level``; each (seed, level, case) gets its own stream."""
    return [
        inject_noise(s, snr, seed=[rc.seed, 7919, level, i], linear=rc.snr_linear)
        for i, s in enumerate(test_samples)
    ]


def noise_sweep(rc: RunConfig, model, params, test_samples) -> list[tuple[str, EvalMetrics]]:
    """Clean row first, then one row per configured SNR level."""
    rows = [("clean", score(model, params, test_samples)[1])]
    for level, snr in enumerate(rc.snr_db):
        rows.append((repr(float(snr)), score(model, params, noisy_set(rc, test_samples, level, snr))[1]))
    return rows


def sweep_rows(sweep) -> list[list]:
    return [[label, *(v for _, v in m.rows())] for label, m in sweep]


def sweep_delta(full, ablated) -> list[list]:
    """ablated minus full, metric by metric, with both variances side by side."""
    out = []
    for (label, a), (label_b, b) in zip(full, ablated):
        if label != label_b:
            raise ValueError("sweeps were run on different SNR levels")
        fa, fb = dict(a.rows()), dict(b.rows())
        out.append([label, *(fb[k] - fa[k] for k in fa)])
    return out


# -- hyperparameter search data --------------------------------------------

def hpo_samples(rc: RunConfig, prep: Prepared):
    """(fit, validation) windows for the search objective.

    Cases are drawn from the size band on the full grid, never from the test
    set, and split into fit and validation parts with the run seed.
    """
    gc = gen_config(rc)
    sizes = [s for s in gc.grid.sizes() if rc.hpo_size_lo - 1e-9 <= s <= rc.hpo_size_hi + 1e-9]
    test_ids = set(prep.test_ids)
    pool = [generate_case(loc, float(s), rc.seed, gc) for loc in ("cold", "hot") for s in sizes]
    pool = [c for c in pool if c.case_id not in test_ids]
    chosen = hpo_subsample(pool, rc.hpo_cases, rc.hpo_size_lo, rc.hpo_size_hi, rc.seed)
    fit_cases, val_cases = split(chosen, rc.train_frac, rc.seed)
    return make_windows(rc, prep, fit_cases), make_windows(rc, prep, val_cases)


# -- comparison harness ----------------------------------------------------

def comparison_models(rc: RunConfig, n_observed: int) -> list:
    sched, opt = schedule(rc), optimizer_config(rc)
    models = [TrainedForecaster(TemporalFusionTransformer(tft_config(rc, n_observed)), sched, opt)]
    for name in rc.baselines:
        models.append(TrainedForecaster(RecurrentBaseline(baseline_config(rc, name, n_observed)), sched, opt))
    return models


def with_seed(rc: RunConfig, seed: int) -> RunConfig:
    return replace(rc, seed=int(seed))
