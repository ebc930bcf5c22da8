"""Run configuration: presets, a flat key=value file format, and resolution.

Precedence is command-line overrides > config file > preset defaults.
Unknown keys are rejected everywhere so a typo can never be silently ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    pass


BASELINE_NAMES = ("RNN", "Block-RNN", "GRU", "Block-GRU", "LSTM", "Block-LSTM")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    # corpus
    sample_rate_hz: float = 0.1
    duration_s: float = 2000.0
    pre_s: float = 100.0
    grid_every: int = 10
    generator_noise: float = 0.004
    corpus_dir: str = ""
    # samples
    target: str = "cntrlvar_2"
    history_steps: int = 20
    horizon: int = 190
    t_start_s: float = 100.0
    train_frac: float = 0.8
    prune_threshold: float = 0.95
    # model: "tft", "oracle", or a baseline name such as "Block-GRU"
    model: str = "tft"
    checkpoint: str = ""
    d_model: int = 16
    n_heads: int = 2
    lstm_layers: int = 1
    full_attention: bool = False
    # training
    epochs: int = 200
    batch_size: int = 8
    learning_rate: float = 1e-3
    weight_decay: float = 4e-3
    decay_mode: str = "decoupled"
    # hyperparameter search
    hpo_n_max: int = 20
    hpo_n_init: int = 5
    hpo_epochs: int = 20
    hpo_cases: int = 10
    hpo_size_lo: float = 6.5
    hpo_size_hi: float = 10.5
    # noise protocol
    snr_db: tuple[float, ...] = (40.0, 30.0, 25.0, 20.0, 15.0)
    snr_linear: bool = False
    # comparison harness
    baselines: tuple[str, ...] = BASELINE_NAMES
    baseline_hidden: int = 16
    baseline_layers: int = 1
    compare_targets: tuple[str, ...] = ("cntrlvar_2", "cntrlvar_101")
    # reports
    figures: bool = True

    def resolved_corpus_dir(self, out: Path) -> Path:
        return Path(self.corpus_dir) if self.corpus_dir else Path(out) / "corpus"

    def resolved_checkpoint(self, out: Path) -> Path:
        return Path(self.checkpoint) if self.checkpoint else Path(out) / "train" / "model.ckpt"

    def dump(self) -> str:
        lines = [f"{f.name} = {_format(getattr(self, f.name))}" for f in fields(self)]
        return "\n".join(lines) + "\n"


PRESETS: dict[str, dict] = {
    "desk": {},
    "paper": {
        "sample_rate_hz": 2.0,
        "pre_s": 0.0,
        "grid_every": 1,
        "history_steps": 200,
        "horizon": 3800,
        "d_model": 123,
        "n_heads": 11,
        "lstm_layers": 15,
        "epochs": 100,
        "batch_size": 32,
        "hpo_n_max": 100,
        "hpo_epochs": 100,
    },
}

_FIELDS = {f.name: f for f in fields(RunConfig)}


def _format(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(key: str, raw: str):
    default = getattr(RunConfig(), key)
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError(raw)
            return v
        if isinstance(default, tuple):
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if default and isinstance(default[0], float):
                return tuple(float(x) for x in items)
            return tuple(items)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def parse_assignments(pairs, source: str) -> dict:
    out = {}
    for lineno, line in pairs:
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = _parse(key, value)
    return out


def read_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    pairs = []
    for i, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            pairs.append((i, line))
    return parse_assignments(pairs, str(path))


def resolve(preset: str = "desk", config_file=None, overrides: dict | None = None) -> RunConfig:
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    cfg = replace(RunConfig(), **PRESETS[preset])
    if config_file is not None:
        cfg = replace(cfg, **read_config_file(config_file))
    if overrides:
        unknown = set(overrides) - set(_FIELDS)
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}")
        cfg = replace(cfg, **overrides)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if not 0 < cfg.train_frac < 1:
        raise ConfigError("train_frac must lie in (0, 1)")
    if cfg.epochs < 0 or cfg.batch_size < 1:
        raise ConfigError("epochs must be >= 0 and batch_size >= 1")
    if cfg.hpo_n_init < 2 or cfg.hpo_n_max < 1:
        raise ConfigError("hpo_n_init must be >= 2 and hpo_n_max >= 1")
    if cfg.grid_every < 1 or cfg.sample_rate_hz <= 0:
        raise ConfigError("grid_every must be >= 1 and sample_rate_hz > 0")
    if cfg.decay_mode not in ("decoupled", "l2"):
        raise ConfigError("decay_mode must be 'decoupled' or 'l2'")
    models = {"tft", "oracle"} | {b.lower() for b in BASELINE_NAMES}
    if cfg.model.lower() not in models:
        raise ConfigError(f"unknown model {cfg.model!r}; choose from tft, oracle, {', '.join(BASELINE_NAMES)}")
    for b in cfg.baselines:
        if b.lower() not in {n.lower() for n in BASELINE_NAMES}:
            raise ConfigError(f"unknown baseline {b!r}")
    if not cfg.snr_db:
        raise ConfigError("snr_db needs at least one level")
