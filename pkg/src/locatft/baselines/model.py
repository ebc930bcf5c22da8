"""Plain recurrent quantile forecasters used as comparison models.

Each history step is fed as [y, z, x]; static covariates are ignored.
Block models map the last encoder state to the whole horizon in one affine
layer. Autoregressive models run a decoder cell that receives the previous
median forecast (y_t at the first step) and emits every quantile per step.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..data.sample import Batch, TimeSeriesSample, collate
from ..numerics import DimensionError, Tensor, matmul, sigmoid, stack, tanh
from ..tft.config import DEFAULT_QUANTILES
from ..tft.model import QuantileForecast
from ..tft.params import init_param_dict

CELLS = {"elman": 1, "gru": 3, "lstm": 4}
DISPLAY = {"elman": "RNN", "gru": "GRU", "lstm": "LSTM"}


@dataclass(frozen=True)
class BaselineConfig:
    cell: str = "elman"
    block_mode: bool = False
    hidden: int = 16
    layers: int = 1
    history_steps: int = 20
    horizon: int = 190
    n_observed: int = 13
    n_known: int = 1
    quantiles: tuple[float, ...] = DEFAULT_QUANTILES

    def __post_init__(self):
        if self.cell not in CELLS:
            raise ValueError(f"cell must be one of {sorted(CELLS)}, got {self.cell!r}")
        if self.hidden < 1 or self.layers < 1:
            raise ValueError("hidden size and layer count must be >= 1")
        if 0.5 not in self.quantiles:
            raise ValueError("quantiles must include the median")

    @property
    def n_inputs(self) -> int:
        return 1 + self.n_observed + self.n_known

    @property
    def name(self) -> str:
        return ("Block-" if self.block_mode else "") + DISPLAY[self.cell]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["quantiles"] = list(self.quantiles)
        return d


def param_shapes(cfg: BaselineConfig) -> dict[str, tuple[int, ...]]:
    g, h, nq = CELLS[cfg.cell], cfg.hidden, len(cfg.quantiles)
    shapes: dict[str, tuple[int, ...]] = {}

    def cell(prefix, d_in):
        shapes[f"{prefix}.W"] = (d_in, g * h)
        shapes[f"{prefix}.U"] = (h, g * h)
        shapes[f"{prefix}.b"] = (g * h,)

    for i in range(cfg.layers):
        cell(f"encoder.layer{i}", cfg.n_inputs if i == 0 else h)
    if cfg.block_mode:
        shapes["head.W"] = (h, cfg.horizon * nq)
        shapes["head.b"] = (cfg.horizon * nq,)
    else:
        for i in range(cfg.layers):
            cell(f"decoder.layer{i}", 1 if i == 0 else h)
        shapes["head.W"] = (h, nq)
        shapes["head.b"] = (nq,)
    return shapes


def init_params(cfg: BaselineConfig, seed: int) -> dict[str, Tensor]:
    return init_param_dict(param_shapes(cfg), seed)


def cell_step(kind: str, x: Tensor, h: Tensor, c: Tensor | None, W: Tensor, U: Tensor, b: Tensor):
    """One recurrent step from primitive ops; returns (h, c)."""
    n = h.shape[-1]
    a = matmul(x, W) + b
    if kind == "elman":
        return tanh(a + matmul(h, U)), None
    if kind == "gru":
        hu = matmul(h, U[:, :2 * n])
        z = sigmoid(a[:, :n] + hu[:, :n])
        r = sigmoid(a[:, n:2 * n] + hu[:, n:])
        cand = tanh(a[:, 2 * n:] + matmul(r * h, U[:, 2 * n:]))
        return (1.0 - z) * cand + z * h, None
    a = a + matmul(h, U)
    i, f = sigmoid(a[:, :n]), sigmoid(a[:, n:2 * n])
    g, o = tanh(a[:, 2 * n:3 * n]), sigmoid(a[:, 3 * n:])
    c = f * c + i * g
    return o * tanh(c), c


def _stack_step(kind, params, prefix, layers, x, hs, cs):
    new_h, new_c = [], []
    inp = x
    for i in range(layers):
        p = f"{prefix}.layer{i}"
        h, c = cell_step(kind, inp, hs[i], cs[i], params[f"{p}.W"], params[f"{p}.U"], params[f"{p}.b"])
        new_h.append(h)
        new_c.append(c)
        inp = h
    return new_h, new_c


def _check(batch: Batch, cfg: BaselineConfig) -> None:
    k1 = cfg.history_steps + 1
    if batch.hist.shape[1:] != (k1, cfg.n_inputs):
        raise DimensionError(f"[encoder] history input {batch.hist.shape[1:]}, config expects {(k1, cfg.n_inputs)}")


def forward_batch(params, cfg: BaselineConfig, batch: Batch) -> Tensor:
    """Normalised quantile outputs (B, horizon, |Q|)."""
    _check(batch, cfg)
    B, n, nq = len(batch), cfg.hidden, len(cfg.quantiles)
    zero = Tensor(np.zeros((B, n)))
    hs = [zero] * cfg.layers
    cs = [zero if cfg.cell == "lstm" else None] * cfg.layers
    hist = batch.hist
    for t in range(hist.shape[1]):
        hs, cs = _stack_step(cfg.cell, params, "encoder", cfg.layers, Tensor(hist[:, t]), hs, cs)
    if cfg.block_mode:
        out = matmul(hs[-1], params["head.W"]) + params["head.b"]
        return out.reshape(B, cfg.horizon, nq)
    mid = list(cfg.quantiles).index(0.5)
    prev = Tensor(batch.y_hist[:, -1:])
    steps = []
    for _ in range(cfg.horizon):
        hs, cs = _stack_step(cfg.cell, params, "decoder", cfg.layers, prev, hs, cs)
        q = matmul(hs[-1], params["head.W"]) + params["head.b"]
        steps.append(q)
        prev = q[:, mid:mid + 1]
    return stack(steps, axis=1)


def predict_normalized(params, cfg: BaselineConfig, samples, batch_size: int = 64) -> np.ndarray:
    frozen = {k: Tensor(v.data) for k, v in params.items()}
    return np.concatenate(
        [forward_batch(frozen, cfg, collate(samples[i:i + batch_size])).data for i in range(0, len(samples), batch_size)]
    )


def baseline_forward(sample: TimeSeriesSample, params, cfg: BaselineConfig) -> QuantileForecast:
    norm = predict_normalized(params, cfg, [sample])[0]
    return QuantileForecast(sample.denormalize(norm), norm, tuple(cfg.quantiles), sample.t, sample.case_id)


class RecurrentBaseline:
    """Model object with the same surface as the TFT wrapper."""

    def __init__(self, cfg: BaselineConfig):
        self.cfg = cfg
        self.name = cfg.name

    @property
    def quantiles(self):
        return self.cfg.quantiles

    def init_params(self, seed: int):
        return init_params(self.cfg, seed)

    def forward_batch(self, params, batch: Batch) -> Tensor:
        return forward_batch(params, self.cfg, batch)

    def predict(self, params, samples) -> np.ndarray:
        return predict_normalized(params, self.cfg, samples)
