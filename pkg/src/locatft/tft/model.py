"""Full forward pass: static path -> selection -> LSTM -> attention -> quantile heads."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..data.sample import Batch, TimeSeriesSample, collate
from ..numerics import DimensionError, Tensor, concat
from .config import TftConfig
from .layers import (
    StaticContext,
    decode_quantiles,
    embed_and_select,
    encode_static,
    interpretable_attention,
    temporal_encode,
)
from .params import Params, init_params


@dataclass
class QuantileForecast:
    """Per-step quantile forecast for one sample.

    ``values`` are in physical units of the target, ``normalized`` in the
    z-scored units the model is trained in. Both are (horizon, n_quantiles).
    """

    values: np.ndarray
    normalized: np.ndarray
    quantiles: tuple[float, ...]
    t: int
    case_id: str = ""

    def __post_init__(self):
        if self.values.shape != self.normalized.shape or self.values.shape[1] != len(self.quantiles):
            raise DimensionError(f"forecast shape {self.values.shape} vs {len(self.quantiles)} quantiles")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("forecast contains non-finite values")


@dataclass
class ForwardTrace:
    static_weights: Tensor | None = None
    hist_weights: Tensor | None = None
    future_weights: Tensor | None = None
    context: StaticContext | None = None
    phi_tilde: Tensor | None = None
    psi: Tensor | None = None
    attention: list[Tensor] = field(default_factory=list)
    beta: Tensor | None = None


def _stage(name: str, fn, *args):
    try:
        return fn(*args)
    except DimensionError as exc:
        raise DimensionError(f"[{name}] {exc}") from exc


def check_batch(batch: Batch, cfg: TftConfig) -> None:
    B = len(batch)
    k1 = cfg.history_steps + 1
    expect = {
        "static": (B, cfg.n_static),
        "hist": (B, k1, cfg.n_hist_inputs),
        "fut": (B, cfg.horizon, cfg.n_known),
    }
    for name, shp in expect.items():
        got = getattr(batch, name).shape
        if got != shp:
            raise DimensionError(f"[inputs] {name} has shape {got}, config expects {shp}")


def forward_batch(
    params: Params,
    cfg: TftConfig,
    batch: Batch,
    hooks: dict[str, Callable[[Tensor], Tensor]] | None = None,
    trace: ForwardTrace | None = None,
) -> Tensor:
    """Normalised quantile outputs of shape (B, horizon, n_quantiles)."""
    check_batch(batch, cfg)
    hooks = hooks or {}
    B, d = len(batch), cfg.d_model
    if cfg.n_static:
        static_emb, w_s = _stage(
            "static selection", embed_and_select, params, "static_vsn", Tensor(batch.static)
        )
        ctx = _stage("static encoder", encode_static, params, static_emb)
        c_v = ctx.c_v
    else:
        zero = Tensor(np.zeros((B, d)))
        ctx, w_s, c_v = StaticContext(zero, zero, zero, zero), None, None
    hist_emb, w_h = _stage("history selection", embed_and_select, params, "hist_vsn", Tensor(batch.hist), c_v)
    fut_emb, w_f = _stage("future selection", embed_and_select, params, "future_vsn", Tensor(batch.fut), c_v)
    embedded = concat([hist_emb, fut_emb], axis=1)
    phi_tilde, psi = _stage("temporal encoder", temporal_encode, params, cfg, embedded, ctx)
    attn_in = hooks["attention_input"](psi) if "attention_input" in hooks else psi
    h_tilde, attn = _stage("attention", interpretable_attention, params, cfg, attn_in)
    fut = slice(cfg.history_steps + 1, None)
    beta = h_tilde[:, fut]
    out = _stage("decoder", decode_quantiles, params, beta, phi_tilde[:, fut], psi[:, fut])
    if trace is not None:
        trace.static_weights, trace.hist_weights, trace.future_weights = w_s, w_h, w_f
        trace.context, trace.phi_tilde, trace.psi = ctx, phi_tilde, psi
        trace.attention, trace.beta = attn, beta
    return out


def predict_normalized(params: Params, cfg: TftConfig, samples, batch_size: int = 64) -> np.ndarray:
    """Inference without building gradient paths into ``params``."""
    frozen = {k: Tensor(v.data) for k, v in params.items()}
    outs = []
    for i in range(0, len(samples), batch_size):
        outs.append(forward_batch(frozen, cfg, collate(samples[i:i + batch_size])).data)
    return np.concatenate(outs, axis=0)


def forward(sample: TimeSeriesSample, params: Params, cfg: TftConfig) -> QuantileForecast:
    norm = predict_normalized(params, cfg, [sample])[0]
    return QuantileForecast(
        values=sample.denormalize(norm),
        normalized=norm,
        quantiles=cfg.quantiles,
        t=sample.t,
        case_id=sample.case_id,
    )


class TemporalFusionTransformer:
    """Thin model object so training code can treat TFT and baselines alike."""

    name = "TFT"

    def __init__(self, cfg: TftConfig):
        self.cfg = cfg

    @property
    def quantiles(self):
        return self.cfg.quantiles

    def init_params(self, seed: int) -> Params:
        return init_params(self.cfg, seed)

    def forward_batch(self, params: Params, batch: Batch) -> Tensor:
        return forward_batch(params, self.cfg, batch)

    def predict(self, params: Params, samples) -> np.ndarray:
        return predict_normalized(params, self.cfg, samples)
