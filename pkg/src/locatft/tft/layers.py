"""Building blocks of the temporal fusion transformer.

All blocks take the flat parameter dict plus a name prefix and work on
tensors with arbitrary leading (batch, time) axes; the feature axis is last.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import (
    DimensionError,
    Tensor,
    elu,
    layer_norm,
    lstm_layer,
    matmul,
    reshape,
    scale,
    sigmoid,
    softmax,
    swapaxes,
    tsum,
)
from .config import TftConfig
from .params import Params


def dense(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    y = matmul(x, w)
    return y if b is None else y + b


def glu(p: Params, prefix: str, x: Tensor) -> Tensor:
    gate = sigmoid(dense(x, p[f"{prefix}.W_gate"], p[f"{prefix}.b_gate"]))
    return gate * dense(x, p[f"{prefix}.W_value"], p[f"{prefix}.b_value"])


def add_norm(p: Params, prefix: str, residual: Tensor, x: Tensor) -> Tensor:
    return layer_norm(residual + x, p[f"{prefix}.gain"], p[f"{prefix}.bias"])


def _expand_context(c: Tensor, like_ndim: int) -> Tensor:
    # (B, h) context broadcast across any middle (time/variable) axes
    while c.ndim < like_ndim:
        c = reshape(c, c.shape[:1] + (1,) + c.shape[1:])
    return c


def grn(p: Params, prefix: str, a: Tensor, c: Tensor | None = None) -> Tensor:
    """Gated residual network: LayerNorm(skip(a) + GLU(W_hidden ELU(W_in a + W_ctx c)))."""
    h = dense(a, p[f"{prefix}.W_in"], p[f"{prefix}.b_in"])
    if c is not None:
        w_ctx = p.get(f"{prefix}.W_ctx")
        if w_ctx is None:
            raise DimensionError(f"{prefix}: context given but block has no context weights")
        h = h + _expand_context(matmul(c, w_ctx), h.ndim)
    eta1 = dense(elu(h), p[f"{prefix}.W_hidden"], p[f"{prefix}.b_hidden"])
    skip = a if f"{prefix}.W_skip" not in p else matmul(a, p[f"{prefix}.W_skip"])
    return add_norm(p, f"{prefix}.ln", skip, glu(p, f"{prefix}.glu", eta1))


@dataclass
class StaticContext:
    c_v: Tensor  # variable-selection context
    c_c: Tensor  # LSTM initial cell state
    c_h: Tensor  # LSTM initial hidden state
    c_e: Tensor  # static enrichment context


def embed_and_select(
    p: Params, prefix: str, raw: Tensor, context: Tensor | None = None
) -> tuple[Tensor, Tensor]:
    """Embed every scalar input, gate it, and mix by softmax selection weights.

    raw: (..., n_vars). Returns (selected (..., d_model), weights (..., n_vars)).
    """
    w_mlp = p[f"{prefix}.W_mlp"]
    n_vars, d = w_mlp.shape
    if raw.shape[-1] != n_vars:
        raise DimensionError(f"{prefix}: expected {n_vars} inputs, got {raw.shape[-1]}")
    lead = raw.shape[:-1]
    embedded = reshape(raw, lead + (n_vars, 1)) * w_mlp  # (..., n_vars, d)
    gated = grn(p, f"{prefix}.var_grn", embedded)
    flat = reshape(embedded, lead + (n_vars * d,))
    weights = softmax(grn(p, f"{prefix}.weight_grn", flat, context), axis=-1)
    mixed = tsum(reshape(weights, lead + (n_vars, 1)) * gated, axis=-2)
    return mixed, weights


def encode_static(p: Params, static_embedding: Tensor) -> StaticContext:
    """One dense map to 4*d_model, split in the order (c_v, c_c, c_h, c_e)."""
    out = matmul(static_embedding, p["static_encoder.W"])
    d = out.shape[-1] // 4
    parts = [out[..., i * d:(i + 1) * d] for i in range(4)]
    return StaticContext(*parts)


def temporal_encode(
    p: Params, cfg: TftConfig, embedded: Tensor, ctx: StaticContext
) -> tuple[Tensor, Tensor]:
    """LSTM over all positions, gated skip (phi_tilde), then static enrichment (psi).

    embedded: (B, N, d). Returns (phi_tilde, psi), both (B, N, d).
    """
    if embedded.shape[1] != cfg.n_positions:
        raise DimensionError(
            f"temporal_encode: sequence length {embedded.shape[1]} != k + horizon + 1 = {cfg.n_positions}"
        )
    x = embedded
    h0, c0 = ctx.c_h, ctx.c_c
    for i in range(cfg.lstm_layers):
        x = lstm_layer(
            x, h0, c0, p[f"lstm.layer{i}.W_ih"], p[f"lstm.layer{i}.W_hh"], p[f"lstm.layer{i}.b"]
        )
        # only the first layer sees the static state
        h0 = c0 = Tensor(np.zeros(ctx.c_h.shape))
    phi_tilde = add_norm(p, "post_lstm.ln", embedded, glu(p, "post_lstm.glu", x))
    psi = grn(p, "enrichment", phi_tilde, ctx.c_e if "enrichment.W_ctx" in p else None)
    return phi_tilde, psi


def causal_mask(n: int) -> np.ndarray:
    """True where the key position lies after the query position."""
    return np.triu(np.ones((n, n), dtype=bool), k=1)


def interpretable_attention(
    p: Params, cfg: TftConfig, psi: Tensor
) -> tuple[Tensor, list[Tensor]]:
    """Per-head queries/keys, one shared value projection, heads averaged.

    Returns (H_tilde (B, N, d), per-head attention matrices (B, N, N)).
    """
    d = psi.shape[-1]
    inv_sqrt = 1.0 / np.sqrt(cfg.d_model)
    mask = None if cfg.full_attention else causal_mask(psi.shape[-2])
    v = matmul(psi, p["attention.W_V"])
    heads = []
    attn = []
    for h in range(cfg.n_heads):
        q = matmul(psi, p[f"attention.head{h}.W_Q"])
        k = matmul(psi, p[f"attention.head{h}.W_K"])
        logits = scale(matmul(q, swapaxes(k, -1, -2)), inv_sqrt)
        a = softmax(logits, axis=-1, mask=mask)
        attn.append(a)
        heads.append(matmul(a, v))
    total = heads[0]
    for hh in heads[1:]:
        total = total + hh
    if d != cfg.d_model:
        raise DimensionError(f"attention: feature size {d} != d_model {cfg.d_model}")
    return scale(total, 1.0 / cfg.n_heads), attn


def decode_quantiles(
    p: Params, beta: Tensor, phi_tilde: Tensor, psi: Tensor
) -> Tensor:
    """Decoder stack on the future slice; returns (B, horizon, n_quantiles)."""
    delta = add_norm(p, "decoder.attn_ln", psi, glu(p, "decoder.attn_glu", beta))
    eps = grn(p, "decoder.grn", delta)
    eps_tilde = add_norm(p, "decoder.out_ln", phi_tilde, glu(p, "decoder.out_glu", eps))
    return dense(eps_tilde, p["quantile_head.W"], p["quantile_head.b"])
