"""Parameter layout for the TFT.

Weights use row-vector convention: a dense map ``x @ W`` stores ``W`` with
shape ``(fan_in, fan_out)``. Every shape is a pure function of TftConfig.
"""

from __future__ import annotations

import numpy as np

from ..numerics import Tensor
from ..numerics.init import glorot_uniform
from .config import TftConfig

Params = dict[str, Tensor]


def grn_shapes(prefix: str, d_in: int, d_hidden: int, d_out: int, d_context: int | None) -> dict:
    s = {
        f"{prefix}.W_in": (d_in, d_hidden),
        f"{prefix}.b_in": (d_hidden,),
    }
    if d_context:
        s[f"{prefix}.W_ctx"] = (d_context, d_hidden)
    s.update({
        f"{prefix}.W_hidden": (d_hidden, d_out),
        f"{prefix}.b_hidden": (d_out,),
    })
    s.update(glu_shapes(f"{prefix}.glu", d_out, d_out))
    if d_in != d_out:
        s[f"{prefix}.W_skip"] = (d_in, d_out)
    s.update(ln_shapes(f"{prefix}.ln", d_out))
    return s


def glu_shapes(prefix: str, d_in: int, d_out: int) -> dict:
    return {
        f"{prefix}.W_gate": (d_in, d_out),
        f"{prefix}.b_gate": (d_out,),
        f"{prefix}.W_value": (d_in, d_out),
        f"{prefix}.b_value": (d_out,),
    }


def ln_shapes(prefix: str, d: int) -> dict:
    return {f"{prefix}.gain": (d,), f"{prefix}.bias": (d,)}


def vsn_shapes(prefix: str, n_vars: int, d: int, with_context: bool) -> dict:
    s = {f"{prefix}.W_mlp": (n_vars, d)}
    s.update(grn_shapes(f"{prefix}.var_grn", d, d, d, None))
    s.update(grn_shapes(f"{prefix}.weight_grn", n_vars * d, d, n_vars, d if with_context else None))
    return s


def param_shapes(cfg: TftConfig) -> dict[str, tuple[int, ...]]:
    d = cfg.d_model
    s: dict[str, tuple[int, ...]] = {}
    if cfg.n_static:
        s.update(vsn_shapes("static_vsn", cfg.n_static, d, with_context=False))
        s["static_encoder.W"] = (d, 4 * d)
    ctx = bool(cfg.n_static)
    s.update(vsn_shapes("hist_vsn", cfg.n_hist_inputs, d, with_context=ctx))
    s.update(vsn_shapes("future_vsn", cfg.n_known, d, with_context=ctx))
    for i in range(cfg.lstm_layers):
        s[f"lstm.layer{i}.W_ih"] = (d, 4 * d)
        s[f"lstm.layer{i}.W_hh"] = (d, 4 * d)
        s[f"lstm.layer{i}.b"] = (4 * d,)
    s.update(glu_shapes("post_lstm.glu", d, d))
    s.update(ln_shapes("post_lstm.ln", d))
    s.update(grn_shapes("enrichment", d, d, d, d if ctx else None))
    for h in range(cfg.n_heads):
        s[f"attention.head{h}.W_Q"] = (d, d)
        s[f"attention.head{h}.W_K"] = (d, d)
    s["attention.W_V"] = (d, d)
    s.update(glu_shapes("decoder.attn_glu", d, d))
    s.update(ln_shapes("decoder.attn_ln", d))
    s.update(grn_shapes("decoder.grn", d, d, d, None))
    s.update(glu_shapes("decoder.out_glu", d, d))
    s.update(ln_shapes("decoder.out_ln", d))
    s["quantile_head.W"] = (d, len(cfg.quantiles))
    s["quantile_head.b"] = (len(cfg.quantiles),)
    return s


def init_array(name: str, shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    leaf = name.rsplit(".", 1)[-1]
    if leaf == "gain":
        return np.ones(shape)
    if len(shape) == 1:
        return np.zeros(shape)
    if leaf == "W_mlp":
        # each row expands one scalar channel: fan_in 1
        return glorot_uniform(rng, 1, shape[1], shape)
    return glorot_uniform(rng, shape[0], shape[1], shape)


def init_param_dict(shapes: dict[str, tuple[int, ...]], seed: int) -> Params:
    rng = np.random.default_rng(seed)
    return {name: Tensor(init_array(name, shp, rng), requires_grad=True) for name, shp in shapes.items()}


def init_params(cfg: TftConfig, seed: int = 0) -> Params:
    return init_param_dict(param_shapes(cfg), seed)


class ShapeAuditError(ValueError):
    pass


def shape_audit(params: Params, cfg: TftConfig) -> None:
    """Raise unless ``params`` holds exactly the config-derived tensors."""
    expected = param_shapes(cfg)
    missing = sorted(set(expected) - set(params))
    extra = sorted(set(params) - set(expected))
    bad = [(k, params[k].shape, v) for k, v in expected.items() if k in params and params[k].shape != v]
    if missing or extra or bad:
        raise ShapeAuditError(f"missing={missing[:5]} extra={extra[:5]} mismatched={bad[:5]}")


def count_parameters(params: Params) -> int:
    return int(sum(p.size for p in params.values()))


def clone_params(params: Params, requires_grad: bool = True) -> Params:
    return {k: Tensor(v.data, requires_grad=requires_grad) for k, v in params.items()}
