"""Central finite-difference gradient checks.

The checker only ever calls the scalar loss function on perturbed copies of
the raw arrays, so it stays independent of the tape being tested.
"""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from .tensor import Tensor

FD_STEP = 1e-5
# gradients below this magnitude are compared on an absolute scale
GRAD_FLOOR = 1e-7


def relative_error(analytic: float, numeric: float, floor: float = GRAD_FLOOR) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def numeric_grad(loss_fn: Callable[[], float], arr: np.ndarray, index, step: float = FD_STEP) -> float:
    old = arr[index]
    arr[index] = old + step
    up = loss_fn()
    arr[index] = old - step
    down = loss_fn()
    arr[index] = old
    return (up - down) / (2.0 * step)


def check_gradients(
    build_loss: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    n_per_param: int | None = None,
    rng: np.random.Generator | None = None,
    step: float = FD_STEP,
    total: int | None = None,
) -> list[tuple[str, tuple[int, ...], float, float, float]]:
    """Compare tape gradients with central differences.

    ``build_loss`` must rebuild the graph from the current parameter arrays
    on every call. Either ``n_per_param`` entries are sampled from each
    tensor, or ``total`` entries are sampled across all of them.
    Returns rows ``(name, index, analytic, numeric, rel_err)``.
    """
    rng = rng or np.random.default_rng(0)
    for p in params.values():
        p.zero_grad()
    loss = build_loss()
    loss.backward()
    analytic = {k: p.grad.copy() for k, p in params.items()}

    def value() -> float:
        return float(build_loss().data)

    picks: list[tuple[str, tuple[int, ...]]] = []
    names = list(params)
    if total is not None:
        sizes = np.array([params[k].size for k in names], dtype=float)
        flat_choice = rng.choice(int(sizes.sum()), size=min(total, int(sizes.sum())), replace=False)
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        for f in np.sort(flat_choice):
            j = int(np.searchsorted(offsets, f, side="right") - 1)
            picks.append((names[j], np.unravel_index(f - offsets[j], params[names[j]].shape)))
    else:
        for k in names:
            n = params[k].size if n_per_param is None else min(n_per_param, params[k].size)
            for f in rng.choice(params[k].size, size=n, replace=False):
                picks.append((k, np.unravel_index(int(f), params[k].shape)))

    rows = []
    for k, idx in picks:
        num = numeric_grad(value, params[k].data, idx, step)
        ana = float(analytic[k][idx])
        rows.append((k, tuple(int(i) for i in idx), ana, num, relative_error(ana, num)))
    return rows


def max_relative_error(rows) -> float:
    return max(r[-1] for r in rows) if rows else 0.0
