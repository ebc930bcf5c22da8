"""Dense float64 tensors with tape-based reverse-mode differentiation.

Every operation records a closure that maps the output gradient back onto
its parents. ``Tensor.backward`` walks the graph in reverse topological
order. Graphs are single use: build, call ``backward`` once, discard.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class NumericError(ArithmeticError):
    """An operation produced NaN or Inf."""


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "op")

    def __init__(self, data, requires_grad: bool = False, _parents=(), op: str = "leaf"):
        arr = np.array(data, dtype=np.float64, copy=True) if _parents == () else data
        self.data: np.ndarray = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = np.zeros_like(arr) if requires_grad else None
        self._parents: tuple[Tensor, ...] = _parents
        self._backward: Callable[[np.ndarray], None] | None = None
        self.op = op
        if not _parents and not np.all(np.isfinite(arr)):
            raise NumericError(f"non-finite value in leaf tensor ({op})")

    # construction helpers -------------------------------------------------

    @classmethod
    def from_op(cls, data: np.ndarray, parents: Sequence["Tensor"], backward, op: str) -> "Tensor":
        """Wrap the result of a custom operation.

        ``backward(g)`` must return one gradient array (or None) per parent.
        """
        data = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(data)):
            raise NumericError(f"non-finite result in '{op}'")
        needs = any(p.requires_grad for p in parents)
        out = cls(data, requires_grad=False, _parents=tuple(parents), op=op)
        if needs:
            out.requires_grad = True

            def _bw(g: np.ndarray) -> None:
                grads = backward(g)
                for p, gp in zip(parents, grads):
                    if gp is not None and p.requires_grad:
                        p._accumulate(gp)

            out._backward = _bw
        return out

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad += g

    # basic properties -----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op!r}, requires_grad={self.requires_grad})"

    # autodiff -------------------------------------------------------------

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Propagate gradients from this tensor to every leaf that needs them."""
        if not self.requires_grad:
            raise RuntimeError("backward() on a tensor that does not require grad")
        if grad is None:
            if self.size != 1:
                raise DimensionError("backward() without a seed needs a scalar output")
            grad = np.ones_like(self.data)
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        # intermediate grads start empty; leaves keep what they have
        for node in order:
            if node._parents:
                node.grad = None
        self._accumulate(np.asarray(grad, dtype=np.float64))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
                node.grad = None

    # operator sugar -------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return take(self, idx)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from exc


# elementwise ----------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "add")
    return Tensor.from_op(
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
        "add",
    )


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "sub")
    return Tensor.from_op(
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
        "sub",
    )


def mul(a, b) -> Tensor:
    """Hadamard product (with numpy broadcasting)."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "hadamard")
    return Tensor.from_op(
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
        "hadamard",
    )


hadamard = mul


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    return Tensor.from_op(a.data * c, (a,), lambda g: (g * c,), "scale")


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    # split by sign so exp never overflows
    e = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return Tensor.from_op(out, (a,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return Tensor.from_op(out, (a,), lambda g: (g * (1.0 - out * out),), "tanh")


def elu(a: Tensor, alpha: float = 1.0) -> Tensor:
    x = a.data
    neg = alpha * np.expm1(np.minimum(x, 0.0))
    out = np.where(x >= 0, x, neg)
    dout = np.where(x >= 0, 1.0, neg + alpha)
    return Tensor.from_op(out, (a,), lambda g: (g * dout,), "elu")


def elementwise(op: str, *args, **kwargs) -> Tensor:
    """Dispatch by name: add, sub, hadamard, sigmoid, elu, scale, tanh."""
    table = {
        "add": add,
        "sub": sub,
        "hadamard": mul,
        "sigmoid": sigmoid,
        "elu": elu,
        "scale": scale,
        "tanh": tanh,
    }
    try:
        fn = table[op]
    except KeyError:
        raise ValueError(f"unknown elementwise op {op!r}") from None
    return fn(*args, **kwargs)


# linear algebra ---------------------------------------------------------------


def matmul(a, b) -> Tensor:
    """Matrix product over the last two axes, batching over leading axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 1 or b.ndim < 2:
        raise DimensionError(f"matmul: need a.ndim>=1, b.ndim>=2, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul: inner dimensions differ, {a.shape} @ {b.shape}")
    out = np.matmul(a.data, b.data)

    if b.ndim == 2:
        # weight-matrix case: fold leading axes for a single GEMM
        def backward(g):
            ga = g @ b.data.T if a.requires_grad else None
            gb = None
            if b.requires_grad:
                a2 = a.data.reshape(-1, a.shape[-1])
                gb = a2.T @ g.reshape(-1, g.shape[-1])
            return ga, gb
    else:
        def backward(g):
            ga = gb = None
            if a.requires_grad:
                ga = _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape)
            if b.requires_grad:
                gb = _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape)
            return ga, gb

    return Tensor.from_op(out, (a, b), backward, "matmul")


# reductions and shape ---------------------------------------------------------


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return Tensor.from_op(out, (a,), backward, "sum")


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    n = a.size if axis is None else int(np.prod([a.shape[i] for i in np.atleast_1d(axis)]))
    return scale(tsum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    try:
        out = a.data.reshape(shape)
    except ValueError as exc:
        raise DimensionError(f"reshape: cannot view {a.shape} as {shape}") from exc
    return Tensor.from_op(out, (a,), lambda g: (g.reshape(a.shape),), "reshape")


def swapaxes(a: Tensor, ax1: int, ax2: int) -> Tensor:
    out = np.swapaxes(a.data, ax1, ax2)
    return Tensor.from_op(out, (a,), lambda g: (np.swapaxes(g, ax1, ax2),), "swapaxes")


def take(a: Tensor, idx) -> Tensor:
    """Basic (slice/int) indexing."""
    out = a.data[idx]

    def backward(g):
        full = np.zeros_like(a.data)
        full[idx] += g
        return (full,)

    return Tensor.from_op(np.array(out, copy=True), (a,), backward, "take")


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        raise DimensionError(f"concat: {[t.shape for t in tensors]}") from exc
    sizes = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, sizes, axis=axis))

    return Tensor.from_op(out, tensors, backward, "concat")


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = np.stack([t.data for t in tensors], axis=axis)

    def backward(g):
        return tuple(np.moveaxis(g, axis, 0))

    return Tensor.from_op(out, tensors, backward, "stack")


def broadcast_to(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    out = np.broadcast_to(a.data, shape).copy()
    return Tensor.from_op(out, (a,), lambda g: (_unbroadcast(g, a.shape),), "broadcast")


# normalisation ----------------------------------------------------------------


def softmax(a: Tensor, axis: int = -1, mask: np.ndarray | None = None) -> Tensor:
    """Max-shifted softmax. ``mask`` (bool, broadcastable) marks entries forced to 0."""
    x = a.data
    if mask is not None:
        x = np.where(mask, -np.inf, x)
    m = np.max(x, axis=axis, keepdims=True)
    e = np.exp(x - m)
    if mask is not None:
        e = np.where(mask, 0.0, e)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return Tensor.from_op(out, (a,), backward, "softmax")


LN_EPS = 1e-5


def layer_norm(a: Tensor, gain: Tensor, bias: Tensor, eps: float = LN_EPS) -> Tensor:
    """Normalise over the last axis, then apply gain and bias."""
    d = a.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise DimensionError(f"layer_norm: last extent {d} vs gain {gain.shape}, bias {bias.shape}")
    x = a.data
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = xhat * gain.data + bias.data

    def backward(g):
        gx = None
        if a.requires_grad:
            gh = g * gain.data
            gx = inv * (gh - gh.mean(axis=-1, keepdims=True)
                        - xhat * (gh * xhat).mean(axis=-1, keepdims=True))
        lead = tuple(range(g.ndim - 1))
        gg = (g * xhat).sum(axis=lead) if gain.requires_grad else None
        gb = g.sum(axis=lead) if bias.requires_grad else None
        return gx, gg, gb

    return Tensor.from_op(out, (a, gain, bias), backward, "layer_norm")


# recurrent ----------------------------------------------------------------------


def lstm_layer(x: Tensor, h0: Tensor, c0: Tensor, w_ih: Tensor, w_hh: Tensor, b: Tensor) -> Tensor:
    """One LSTM layer over a whole sequence as a single tape node.

    x: (B, N, d_in); h0, c0: (B, h); w_ih: (d_in, 4h); w_hh: (h, 4h); b: (4h,).
    Gate order in the packed weights is (input, forget, cell, output).
    Returns the hidden sequence (B, N, h).
    """
    B, N, _ = x.shape
    h = w_hh.shape[0]
    if w_ih.shape != (x.shape[-1], 4 * h) or w_hh.shape != (h, 4 * h) or b.shape != (4 * h,):
        raise DimensionError(
            f"lstm: x {x.shape}, W_ih {w_ih.shape}, W_hh {w_hh.shape}, b {b.shape}"
        )
    if h0.shape != (B, h) or c0.shape != (B, h):
        raise DimensionError(f"lstm: initial state {h0.shape}/{c0.shape}, expected {(B, h)}")

    xw = x.data @ w_ih.data + b.data  # (B, N, 4h)
    gates = np.empty((N, B, 4 * h))
    cs = np.empty((N + 1, B, h))
    hs = np.empty((N + 1, B, h))
    tcs = np.empty((N, B, h))
    hs[0] = h0.data
    cs[0] = c0.data
    whh = w_hh.data
    for t in range(N):
        z = xw[:, t] + hs[t] @ whh
        zi = z[:, :h]
        zf = z[:, h:2 * h]
        zo = z[:, 3 * h:]
        act = np.empty_like(z)
        act[:, :h] = 0.5 * (1.0 + np.tanh(0.5 * zi))
        act[:, h:2 * h] = 0.5 * (1.0 + np.tanh(0.5 * zf))
        act[:, 2 * h:3 * h] = np.tanh(z[:, 2 * h:3 * h])
        act[:, 3 * h:] = 0.5 * (1.0 + np.tanh(0.5 * zo))
        gates[t] = act
        cs[t + 1] = act[:, h:2 * h] * cs[t] + act[:, :h] * act[:, 2 * h:3 * h]
        tcs[t] = np.tanh(cs[t + 1])
        hs[t + 1] = act[:, 3 * h:] * tcs[t]
    out = np.ascontiguousarray(np.swapaxes(hs[1:], 0, 1))

    def backward(g):
        gseq = np.swapaxes(g, 0, 1)  # (N, B, h)
        dz_all = np.empty((N, B, 4 * h))
        dh = np.zeros((B, h))
        dc = np.zeros((B, h))
        for t in range(N - 1, -1, -1):
            act = gates[t]
            i, f, gg, o = act[:, :h], act[:, h:2 * h], act[:, 2 * h:3 * h], act[:, 3 * h:]
            dh = dh + gseq[t]
            dc = dc + dh * o * (1.0 - tcs[t] ** 2)
            dz = dz_all[t]
            dz[:, :h] = dc * gg * i * (1.0 - i)
            dz[:, h:2 * h] = dc * cs[t] * f * (1.0 - f)
            dz[:, 2 * h:3 * h] = dc * i * (1.0 - gg * gg)
            dz[:, 3 * h:] = dh * tcs[t] * o * (1.0 - o)
            dh = dz @ whh.T
            dc = dc * f
        dz_b = np.swapaxes(dz_all, 0, 1)  # (B, N, 4h)
        gx = dz_b @ w_ih.data.T if x.requires_grad else None
        gw_ih = x.data.reshape(-1, x.shape[-1]).T @ dz_b.reshape(-1, 4 * h) if w_ih.requires_grad else None
        gw_hh = None
        if w_hh.requires_grad:
            gw_hh = hs[:-1].reshape(-1, h).T @ dz_all.reshape(-1, 4 * h)
        gb = dz_all.sum(axis=(0, 1)) if b.requires_grad else None
        return gx, dh, dc, gw_ih, gw_hh, gb

    return Tensor.from_op(out, (x, h0, c0, w_ih, w_hh, b), backward, "lstm")


def zeros(shape) -> Tensor:
    return Tensor(np.zeros(shape))


def parameters_requiring_grad(tensors: Iterable[Tensor]) -> list[Tensor]:
    return [t for t in tensors if t.requires_grad]
