"""Minimal dense-tensor numerics with tape-based reverse-mode differentiation.

Just enough primitives for a pre-norm transformer block: matmul, elementwise
arithmetic, mean, transpose/reshape, last-dim concat/slice, gelu, softmax,
layer_norm and multi-head scaled dot-product attention. Every primitive has a
hand-written vector-Jacobian product; the test suite checks each forward
against a loop-based reference and each backward against central finite
differences.

Ops are recorded on the thread's active ``Tape`` (a ``with Tape()`` block).
Without an active tape nothing is recorded, which is the inference mode used
by rollouts. A tape is single-owner: do not share one across threads, and do
not mutate ``Tensor.data`` of anything the tape has seen before calling
``Tape.grad``.

Broadcasting is deliberately restricted to (tokens x features) op (features)
for the elementwise binaries, which keeps every backward rule auditable.
"""
from __future__ import annotations

import threading
from typing import Callable, Sequence

import numpy as np
from scipy.special import erf

from .errors import NonFiniteError, ShapeMismatchError, UsageError

LAYER_NORM_EPS = 1e-5
_FLOAT_DTYPES = (np.float32, np.float64)

_STATE = threading.local()


def _active_tape() -> "Tape | None":
    return getattr(_STATE, "tape", None)


def _counter() -> "OpCounter | None":
    return getattr(_STATE, "counter", None)


class Tensor:
    """A dense array with an optional gradient requirement.

    data is always float32 or float64; binary ops require matching dtypes so
    precision never changes silently.
    """

    __slots__ = ("data", "requires_grad")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in _FLOAT_DTYPES:
            arr = arr.astype(np.float64)
        self.data = arr
        self.requires_grad = bool(requires_grad)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"


class OpCounter:
    """Counts multiply-accumulates actually executed by matmul/attention.

    Used as the independent oracle for the analytic compute-cost formulas.
    """

    def __init__(self):
        self.matmul_macs = 0
        self.attention_macs = 0

    @property
    def total_macs(self) -> int:
        return self.matmul_macs + self.attention_macs

    def __enter__(self):
        if _counter() is not None:
            raise UsageError("an op counter is already active in this thread")
        _STATE.counter = self
        return self

    def __exit__(self, exc_type, exc, tb):
        _STATE.counter = None
        return False


class Tape:
    """Execution-ordered record of primitive ops.

    Execution order is a topological order, so replaying the records in
    reverse propagates gradients to every requires_grad leaf.
    """

    def __init__(self):
        self._records: list[tuple[Tensor, tuple[Tensor, ...], Callable]] = []
        self._tracked: set[int] = set()
        self._leaves_seen: set[int] = set()

    def __enter__(self):
        if _active_tape() is not None:
            raise UsageError("a tape is already active in this thread")
        _STATE.tape = self
        return self

    def __exit__(self, exc_type, exc, tb):
        _STATE.tape = None
        return False

    def _tracks(self, t: Tensor) -> bool:
        return t.requires_grad or id(t) in self._tracked

    def _record(self, out: Tensor, inputs: tuple[Tensor, ...], vjp: Callable):
        for t in inputs:
            if t.requires_grad:
                self._leaves_seen.add(id(t))
        self._records.append((out, inputs, vjp))
        self._tracked.add(id(out))

    def grad(self, loss: Tensor, leaves: Sequence[Tensor]) -> list[np.ndarray]:
        """Gradient of a scalar loss with respect to each leaf.

        Leaves must have requires_grad and must have participated in at least
        one recorded op; a leaf with no path to the loss gets a zero gradient.
        """
        if loss.data.shape != ():
            raise UsageError(f"loss must be a scalar, got shape {loss.data.shape}")
        for leaf in leaves:
            if not leaf.requires_grad:
                raise UsageError("every leaf must have requires_grad=True")
            if id(leaf) not in self._leaves_seen:
                raise UsageError("leaf is not on this tape")
        grads: dict[int, np.ndarray] = {id(loss): np.ones((), dtype=loss.dtype)}
        for out, inputs, vjp in reversed(self._records):
            g = grads.pop(id(out), None)
            if g is None:
                continue
            partials = vjp(g)
            for t, p in zip(inputs, partials):
                if p is None or not self._tracks(t):
                    continue
                acc = grads.get(id(t))
                grads[id(t)] = p if acc is None else acc + p
        return [grads.get(id(leaf), np.zeros_like(leaf.data)) for leaf in leaves]


def _check_finite(out: np.ndarray, op: str):
    if getattr(_STATE, "checked", False) and not np.all(np.isfinite(out)):
        raise NonFiniteError(f"non-finite values produced by {op}")


class checked_mode:
    """Context manager: raise NonFiniteError as soon as any primitive emits
    NaN or infinity."""

    def __enter__(self):
        self._prev = getattr(_STATE, "checked", False)
        _STATE.checked = True
        return self

    def __exit__(self, exc_type, exc, tb):
        _STATE.checked = self._prev
        return False


def _binary_dtype(a: Tensor, b: Tensor, op: str):
    if a.dtype != b.dtype:
        raise UsageError(f"{op}: dtype mismatch {a.dtype} vs {b.dtype}")


def _make(out_data: np.ndarray, inputs: tuple[Tensor, ...], vjp: Callable, op: str) -> Tensor:
    _check_finite(out_data, op)
    out = Tensor(out_data)
    tape = _active_tape()
    if tape is not None and any(tape._tracks(t) for t in inputs):
        tape._record(out, inputs, vjp)
    return out


def _row_broadcast(a: Tensor, b: Tensor, op: str) -> bool:
    """True for the one permitted broadcast: [tokens, features] op [features]."""
    if a.shape == b.shape:
        return False
    if a.data.ndim == 2 and b.data.ndim == 1 and a.shape[1] == b.shape[0]:
        return True
    raise ShapeMismatchError(f"{op}: incompatible shapes {a.shape} and {b.shape}")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    _binary_dtype(a, b, "matmul")
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"matmul: incompatible shapes {a.shape} @ {b.shape}")
    c = _counter()
    if c is not None:
        c.matmul_macs += a.shape[0] * a.shape[1] * b.shape[1]
    ad, bd = a.data, b.data

    def vjp(g):
        return g @ bd.T, ad.T @ g

    return _make(ad @ bd, (a, b), vjp, "matmul")


def add(a: Tensor, b: Tensor) -> Tensor:
    _binary_dtype(a, b, "add")
    if _row_broadcast(a, b, "add"):
        return _make(a.data + b.data[None, :], (a, b),
                     lambda g: (g, g.sum(axis=0)), "add")
    return _make(a.data + b.data, (a, b), lambda g: (g, g), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _binary_dtype(a, b, "sub")
    if _row_broadcast(a, b, "sub"):
        return _make(a.data - b.data[None, :], (a, b),
                     lambda g: (g, -g.sum(axis=0)), "sub")
    return _make(a.data - b.data, (a, b), lambda g: (g, -g), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _binary_dtype(a, b, "mul")
    ad, bd = a.data, b.data
    if _row_broadcast(a, b, "mul"):
        return _make(ad * bd[None, :], (a, b),
                     lambda g: (g * bd[None, :], (g * ad).sum(axis=0)), "mul")
    return _make(ad * bd, (a, b), lambda g: (g * bd, g * ad), "mul")


def scale(a: Tensor, s: float) -> Tensor:
    s = float(s)
    return _make(a.data * np.asarray(s, dtype=a.dtype), (a,),
                 lambda g: (g * np.asarray(s, dtype=a.dtype),), "scale")


def add_scalar(a: Tensor, s: float) -> Tensor:
    return _make(a.data + np.asarray(float(s), dtype=a.dtype), (a,),
                 lambda g: (g,), "add_scalar")


def mean(a: Tensor) -> Tensor:
    n = a.size
    shape, dtype = a.shape, a.dtype

    def vjp(g):
        return (np.full(shape, g / n, dtype=dtype),)

    return _make(a.data.mean(dtype=a.dtype), (a,), vjp, "mean")


def transpose(a: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    if sorted(axes) != list(range(a.data.ndim)):
        raise ShapeMismatchError(f"transpose: {axes} is not a permutation of rank {a.data.ndim}")
    inverse = tuple(np.argsort(axes))
    return _make(a.data.transpose(axes), (a,),
                 lambda g: (g.transpose(inverse),), "transpose")


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    if int(np.prod(shape)) != a.size:
        raise ShapeMismatchError(f"reshape: cannot view {a.shape} as {shape}")
    old = a.shape
    return _make(a.data.reshape(shape), (a,), lambda g: (g.reshape(old),), "reshape")


def concat(a: Tensor, b: Tensor) -> Tensor:
    """Concatenate along the last dimension."""
    _binary_dtype(a, b, "concat")
    if a.shape[:-1] != b.shape[:-1]:
        raise ShapeMismatchError(f"concat: leading dims differ, {a.shape} vs {b.shape}")
    ka = a.shape[-1]
    return _make(np.concatenate([a.data, b.data], axis=-1), (a, b),
                 lambda g: (g[..., :ka], g[..., ka:]), "concat")


def narrow(a: Tensor, axis: int, start: int, stop: int) -> Tensor:
    """Slice [start, stop) along one axis."""
    ndim = a.data.ndim
    axis = axis % ndim
    if not 0 <= start < stop <= a.shape[axis]:
        raise ShapeMismatchError(
            f"narrow: [{start}, {stop}) invalid for axis {axis} of shape {a.shape}")
    index = tuple(slice(start, stop) if d == axis else slice(None) for d in range(ndim))
    shape, dtype = a.shape, a.dtype

    def vjp(g):
        full = np.zeros(shape, dtype=dtype)
        full[index] = g
        return (full,)

    return _make(a.data[index].copy(), (a,), vjp, "narrow")


def gelu(a: Tensor) -> Tensor:
    """Exact (erf-based) GELU."""
    x = a.data
    cdf = 0.5 * (1.0 + erf(x / np.sqrt(2.0)))
    out = (x * cdf).astype(a.dtype)
    pdf = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
    local = (cdf + x * pdf).astype(a.dtype)
    return _make(out, (a,), lambda g: (g * local,), "gelu")


def softmax(a: Tensor) -> Tensor:
    """Softmax along the last dimension."""
    x = a.data
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    s = (e / e.sum(axis=-1, keepdims=True)).astype(a.dtype)

    def vjp(g):
        return ((g - (g * s).sum(axis=-1, keepdims=True)) * s,)

    return _make(s, (a,), vjp, "softmax")


def layer_norm(a: Tensor) -> Tensor:
    """Zero-mean unit-variance normalization of the last dimension, no affine.

    Epsilon sits inside the square root, so constant inputs map to zeros.
    """
    x = a.data
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    y = (xc * inv).astype(a.dtype)

    def vjp(g):
        g_mean = g.mean(axis=-1, keepdims=True)
        gy_mean = (g * y).mean(axis=-1, keepdims=True)
        return ((inv * (g - g_mean - y * gy_mean)).astype(a.dtype),)

    return _make(y, (a,), vjp, "layer_norm")


def attention(q: Tensor, k: Tensor, v: Tensor) -> Tensor:
    """Multi-head scaled dot-product attention on [heads, tokens, head_dim]."""
    _binary_dtype(q, k, "attention")
    _binary_dtype(q, v, "attention")
    if not (q.shape == k.shape == v.shape) or q.data.ndim != 3:
        raise ShapeMismatchError(
            f"attention: expected equal [h, T, d] shapes, got {q.shape}, {k.shape}, {v.shape}")
    h, t, dh = q.shape
    c = _counter()
    if c is not None:
        c.attention_macs += 2 * h * t * t * dh
    sc = 1.0 / np.sqrt(dh)
    qd, kd, vd = q.data, k.data, v.data
    scores = np.matmul(qd, kd.transpose(0, 2, 1)) * sc
    scores -= scores.max(axis=-1, keepdims=True)
    e = np.exp(scores)
    attn = (e / e.sum(axis=-1, keepdims=True)).astype(q.dtype)
    out = np.matmul(attn, vd)

    def vjp(g):
        dv = np.matmul(attn.transpose(0, 2, 1), g)
        da = np.matmul(g, vd.transpose(0, 2, 1))
        ds = (da - (da * attn).sum(axis=-1, keepdims=True)) * attn
        dq = np.matmul(ds, kd) * sc
        dk = np.matmul(ds.transpose(0, 2, 1), qd) * sc
        return dq.astype(q.dtype), dk.astype(q.dtype), dv.astype(q.dtype)

    return _make(out, (q, k, v), vjp, "attention")
