"""Dense tensors with reverse-mode automatic differentiation.

The engine is deliberately small: rank <= 2 arrays, a handful of
operations (enough to express an embedding lookup, an LSTM recurrence,
label-specific graph convolutions with edge gates, and a softmax
classifier), and nothing else. Arrays are numpy float32 or float64;
the precision is chosen per run and mixing dtypes in one expression is
an error rather than a silent upcast.

Each operation attaches a backward closure and parent references to its
output. ``Tensor.backward()`` linearises the recorded graph into a tape
(every node after all of its inputs) and walks it once in reverse,
accumulating into ``.grad``. Gradients of leaf tensors accumulate
across calls, so summing two losses and back-propagating once is
equivalent to back-propagating each loss separately.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterable, Sequence

import numpy as np

DTYPES = {32: np.float32, 64: np.float64}


class ShapeError(ValueError):
    """Operand shapes or dtypes are incompatible with an operation."""


_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block (inference paths)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    """A dense array plus an optional position in a computation graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        if arr.ndim > 2:
            raise ShapeError(f"rank-{arr.ndim} tensors are not supported (shape {arr.shape})")
        self.data: np.ndarray = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[], None] | None = None

    # -- introspection -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{flag})"

    # -- gradient bookkeeping -------------------------------------------

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g)  # copy: g may alias another node's grad
        else:
            self.grad += g

    def backward(self) -> None:
        """Reverse sweep from a scalar; visits every graph node exactly once."""
        if self.data.size != 1:
            raise ShapeError(f"backward() needs a scalar, got shape {self.shape}")
        self._accumulate(np.ones_like(self.data))
        for node in reversed(_tape(self)):
            if node._backward is not None:
                node._backward()

    # -- operator sugar --------------------------------------------------

    def __add__(self, other):
        return add(self, _as_tensor(other, self.dtype))

    def __radd__(self, other):
        return add(_as_tensor(other, self.dtype), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other, self.dtype))

    def __rmul__(self, other):
        return mul(_as_tensor(other, self.dtype), self)

    def __neg__(self):
        return mul(self, _as_tensor(-1.0, self.dtype))

    def __sub__(self, other):
        return add(self, -_as_tensor(other, self.dtype))

    def __matmul__(self, other):
        return matmul(self, other)

    def relu(self) -> "Tensor":
        return relu(self)

    def tanh(self) -> "Tensor":
        return tanh(self)

    def sigmoid(self) -> "Tensor":
        return sigmoid(self)

    def transpose(self) -> "Tensor":
        return transpose(self)

    def reshape(self, shape) -> "Tensor":
        return reshape(self, shape)

    def sum(self) -> "Tensor":
        return sum_all(self)


def _as_tensor(x, dtype) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype))


def _tape(root: Tensor) -> list[Tensor]:
    """Topological order of the graph below ``root`` (inputs first).

    Iterative so that long LSTM chains do not hit the recursion limit.
    """
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def _make(data: np.ndarray, parents: Sequence[Tensor], backward: Callable[[Tensor], Callable[[], None]]) -> Tensor:
    """Wrap an op result; record the graph only when a parent needs grads."""
    out = Tensor(data)
    if _grad_enabled:
        for p in parents:
            if p.requires_grad:
                out.requires_grad = True
                out._parents = tuple(parents)
                out._backward = backward(out)
                break
    return out


def _check_same_dtype(*tensors: Tensor) -> None:
    first = tensors[0].data.dtype
    for t in tensors[1:]:
        if t.data.dtype != first:
            raise ShapeError(
                f"mixed dtypes in one operation: {sorted({str(x.data.dtype) for x in tensors})}")


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``g`` down to ``shape``, undoing numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# -- arithmetic ----------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_same_dtype(a, b)
    data = a.data + b.data

    def bw(out: Tensor):
        def run():
            if a.requires_grad:
                a._accumulate(_unbroadcast(out.grad, a.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(out.grad, b.shape))
        return run

    return _make(data, (a, b), bw)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_same_dtype(a, b)
    data = a.data * b.data

    def bw(out: Tensor):
        def run():
            if a.requires_grad:
                a._accumulate(_unbroadcast(out.grad * b.data, a.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(out.grad * a.data, b.shape))
        return run

    return _make(data, (a, b), bw)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product (m,k)@(k,n); also the matrix-vector cases with 1-D operands."""
    _check_same_dtype(a, b)
    if a.data.ndim == 0 or b.data.ndim == 0:
        raise ShapeError(f"matmul needs rank >= 1, got {a.shape} @ {b.shape}")
    inner_a = a.shape[-1]
    inner_b = b.shape[0]
    if inner_a != inner_b:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} @ {b.shape}")
    data = a.data @ b.data

    def bw(out: Tensor):
        def run():
            g = out.grad
            if a.data.ndim == 2 and b.data.ndim == 2:
                ga, gb = g @ b.data.T, a.data.T @ g
            elif a.data.ndim == 2 and b.data.ndim == 1:
                ga, gb = np.outer(g, b.data), a.data.T @ g
            elif a.data.ndim == 1 and b.data.ndim == 2:
                ga, gb = b.data @ g, np.outer(a.data, g)
            else:  # 1-D @ 1-D -> scalar
                ga, gb = g * b.data, g * a.data
            if a.requires_grad:
                a._accumulate(ga)
            if b.requires_grad:
                b._accumulate(gb)
        return run

    return _make(data, (a, b), bw)


# -- elementwise nonlinearities -------------------------------------------


def relu(x: Tensor) -> Tensor:
    data = np.maximum(x.data, 0)

    def bw(out: Tensor):
        gate = (x.data > 0).astype(x.dtype)  # subgradient 0 at x == 0

        def run():
            if x.requires_grad:
                x._accumulate(out.grad * gate)
        return run

    return _make(data, (x,), bw)


def tanh(x: Tensor) -> Tensor:
    data = np.tanh(x.data)

    def bw(out: Tensor):
        def run():
            if x.requires_grad:
                x._accumulate(out.grad * (1.0 - out.data * out.data))
        return run

    return _make(data, (x,), bw)


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    # Split at 0 so exp() never sees a large positive argument.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(x: Tensor) -> Tensor:
    data = _stable_sigmoid(np.asarray(x.data))

    def bw(out: Tensor):
        def run():
            if x.requires_grad:
                x._accumulate(out.grad * out.data * (1.0 - out.data))
        return run

    return _make(data, (x,), bw)


# -- shape manipulation ----------------------------------------------------


def transpose(x: Tensor) -> Tensor:
    if x.data.ndim != 2:
        raise ShapeError(f"transpose needs a matrix, got shape {x.shape}")
    data = x.data.T.copy()

    def bw(out: Tensor):
        def run():
            if x.requires_grad:
                x._accumulate(out.grad.T)
        return run

    return _make(data, (x,), bw)


def reshape(x: Tensor, shape) -> Tensor:
    data = x.data.reshape(shape)

    def bw(out: Tensor):
        def run():
            if x.requires_grad:
                x._accumulate(out.grad.reshape(x.shape))
        return run

    return _make(data, (x,), bw)


def slice_cols(x: Tensor, start: int, stop: int) -> Tensor:
    """Columns [start, stop) of a matrix."""
    if x.data.ndim != 2:
        raise ShapeError(f"slice_cols needs a matrix, got shape {x.shape}")
    if not 0 <= start < stop <= x.shape[1]:
        raise ShapeError(f"column range [{start},{stop}) invalid for shape {x.shape}")
    data = x.data[:, start:stop].copy()

    def bw(out: Tensor):
        def run():
            if x.requires_grad:
                g = np.zeros_like(x.data)
                g[:, start:stop] = out.grad
                x._accumulate(g)
        return run

    return _make(data, (x,), bw)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        raise ShapeError("concat of zero tensors")
    _check_same_dtype(*tensors)
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum(sizes)[:-1]

    def bw(out: Tensor):
        def run():
            pieces = np.split(out.grad, offsets, axis=axis)
            for t, piece in zip(tensors, pieces):
                if t.requires_grad:
                    t._accumulate(piece)
        return run

    return _make(data, tuple(tensors), bw)


def mean_rows(x: Tensor) -> Tensor:
    """Arithmetic mean over the rows of an (n, d) matrix -> (d,)."""
    if x.data.ndim != 2:
        raise ShapeError(f"mean_rows needs a matrix, got shape {x.shape}")
    n = x.shape[0]
    if n == 0:
        raise ShapeError("mean_rows over zero rows")
    data = x.data.mean(axis=0)

    def bw(out: Tensor):
        def run():
            if x.requires_grad:
                x._accumulate(np.broadcast_to(out.grad / n, x.shape))
        return run

    return _make(data, (x,), bw)


def sum_all(x: Tensor) -> Tensor:
    data = np.asarray(x.data.sum(), dtype=x.dtype)

    def bw(out: Tensor):
        def run():
            if x.requires_grad:
                x._accumulate(np.broadcast_to(out.grad, x.shape).astype(x.dtype))
        return run

    return _make(data, (x,), bw)


# -- row gather / scatter ---------------------------------------------------


def gather_rows(x: Tensor, indices) -> Tensor:
    """Select rows ``x[indices]``; duplicate indices accumulate on backward."""
    idx = np.asarray(indices, dtype=np.intp)
    if x.data.ndim != 2:
        raise ShapeError(f"gather_rows needs a matrix, got shape {x.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
        raise IndexError(f"row index out of range for {x.shape[0]} rows")
    data = x.data[idx]

    def bw(out: Tensor):
        def run():
            if x.requires_grad:
                if x.grad is None:
                    x.grad = np.zeros_like(x.data)
                np.add.at(x.grad, idx, out.grad)
        return run

    return _make(data, (x,), bw)


def scatter_add_rows(rows: Tensor, indices, n_rows: int) -> Tensor:
    """Accumulate ``rows`` into an (n_rows, d) zero matrix at ``indices``."""
    idx = np.asarray(indices, dtype=np.intp)
    if rows.data.ndim != 2:
        raise ShapeError(f"scatter_add_rows needs a matrix, got shape {rows.shape}")
    if idx.shape != (rows.shape[0],):
        raise ShapeError(f"need one target row per input row: {idx.shape} vs {rows.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= n_rows):
        raise IndexError(f"row index out of range for {n_rows} rows")
    data = np.zeros((n_rows, rows.shape[1]), dtype=rows.dtype)
    np.add.at(data, idx, rows.data)

    def bw(out: Tensor):
        def run():
            if rows.requires_grad:
                rows._accumulate(out.grad[idx])
        return run

    return _make(data, (rows,), bw)


# -- classifier loss ---------------------------------------------------------


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis (plain numpy helper)."""
    return np.exp(log_softmax(logits))


def softmax_cross_entropy(logits: Tensor, label: int) -> Tensor:
    """Negative log-likelihood of ``label`` under softmax(logits); scalar output."""
    if logits.data.ndim != 1:
        raise ShapeError(f"softmax_cross_entropy needs a vector, got shape {logits.shape}")
    n_classes = logits.shape[0]
    if not 0 <= label < n_classes:
        raise IndexError(f"label {label} out of range for {n_classes} classes")
    logp = log_softmax(logits.data)
    data = np.asarray(-logp[label], dtype=logits.dtype)

    def bw(out: Tensor):
        def run():
            if logits.requires_grad:
                g = np.exp(logp)
                g[label] -= 1.0
                logits._accumulate(out.grad * g)
        return run

    return _make(data, (logits,), bw)


# -- regularisation -----------------------------------------------------------


def dropout(x: Tensor, keep_prob: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: zero with prob 1-keep_prob and rescale survivors.

    ``keep_prob`` is the probability of keeping an element. Identity at
    inference time or with keep_prob == 1.
    """
    if keep_prob <= 0 or keep_prob > 1:
        raise ShapeError(f"keep_prob must be in (0, 1], got {keep_prob}")
    if not training or keep_prob == 1.0:
        return x
    if rng is None:
        raise ShapeError("training-mode dropout needs an rng")
    mask = (rng.random(x.shape) < keep_prob).astype(x.dtype) / x.dtype.type(keep_prob)
    data = x.data * mask

    def bw(out: Tensor):
        def run():
            if x.requires_grad:
                x._accumulate(out.grad * mask)
        return run

    return _make(data, (x,), bw)


# -- construction helpers -------------------------------------------------------


def zeros(shape, dtype=np.float64, requires_grad: bool = False) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype), requires_grad=requires_grad)


def glorot(rng: np.random.Generator, shape: tuple[int, ...], dtype=np.float64) -> Tensor:
    """Uniform Glorot-initialised parameter tensor."""
    fan_in = shape[-1] if len(shape) > 1 else shape[0]
    fan_out = shape[0]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    data = rng.uniform(-limit, limit, size=shape).astype(dtype)
    return Tensor(data, requires_grad=True)


def parameters_of(tensors: Iterable[Tensor]) -> list[Tensor]:
    return [t for t in tensors if t.requires_grad]
