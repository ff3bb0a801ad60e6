"""Dense 2-D tensors with a reverse-mode gradient tape.

Only what the MLP and the ordinal losses need is here. Every tensor is
2-D; scalars are 1x1. The single broadcasting rule is adding a 1xn row
vector to an mxn matrix (bias addition).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

__all__ = [
    "ShapeError",
    "Tensor",
    "Tape",
    "as_tensor",
    "matmul",
    "add",
    "sub",
    "mul",
    "scale",
    "reduce_sum",
    "reduce_mean",
    "leaky_relu",
    "sigmoid",
    "logsigmoid",
    "log_softmax",
    "dropout",
    "backward",
]


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


BackwardFn = Callable[[np.ndarray], Sequence["np.ndarray | None"]]


class Tensor:
    """A 2-D array that can record how it was produced.

    ``grad`` is ``None`` until a backward pass reaches the tensor.
    """

    __slots__ = ("data", "grad", "requires_grad", "op", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.array(data, dtype=dtype, copy=True)
        if arr.dtype.kind not in "f":
            arr = arr.astype(np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got shape {arr.shape}")
        self.data: np.ndarray = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self.op = "leaf"
        self._parents: tuple[Tensor, ...] = ()
        self._backward: BackwardFn | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape  # type: ignore[return-value]

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op!r}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, float(other))
        return mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self):
        return reduce_sum(self)

    def mean(self):
        return reduce_mean(self)

    def backward(self) -> None:
        backward(self)


def as_tensor(x, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(x, dtype=dtype)


def _record(data: np.ndarray, parents: Sequence[Tensor], fn: BackwardFn, op: str) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.op = op
    out.requires_grad = any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._parents = tuple(parents)
        out._backward = fn
    else:
        out._parents = ()
        out._backward = None
    return out


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    ad, bd = a.data, b.data
    return _record(ad @ bd, (a, b), lambda g: (g @ bd.T, ad.T @ g), "matmul")


def _reduce_to(g: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    if g.shape == shape:
        return g
    return g.sum(axis=0, keepdims=True)


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> tuple[int, int]:
    if a.shape == b.shape:
        return a.shape
    if a.shape[1] == b.shape[1] and 1 in (a.shape[0], b.shape[0]):
        return (max(a.shape[0], b.shape[0]), a.shape[1])
    raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} are incompatible")


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")
    sa, sb = a.shape, b.shape
    return _record(a.data + b.data, (a, b), lambda g: (_reduce_to(g, sa), _reduce_to(g, sb)), "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")
    sa, sb = a.shape, b.shape
    return _record(a.data - b.data, (a, b), lambda g: (_reduce_to(g, sa), -_reduce_to(g, sb)), "sub")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")
    ad, bd = a.data, b.data
    sa, sb = a.shape, b.shape
    return _record(ad * bd, (a, b), lambda g: (_reduce_to(g * bd, sa), _reduce_to(g * ad, sb)), "mul")


def scale(a: Tensor, c: float) -> Tensor:
    c = a.data.dtype.type(c)
    return _record(a.data * c, (a,), lambda g: (g * c,), "scale")


def reduce_sum(a: Tensor) -> Tensor:
    shape = a.shape
    total = a.data.sum(dtype=a.data.dtype).reshape(1, 1)
    return _record(total, (a,), lambda g: (np.full(shape, g[0, 0], dtype=g.dtype),), "sum")


def reduce_mean(a: Tensor) -> Tensor:
    n = a.data.size
    if n == 0:
        raise ShapeError("mean of an empty tensor")
    return scale(reduce_sum(a), 1.0 / n)


def leaky_relu(x: Tensor, slope: float = 0.01) -> Tensor:
    if not 0.0 < slope < 1.0:
        raise ValueError(f"slope must be in (0, 1), got {slope}")
    xd = x.data
    # exactly 0 takes the positive branch
    local = np.where(xd >= 0, 1.0, slope).astype(xd.dtype)
    return _record(xd * local, (x,), lambda g: (g * local,), "leaky_relu")


def sigmoid(x: Tensor) -> Tensor:
    s = expit(x.data)
    return _record(s, (x,), lambda g: (g * s * (1 - s),), "sigmoid")


def _logsigmoid(z: np.ndarray) -> np.ndarray:
    return np.minimum(z, 0) - np.log1p(np.exp(-np.abs(z)))


def logsigmoid(x: Tensor) -> Tensor:
    """log(sigmoid(x)) without forming the sigmoid first."""
    xd = x.data
    out = _logsigmoid(xd)
    return _record(out, (x,), lambda g: (g * expit(-xd),), "logsigmoid")


def log_softmax(x: Tensor) -> Tensor:
    """Row-wise log-softmax."""
    xd = x.data
    shifted = xd - xd.max(axis=1, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    probs = np.exp(out)
    return _record(out, (x,), lambda g: (g - probs * g.sum(axis=1, keepdims=True),), "log_softmax")


def dropout(x: Tensor, p: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: survivors are scaled by 1/(1-p) so eval is the identity."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"drop probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    if rng is None:
        raise ValueError("training-mode dropout needs a random generator")
    keep = (rng.random(x.shape) >= p).astype(x.dtype) / x.dtype.type(1.0 - p)
    return _record(x.data * keep, (x,), lambda g: (g * keep,), "dropout")


@dataclass
class Tape:
    """Operations reachable from a loss, inputs before outputs."""

    nodes: list[Tensor] = field(default_factory=list)

    @classmethod
    def from_loss(cls, loss: Tensor) -> "Tape":
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(loss, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in reversed(node._parents):
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        return cls(order)

    def __len__(self) -> int:
        return len(self.nodes)


def backward(loss: Tensor) -> Tape:
    """Fill ``grad`` on every tensor that requires it and feeds ``loss``.

    Gradients are overwritten, not accumulated across calls.
    """
    if loss.shape != (1, 1):
        raise ValueError(f"backward needs a 1x1 loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise ValueError("loss does not depend on any tensor that requires grad")
    tape = Tape.from_loss(loss)
    for node in tape.nodes:
        node.grad = np.zeros_like(node.data)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(tape.nodes):
        if node._backward is None:
            continue
        for parent, g in zip(node._parents, node._backward(node.grad)):
            if parent.requires_grad and g is not None:
                parent.grad += g
    return tape
