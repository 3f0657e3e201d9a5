"""Dense tensors with tape-based reverse-mode differentiation.

A Tensor wraps one numpy array (float32 for training, float64 for
gradient verification). Ops record a backward closure plus the parents
that need gradients; backward() walks the tape in reverse topological
order, accumulates into .grad buffers, and frees the graph. Gradients
from multiple uses of the same tensor sum.
"""

from __future__ import annotations

import contextlib

import numpy as np

_FLOAT_DTYPES = (np.float32, np.float64)


class ShapeMismatch(ValueError):
    pass


class NotScalarLoss(ValueError):
    pass


_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in _FLOAT_DTYPES:
            arr = arr.astype(np.float32)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        # leaves get an eager zero buffer so "unused parameter" reads as zeros
        self.grad = np.zeros_like(arr) if self.requires_grad else None
        self._parents = ()
        self._backward = None

    @classmethod
    def _from_op(cls, data: np.ndarray, parents, backward) -> "Tensor":
        t = cls.__new__(cls)
        t.data = data
        t.requires_grad = True
        t.grad = None
        t._parents = tuple(parents)
        t._backward = backward
        return t

    @classmethod
    def _constant(cls, data: np.ndarray) -> "Tensor":
        t = cls.__new__(cls)
        t.data = data
        t.requires_grad = False
        t.grad = None
        t._parents = ()
        t._backward = None
        return t

    # shape facts

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self):
        if self.requires_grad:
            if self.grad is None:
                self.grad = np.zeros_like(self.data)
            else:
                self.grad[...] = 0

    def __repr__(self):
        flag = ", grad" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}{flag})"

    # operator sugar; implementations live below

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __truediv__(self, scalar):
        return mul(self, 1.0 / float(scalar))

    def backward(self):
        backward(self)


def accumulate_grad(t: Tensor, g: np.ndarray):
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g.astype(t.data.dtype, copy=False).reshape(t.data.shape)


def unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to the original shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _record(data, parents, backward_fn) -> Tensor:
    live = [p for p in parents if isinstance(p, Tensor) and p.requires_grad]
    if _grad_enabled and live:
        return Tensor._from_op(data, live, backward_fn)
    return Tensor._constant(data)


def backward(loss: Tensor):
    """Fill gradients of everything the scalar loss depends on, then
    release the tape so intermediates can be collected."""
    if loss.size != 1:
        raise NotScalarLoss(f"loss must be scalar, has shape {loss.shape}")
    topo = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))

    if loss.grad is None:
        loss.grad = np.zeros_like(loss.data)
    loss.grad += np.ones_like(loss.data)
    for node in reversed(topo):
        fn = node._backward
        if fn is not None:
            fn(node.grad)
        was_op = fn is not None
        node._backward = None
        node._parents = ()
        if was_op:
            node.grad = None  # only leaves keep their gradient


# elementwise and structural primitives


def _as_array(x, like: np.ndarray):
    if isinstance(x, Tensor):
        return x.data
    return np.asarray(x, dtype=like.dtype)


def add(a, b) -> Tensor:
    ta, tb = isinstance(a, Tensor), isinstance(b, Tensor)
    ref = a.data if ta else b.data
    da, db = _as_array(a, ref), _as_array(b, ref)
    try:
        out = da + db
    except ValueError as exc:
        raise ShapeMismatch(f"add: {da.shape} vs {db.shape}") from exc

    def grad_fn(g):
        if ta:
            accumulate_grad(a, unbroadcast(g, da.shape))
        if tb:
            accumulate_grad(b, unbroadcast(g, db.shape))

    return _record(out, (a, b), grad_fn)


def sub(a, b) -> Tensor:
    return add(a, mul(b, -1.0))


def mul(a, b) -> Tensor:
    ta, tb = isinstance(a, Tensor), isinstance(b, Tensor)
    ref = a.data if ta else b.data
    da, db = _as_array(a, ref), _as_array(b, ref)
    try:
        out = da * db
    except ValueError as exc:
        raise ShapeMismatch(f"mul: {da.shape} vs {db.shape}") from exc

    def grad_fn(g):
        if ta:
            accumulate_grad(a, unbroadcast(g * db, da.shape))
        if tb:
            accumulate_grad(b, unbroadcast(g * da, db.shape))

    return _record(out, (a, b), grad_fn)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    da, db = a.data, b.data
    if da.ndim < 2 or db.ndim < 2:
        raise ShapeMismatch("matmul operands must have at least 2 dims")
    if da.shape[-1] != db.shape[-2]:
        raise ShapeMismatch(f"matmul: {da.shape} @ {db.shape}")
    out = da @ db

    def grad_fn(g):
        accumulate_grad(a, unbroadcast(g @ db.swapaxes(-1, -2), da.shape))
        accumulate_grad(b, unbroadcast(da.swapaxes(-1, -2) @ g, db.shape))

    return _record(out, (a, b), grad_fn)


def tsum(a: Tensor) -> Tensor:
    out = a.data.sum(dtype=a.data.dtype).reshape(())

    def grad_fn(g):
        accumulate_grad(a, np.broadcast_to(g, a.data.shape))

    return _record(out, (a,), grad_fn)


def tmean(a: Tensor) -> Tensor:
    n = a.data.size
    out = (a.data.sum(dtype=a.data.dtype) / n).reshape(())

    def grad_fn(g):
        accumulate_grad(a, np.broadcast_to(g / n, a.data.shape))

    return _record(out, (a,), grad_fn)


def reshape(a: Tensor, shape) -> Tensor:
    out = a.data.reshape(shape)

    def grad_fn(g):
        accumulate_grad(a, g.reshape(a.data.shape))

    return _record(out, (a,), grad_fn)


def permute(a: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    out = a.data.transpose(axes)
    inverse = tuple(int(i) for i in np.argsort(axes))

    def grad_fn(g):
        accumulate_grad(a, g.transpose(inverse))

    return _record(out, (a,), grad_fn)
