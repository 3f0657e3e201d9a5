"""Neural ops with hand-derived backward passes.

Each op validates shapes, computes the forward value with numpy, and
registers one closure on the tape. Reductions keep numpy's row-major
accumulation order, so repeated runs are bitwise identical.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from .tensor import ShapeMismatch, Tensor, _record, accumulate_grad

_INV_SQRT2 = float(1.0 / np.sqrt(2.0))
_INV_SQRT2PI = float(1.0 / np.sqrt(2.0 * np.pi))


def gelu(x: Tensor) -> Tensor:
    """Exact error-function form, 0.5 x (1 + erf(x/sqrt(2)))."""
    data = x.data
    cdf = 0.5 * (1.0 + erf(data * _INV_SQRT2))
    out = data * cdf

    def grad_fn(g):
        pdf = _INV_SQRT2PI * np.exp(-0.5 * data * data)
        accumulate_grad(x, g * (cdf + data * pdf))

    return _record(out, (x,), grad_fn)


def sigmoid(x: Tensor) -> Tensor:
    data = x.data
    out = np.empty_like(data)
    pos = data >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-data[pos]))
    expx = np.exp(data[~pos])
    out[~pos] = expx / (1.0 + expx)

    def grad_fn(g):
        accumulate_grad(x, g * out * (1.0 - out))

    return _record(out, (x,), grad_fn)


def softmax(x: Tensor) -> Tensor:
    """Last-axis softmax with max subtraction."""
    data = x.data
    shifted = data - data.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    out = ex / ex.sum(axis=-1, keepdims=True)

    def grad_fn(g):
        inner = (g * out).sum(axis=-1, keepdims=True)
        accumulate_grad(x, out * (g - inner))

    return _record(out, (x,), grad_fn)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-12) -> Tensor:
    data = x.data
    width = data.shape[-1]
    if gamma.data.shape != (width,) or beta.data.shape != (width,):
        raise ShapeMismatch(
            f"layer_norm expects gain/bias of shape ({width},), got {gamma.data.shape} and {beta.data.shape}"
        )
    mean = data.mean(axis=-1, keepdims=True)
    centered = data - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_std
    out = xhat * gamma.data + beta.data

    def grad_fn(g):
        reduce_axes = tuple(range(g.ndim - 1))
        accumulate_grad(beta, g.sum(axis=reduce_axes))
        accumulate_grad(gamma, (g * xhat).sum(axis=reduce_axes))
        dxhat = g * gamma.data
        inner = dxhat.sum(axis=-1, keepdims=True) + xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
        accumulate_grad(x, inv_std * (dxhat - inner / width))

    return _record(out, (x, gamma, beta), grad_fn)


def embedding_lookup(table: Tensor, ids) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= table.data.shape[0]):
        raise ShapeMismatch(
            f"ids out of range [0, {table.data.shape[0]}): min {ids.min()}, max {ids.max()}"
        )
    out = table.data[ids]

    def grad_fn(g):
        if not table.requires_grad:
            return
        buf = np.zeros_like(table.data)
        np.add.at(buf, ids.reshape(-1), g.reshape(-1, table.data.shape[-1]))
        accumulate_grad(table, buf)

    return _record(out, (table,), grad_fn)


def gather_rows(x: Tensor, rows, cols) -> Tensor:
    """Pick (row, position) vectors out of a [batch, seq, width] tensor."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if rows.shape != cols.shape:
        raise ShapeMismatch(f"gather_rows index shapes differ: {rows.shape} vs {cols.shape}")
    out = x.data[rows, cols]

    def grad_fn(g):
        buf = np.zeros_like(x.data)
        np.add.at(buf, (rows, cols), g)
        accumulate_grad(x, buf)

    return _record(out, (x,), grad_fn)


def concat(a: Tensor, b: Tensor, axis: int = -1) -> Tensor:
    split = a.data.shape[axis]
    out = np.concatenate([a.data, b.data], axis=axis)

    def grad_fn(g):
        ga, gb = np.split(g, [split], axis=axis)
        accumulate_grad(a, ga)
        accumulate_grad(b, gb)

    return _record(out, (a, b), grad_fn)


def dropout(x: Tensor, p: float, rng: np.random.Generator, train: bool = True) -> Tensor:
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0,1), got {p}")
    if not train or p == 0.0:
        return x
    keep = (rng.random(x.data.shape) >= p).astype(x.data.dtype)
    scale = x.data.dtype.type(1.0 / (1.0 - p))
    out = x.data * keep * scale

    def grad_fn(g):
        accumulate_grad(x, g * keep * scale)

    return _record(out, (x,), grad_fn)


def cross_entropy(logits: Tensor, targets, ignore_index: int = -100) -> Tensor:
    """Mean negative log-likelihood over targets not equal to the sentinel."""
    data = logits.data
    if data.ndim != 2:
        raise ShapeMismatch(f"cross_entropy expects [n, classes] logits, got {data.shape}")
    targets = np.asarray(targets, dtype=np.int64)
    if targets.shape != (data.shape[0],):
        raise ShapeMismatch(f"targets shape {targets.shape} does not match {data.shape[0]} rows")
    valid = targets != ignore_index
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise ValueError("cross_entropy: every target is the ignore sentinel")
    safe_targets = np.where(valid, targets, 0)
    if safe_targets.max() >= data.shape[1] or (targets[valid] < 0).any():
        raise ShapeMismatch("target class out of range")

    shifted = data - data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1))
    logp = shifted[np.arange(data.shape[0]), safe_targets] - lse
    loss = (-logp[valid].sum(dtype=data.dtype) / n_valid).reshape(())

    def grad_fn(g):
        probs = np.exp(shifted - lse[:, None])
        probs[np.arange(data.shape[0]), safe_targets] -= 1.0
        probs[~valid] = 0.0
        accumulate_grad(logits, probs * (g / n_valid))

    return _record(loss, (logits,), grad_fn)


def bce_with_logits(logits: Tensor, targets) -> Tensor:
    """Mean binary cross-entropy, computed in log space for stability."""
    z = logits.data
    t = np.asarray(targets, dtype=z.dtype)
    if t.shape != z.shape:
        raise ShapeMismatch(f"targets shape {t.shape} does not match logits {z.shape}")
    per = np.maximum(z, 0) - z * t + np.log1p(np.exp(-np.abs(z)))
    loss = (per.sum(dtype=z.dtype) / per.size).reshape(())

    def grad_fn(g):
        sig = np.empty_like(z)
        pos = z >= 0
        sig[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        expz = np.exp(z[~pos])
        sig[~pos] = expz / (1.0 + expz)
        accumulate_grad(logits, (sig - t) * (g / per.size))

    return _record(loss, (logits,), grad_fn)
