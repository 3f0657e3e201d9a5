"""Central-difference verification of the tape gradients."""

from __future__ import annotations

import numpy as np

from ..seeding import make_rng
from .tensor import Tensor, backward, no_grad

REL_ERR_FLOOR = 1e-8
GRAD_SCALE_FRACTION = 1e-3


def grad_check(f, params, eps: float = 1e-3, samples: int = 200, rng=None) -> float:
    """Max relative error between tape gradients and finite differences.

    `f` must be a deterministic closure over `params` returning a scalar
    Tensor (run it with dropout off). Checks up to `samples` coordinates
    drawn without replacement across all parameters. Use float64
    parameters; float32 cannot support eps this small.

    Each error is measured against the coordinate's own magnitude, floored
    at a fraction of the largest gradient anywhere: coordinates that far
    below the dominant scale sit inside central-difference noise, so they
    are judged against that scale rather than against themselves.
    """
    params = list(params)
    rng = make_rng(0) if rng is None else rng
    for p in params:
        p.zero_grad()
    backward(f())
    analytic = [np.array(p.grad, dtype=np.float64, copy=True) for p in params]
    scale = max((float(np.max(np.abs(a))) for a in analytic if a.size), default=0.0)
    floor = max(REL_ERR_FLOOR, GRAD_SCALE_FRACTION * scale)

    sizes = [p.data.size for p in params]
    total = sum(sizes)
    picked = rng.choice(total, size=min(samples, total), replace=False)
    picked.sort()
    offsets = np.cumsum([0] + sizes)

    worst = 0.0
    with no_grad():
        for flat in picked:
            which = int(np.searchsorted(offsets, flat, side="right")) - 1
            local = int(flat - offsets[which])
            p = params[which]
            original = p.data.flat[local]
            p.data.flat[local] = original + eps
            plus = float(f().data)
            p.data.flat[local] = original - eps
            minus = float(f().data)
            p.data.flat[local] = original
            numeric = (plus - minus) / (2.0 * eps)
            exact = float(analytic[which].flat[local])
            err = abs(exact - numeric) / max(floor, abs(exact) + abs(numeric))
            worst = max(worst, err)
    return worst


def as_check_params(arrays) -> list:
    """Wrap float64 copies of the given arrays as leaf parameters."""
    return [Tensor(np.asarray(a, dtype=np.float64), requires_grad=True) for a in arrays]
