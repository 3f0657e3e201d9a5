"""Approximate randomization test on the macro-F1 difference.

Under the null hypothesis that systems A and B are interchangeable,
swapping their predictions on any subset of examples leaves the
difference distribution unchanged. Each iteration flips a fair coin
per example, recomputes both macro-F1 scores, and counts how often the
permuted absolute difference reaches the observed one. Additive
smoothing keeps the p-value in (0, 1].
"""

from __future__ import annotations

import numpy as np

from ..seeding import default_seed, make_rng
from .metrics import LengthMismatch
from .schema import RelationSchema

# per-iteration count vectors are [TP | FP | FN], each num_relations wide
_CHUNK_CELLS = 4_000_000


def _contributions(gold: np.ndarray, preds: np.ndarray, schema: RelationSchema) -> np.ndarray:
    """n×(3r) count contributions of each example under these predictions."""
    r = schema.num_relations
    no_rel = schema.no_relation_id
    n = gold.size
    out = np.zeros((n, 3 * r), dtype=np.float64)
    rows = np.arange(n)
    hit = preds == gold
    gold_rel = gold // 2
    pred_rel = preds // 2
    tp_rows = hit & (gold != no_rel)
    out[rows[tp_rows], gold_rel[tp_rows]] = 1.0
    fp_rows = ~hit & (preds != no_rel)
    out[rows[fp_rows], r + pred_rel[fp_rows]] += 1.0
    fn_rows = ~hit & (gold != no_rel)
    out[rows[fn_rows], 2 * r + gold_rel[fn_rows]] += 1.0
    return out


def _macro_from_counts(counts: np.ndarray, r: int) -> np.ndarray:
    """Macro-F1 per row of stacked [TP|FP|FN] counts."""
    tp = counts[:, :r]
    fp = counts[:, r : 2 * r]
    fn = counts[:, 2 * r :]
    denom = 2 * tp + fp + fn
    f1 = np.where(denom > 0, 200.0 * tp / np.maximum(denom, 1), 0.0)
    support = denom > 0
    n_support = support.sum(axis=1)
    return np.where(n_support > 0, (f1 * support).sum(axis=1) / np.maximum(n_support, 1), 0.0)


def randomization_test(
    preds_a,
    preds_b,
    gold,
    schema: RelationSchema,
    iterations: int = 10000,
    seed: int | None = None,
) -> float:
    gold = np.asarray(gold, dtype=np.int64)
    preds_a = np.asarray(preds_a, dtype=np.int64)
    preds_b = np.asarray(preds_b, dtype=np.int64)
    if not (gold.shape == preds_a.shape == preds_b.shape) or gold.ndim != 1:
        raise LengthMismatch("gold and both prediction vectors must have equal length")
    if iterations < 1:
        raise ValueError("iterations must be positive")
    if gold.size == 0:
        raise ValueError("empty evaluation set")

    r = schema.num_relations
    ca = _contributions(gold, preds_a, schema)
    cb = _contributions(gold, preds_b, schema)
    base_a = ca.sum(axis=0, keepdims=True)
    base_b = cb.sum(axis=0, keepdims=True)
    delta = ca - cb

    observed = abs(
        float(_macro_from_counts(base_a, r)[0]) - float(_macro_from_counts(base_b, r)[0])
    )

    rng = make_rng(seed if seed is not None else default_seed(), 501)
    n = gold.size
    chunk = max(1, min(iterations, _CHUNK_CELLS // n))
    at_least = 0
    done = 0
    while done < iterations:
        take = min(chunk, iterations - done)
        swap = (rng.random((take, n)) < 0.5).astype(np.float64)
        moved = swap @ delta
        macro_x = _macro_from_counts(base_a - moved, r)
        macro_y = _macro_from_counts(base_b + moved, r)
        at_least += int(np.sum(np.abs(macro_x - macro_y) >= observed - 1e-9))
        done += take
    return (at_least + 1) / (iterations + 1)
