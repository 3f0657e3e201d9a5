"""Directional relation F1.

Each relation is scored by pooling true/false positives and false
negatives over its two directional classes, then macro-averaged. The
no-relation class never contributes a macro term of its own, but
predicting it against a gold relation still costs a false negative,
and predicting a relation against gold no-relation costs a false
positive. Relations absent from both gold and predictions are left out
of the macro mean rather than dragging it down with zeros.

All F1 values are on the 0..100 scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .schema import RelationSchema


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class EvalReport:
    schema: RelationSchema
    per_relation: dict
    supported: tuple
    macro_f1: float
    confusion: np.ndarray
    direction_errors: int

    def to_json_dict(self) -> dict:
        return {
            "macro_f1": self.macro_f1,
            "per_relation": dict(self.per_relation),
            "supported": list(self.supported),
            "direction_errors": self.direction_errors,
            "confusion": self.confusion.tolist(),
            "labels": [self.schema.label(i) for i in range(self.schema.num_classes)],
        }


def _pooled_counts(confusion: np.ndarray, schema: RelationSchema) -> tuple:
    """Per-relation (TP, FP, FN) arrays, pooled over both directions."""
    diag = np.diag(confusion)
    col = confusion.sum(axis=0)
    row = confusion.sum(axis=1)
    n = schema.num_relations
    pair = lambda v: v[: 2 * n].reshape(n, 2).sum(axis=1)
    tp = pair(diag)
    fp = pair(col - diag)
    fn = pair(row - diag)
    return tp, fp, fn


def f1_from_counts(tp, fp, fn) -> np.ndarray:
    denom = 2 * tp + fp + fn
    return np.where(denom > 0, 200.0 * tp / np.maximum(denom, 1), 0.0)


def evaluate_f1(gold, pred, schema: RelationSchema) -> EvalReport:
    gold = np.asarray(gold, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if gold.shape != pred.shape or gold.ndim != 1:
        raise LengthMismatch(f"gold {gold.shape} vs pred {pred.shape}")
    c = schema.num_classes
    if gold.size and (gold.min() < 0 or gold.max() >= c or pred.min() < 0 or pred.max() >= c):
        raise ValueError("class id outside the schema")

    confusion = np.zeros((c, c), dtype=np.int64)
    np.add.at(confusion, (gold, pred), 1)

    tp, fp, fn = _pooled_counts(confusion, schema)
    f1 = f1_from_counts(tp, fp, fn)
    support = (tp + fp + fn) > 0
    macro = float(f1[support].mean()) if support.any() else 0.0

    # correct relation, wrong argument order
    n = schema.num_relations
    direction_errors = int(
        sum(confusion[2 * i, 2 * i + 1] + confusion[2 * i + 1, 2 * i] for i in range(n))
    )
    per_relation = {name: float(f1[i]) for i, name in enumerate(schema.relations)}
    supported = tuple(name for i, name in enumerate(schema.relations) if support[i])
    return EvalReport(
        schema=schema,
        per_relation=per_relation,
        supported=supported,
        macro_f1=macro,
        confusion=confusion,
        direction_errors=direction_errors,
    )
