"""Macro-F1 as a function of training set size.

For each seed the train set is shuffled once, and each fraction keeps a
stratified prefix of that shuffle: the first k_c occurrences of every
class, with k_c apportioned by largest remainder. The subset comes back
in original dataset order, so fraction 1.0 is the train set itself and
a curve row at 1.0 reproduces a plain fine-tuning run with that seed.
"""

from __future__ import annotations

from ..seeding import make_rng
from .dataset import LabeledDataset
from .finetune import evaluate_model, finetune
from .subset import stratified_targets

CURVE_STREAM = 401  # rng namespace for the per-seed shuffle

TSV_HEADER = "fraction\tseed\tlang\tmacro_f1"


def stratified_fraction(dataset: LabeledDataset, fraction: float, seed: int) -> LabeledDataset:
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction {fraction} outside (0, 1]")
    n = len(dataset)
    size = max(1, round(fraction * n))
    targets = dict(stratified_targets(dataset.class_counts(), size))
    order = make_rng(seed, CURVE_STREAM).permutation(n)
    keep = []
    for i in order:
        ex = dataset[int(i)]
        if targets.get(ex.label, 0) > 0:
            targets[ex.label] -= 1
            keep.append(int(i))
    keep.sort()
    return dataset.replaced([dataset[i] for i in keep])


def learning_curve(
    model_factory,
    train_set: LabeledDataset,
    dev_set: LabeledDataset,
    eval_sets: dict,
    vocab,
    *,
    fractions,
    seeds,
    epochs: int = 10,
    lr: float = 3e-5,
    weight_decay: float = 0.1,
    batch_size: int = 64,
) -> list:
    """One row dict per (fraction, seed, eval set): fraction, seed, lang, macro_f1.

    model_factory(seed) must return a fresh model; eval_sets maps a
    language tag to the dataset scored under it.
    """
    fractions = sorted(set(float(f) for f in fractions))
    rows = []
    for fraction in fractions:
        for seed in seeds:
            subset = stratified_fraction(train_set, fraction, seed)
            model = model_factory(seed)
            finetune(
                model, subset, dev_set, vocab,
                epochs=epochs, lr=lr, weight_decay=weight_decay,
                batch_size=batch_size, seed=seed,
            )
            for lang in sorted(eval_sets):
                report = evaluate_model(model, eval_sets[lang], vocab, batch_size=batch_size)
                rows.append(
                    {"fraction": fraction, "seed": seed, "lang": lang, "macro_f1": report.macro_f1}
                )
    return rows


def curve_to_tsv(rows) -> str:
    lines = [TSV_HEADER]
    for row in rows:
        lines.append(f"{row['fraction']:g}\t{row['seed']}\t{row['lang']}\t{row['macro_f1']:.4f}")
    return "\n".join(lines) + "\n"
