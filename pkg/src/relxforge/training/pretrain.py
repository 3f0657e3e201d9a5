"""Pair-matching pretraining with masked-token objectives on both sides.

Each step draws a batch from the pair list by cyclic position, corrupts
both sentences for the masked-token loss, and adds the binary matching
loss on the [CLS] states. The per-step random stream is derived from
(seed, step), so a run interrupted at any checkpoint resumes to
bit-identical weights: nothing depends on generator state carried
across steps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..model import EncoderModel, load_model, matching_loss, mlm_loss, save_model
from ..nn import AdamW, backward, no_grad
from ..seeding import default_seed, make_rng
from ..text import (
    MASK_ID,
    MLM_IGNORE_INDEX,
    SPECIALS,
    TokenSequence,
    Vocab,
    mark_entities,
    mask_for_mlm,
    pad_batch,
)

STEP_STREAM = 201  # rng namespace for per-step masking draws

OPT_M_PREFIX = "opt.m."
OPT_V_PREFIX = "opt.v."


@dataclass(frozen=True)
class EncodedPair:
    a: TokenSequence
    b: TokenSequence
    label: int


@dataclass
class PretrainResult:
    model: EncoderModel
    history: list
    steps_done: int
    final_path: Path | None = None


def encode_pair(wire: dict, vocab: Vocab, max_len: int) -> EncodedPair:
    """Tokenize one wire-format pair, inserting entity markers."""
    sides = []
    for key in ("a", "b"):
        side = wire[key]
        sides.append(
            mark_entities(side["text"], tuple(side["e1"]), tuple(side["e2"]), vocab, max_len)
        )
    return EncodedPair(a=sides[0], b=sides[1], label=int(wire["label"]))


def encode_pairs(pairs, vocab: Vocab, max_len: int) -> list:
    return [encode_pair(p, vocab, max_len) for p in pairs]


def _mask_side(seqs, vocab, rng, width):
    """Corrupt a batch side; force one masked position if none landed."""
    masked, labels = [], []
    for seq in seqs:
        out, lab = mask_for_mlm(seq, vocab, rng)
        masked.append(out)
        labels.append(lab)
    if all((lab == MLM_IGNORE_INDEX).all() for lab in labels):
        for i, seq in enumerate(seqs):
            candidates = [j for j, t in enumerate(seq.ids) if t >= len(SPECIALS)]
            if not candidates:
                continue
            pos = candidates[int(rng.integers(len(candidates)))]
            ids = list(masked[i].ids)
            labels[i][pos] = seq.ids[pos]
            ids[pos] = MASK_ID
            masked[i] = TokenSequence(ids=tuple(ids), max_len=seq.max_len, truncated=masked[i].truncated)
            break
    ids, mask = pad_batch(masked, length=width)
    lab = np.full(ids.shape, MLM_IGNORE_INDEX, dtype=np.int64)
    for row, l in enumerate(labels):
        lab[row, : len(l)] = l
    return ids, mask, lab


def _optimizer_extras(model: EncoderModel, optimizer: AdamW) -> dict:
    extras = {}
    for (name, _), m, v in zip(model.named_parameters().items(), optimizer.m, optimizer.v):
        extras[OPT_M_PREFIX + name] = m
        extras[OPT_V_PREFIX + name] = v
    return extras


def save_training_state(model, optimizer, path, *, step: int, seed: int, hyper: dict):
    meta = {"kind": "pretrain", "step": step, "seed": seed, **hyper}
    save_model(model, path, meta=meta, extra_tensors=_optimizer_extras(model, optimizer))


def load_training_state(path) -> tuple:
    """Returns (model, optimizer state dict, meta)."""
    model, meta, extras = load_model(path)
    names = list(model.named_parameters())
    state = {
        "step": int(meta["step"]),
        "m": [extras[OPT_M_PREFIX + n] for n in names],
        "v": [extras[OPT_V_PREFIX + n] for n in names],
    }
    return model, state, meta


def matching_accuracy(model: EncoderModel, encoded, batch_size: int = 64) -> float:
    """Fraction of pairs whose matching probability lands on the label side."""
    if not encoded:
        raise ValueError("no pairs to evaluate")
    hits = 0
    with no_grad():
        for start in range(0, len(encoded), batch_size):
            chunk = encoded[start : start + batch_size]
            # both sides run through one stacked forward, so equal widths
            width = max(max(len(p.a) for p in chunk), max(len(p.b) for p in chunk))
            ids_a, mask_a = pad_batch([p.a for p in chunk], length=width)
            ids_b, mask_b = pad_batch([p.b for p in chunk], length=width)
            labels = np.array([p.label for p in chunk], dtype=np.int64)
            _, probs = matching_loss(model, ids_a, mask_a, ids_b, mask_b, labels)
            hits += int(((probs > 0.5).astype(np.int64) == labels).sum())
    return hits / len(encoded)


def pretrain(
    model: EncoderModel,
    pairs,
    vocab: Vocab,
    *,
    steps: int,
    batch_size: int = 32,
    lr: float = 1e-4,
    weight_decay: float = 0.01,
    seed: int | None = None,
    start_step: int = 0,
    optimizer_state: dict | None = None,
    checkpoint_dir=None,
    checkpoint_every: int = 0,
    log_path=None,
) -> PretrainResult:
    """Train for `steps` total optimizer steps, beginning at start_step.

    `pairs` may be wire-format dicts or pre-encoded EncodedPair items.
    Metrics are appended to `log_path` as JSON lines when given; with a
    checkpoint_dir, state lands every checkpoint_every steps plus a
    final ckpt-final.rlxf either way.
    """
    if steps < 0 or start_step < 0 or start_step > steps:
        raise ValueError(f"bad step range: start {start_step}, total {steps}")
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    if not pairs:
        raise ValueError("empty pair list")
    seed = seed if seed is not None else default_seed()
    encoded = pairs if isinstance(pairs[0], EncodedPair) else encode_pairs(pairs, vocab, model.config.max_positions)

    optimizer = AdamW(model.parameters(), lr=lr, weight_decay=weight_decay)
    if optimizer_state is not None:
        optimizer.load_state_dict(optimizer_state)

    hyper = {"lr": lr, "weight_decay": weight_decay, "batch_size": batch_size}
    ckpt_dir = Path(checkpoint_dir) if checkpoint_dir is not None else None
    if ckpt_dir is not None:
        ckpt_dir.mkdir(parents=True, exist_ok=True)
    log_file = open(log_path, "a", encoding="utf-8") if log_path is not None else None

    history = []
    n = len(encoded)
    try:
        for step in range(start_step, steps):
            rng = make_rng(seed, STEP_STREAM, step)
            batch = [encoded[(step * batch_size + j) % n] for j in range(batch_size)]
            width = max(max(len(p.a) for p in batch), max(len(p.b) for p in batch))
            ids_a, mask_a, labels_a = _mask_side([p.a for p in batch], vocab, rng, width)
            ids_b, mask_b, labels_b = _mask_side([p.b for p in batch], vocab, rng, width)
            pair_labels = np.array([p.label for p in batch], dtype=np.int64)

            optimizer.zero_grad()
            loss_a = mlm_loss(model, ids_a, mask_a, labels_a)
            loss_b = mlm_loss(model, ids_b, mask_b, labels_b)
            loss_match, probs = matching_loss(model, ids_a, mask_a, ids_b, mask_b, pair_labels)
            backward(loss_a + loss_b + loss_match)
            optimizer.step()

            entry = {
                "step": step + 1,
                "mlm_a": float(loss_a.item()),
                "mlm_b": float(loss_b.item()),
                "matching": float(loss_match.item()),
                "match_acc": float(((probs > 0.5).astype(np.int64) == pair_labels).mean()),
            }
            history.append(entry)
            if log_file is not None:
                log_file.write(json.dumps(entry) + "\n")
            done = step + 1
            if ckpt_dir is not None and checkpoint_every > 0 and done % checkpoint_every == 0 and done < steps:
                save_training_state(
                    model, optimizer, ckpt_dir / f"ckpt-{done:06d}.rlxf",
                    step=done, seed=seed, hyper=hyper,
                )
    finally:
        if log_file is not None:
            log_file.close()

    final_path = None
    if ckpt_dir is not None:
        final_path = ckpt_dir / "ckpt-final.rlxf"
        save_training_state(model, optimizer, final_path, step=steps, seed=seed, hyper=hyper)
    return PretrainResult(model=model, history=history, steps_done=steps - start_step, final_path=final_path)


def resume_pretrain(checkpoint_path, pairs, vocab: Vocab, *, steps: int, **kwargs) -> PretrainResult:
    """Continue a checkpointed run up to `steps` total steps.

    Hyperparameters and the seed come from the checkpoint; kwargs may
    override output paths (checkpoint_dir, checkpoint_every, log_path).
    """
    model, opt_state, meta = load_training_state(checkpoint_path)
    return pretrain(
        model,
        pairs,
        vocab,
        steps=steps,
        batch_size=int(meta["batch_size"]),
        lr=float(meta["lr"]),
        weight_decay=float(meta["weight_decay"]),
        seed=int(meta["seed"]),
        start_step=int(meta["step"]),
        optimizer_state=opt_state,
        **kwargs,
    )
