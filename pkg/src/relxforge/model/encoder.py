"""Transformer encoder with MLM, pair-matching, and classifier heads.

Post-norm blocks, learned positions, exact GELU, tied MLM output
embedding. All forward paths run on this package's tape tensors, so a
single backward() covers any head combination.
"""

from __future__ import annotations

import numpy as np

from ..nn import (
    Tensor,
    bce_with_logits,
    concat,
    cross_entropy,
    dropout,
    embedding_lookup,
    gather_rows,
    gelu,
    layer_norm,
    matmul,
    permute,
    reshape,
    sigmoid,
    softmax,
)
from ..seeding import make_rng
from ..text import MLM_IGNORE_INDEX
from .config import ModelConfig

ATTENTION_MASK_BIAS = -1e9
INIT_STD = 0.02


class SequenceTooLong(ValueError):
    pass


class TokenOutOfRange(ValueError):
    pass


class NoMaskedPositions(ValueError):
    pass


class SchemaMismatch(ValueError):
    pass


class EncoderModel:
    def __init__(self, config: ModelConfig, seed: int = 0, dtype=np.float32):
        self.config = config
        self.dtype = np.dtype(dtype)
        self._params: dict = {}
        rng = make_rng(seed, 101)
        H, F, V, P = config.hidden, config.ff, config.vocab_size, config.max_positions

        def weight(name, *shape):
            # normal(0, 0.02) clipped at two sigmas
            data = np.clip(rng.normal(0.0, INIT_STD, size=shape), -2 * INIT_STD, 2 * INIT_STD)
            self._params[name] = Tensor(data.astype(self.dtype), requires_grad=True)

        def zeros(name, *shape):
            self._params[name] = Tensor(np.zeros(shape, dtype=self.dtype), requires_grad=True)

        def ones(name, *shape):
            self._params[name] = Tensor(np.ones(shape, dtype=self.dtype), requires_grad=True)

        weight("embeddings.token", V, H)
        weight("embeddings.position", P, H)
        ones("embeddings.norm.gain", H)
        zeros("embeddings.norm.bias", H)
        for i in range(config.layers):
            for part in ("q", "k", "v", "o"):
                weight(f"block{i}.attn.w{part}", H, H)
                zeros(f"block{i}.attn.b{part}", H)
            ones(f"block{i}.attn.norm.gain", H)
            zeros(f"block{i}.attn.norm.bias", H)
            weight(f"block{i}.ff.w1", H, F)
            zeros(f"block{i}.ff.b1", F)
            weight(f"block{i}.ff.w2", F, H)
            zeros(f"block{i}.ff.b2", H)
            ones(f"block{i}.ff.norm.gain", H)
            zeros(f"block{i}.ff.norm.bias", H)
        zeros("mlm.bias", V)  # output embedding is tied to embeddings.token
        if config.matching_head == "concat":
            weight("match.w", 2 * H, 1)
            zeros("match.b", 1)
        weight("classifier.w", H, config.num_classes)
        zeros("classifier.b", config.num_classes)

    def named_parameters(self) -> dict:
        return dict(self._params)

    def parameters(self) -> list:
        return list(self._params.values())

    def param(self, name: str) -> Tensor:
        return self._params[name]

    def num_parameters(self) -> int:
        return sum(p.size for p in self._params.values())

    def load_state(self, tensors: dict):
        """Copy arrays into the existing parameters, bit for bit."""
        missing = set(self._params) - set(tensors)
        if missing:
            raise KeyError(f"checkpoint missing tensors: {sorted(missing)[:4]}")
        for name, param in self._params.items():
            arr = np.asarray(tensors[name])
            if arr.shape != param.data.shape:
                raise ValueError(f"{name}: shape {arr.shape} != {param.data.shape}")
            param.data[...] = arr.astype(self.dtype)

    def _norm(self, x, prefix):
        return layer_norm(
            x, self._params[f"{prefix}.gain"], self._params[f"{prefix}.bias"], eps=self.config.ln_eps
        )

    def encode(self, ids, mask, train: bool = False, rng=None) -> tuple:
        """Token ids + attention mask -> (hidden [B,T,H], cls [B,H])."""
        ids = np.asarray(ids, dtype=np.int64)
        mask = np.asarray(mask, dtype=np.int64)
        if ids.ndim != 2 or mask.shape != ids.shape:
            raise ValueError(f"expected matching [batch, seq] arrays, got {ids.shape} and {mask.shape}")
        batch, seq_len = ids.shape
        cfg = self.config
        if seq_len > cfg.max_positions:
            raise SequenceTooLong(f"sequence length {seq_len} exceeds max positions {cfg.max_positions}")
        if ids.size and (ids.min() < 0 or ids.max() >= cfg.vocab_size):
            raise TokenOutOfRange(f"token ids must be in [0, {cfg.vocab_size})")
        use_dropout = train and cfg.dropout > 0.0
        if use_dropout and rng is None:
            raise ValueError("training with dropout requires an rng")

        def drop(x):
            return dropout(x, cfg.dropout, rng) if use_dropout else x

        positions = embedding_lookup(self._params["embeddings.position"], np.arange(seq_len))
        x = embedding_lookup(self._params["embeddings.token"], ids) + positions
        x = drop(self._norm(x, "embeddings.norm"))

        heads, head_dim = cfg.heads, cfg.head_dim
        scale = 1.0 / np.sqrt(head_dim)
        attn_bias = ((1 - mask)[:, None, None, :] * ATTENTION_MASK_BIAS).astype(self.dtype)

        for i in range(cfg.layers):
            p = self._params

            def project(part):
                proj = matmul(x, p[f"block{i}.attn.w{part}"]) + p[f"block{i}.attn.b{part}"]
                return permute(reshape(proj, (batch, seq_len, heads, head_dim)), (0, 2, 1, 3))

            q, k, v = project("q"), project("k"), project("v")
            scores = matmul(q, permute(k, (0, 1, 3, 2))) * scale + attn_bias
            context = matmul(softmax(scores), v)
            context = reshape(permute(context, (0, 2, 1, 3)), (batch, seq_len, cfg.hidden))
            attn_out = drop(matmul(context, p[f"block{i}.attn.wo"]) + p[f"block{i}.attn.bo"])
            x = self._norm(x + attn_out, f"block{i}.attn.norm")

            inner = gelu(matmul(x, p[f"block{i}.ff.w1"]) + p[f"block{i}.ff.b1"])
            ff_out = drop(matmul(inner, p[f"block{i}.ff.w2"]) + p[f"block{i}.ff.b2"])
            x = self._norm(x + ff_out, f"block{i}.ff.norm")

        cls = gather_rows(x, np.arange(batch), np.zeros(batch, dtype=np.int64))
        return x, cls


def mlm_loss(model: EncoderModel, ids, mask, labels, train: bool = False, rng=None) -> Tensor:
    """Mean cross-entropy over the selected positions only.

    Logits are computed just for the selected positions, against the
    tied token embedding.
    """
    labels = np.asarray(labels, dtype=np.int64)
    rows, cols = np.nonzero(labels != MLM_IGNORE_INDEX)
    if rows.size == 0:
        raise NoMaskedPositions("no position carries an MLM label")
    hidden, _ = model.encode(ids, mask, train=train, rng=rng)
    picked = gather_rows(hidden, rows, cols)
    table = model.param("embeddings.token")
    logits = matmul(picked, permute(table, (1, 0))) + model.param("mlm.bias")
    return cross_entropy(logits, labels[rows, cols])


def matching_scores(model: EncoderModel, cls_a: Tensor, cls_b: Tensor) -> Tensor:
    """Pair logits from two [batch, hidden] cls blocks."""
    batch, hidden = cls_a.shape
    if model.config.matching_head == "concat":
        joined = concat(cls_a, cls_b, axis=-1)
        return reshape(matmul(joined, model.param("match.w")) + model.param("match.b"), (batch,))
    scale = 1.0 / np.sqrt(hidden)
    prod = matmul(reshape(cls_a, (batch, 1, hidden)), reshape(cls_b, (batch, hidden, 1)))
    return reshape(prod, (batch,)) * scale


def matching_loss(
    model: EncoderModel, ids_a, mask_a, ids_b, mask_b, labels, train: bool = False, rng=None
) -> tuple:
    """Binary cross-entropy on pair logits; returns (loss, probabilities).

    Both sides run through one batched forward pass under the same
    weights.
    """
    labels = np.asarray(labels, dtype=np.float64)
    batch = labels.shape[0]
    ids = np.concatenate([ids_a, ids_b], axis=0)
    mask = np.concatenate([mask_a, mask_b], axis=0)
    _, cls = model.encode(ids, mask, train=train, rng=rng)
    stacked = reshape(cls, (2, batch, model.config.hidden))
    rows = np.arange(batch, dtype=np.int64)
    cls_a = gather_rows(stacked, np.zeros(batch, dtype=np.int64), rows)
    cls_b = gather_rows(stacked, np.ones(batch, dtype=np.int64), rows)
    logits = matching_scores(model, cls_a, cls_b)
    loss = bce_with_logits(logits, labels.astype(logits.dtype))
    probs = sigmoid(Tensor._constant(logits.data)).data
    return loss, probs


def classifier_logits(model: EncoderModel, ids, mask, train: bool = False, rng=None) -> Tensor:
    _, cls = model.encode(ids, mask, train=train, rng=rng)
    return matmul(cls, model.param("classifier.w")) + model.param("classifier.b")


def classify_relation(model: EncoderModel, ids, mask) -> np.ndarray:
    """Probability rows over the relation classes."""
    return softmax(classifier_logits(model, ids, mask)).data


def classification_loss(model: EncoderModel, ids, mask, labels, train: bool = False, rng=None) -> Tensor:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and labels.max() >= model.config.num_classes:
        raise SchemaMismatch(
            f"label {labels.max()} outside the {model.config.num_classes}-class head"
        )
    return cross_entropy(classifier_logits(model, ids, mask, train=train, rng=rng), labels)
