"""scikit-learn estimator wrappers around the functional core.

These exist for interactive and pipeline use: get_params/set_params,
clone, and grid search all work. They wrap the plain functions in
text/, model/, and training/, which remain the primary API. Inputs are
texts and pair dicts rather than numeric matrices, so the estimators
follow the sklearn contract in spirit (stateless params in __init__,
fitted attributes with trailing underscores) without claiming full
check_estimator compliance.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted, column_or_1d

from .model import EncoderModel, ModelConfig, load_model
from .seeding import default_seed, make_rng
from .text import PAD_ID, Vocab, encode, train_vocab
from .training import (
    LabeledDataset,
    RelationExample,
    RelationSchema,
    encode_example,
    evaluate_f1,
    finetune,
    kbp37_schema,
    predict as predict_ids,
    pretrain,
)


def _as_texts(X) -> list:
    texts = list(X)
    if not texts:
        raise ValueError("empty input")
    for t in texts:
        if not isinstance(t, str):
            raise TypeError(f"expected str rows, got {type(t).__name__}")
    return texts


class SubwordTokenizer(TransformerMixin, BaseEstimator):
    """Trainable subword vocabulary exposed as a transformer.

    fit() learns the vocabulary from an iterable of strings; transform()
    returns a (n, max_len) int64 id matrix padded with the pad id.
    """

    def __init__(self, target_size: int = 8000, max_len: int = 128):
        self.target_size = target_size
        self.max_len = max_len

    def fit(self, X, y=None):
        self.vocab_ = train_vocab(_as_texts(X), self.target_size)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "vocab_")
        texts = _as_texts(X)
        out = np.full((len(texts), self.max_len), PAD_ID, dtype=np.int64)
        for row, text in enumerate(texts):
            seq = encode(text, self.vocab_, self.max_len)
            out[row, : len(seq)] = seq.ids
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "vocab_")
        return np.asarray([f"token_{i}" for i in range(self.max_len)], dtype=object)


class MtmbPretrainer(BaseEstimator):
    """Cross-lingual pair pretraining as an estimator.

    fit(X) takes wire-format pair dicts. The fitted model_ can seed a
    RelationClassifier via its warm_start_from parameter.
    """

    def __init__(
        self,
        steps: int = 1000,
        batch_size: int = 32,
        lr: float = 1e-4,
        weight_decay: float = 0.01,
        vocab: Vocab | None = None,
        vocab_size: int = 8000,
        layers: int = 4,
        hidden: int = 128,
        heads: int = 4,
        ff: int = 512,
        max_positions: int = 128,
        num_classes: int = 37,
        seed: int | None = None,
    ):
        self.steps = steps
        self.batch_size = batch_size
        self.lr = lr
        self.weight_decay = weight_decay
        self.vocab = vocab
        self.vocab_size = vocab_size
        self.layers = layers
        self.hidden = hidden
        self.heads = heads
        self.ff = ff
        self.max_positions = max_positions
        self.num_classes = num_classes
        self.seed = seed

    def fit(self, X, y=None):
        pairs = list(X)
        if not pairs:
            raise ValueError("empty pair list")
        vocab = self.vocab
        if vocab is None:
            texts = [side["text"] for p in pairs for side in (p["a"], p["b"])]
            vocab = train_vocab(texts, self.vocab_size)
        self.vocab_ = vocab
        config = ModelConfig(
            vocab_size=len(vocab),
            layers=self.layers,
            hidden=self.hidden,
            heads=self.heads,
            ff=self.ff,
            max_positions=self.max_positions,
            num_classes=self.num_classes,
        )
        seed = self.seed if self.seed is not None else default_seed()
        model = EncoderModel(config, seed=seed)
        result = pretrain(
            model,
            pairs,
            vocab,
            steps=self.steps,
            batch_size=self.batch_size,
            lr=self.lr,
            weight_decay=self.weight_decay,
            seed=seed,
        )
        self.model_ = result.model
        self.history_ = result.history
        return self


class RelationClassifier(ClassifierMixin, BaseEstimator):
    """Directional relation classifier over marked sentences.

    X rows are sentences with inline <e1>…</e1> and <e2>…</e2> markers;
    y holds schema class ids. A held-out slice of the training data
    drives best-epoch selection; pass validation_fraction=0 to select on
    the training set itself.
    """

    def __init__(
        self,
        schema: RelationSchema | None = None,
        vocab: Vocab | None = None,
        vocab_size: int = 8000,
        layers: int = 4,
        hidden: int = 128,
        heads: int = 4,
        ff: int = 512,
        max_positions: int = 128,
        lr: float = 3e-5,
        weight_decay: float = 0.1,
        batch_size: int = 64,
        epochs: int = 10,
        validation_fraction: float = 0.1,
        seed: int | None = None,
        warm_start_from: str | EncoderModel | None = None,
    ):
        self.schema = schema
        self.vocab = vocab
        self.vocab_size = vocab_size
        self.layers = layers
        self.hidden = hidden
        self.heads = heads
        self.ff = ff
        self.max_positions = max_positions
        self.lr = lr
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.validation_fraction = validation_fraction
        self.seed = seed
        self.warm_start_from = warm_start_from

    def _split(self, examples, schema, seed):
        if self.validation_fraction <= 0:
            train = LabeledDataset(tuple(examples), schema, "train")
            return train, LabeledDataset(tuple(examples), schema, "dev")
        rng = make_rng(seed, 801)
        by_class = {}
        for ex in examples:
            by_class.setdefault(ex.label, []).append(ex)
        train, dev = [], []
        for label in sorted(by_class):
            group = by_class[label]
            order = rng.permutation(len(group))
            n_dev = min(len(group) - 1, max(1, round(self.validation_fraction * len(group))))
            if len(group) == 1:
                n_dev = 0
            dev.extend(group[i] for i in order[:n_dev])
            train.extend(group[i] for i in order[n_dev:])
        if not dev:
            dev = list(train)
        return (
            LabeledDataset(tuple(train), schema, "train"),
            LabeledDataset(tuple(dev), schema, "dev"),
        )

    def fit(self, X, y):
        texts = _as_texts(X)
        labels = column_or_1d(np.asarray(y, dtype=np.int64))
        if len(labels) != len(texts):
            raise ValueError(f"{len(texts)} sentences but {len(labels)} labels")
        schema = self.schema if self.schema is not None else kbp37_schema()
        seed = self.seed if self.seed is not None else default_seed()

        vocab = self.vocab
        if vocab is None:
            vocab = train_vocab(texts, self.vocab_size)
        self.vocab_ = vocab

        examples = [
            RelationExample(uid=str(i), text=t, label=int(l), lang="")
            for i, (t, l) in enumerate(zip(texts, labels))
        ]
        train_set, dev_set = self._split(examples, schema, seed)

        if self.warm_start_from is not None:
            if isinstance(self.warm_start_from, EncoderModel):
                model = self.warm_start_from
            else:
                model, _, _ = load_model(self.warm_start_from)
            if model.config.vocab_size != len(vocab):
                raise ValueError(
                    f"warm start vocab size {model.config.vocab_size} != vocabulary {len(vocab)}"
                )
        else:
            config = ModelConfig(
                vocab_size=len(vocab),
                layers=self.layers,
                hidden=self.hidden,
                heads=self.heads,
                ff=self.ff,
                max_positions=self.max_positions,
                num_classes=schema.num_classes,
            )
            model = EncoderModel(config, seed=seed)
        if model.config.num_classes != schema.num_classes:
            raise ValueError(
                f"model head is {model.config.num_classes}-way, schema needs {schema.num_classes}"
            )

        result = finetune(
            model,
            train_set,
            dev_set,
            vocab,
            epochs=self.epochs,
            lr=self.lr,
            weight_decay=self.weight_decay,
            batch_size=self.batch_size,
            seed=seed,
        )
        self.model_ = result.model
        self.schema_ = schema
        self.history_ = result.history
        self.best_epoch_ = result.best_epoch
        self.classes_ = np.arange(schema.num_classes)
        return self

    def _encode(self, X):
        texts = _as_texts(X)
        examples = [
            RelationExample(uid=str(i), text=t, label=0, lang="") for i, t in enumerate(texts)
        ]
        return [
            encode_example(ex, self.vocab_, self.model_.config.max_positions) for ex in examples
        ]

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        return predict_ids(self.model_, self._encode(X), batch_size=self.batch_size)

    def predict_proba(self, X) -> np.ndarray:
        from .model import classify_relation
        from .text import pad_batch

        check_is_fitted(self, "model_")
        encoded = self._encode(X)
        rows = []
        for start in range(0, len(encoded), self.batch_size):
            ids, mask = pad_batch(encoded[start : start + self.batch_size])
            rows.append(classify_relation(self.model_, ids, mask))
        return np.concatenate(rows, axis=0)

    def macro_f1(self, X, y) -> float:
        check_is_fitted(self, "model_")
        return evaluate_f1(np.asarray(y, dtype=np.int64), self.predict(X), self.schema_).macro_f1
