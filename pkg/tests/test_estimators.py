"""sklearn wrapper behavior: params, clone, fitted attributes."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from relxforge.estimators import MtmbPretrainer, RelationClassifier, SubwordTokenizer
from relxforge.text import PAD_ID
from relxforge.training import RelationSchema

TEXTS = [
    "ann founded acme years ago",
    "bob works for acme near oslo",
    "carol moved from oslo to rome",
    "the rome office hired dan",
]

SCHEMA2 = RelationSchema(("works_for", "born_in"))

MARKED = [
    "<e1> ann </e1> works for <e2> acme </e2>",
    "<e2> acme </e2> employs <e1> bob </e1>",
    "<e1> carol </e1> was born in <e2> oslo </e2>",
    "<e2> rome </e2> is the birthplace of <e1> dan </e1>",
    "<e1> eve </e1> works for <e2> globex </e2>",
    "<e1> fay </e1> was born in <e2> rome </e2>",
]
LABELS = [0, 1, 2, 3, 0, 2]


class TestSubwordTokenizer:
    def test_params_round_trip(self):
        tok = SubwordTokenizer(target_size=350, max_len=16)
        assert tok.get_params() == {"target_size": 350, "max_len": 16}
        assert clone(tok).get_params() == tok.get_params()

    def test_fit_transform_shape(self):
        tok = SubwordTokenizer(target_size=300, max_len=12)
        ids = tok.fit_transform(TEXTS)
        assert ids.shape == (4, 12)
        assert ids.dtype == np.int64
        assert (ids[:, -1] == PAD_ID).all()  # short sentences pad out

    def test_transform_before_fit(self):
        with pytest.raises(NotFittedError):
            SubwordTokenizer().transform(TEXTS)

    def test_rejects_non_strings(self):
        with pytest.raises(TypeError):
            SubwordTokenizer(target_size=300).fit([1, 2, 3])


class TestRelationClassifier:
    def make(self, **kw):
        defaults = dict(
            schema=SCHEMA2,
            vocab_size=300,
            layers=1,
            hidden=16,
            heads=2,
            ff=32,
            max_positions=24,
            epochs=2,
            lr=5e-3,
            weight_decay=0.0,
            validation_fraction=0.0,
            seed=11,
        )
        defaults.update(kw)
        return RelationClassifier(**defaults)

    def test_clone_keeps_params(self):
        clf = self.make()
        assert clone(clf).get_params() == clf.get_params()

    def test_fit_predict(self):
        clf = self.make()
        clf.fit(MARKED, LABELS)
        preds = clf.predict(MARKED)
        assert preds.shape == (6,)
        assert set(preds) <= set(range(SCHEMA2.num_classes))
        assert list(clf.classes_) == list(range(5))

    def test_predict_proba_rows_normalized(self):
        clf = self.make()
        clf.fit(MARKED, LABELS)
        probs = clf.predict_proba(MARKED)
        assert probs.shape == (6, 5)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-5)

    def test_overfit_small_set(self):
        clf = self.make(epochs=40, hidden=32, ff=64, layers=2)
        clf.fit(MARKED, LABELS)
        assert (clf.predict(MARKED) == np.array(LABELS)).mean() == 1.0
        assert clf.macro_f1(MARKED, LABELS) == 100.0

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            self.make().predict(MARKED)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            self.make().fit(MARKED, LABELS[:-1])

    def test_validation_split_keeps_all_classes_in_train(self):
        clf = self.make(validation_fraction=0.25, epochs=1)
        clf.fit(MARKED, LABELS)
        assert hasattr(clf, "best_epoch_")


class TestMtmbPretrainer:
    def test_fit_produces_model(self):
        pairs = [
            {
                "a": {"text": "ann founded acme", "lang": "l1", "e1": [0, 3], "e2": [12, 16]},
                "b": {"text": "acme hired bob", "lang": "l2", "e1": [0, 4], "e2": [11, 14]},
                "label": i % 2,
            }
            for i in range(4)
        ]
        pre = MtmbPretrainer(
            steps=2, batch_size=2, vocab_size=300, layers=1, hidden=16, heads=2, ff=32,
            max_positions=16, seed=5,
        )
        pre.fit(pairs)
        assert pre.model_.config.hidden == 16
        assert len(pre.history_) == 2

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            MtmbPretrainer(steps=1).fit([])

    def test_clone(self):
        pre = MtmbPretrainer(steps=7, hidden=32)
        assert clone(pre).get_params()["steps"] == 7
