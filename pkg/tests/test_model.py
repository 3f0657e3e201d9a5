"""Encoder forward paths, heads, gradients, and the checkpoint format."""

import struct

import numpy as np
import pytest

from relxforge.model import (
    BadMagic,
    ChecksumFail,
    EncoderModel,
    ModelConfig,
    NoMaskedPositions,
    SchemaMismatch,
    SequenceTooLong,
    TokenOutOfRange,
    VersionMismatch,
    classification_loss,
    classifier_logits,
    classify_relation,
    crc64,
    load_model,
    matching_loss,
    matching_scores,
    mlm_loss,
    read_checkpoint,
    read_config,
    save_model,
    write_checkpoint,
)
from relxforge.nn import SGD, Tensor, backward, grad_check
from relxforge.seeding import make_rng
from relxforge.text import MLM_IGNORE_INDEX

TINY = ModelConfig(vocab_size=32, layers=2, hidden=8, heads=2, ff=16, max_positions=16)

# generated once from EncoderModel(TINY, seed=7) on ids [2,11,12,13,3]
FROZEN_CLS = np.array(
    [-0.9224114, -0.18810277, 1.4967489, 1.1264577, -0.59710336, -1.3963923, -0.52855295, 1.0093561],
    dtype=np.float32,
)


def batch(*rows, width=None):
    width = width or max(len(r) for r in rows)
    ids = np.zeros((len(rows), width), dtype=np.int64)
    mask = np.zeros((len(rows), width), dtype=np.int64)
    for i, row in enumerate(rows):
        ids[i, : len(row)] = row
        mask[i, : len(row)] = 1
    return ids, mask


class TestConfig:
    def test_heads_must_divide_hidden(self):
        with pytest.raises(ValueError):
            ModelConfig(vocab_size=100, hidden=10, heads=3)

    def test_round_trip(self):
        cfg = ModelConfig(vocab_size=500, dropout=0.1, matching_head="concat")
        assert ModelConfig.from_json_dict(cfg.to_json_dict()) == cfg

    def test_bad_matching_head(self):
        with pytest.raises(ValueError):
            ModelConfig(vocab_size=100, matching_head="bilinear")

    def test_param_count_is_config_function(self):
        a = EncoderModel(TINY, seed=1).num_parameters()
        b = EncoderModel(TINY, seed=999).num_parameters()
        assert a == b
        cfg = TINY
        H, F, V, P, L, C = cfg.hidden, cfg.ff, cfg.vocab_size, cfg.max_positions, cfg.layers, cfg.num_classes
        per_block = 4 * (H * H + H) + 2 * H + H * F + F + F * H + H + 2 * H
        expected = V * H + P * H + 2 * H + L * per_block + V + H * C + C
        assert a == expected


class TestEncode:
    def test_frozen_cls_fixture(self):
        model = EncoderModel(TINY, seed=7)
        ids, mask = batch([2, 11, 12, 13, 3])
        _, cls = model.encode(ids, mask)
        assert np.allclose(cls.data[0], FROZEN_CLS, atol=1e-6)

    def test_padding_invariance(self):
        model = EncoderModel(TINY, seed=7)
        sentence = [2, 11, 12, 13, 3]
        _, short = model.encode(*batch(sentence, width=8))
        _, long = model.encode(*batch(sentence, width=16))
        assert np.abs(short.data - long.data).max() < 1e-6

    def test_masked_positions_cannot_leak(self):
        # identical mask, garbage ids under the padding: outputs must agree
        model = EncoderModel(TINY, seed=7)
        ids, mask = batch([2, 11, 12, 13, 3], width=10)
        noisy = ids.copy()
        noisy[0, 5:] = 31
        _, clean_cls = model.encode(ids, mask)
        _, noisy_cls = model.encode(noisy, mask)
        assert np.array_equal(clean_cls.data, noisy_cls.data)

    def test_batch_permutation_invariance(self):
        model = EncoderModel(TINY, seed=7)
        ids, mask = batch([2, 11, 12, 3], [2, 14, 3], [2, 15, 16, 17, 3])
        _, cls = model.encode(ids, mask)
        perm = [2, 0, 1]
        _, cls_p = model.encode(ids[perm], mask[perm])
        assert np.allclose(cls_p.data, cls.data[perm], atol=1e-6)

    def test_sequence_too_long(self):
        model = EncoderModel(TINY, seed=7)
        ids, mask = batch([10] * 17)
        with pytest.raises(SequenceTooLong):
            model.encode(ids, mask)

    def test_token_out_of_range(self):
        model = EncoderModel(TINY, seed=7)
        with pytest.raises(TokenOutOfRange):
            model.encode(*batch([2, 32, 3]))


class TestMlmHead:
    def test_all_sentinel_rejected(self):
        model = EncoderModel(TINY, seed=7)
        ids, mask = batch([2, 11, 3])
        labels = np.full_like(ids, MLM_IGNORE_INDEX)
        with pytest.raises(NoMaskedPositions):
            mlm_loss(model, ids, mask, labels)

    def test_untrained_loss_near_log_vocab(self):
        # masked-out inputs, so the tied embedding cannot leak the answer
        cfg = ModelConfig(vocab_size=64, layers=2, hidden=32, heads=2, ff=64, max_positions=16)
        model = EncoderModel(cfg, seed=1)
        rng = make_rng(5)
        ids = rng.integers(10, 64, size=(100, 12))
        mask = np.ones_like(ids)
        labels = np.full_like(ids, MLM_IGNORE_INDEX)
        sel = rng.random(ids.shape) < 0.15
        labels[sel] = ids[sel]
        corrupted = ids.copy()
        corrupted[sel] = 4
        loss = mlm_loss(model, corrupted, mask, labels).item()
        assert abs(loss - np.log(64)) < 0.2

    def test_overfit_strictly_decreases(self):
        cfg = ModelConfig(vocab_size=64, layers=2, hidden=32, heads=2, ff=64, max_positions=16, num_classes=5)
        model = EncoderModel(cfg, seed=1)
        rng = make_rng(5)
        ids = rng.integers(10, 64, size=(100, 12))
        mask = np.ones_like(ids)
        labels = np.full_like(ids, MLM_IGNORE_INDEX)
        sel = rng.random(ids.shape) < 0.15
        labels[sel] = ids[sel]
        corrupted = ids.copy()
        corrupted[sel] = 4
        opt = SGD(model.parameters(), lr=0.05)
        losses = []
        for _ in range(50):
            opt.zero_grad()
            loss = mlm_loss(model, corrupted, mask, labels)
            backward(loss)
            opt.step()
            losses.append(loss.item())
        assert all(later < earlier for earlier, later in zip(losses, losses[1:]))


class TestMatchingHead:
    def test_orthogonal_cls_gives_half(self):
        model = EncoderModel(TINY, seed=7)
        a = Tensor(np.array([[1.0, 0, 0, 0, 0, 0, 0, 0]], dtype=np.float32))
        b = Tensor(np.array([[0, 1.0, 0, 0, 0, 0, 0, 0]], dtype=np.float32))
        logit = matching_scores(model, a, b).data[0]
        assert logit == 0.0  # sigmoid(0) = 0.5

    def test_dot_score_symmetric(self):
        model = EncoderModel(TINY, seed=7)
        rng = make_rng(3)
        a = Tensor(rng.normal(size=(4, 8)).astype(np.float32))
        b = Tensor(rng.normal(size=(4, 8)).astype(np.float32))
        assert np.allclose(matching_scores(model, a, b).data, matching_scores(model, b, a).data)

    def test_loss_and_probs(self):
        model = EncoderModel(TINY, seed=7)
        ids_a, mask_a = batch([2, 11, 12, 3], [2, 13, 3])
        ids_b, mask_b = batch([2, 14, 3], [2, 15, 16, 3])
        loss, probs = matching_loss(model, ids_a, mask_a, ids_b, mask_b, np.array([1, 0]))
        assert probs.shape == (2,)
        assert np.all((probs > 0) & (probs < 1))
        expected = -np.mean([np.log(probs[0]), np.log(1 - probs[1])])
        assert loss.item() == pytest.approx(expected, rel=1e-5)

    def test_batched_forward_matches_separate_encodes(self):
        model = EncoderModel(TINY, seed=7)
        ids_a, mask_a = batch([2, 11, 12, 3], [2, 13, 3])
        ids_b, mask_b = batch([2, 14, 3], [2, 15, 16, 3], width=4)
        _, probs = matching_loss(model, ids_a, mask_a, ids_b, mask_b, np.array([1, 0]))
        _, cls_a = model.encode(ids_a, mask_a)
        _, cls_b = model.encode(ids_b, mask_b)
        logits = (cls_a.data * cls_b.data).sum(-1) / np.sqrt(8)
        assert np.allclose(probs, 1 / (1 + np.exp(-logits)), atol=1e-6)

    def test_concat_head_trains_parameters(self):
        cfg = ModelConfig(vocab_size=32, layers=1, hidden=8, heads=2, ff=16, max_positions=16, matching_head="concat")
        model = EncoderModel(cfg, seed=7)
        assert "match.w" in model.named_parameters()
        ids_a, mask_a = batch([2, 11, 3])
        ids_b, mask_b = batch([2, 12, 3])
        loss, probs = matching_loss(model, ids_a, mask_a, ids_b, mask_b, np.array([1]))
        backward(loss)
        assert probs.shape == (1,)
        assert np.abs(model.param("match.w").grad).sum() > 0


class TestClassifierHead:
    def test_distribution_shape(self):
        model = EncoderModel(TINY, seed=7)
        ids, mask = batch([2, 11, 12, 3], [2, 13, 3])
        probs = classify_relation(model, ids, mask)
        assert probs.shape == (2, 37)
        assert np.abs(probs.sum(-1) - 1.0).max() < 1e-6

    def test_argmax_invariant_under_logit_shift(self):
        model = EncoderModel(TINY, seed=7)
        ids, mask = batch([2, 11, 12, 3])
        logits = classifier_logits(model, ids, mask).data
        shifted = logits + 123.0
        probs = classify_relation(model, ids, mask)
        assert probs.argmax(-1) == shifted.argmax(-1)

    def test_schema_mismatch(self):
        model = EncoderModel(TINY, seed=7)
        ids, mask = batch([2, 11, 3])
        with pytest.raises(SchemaMismatch):
            classification_loss(model, ids, mask, np.array([37]))

    def test_overfit_twenty_examples(self):
        from relxforge.nn import AdamW

        cfg = ModelConfig(vocab_size=64, layers=2, hidden=32, heads=2, ff=64, max_positions=16, num_classes=5)
        model = EncoderModel(cfg, seed=2)
        rng = make_rng(5)
        ids = rng.integers(10, 64, size=(20, 10))
        mask = np.ones_like(ids)
        labels = rng.integers(0, 5, size=20)
        opt = AdamW(model.parameters(), lr=5e-3, weight_decay=0.0)
        for step in range(200):
            opt.zero_grad()
            loss = classification_loss(model, ids, mask, labels)
            backward(loss)
            opt.step()
            if classify_relation(model, ids, mask).argmax(-1).tolist() == labels.tolist():
                break
        assert classify_relation(model, ids, mask).argmax(-1).tolist() == labels.tolist()


class TestJointLoss:
    def test_additive_composition(self):
        model = EncoderModel(TINY, seed=7)
        ids_a, mask_a = batch([2, 11, 12, 3], [2, 13, 14, 3])
        ids_b, mask_b = batch([2, 15, 3], [2, 16, 17, 3])
        labels_a = np.full_like(ids_a, MLM_IGNORE_INDEX)
        labels_a[:, 1] = ids_a[:, 1]
        labels_b = np.full_like(ids_b, MLM_IGNORE_INDEX)
        labels_b[:, 1] = ids_b[:, 1]
        pair_labels = np.array([1, 0])

        def parts():
            la = mlm_loss(model, ids_a, mask_a, labels_a)
            lb = mlm_loss(model, ids_b, mask_b, labels_b)
            lm, _ = matching_loss(model, ids_a, mask_a, ids_b, mask_b, pair_labels)
            return la, lb, lm

        la, lb, lm = parts()
        joint = la + lb + lm
        assert joint.item() == pytest.approx(la.item() + lb.item() + lm.item(), rel=1e-6)

        probe = model.param("block0.attn.wq")
        model_grads = []
        for one in parts():
            for p in model.parameters():
                p.zero_grad()
            backward(one)
            model_grads.append(probe.grad.copy())
        for p in model.parameters():
            p.zero_grad()
        la, lb, lm = parts()
        backward(la + lb + lm)
        assert np.allclose(probe.grad, sum(model_grads), atol=1e-5)


class TestModelGradients:
    @pytest.mark.parametrize("head", ["mlm", "matching", "classifier"])
    def test_grad_check_f64(self, head):
        cfg = ModelConfig(vocab_size=24, layers=2, hidden=8, heads=2, ff=16, max_positions=12, num_classes=4)
        model = EncoderModel(cfg, seed=11, dtype=np.float64)
        ids_a, mask_a = batch([2, 11, 12, 3], [2, 13, 14, 3])
        ids_b, mask_b = batch([2, 15, 3], [2, 16, 17, 3])
        if head == "mlm":
            labels = np.full_like(ids_a, MLM_IGNORE_INDEX)
            labels[:, 1] = ids_a[:, 1]
            f = lambda: mlm_loss(model, ids_a, mask_a, labels)
        elif head == "matching":
            f = lambda: matching_loss(model, ids_a, mask_a, ids_b, mask_b, np.array([1, 0]))[0]
        else:
            f = lambda: classification_loss(model, ids_a, mask_a, np.array([0, 3]))
        err = grad_check(f, model.parameters(), samples=40, rng=make_rng(4))
        assert err < 1e-4


class TestCheckpoint:
    def make_model(self, seed=7):
        return EncoderModel(TINY, seed=seed)

    def test_round_trip_bit_exact(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.rlxf"
        save_model(model, path, meta={"step": 12})
        loaded, meta, extras = load_model(path)
        assert meta == {"step": 12} and extras == {}
        for name, p in model.named_parameters().items():
            assert loaded.param(name).data.tobytes() == p.data.tobytes()

    def test_save_load_save_identical_bytes(self, tmp_path):
        model = self.make_model()
        p1, p2 = tmp_path / "a.rlxf", tmp_path / "b.rlxf"
        save_model(model, p1, meta={"k": 1})
        loaded, meta, _ = load_model(p1)
        save_model(loaded, p2, meta=meta)
        assert p1.read_bytes() == p2.read_bytes()

    def test_extras_round_trip(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.rlxf"
        moments = {"opt.m.0": np.arange(6, dtype=np.float32).reshape(2, 3)}
        save_model(model, path, extra_tensors=moments)
        _, _, extras = load_model(path)
        assert extras["opt.m.0"].tobytes() == moments["opt.m.0"].tobytes()

    def test_truncated_file(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.rlxf"
        save_model(model, path)
        clipped = path.read_bytes()[:-20]
        path.write_bytes(clipped)
        with pytest.raises(ChecksumFail):
            read_checkpoint(path)

    def test_corrupted_payload(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.rlxf"
        save_model(model, path)
        raw = bytearray(path.read_bytes())
        raw[len(raw) // 2] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(ChecksumFail):
            read_checkpoint(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.rlxf"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(BadMagic):
            read_checkpoint(path)

    def test_version_mismatch(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.rlxf"
        save_model(model, path)
        raw = bytearray(path.read_bytes())
        raw[4:8] = struct.pack("<I", 99)
        path.write_bytes(bytes(raw))
        with pytest.raises(VersionMismatch):
            read_checkpoint(path)

    def test_config_only_inspection(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.rlxf"
        save_model(model, path, meta={"note": "x"})
        cfg = read_config(path)
        assert cfg["model"]["hidden"] == 8
        assert cfg["meta"] == {"note": "x"}

    def test_crc_reference_vector(self):
        assert crc64(b"123456789") == 0x995DC9BBDF1939FA

    def test_generic_rw(self, tmp_path):
        path = tmp_path / "t.rlxf"
        tensors = {"a": np.zeros((2, 2), dtype=np.float32), "b": np.ones(3, dtype=np.float32)}
        write_checkpoint(path, {"x": 1}, tensors)
        cfg, loaded = read_checkpoint(path)
        assert cfg == {"x": 1}
        assert set(loaded) == {"a", "b"}
        assert loaded["a"].shape == (2, 2)
