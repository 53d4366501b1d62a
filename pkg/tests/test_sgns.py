"""Embedding training: determinism, initialization, persistence, cosine."""

from __future__ import annotations

import random

import numpy as np
import pytest

from conftest import make_space
from diachron.embed.sgns import (
    EmbeddingSpace,
    SgnsConfig,
    active_kernel_name,
    cosine,
    load_embeddings,
    save_embeddings,
    train_sgns,
)
from diachron.embed.vocab import build_vocab
from diachron.errors import (
    DiachronError,
    NonFiniteLoss,
    OutOfVocabulary,
    ZeroVector,
)

KERNELS = ["numpy"]
try:
    import diachron.embed._sgns_inner  # noqa: F401

    KERNELS.append("cython")
except ImportError:
    pass

QUICK = SgnsConfig(
    dim=8,
    window=2,
    negatives=2,
    epochs=2,
    initial_lr=0.05,
    min_count=1,
    subsample_t=1e-2,
    seed=7,
)


def toy_sentences(n=120, seed=0):
    rng = random.Random(seed)
    nouns = ["king", "queen", "doctor", "nurse", "farmer", "teacher"]
    verbs = ["sees", "helps", "knows", "likes"]
    return [
        [rng.choice(nouns), rng.choice(verbs), "the", rng.choice(nouns)]
        for _ in range(n)
    ]


class TestConfigValidation:
    @pytest.mark.parametrize(
        "field,value",
        [
            ("dim", 1),
            ("window", 0),
            ("negatives", 0),
            ("epochs", -1),
            ("initial_lr", 0.0),
            ("min_count", 0),
            ("subsample_t", 0.0),
            ("subsample_t", 1.5),
        ],
    )
    def test_bad_values_rejected(self, field, value):
        with pytest.raises(ValueError, match=field):
            SgnsConfig(**{field: value})

    def test_zero_epochs_allowed(self):
        SgnsConfig(epochs=0)


class TestDeterminism:
    @pytest.mark.parametrize("kernel", KERNELS)
    def test_same_seed_is_bit_identical(self, kernel):
        sentences = toy_sentences()
        first = train_sgns(sentences, QUICK, kernel=kernel)
        second = train_sgns(sentences, QUICK, kernel=kernel)
        np.testing.assert_array_equal(first.vectors, second.vectors)
        assert first.training_config == second.training_config

    def test_different_seed_differs(self):
        sentences = toy_sentences()
        first = train_sgns(sentences, QUICK)
        other = SgnsConfig(**{**QUICK.to_dict(), "seed": 8})
        second = train_sgns(sentences, other)
        assert not np.array_equal(first.vectors, second.vectors)

    def test_zero_epochs_returns_seeded_init(self):
        sentences = toy_sentences()
        config = SgnsConfig(**{**QUICK.to_dict(), "epochs": 0, "seed": 123})
        space = train_sgns(sentences, config)
        vocab = build_vocab(sentences, config.min_count)
        rng = np.random.Generator(np.random.PCG64(123))
        expected = (
            rng.random((len(vocab), config.dim), dtype=np.float32)
            - np.float32(0.5)
        ) / np.float32(config.dim)
        np.testing.assert_array_equal(space.vectors, expected)
        assert space.training_config["epoch_mean_loss"] == []


class TestTraining:
    def test_epoch_loss_never_increases_on_bundled_corpus(self, mini_spaces):
        for bucket, space in mini_spaces.items():
            losses = space.training_config["epoch_mean_loss"]
            assert len(losses) == 8
            for earlier, later in zip(losses, losses[1:]):
                assert later <= earlier, f"{bucket}: {losses}"

    def test_provenance_recorded(self, mini_spaces):
        space = mini_spaces["old"]
        provenance = space.training_config
        assert provenance["dim"] == 16
        assert provenance["seed"] == 1
        assert provenance["kernel"] == active_kernel_name()
        assert provenance["workers"] == 1
        assert provenance["corpus_words"] > 0
        assert space.bucket == "old"

    def test_parallel_training_smoke(self):
        space = train_sgns(toy_sentences(), QUICK, workers=2)
        assert space.vectors.shape == (len(space.vocab), QUICK.dim)
        assert np.isfinite(space.vectors).all()
        assert space.training_config["workers"] == 2

    @pytest.mark.parametrize("kernel", KERNELS)
    def test_kernel_selection_recorded(self, kernel):
        space = train_sgns(toy_sentences(n=30), QUICK, kernel=kernel)
        assert space.training_config["kernel"] == kernel

    def test_unknown_kernel_rejected(self):
        with pytest.raises(ValueError, match="kernel"):
            train_sgns(toy_sentences(n=10), QUICK, kernel="fortran")

    def test_active_kernel_name(self):
        assert active_kernel_name() in ("cython", "numpy")


class TestSpaceInvariants:
    def test_vectors_are_read_only(self):
        space = make_space({"a": (1.0, 0.0), "b": (0.0, 1.0)})
        with pytest.raises(ValueError):
            space.vectors[0, 0] = 9.0

    def test_shape_mismatch_rejected(self):
        vocab = make_space({"a": (1.0, 0.0)}).vocab
        with pytest.raises(ValueError, match="shape"):
            EmbeddingSpace(
                vocab=vocab, vectors=np.zeros((2, 2)), dim=2
            )

    def test_non_finite_rejected(self):
        vocab = make_space({"a": (1.0, 0.0)}).vocab
        with pytest.raises(NonFiniteLoss):
            EmbeddingSpace(
                vocab=vocab, vectors=np.array([[np.nan, 0.0]]), dim=2
            )

    def test_vector_lookup(self):
        space = make_space({"a": (1.0, 2.0)})
        np.testing.assert_array_equal(space.vector("a"), [1.0, 2.0])
        assert "a" in space
        with pytest.raises(OutOfVocabulary):
            space.vector("zzz")


class TestCosine:
    def test_hand_values(self):
        space = make_space(
            {
                "diag": (1.0, 1.0),
                "x": (1.0, 0.0),
                "y": (0.0, 1.0),
                "anti": (-1.0, 0.0),
            }
        )
        assert abs(cosine(space, "x", "x") - 1.0) < 1e-12
        assert cosine(space, "x", "y") == 0.0
        assert abs(cosine(space, "diag", "x") - 2.0 ** -0.5) < 1e-12
        assert abs(cosine(space, "x", "anti") + 1.0) < 1e-12

    def test_symmetry_is_exact(self):
        rng = np.random.default_rng(42)
        mapping = {f"t{i}": rng.normal(size=6) for i in range(8)}
        space = make_space(mapping)
        tokens = list(mapping)
        for a in tokens:
            for b in tokens:
                assert cosine(space, a, b) == cosine(space, b, a)

    def test_scale_invariance(self):
        space = make_space({"v": (1.0, 1.0), "w": (1.0, 0.0)})
        scaled = make_space({"v": (3.7, 3.7), "w": (0.2, 0.0)})
        assert abs(
            cosine(space, "v", "w") - cosine(scaled, "v", "w")
        ) < 1e-12

    def test_zero_vector_rejected(self):
        space = make_space({"z": (0.0, 0.0), "x": (1.0, 0.0)})
        with pytest.raises(ZeroVector):
            cosine(space, "z", "x")


class TestPersistence:
    def test_save_load_round_trip(self, tmp_path):
        space = train_sgns(toy_sentences(n=40), QUICK, bucket="toy")
        path = tmp_path / "toy.vec"
        save_embeddings(space, path)
        loaded = load_embeddings(path)
        np.testing.assert_array_equal(
            loaded.vectors, space.vectors.astype(np.float64)
        )
        assert loaded.vocab.token_of == space.vocab.token_of
        assert loaded.vocab.counts == space.vocab.counts
        assert loaded.vocab.min_count == space.vocab.min_count
        assert loaded.bucket == "toy"
        assert loaded.training_config["kernel"] == space.training_config["kernel"]
        assert loaded.training_config["loaded_from"] == str(path)

    def test_load_without_sidecar(self, tmp_path):
        space = train_sgns(toy_sentences(n=40), QUICK, bucket="toy")
        path = tmp_path / "bare.vec"
        save_embeddings(space, path)
        (tmp_path / "bare.vec.meta.json").unlink()
        loaded = load_embeddings(path, bucket="else")
        assert loaded.bucket == "else"
        assert set(loaded.vocab.counts) == {1}
        assert loaded.training_config == {"loaded_from": str(path)}

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.vec"
        path.write_text("not a header\n")
        with pytest.raises(DiachronError, match="header"):
            load_embeddings(path)

    def test_short_row_rejected(self, tmp_path):
        path = tmp_path / "bad.vec"
        path.write_text("1 3\ntoken 0.5 0.25\n")
        with pytest.raises(DiachronError, match="row 0"):
            load_embeddings(path)

    def test_creates_parent_directories(self, tmp_path):
        space = train_sgns(toy_sentences(n=30), QUICK)
        path = tmp_path / "deep" / "nested" / "out.vec"
        save_embeddings(space, path)
        assert path.exists()
