"""Shared fixtures: bundled data paths, the mini corpus, fast training."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

import diachron
from diachron.corpus.documents import bucketize, ingest_corpus
from diachron.embed.sgns import EmbeddingSpace, SgnsConfig, train_sgns
from diachron.embed.vocab import Vocabulary
from diachron.pipeline import RunConfig

DATA_DIR = Path(diachron.__file__).parent / "data"

# Small but non-trivial: eight epochs give the loss curve room to move
# while keeping the suite fast. Every test that trains uses this config
# so the per-bucket spaces can be shared session-wide.
FAST_SGNS = SgnsConfig(
    dim=16,
    window=4,
    negatives=3,
    epochs=8,
    initial_lr=0.05,
    min_count=2,
    subsample_t=1e-3,
    seed=1,
)


def make_space(
    mapping: dict[str, object],
    counts: dict[str, int] | None = None,
    bucket: str = "",
) -> EmbeddingSpace:
    """Build a space from explicit token vectors, for hand-computed cases."""
    tokens = tuple(mapping)
    vectors = np.array([mapping[t] for t in tokens], dtype=np.float64)
    vocab = Vocabulary(
        id_of={t: i for i, t in enumerate(tokens)},
        token_of=tokens,
        counts=tuple((counts or {}).get(t, 1) for t in tokens),
        min_count=1,
    )
    return EmbeddingSpace(
        vocab=vocab, vectors=vectors, dim=vectors.shape[1], bucket=bucket
    )


def mini_run_config(output_dir: Path, **overrides) -> RunConfig:
    """A RunConfig wired to the bundled mini corpus and lexicons."""
    kwargs = dict(
        manifest=DATA_DIR / "mini" / "manifest.csv",
        output_dir=output_dir,
        valence_lexicon=DATA_DIR / "test_valence.csv",
        gazetteer=DATA_DIR / "gazetteer.csv",
        religion_map=DATA_DIR / "religion_map.csv",
        birth_annotations=DATA_DIR / "births.csv",
        amounts_text=DATA_DIR / "amounts.txt",
        sgns=FAST_SGNS,
        query_tokens=("he", "she", "dowry"),
        neighbors_n=5,
    )
    kwargs.update(overrides)
    return RunConfig(**kwargs)


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def mini_corpus():
    docs = ingest_corpus(DATA_DIR / "mini" / "manifest.csv")
    return bucketize(docs)


@pytest.fixture()
def fast_sgns() -> SgnsConfig:
    return FAST_SGNS


@pytest.fixture(scope="session")
def mini_spaces(mini_corpus):
    """One trained space per bucket, shared by alignment and weat tests."""
    return {
        bucket: train_sgns(
            mini_corpus.buckets[bucket], FAST_SGNS, bucket=bucket
        )
        for bucket in mini_corpus.bucket_order()
    }


@pytest.fixture()
def make_run_config(tmp_path):
    def _make(**overrides):
        overrides.setdefault("output_dir", tmp_path / "out")
        return mini_run_config(**overrides)

    return _make


@pytest.fixture(scope="session")
def pipeline_run(tmp_path_factory):
    """One full pipeline run, shared by every test that only reads it."""
    from diachron.pipeline import run_pipeline

    out = tmp_path_factory.mktemp("pipeline") / "out"
    config = mini_run_config(out)
    report = run_pipeline(config)
    return config, report
