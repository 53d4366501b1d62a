"""Skip-gram negative-sampling training with deterministic seeding.

The driver stages all randomness (subsampling draws, reduced windows,
negative-sample ids) from a single seeded PCG64 generator in a fixed order,
then hands flat pair arrays to a kernel that only does float math. The
compiled kernel is picked when available, the numpy fallback otherwise;
identical inputs and seed give bit-identical vectors for a given kernel.
"""

from __future__ import annotations

import os
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from diachron.embed.vocab import (
    Vocabulary,
    build_vocab,
    iter_sentences,
    noise_distribution,
)
from diachron.errors import (
    DiachronError,
    NonFiniteLoss,
    OutOfVocabulary,
    ZeroVector,
)

LR_FLOOR_FACTOR = 1e-4


def _load_kernel(name: str | None = None):
    if name is None:
        name = os.environ.get("DIACHRON_SGNS_KERNEL", "auto")
    if name in ("", "auto"):
        try:
            from diachron.embed import _sgns_inner

            return _sgns_inner
        except ImportError:
            from diachron.embed import _sgns_numpy

            return _sgns_numpy
    if name == "cython":
        from diachron.embed import _sgns_inner

        return _sgns_inner
    if name == "numpy":
        from diachron.embed import _sgns_numpy

        return _sgns_numpy
    raise ValueError(f"unknown SGNS kernel {name!r}")


_ACTIVE_KERNEL = _load_kernel()


def active_kernel_name() -> str:
    """Name of the kernel selected at import ("cython" or "numpy")."""
    return _ACTIVE_KERNEL.KERNEL_NAME


@dataclass(frozen=True)
class SgnsConfig:
    """Training hyperparameters. epochs=0 is allowed and trains nothing."""

    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    min_count: int = 5
    subsample_t: float = 1e-5
    seed: int = 1

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.negatives < 1:
            raise ValueError(f"negatives must be >= 1, got {self.negatives}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.initial_lr <= 0:
            raise ValueError(f"initial_lr must be > 0, got {self.initial_lr}")
        if self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")
        if not (0.0 < self.subsample_t <= 1.0):
            raise ValueError(
                f"subsample_t must be in (0, 1], got {self.subsample_t}"
            )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class EmbeddingSpace:
    """A vocabulary with one dense row vector per token."""

    vocab: Vocabulary
    vectors: np.ndarray
    dim: int
    bucket: str = ""
    training_config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.vectors.shape != (len(self.vocab), self.dim):
            raise ValueError(
                f"vectors shape {self.vectors.shape} does not match "
                f"({len(self.vocab)}, {self.dim})"
            )
        if not np.isfinite(self.vectors).all():
            raise NonFiniteLoss("embedding matrix contains non-finite entries")
        self.vectors.setflags(write=False)

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def vector(self, token: str) -> np.ndarray:
        """Read-only row for a token; raises OutOfVocabulary if absent."""
        return self.vectors[self.vocab.index(token)]


def cosine(space: EmbeddingSpace, token_x: str, token_y: str) -> float:
    """Cosine similarity of two token vectors, computed in float64."""
    vx = space.vector(token_x).astype(np.float64)
    vy = space.vector(token_y).astype(np.float64)
    nx = float(np.sqrt(np.dot(vx, vx)))
    ny = float(np.sqrt(np.dot(vy, vy)))
    if nx == 0.0:
        raise ZeroVector(f"{token_x!r} has an all-zero vector")
    if ny == 0.0:
        raise ZeroVector(f"{token_y!r} has an all-zero vector")
    return float(np.dot(vx, vy) / (nx * ny))


# --------------------------------------------------------------------------
# training


def _stage_sentence(ids, keep_prob, config, noise_cdf, rng):
    """Draw the sentence's randomness and build flat pair arrays.

    Consumption order is fixed (subsample draws, window reductions,
    negative ids) so the staged stream is identical for every kernel.
    """
    if len(ids) == 0:
        return None
    draws = rng.random(len(ids))
    kept = ids[draws < keep_prob[ids]]
    n_kept = len(kept)
    if n_kept == 0:
        return None
    spans = config.window - rng.integers(0, config.window, size=n_kept)
    idx = np.arange(n_kept)
    starts = np.maximum(idx - spans, 0)
    ends = np.minimum(idx + spans, n_kept - 1)
    lengths = ends - starts + 1
    offsets = np.cumsum(lengths) - lengths
    flat = (
        np.arange(int(lengths.sum()))
        - np.repeat(offsets, lengths)
        + np.repeat(starts, lengths)
    )
    centers = np.repeat(idx, lengths)
    mask = flat != centers
    if not mask.any():
        return None
    inputs = kept[flat[mask]].astype(np.int32)
    targets = kept[centers[mask]].astype(np.int32)
    u = rng.random((len(inputs), config.negatives))
    negatives = np.searchsorted(noise_cdf, u, side="right").astype(np.int32)
    np.clip(negatives, 0, len(noise_cdf) - 1, out=negatives)
    return inputs, targets, negatives


def _decayed_lr(config: SgnsConfig, processed: int, planned: int) -> float:
    lr = config.initial_lr * (1.0 - processed / (planned + 1))
    return max(lr, config.initial_lr * LR_FLOOR_FACTOR)


def train_sgns(
    source,
    config: SgnsConfig,
    bucket: str = "",
    workers: int = 1,
    kernel: str | None = None,
) -> EmbeddingSpace:
    """Train embeddings over documents or pre-tokenized sentences.

    ``source`` may hold documents (sentence per cue) or token lists. With
    ``workers=1`` (deterministic mode, the default) identical inputs, config
    and seed produce bit-identical vectors for the active kernel. With
    ``workers>1`` updates are asynchronous and only statistically
    reproducible.

    Raises EmptyVocabulary when nothing survives min_count, NonFiniteLoss
    if training diverges.
    """
    kern = _load_kernel(kernel) if kernel is not None else _ACTIVE_KERNEL
    sentences = iter_sentences(source)
    vocab = build_vocab(sentences, config.min_count)
    n_vocab = len(vocab)

    noise_cdf = np.cumsum(noise_distribution(vocab))
    noise_cdf[-1] = 1.0
    counts = np.asarray(vocab.counts, dtype=np.float64)
    freqs = counts / counts.sum()
    t = config.subsample_t
    keep_prob = np.minimum(1.0, np.sqrt(t / freqs) + t / freqs)

    rng = np.random.Generator(np.random.PCG64(config.seed))
    syn0 = (
        rng.random((n_vocab, config.dim), dtype=np.float32) - np.float32(0.5)
    ) / np.float32(config.dim)
    syn1 = np.zeros((n_vocab, config.dim), dtype=np.float32)

    id_of = vocab.id_of
    sent_ids = [
        np.array([id_of[tok] for tok in s if tok in id_of], dtype=np.int64)
        for s in sentences
    ]
    words_per_epoch = sum(len(ids) for ids in sent_ids)
    planned = config.epochs * words_per_epoch

    if workers <= 1:
        epoch_losses = _train_sequential(
            kern, syn0, syn1, sent_ids, keep_prob, noise_cdf, config, planned
        )
    else:
        epoch_losses = _train_parallel(
            kern,
            syn0,
            syn1,
            sent_ids,
            keep_prob,
            noise_cdf,
            config,
            planned,
            workers,
        )

    if not np.isfinite(syn0).all():
        raise NonFiniteLoss("training produced non-finite vector entries")

    provenance = config.to_dict()
    provenance.update(
        {
            "kernel": kern.KERNEL_NAME,
            "workers": workers,
            "epoch_mean_loss": epoch_losses,
            "corpus_words": words_per_epoch,
        }
    )
    return EmbeddingSpace(
        vocab=vocab,
        vectors=syn0,
        dim=config.dim,
        bucket=bucket,
        training_config=provenance,
    )


def _train_sequential(
    kern, syn0, syn1, sent_ids, keep_prob, noise_cdf, config, planned
):
    rng = np.random.Generator(np.random.PCG64(config.seed + 1))
    work = np.zeros(config.dim, dtype=np.float32)
    processed = 0
    epoch_losses = []
    for epoch in range(config.epochs):
        loss_sum = 0.0
        terms = 0
        for ids in sent_ids:
            lr = _decayed_lr(config, processed, planned)
            processed += len(ids)
            staged = _stage_sentence(ids, keep_prob, config, noise_cdf, rng)
            if staged is None:
                continue
            inputs, targets, negatives = staged
            loss, count = kern.run_pairs(
                syn0, syn1, inputs, targets, negatives, lr, work
            )
            loss_sum += loss
            terms += count
        mean_loss = loss_sum / terms if terms else 0.0
        if not np.isfinite(mean_loss):
            raise NonFiniteLoss(f"epoch {epoch}: mean loss {mean_loss}")
        epoch_losses.append(mean_loss)
    return epoch_losses


def _train_parallel(
    kern, syn0, syn1, sent_ids, keep_prob, noise_cdf, config, planned, workers
):
    """Hogwild-style threaded training; statistically reproducible only."""
    shards = [sent_ids[w::workers] for w in range(workers)]
    seeds = np.random.SeedSequence(config.seed + 1).spawn(workers)
    progress = [0]
    shard_losses: list[list[tuple[float, int]]] = [[] for _ in range(workers)]
    errors: list[BaseException] = []

    def run(worker_id: int):
        try:
            rng = np.random.Generator(np.random.PCG64(seeds[worker_id]))
            work = np.zeros(config.dim, dtype=np.float32)
            for _ in range(config.epochs):
                loss_sum = 0.0
                terms = 0
                for ids in shards[worker_id]:
                    lr = _decayed_lr(config, progress[0], planned)
                    progress[0] += len(ids)
                    staged = _stage_sentence(
                        ids, keep_prob, config, noise_cdf, rng
                    )
                    if staged is None:
                        continue
                    inputs, targets, negatives = staged
                    loss, count = kern.run_pairs(
                        syn0, syn1, inputs, targets, negatives, lr, work
                    )
                    loss_sum += loss
                    terms += count
                shard_losses[worker_id].append((loss_sum, terms))
        except BaseException as exc:  # surfaced after join
            errors.append(exc)

    threads = [
        threading.Thread(target=run, args=(w,), name=f"sgns-{w}")
        for w in range(workers)
    ]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    if errors:
        raise errors[0]

    epoch_losses = []
    for epoch in range(config.epochs):
        loss_sum = sum(s[epoch][0] for s in shard_losses if len(s) > epoch)
        terms = sum(s[epoch][1] for s in shard_losses if len(s) > epoch)
        mean_loss = loss_sum / terms if terms else 0.0
        if not np.isfinite(mean_loss):
            raise NonFiniteLoss(f"epoch {epoch}: mean loss {mean_loss}")
        epoch_losses.append(mean_loss)
    return epoch_losses


# --------------------------------------------------------------------------
# text save/load


def save_embeddings(space: EmbeddingSpace, path: str | Path) -> None:
    """Write the word-vector text format: header ``|V| d``, one token row
    per line. A ``<path>.meta.json`` sidecar keeps counts and provenance so
    CLI stages can rebuild the full space; the .vec file alone also loads.
    """
    import json

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{len(space.vocab)} {space.dim}"]
    for i, token in enumerate(space.vocab.token_of):
        values = " ".join(repr(float(v)) for v in space.vectors[i])
        lines.append(f"{token} {values}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar = {
        "bucket": space.bucket,
        "counts": list(space.vocab.counts),
        "min_count": space.vocab.min_count,
        "training_config": space.training_config,
    }
    Path(str(path) + ".meta.json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_embeddings(path: str | Path, bucket: str | None = None) -> EmbeddingSpace:
    """Load a text-format embedding file written by save_embeddings.

    Externally produced files without the sidecar load too; their token
    counts default to 1 and the bucket stays empty unless given.
    """
    import json

    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DiachronError(
                f"{path}: expected '|V| d' header, got {header!r}"
            )
        n_vocab, dim = int(header[0]), int(header[1])
        tokens: list[str] = []
        vectors = np.empty((n_vocab, dim), dtype=np.float64)
        for i in range(n_vocab):
            parts = fh.readline().rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise DiachronError(
                    f"{path}: row {i} has {len(parts) - 1} values, "
                    f"expected {dim}"
                )
            tokens.append(parts[0])
            vectors[i] = [float(x) for x in parts[1:]]

    counts: Sequence[int] = [1] * n_vocab
    min_count = 1
    training_config: dict = {"loaded_from": str(path)}
    meta_path = Path(str(path) + ".meta.json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        if len(meta.get("counts", [])) == n_vocab:
            counts = meta["counts"]
        min_count = meta.get("min_count", 1)
        training_config = dict(meta.get("training_config", {}))
        training_config["loaded_from"] = str(path)
        if bucket is None:
            bucket = meta.get("bucket", "")
    vocab = Vocabulary(
        id_of={tok: i for i, tok in enumerate(tokens)},
        token_of=tuple(tokens),
        counts=tuple(int(c) for c in counts),
        min_count=min_count,
    )
    return EmbeddingSpace(
        vocab=vocab,
        vectors=vectors,
        dim=dim,
        bucket=bucket or "",
        training_config=training_config,
    )
