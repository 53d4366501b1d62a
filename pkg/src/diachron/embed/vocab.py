"""Vocabulary construction and the negative-sampling noise distribution."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from diachron.errors import EmptyVocabulary, OutOfVocabulary


def iter_sentences(source) -> list[list[str]]:
    """Normalize a training source into a list of token-list sentences.

    Accepts documents (anything with a ``sentences()`` method, one sentence
    per subtitle cue) or pre-tokenized sentences (sequences of strings).
    """
    sentences: list[list[str]] = []
    for item in source:
        if hasattr(item, "sentences"):
            sentences.extend(item.sentences())
        else:
            sentences.append(list(item))
    return sentences


@dataclass(frozen=True)
class Vocabulary:
    """Token ids contiguous from 0, ordered by (count desc, token asc)."""

    id_of: Mapping[str, int]
    token_of: tuple[str, ...]
    counts: tuple[int, ...]
    min_count: int

    def __len__(self) -> int:
        return len(self.token_of)

    def __contains__(self, token: str) -> bool:
        return token in self.id_of

    def index(self, token: str) -> int:
        try:
            return self.id_of[token]
        except KeyError:
            raise OutOfVocabulary(f"token {token!r} not in vocabulary") from None

    def count_of(self, token: str) -> int:
        idx = self.id_of.get(token)
        return 0 if idx is None else self.counts[idx]


def build_vocab(source, min_count: int = 1) -> Vocabulary:
    """Count tokens and retain those with frequency >= min_count.

    Ordering is deterministic: by count descending, then token ascending.
    """
    counter: Counter[str] = Counter()
    for sentence in iter_sentences(source):
        counter.update(sentence)
    retained = sorted(
        ((token, count) for token, count in counter.items() if count >= min_count),
        key=lambda tc: (-tc[1], tc[0]),
    )
    if not retained:
        raise EmptyVocabulary(
            f"no token reaches min_count={min_count} "
            f"({len(counter)} distinct tokens seen)"
        )
    token_of = tuple(token for token, _ in retained)
    counts = tuple(count for _, count in retained)
    id_of = {token: i for i, token in enumerate(token_of)}
    return Vocabulary(
        id_of=id_of, token_of=token_of, counts=counts, min_count=min_count
    )


def noise_distribution(vocab: Vocabulary, power: float = 0.75) -> np.ndarray:
    """Unigram distribution raised to ``power``, normalized to sum 1."""
    weights = np.asarray(vocab.counts, dtype=np.float64) ** power
    return weights / weights.sum()
