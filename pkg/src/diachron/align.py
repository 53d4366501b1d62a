"""Orthogonal Procrustes alignment across buckets and neighbor drift reports.

The rotation for source anchors A and target anchors B is R = U V^T from the
SVD of B^T A; rows transform as ``row @ R.T``. By default both anchor
matrices are preprocessed with the usual diachronic recipe (L2-normalize
rows, mean-center, re-normalize); pass ``preprocess=False`` for the raw
least-squares fit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from diachron.embed.sgns import EmbeddingSpace
from diachron.errors import (
    DimensionMismatch,
    EmptyIntersection,
    OutOfVocabulary,
    ZeroVector,
)
from diachron.lexicon import ValenceLexicon
from diachron.metrics import ValenceScore, score_valence

_RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class AlignmentMap:
    """An orthogonal rotation linking a source space to a target space."""

    rotation: np.ndarray
    source_bucket: str = ""
    target_bucket: str = ""
    anchor_tokens: tuple[str, ...] = ()
    residual: float = 0.0
    preprocessed: bool = True
    rank_deficient: bool = False
    small_singular_values: int = 0

    def __post_init__(self):
        self.rotation.setflags(write=False)


def select_anchors(
    space_a: EmbeddingSpace, space_b: EmbeddingSpace, k: int = 10000
) -> list[str]:
    """Shared tokens ranked by combined frequency, truncated to k.

    Ties break lexicographically; if fewer than k tokens are shared, all of
    them are returned.
    """
    common = space_a.vocab.id_of.keys() & space_b.vocab.id_of.keys()
    if not common:
        raise EmptyIntersection("the two vocabularies share no token")
    ranked = sorted(
        common,
        key=lambda t: (
            -(space_a.vocab.count_of(t) + space_b.vocab.count_of(t)),
            t,
        ),
    )
    return ranked[:k]


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return matrix / safe


def preprocess_anchors(matrix: np.ndarray) -> np.ndarray:
    """L2-normalize rows, mean-center columns, re-normalize rows."""
    out = _unit_rows(np.asarray(matrix, dtype=np.float64))
    out = out - out.mean(axis=0, keepdims=True)
    return _unit_rows(out)


def solve_procrustes(
    source: np.ndarray,
    target: np.ndarray,
    preprocess: bool = True,
    source_bucket: str = "",
    target_bucket: str = "",
    anchor_tokens: Sequence[str] = (),
) -> AlignmentMap:
    """Best orthogonal map from source anchor rows onto target anchor rows.

    Near-zero singular values are reported through the rank_deficient flag
    rather than raised; reflections are kept as the SVD returns them.
    """
    src = np.asarray(source, dtype=np.float64)
    tgt = np.asarray(target, dtype=np.float64)
    if src.ndim != 2 or tgt.ndim != 2:
        raise DimensionMismatch("anchor matrices must be 2-dimensional")
    if src.shape != tgt.shape:
        raise DimensionMismatch(
            f"anchor matrices differ in shape: {src.shape} vs {tgt.shape}"
        )
    if preprocess:
        src = preprocess_anchors(src)
        tgt = preprocess_anchors(tgt)
    cross = tgt.T @ src
    u, singular, vt = np.linalg.svd(cross)
    rotation = u @ vt
    top = float(singular.max()) if singular.size else 0.0
    small = (
        int(np.sum(singular < _RANK_TOL * top)) if top > 0 else singular.size
    )
    residual = float(np.linalg.norm(src @ rotation.T - tgt))
    return AlignmentMap(
        rotation=rotation,
        source_bucket=source_bucket,
        target_bucket=target_bucket,
        anchor_tokens=tuple(anchor_tokens),
        residual=residual,
        preprocessed=preprocess,
        rank_deficient=small > 0,
        small_singular_values=small,
    )


def align_spaces(
    source: EmbeddingSpace,
    target: EmbeddingSpace,
    k: int = 10000,
    preprocess: bool = True,
) -> AlignmentMap:
    """Select anchors between two spaces and solve for the rotation."""
    anchors = select_anchors(source, target, k)
    src = np.stack([source.vector(t) for t in anchors]).astype(np.float64)
    tgt = np.stack([target.vector(t) for t in anchors]).astype(np.float64)
    return solve_procrustes(
        src,
        tgt,
        preprocess=preprocess,
        source_bucket=source.bucket,
        target_bucket=target.bucket,
        anchor_tokens=anchors,
    )


def apply_alignment(
    space: EmbeddingSpace, alignment: AlignmentMap
) -> EmbeddingSpace:
    """Rotate every vector of a space into the alignment's target frame.

    The result holds float64 vectors so that within-space cosines are
    preserved well beyond the 1e-9 contract.
    """
    if alignment.rotation.shape[1] != space.dim:
        raise DimensionMismatch(
            f"rotation is {alignment.rotation.shape}, space dim is {space.dim}"
        )
    rotated = space.vectors.astype(np.float64) @ alignment.rotation.T
    provenance = dict(space.training_config)
    provenance["aligned_to"] = alignment.target_bucket
    return EmbeddingSpace(
        vocab=space.vocab,
        vectors=rotated,
        dim=space.dim,
        bucket=space.bucket,
        training_config=provenance,
    )


def save_alignment(alignment: AlignmentMap, path: str | Path) -> None:
    payload = {
        "source_bucket": alignment.source_bucket,
        "target_bucket": alignment.target_bucket,
        "anchor_count": len(alignment.anchor_tokens),
        "anchor_tokens": list(alignment.anchor_tokens),
        "residual": alignment.residual,
        "preprocessed": alignment.preprocessed,
        "rank_deficient": alignment.rank_deficient,
        "small_singular_values": alignment.small_singular_values,
        "rotation": [[float(x) for x in row] for row in alignment.rotation],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_alignment(path: str | Path) -> AlignmentMap:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return AlignmentMap(
        rotation=np.asarray(payload["rotation"], dtype=np.float64),
        source_bucket=payload["source_bucket"],
        target_bucket=payload["target_bucket"],
        anchor_tokens=tuple(payload.get("anchor_tokens", ())),
        residual=float(payload["residual"]),
        preprocessed=bool(payload.get("preprocessed", True)),
        rank_deficient=bool(payload.get("rank_deficient", False)),
        small_singular_values=int(payload.get("small_singular_values", 0)),
    )


# --------------------------------------------------------------------------
# nearest neighbors


def nearest_neighbors(
    space: EmbeddingSpace, token: str, n: int
) -> list[tuple[str, float]]:
    """Top-n tokens by cosine to the query, query excluded.

    Ties break lexicographically; zero-norm rows are skipped. Asking for
    more neighbors than exist returns all other tokens.
    """
    query_id = space.vocab.index(token)
    matrix = space.vectors.astype(np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    query_norm = norms[query_id]
    if query_norm == 0.0:
        raise ZeroVector(f"{token!r} has an all-zero vector")
    scores = matrix @ matrix[query_id]
    candidates = []
    for i, other in enumerate(space.vocab.token_of):
        if i == query_id or norms[i] == 0.0:
            continue
        candidates.append((other, float(scores[i] / (norms[i] * query_norm))))
    candidates.sort(key=lambda ts: (-ts[1], ts[0]))
    return candidates[:n]


@dataclass(frozen=True)
class NeighborReport:
    """Ranked neighbors of one query token across buckets."""

    query: str
    per_bucket: Mapping[str, tuple[tuple[str, float], ...]]
    valence: Mapping[str, float | None] = field(default_factory=dict)


def neighbor_report(
    spaces: Mapping[str, EmbeddingSpace], token: str, n: int
) -> NeighborReport:
    """Nearest neighbors of a token in every space that knows it.

    Bucket order follows the input mapping order. Raises OutOfVocabulary
    only if no space contains the token at all.
    """
    per_bucket = {}
    for bucket, space in spaces.items():
        if token in space:
            per_bucket[bucket] = tuple(nearest_neighbors(space, token, n))
    if not per_bucket:
        raise OutOfVocabulary(f"token {token!r} is in no provided space")
    return NeighborReport(query=token, per_bucket=per_bucket)


def neighbor_valence(
    report: NeighborReport, lexicon: ValenceLexicon
) -> dict[str, ValenceScore]:
    """Mean valence of each bucket's neighbor tokens.

    Raises AllTokensOutOfLexicon if any bucket's neighbors are entirely
    outside the lexicon, like score_valence does.
    """
    return {
        bucket: score_valence([t for t, _ in neighbors], lexicon)
        for bucket, neighbors in report.per_bucket.items()
    }


def write_neighbor_csv(report: NeighborReport, path: str | Path) -> None:
    """Emit ``bucket,rank,token,similarity`` rows."""
    lines = ["bucket,rank,token,similarity"]
    for bucket, neighbors in report.per_bucket.items():
        for rank, (token, similarity) in enumerate(neighbors, start=1):
            lines.append(f"{bucket},{rank},{token},{similarity!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_neighbor_json(report: NeighborReport, path: str | Path) -> None:
    """Emit a plot-ready JSON mirror of the per-bucket neighbor lists."""
    payload = {
        "query": report.query,
        "buckets": {
            bucket: {
                "neighbors": [
                    {"rank": r, "token": t, "similarity": s}
                    for r, (t, s) in enumerate(neighbors, start=1)
                ],
                "mean_valence": report.valence.get(bucket),
            }
            for bucket, neighbors in report.per_bucket.items()
        },
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
