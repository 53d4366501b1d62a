"""Documents, era buckets, frequency tables, and corpus persistence.

A corpus is built from a sidecar manifest CSV (``film_id,year,industry,
genre_tags,path``) pointing at SRT files, bucketized into named year ranges,
and persisted as a directory of newline-delimited JSON documents plus a small
index file carrying the bucket ranges.
"""

from __future__ import annotations

import csv
import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from diachron.corpus.srt import Cue, parse_srt
from diachron.corpus.text import tokenize
from diachron.errors import (
    DuplicateFilmId,
    InvalidBucketRange,
    InvalidDocument,
    MissingColumn,
    OverlappingRanges,
)

DEFAULT_BUCKET_RANGES: dict[str, tuple[int, int]] = {
    "old": (1950, 1969),
    "mid": (1970, 1999),
    "new": (2000, 2020),
}

MANIFEST_COLUMNS = ("film_id", "year", "industry", "genre_tags", "path")


class Industry(str, enum.Enum):
    BOLLYWOOD = "bollywood"
    HOLLYWOOD = "hollywood"
    WORLD = "world"


@dataclass(frozen=True)
class SubtitleDocument:
    """One film's dialogue cues with metadata and the derived token stream."""

    film_id: str
    year: int
    industry: Industry
    genre_tags: frozenset[str]
    cues: tuple[Cue, ...]
    tokens: tuple[str, ...]

    def __post_init__(self):
        if not (1900 <= self.year <= 2100):
            raise InvalidDocument(
                f"{self.film_id}: year {self.year} outside [1900, 2100]"
            )

    @classmethod
    def from_cues(
        cls,
        film_id: str,
        year: int,
        industry: Industry | str,
        genre_tags: Iterable[str],
        cues: Sequence[Cue],
    ) -> "SubtitleDocument":
        """Build a document, deriving tokens from the cues."""
        if not isinstance(industry, Industry):
            try:
                industry = Industry(str(industry).strip().lower())
            except ValueError:
                raise InvalidDocument(
                    f"{film_id}: unknown industry {industry!r}"
                ) from None
        tokens = tuple(t for cue in cues for t in tokenize(cue.text))
        return cls(
            film_id=film_id,
            year=year,
            industry=industry,
            genre_tags=frozenset(g.strip().lower() for g in genre_tags if g.strip()),
            cues=tuple(cues),
            tokens=tokens,
        )

    def sentences(self) -> list[list[str]]:
        """Per-cue token lists; context windows never cross cues."""
        return [tokenize(cue.text) for cue in self.cues]


@dataclass(frozen=True)
class FrequencyTable:
    """Exact token counts with their total."""

    counts: Mapping[str, int]
    total_tokens: int

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "FrequencyTable":
        counts = Counter(tokens)
        return cls(counts=dict(counts), total_tokens=sum(counts.values()))

    def get(self, token: str) -> int:
        return self.counts.get(token, 0)

    def items(self):
        return self.counts.items()


@dataclass(frozen=True)
class TimeBucketedCorpus:
    """Documents grouped into named, disjoint year ranges."""

    buckets: Mapping[str, tuple[SubtitleDocument, ...]]
    bucket_ranges: Mapping[str, tuple[int, int]]
    unassigned: tuple[SubtitleDocument, ...] = field(default=())

    def bucket_order(self) -> list[str]:
        """Bucket names sorted by range start year (oldest first)."""
        return sorted(self.bucket_ranges, key=lambda b: self.bucket_ranges[b])

    def documents(self) -> list[SubtitleDocument]:
        """All assigned documents, bucket order then input order."""
        out: list[SubtitleDocument] = []
        for name in self.bucket_order():
            out.extend(self.buckets[name])
        return out


def _check_ranges(ranges: Mapping[str, tuple[int, int]]) -> None:
    if not ranges:
        raise InvalidBucketRange("no bucket ranges given")
    for name, (start, end) in ranges.items():
        if start > end:
            raise InvalidBucketRange(f"bucket {name!r}: start {start} > end {end}")
    ordered = sorted(ranges.items(), key=lambda kv: kv[1])
    for (name_a, (_, end_a)), (name_b, (start_b, _)) in zip(ordered, ordered[1:]):
        if start_b <= end_a:
            raise OverlappingRanges(
                f"buckets {name_a!r} and {name_b!r} overlap"
            )


def bucketize(
    documents: Sequence[SubtitleDocument],
    ranges: Mapping[str, tuple[int, int]] | None = None,
) -> TimeBucketedCorpus:
    """Assign each document to the bucket containing its year.

    Documents falling outside every range land in the corpus'
    ``unassigned`` list rather than being dropped.
    """
    if ranges is None:
        ranges = DEFAULT_BUCKET_RANGES
    ranges = {name: (int(lo), int(hi)) for name, (lo, hi) in ranges.items()}
    _check_ranges(ranges)

    buckets: dict[str, list[SubtitleDocument]] = {name: [] for name in ranges}
    unassigned: list[SubtitleDocument] = []
    for doc in documents:
        for name, (start, end) in ranges.items():
            if start <= doc.year <= end:
                buckets[name].append(doc)
                break
        else:
            unassigned.append(doc)
    return TimeBucketedCorpus(
        buckets={name: tuple(docs) for name, docs in buckets.items()},
        bucket_ranges=ranges,
        unassigned=tuple(unassigned),
    )


def count_tokens(documents: Iterable[SubtitleDocument]) -> FrequencyTable:
    """Multiset counts over all tokens of all documents."""
    return FrequencyTable.from_tokens(
        t for doc in documents for t in doc.tokens
    )


# --------------------------------------------------------------------------
# manifest ingestion


def ingest_corpus(manifest_path: str | Path) -> list[SubtitleDocument]:
    """Read a manifest CSV and parse every listed subtitle file.

    Subtitle paths are resolved relative to the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    documents: list[SubtitleDocument] = []
    seen: set[str] = set()
    with open(manifest_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in MANIFEST_COLUMNS if c not in header]
        if missing:
            raise MissingColumn(
                f"manifest {manifest_path} lacks columns: {', '.join(missing)}"
            )
        for row in reader:
            film_id = (row["film_id"] or "").strip()
            if not film_id:
                raise InvalidDocument("manifest row with empty film_id")
            if film_id in seen:
                raise DuplicateFilmId(f"duplicate film_id {film_id!r}")
            seen.add(film_id)
            try:
                year = int(row["year"])
            except (TypeError, ValueError):
                raise InvalidDocument(
                    f"{film_id}: year {row['year']!r} is not an integer"
                ) from None
            genre_tags = (row["genre_tags"] or "").split(";")
            raw = (base / row["path"]).read_bytes()
            documents.append(
                SubtitleDocument.from_cues(
                    film_id=film_id,
                    year=year,
                    industry=row["industry"],
                    genre_tags=genre_tags,
                    cues=parse_srt(raw),
                )
            )
    return documents


# --------------------------------------------------------------------------
# JSONL persistence


def _doc_to_json(doc: SubtitleDocument) -> str:
    payload = {
        "film_id": doc.film_id,
        "year": doc.year,
        "industry": doc.industry.value,
        "genre_tags": sorted(doc.genre_tags),
        "cues": [
            {
                "index": c.index,
                "start_ms": c.start_ms,
                "end_ms": c.end_ms,
                "text": c.text,
            }
            for c in doc.cues
        ],
        "tokens": list(doc.tokens),
    }
    return json.dumps(payload, sort_keys=True, ensure_ascii=False)


def _doc_from_json(line: str) -> SubtitleDocument:
    payload = json.loads(line)
    return SubtitleDocument(
        film_id=payload["film_id"],
        year=payload["year"],
        industry=Industry(payload["industry"]),
        genre_tags=frozenset(payload["genre_tags"]),
        cues=tuple(
            Cue(c["index"], c["start_ms"], c["end_ms"], c["text"])
            for c in payload["cues"]
        ),
        tokens=tuple(payload["tokens"]),
    )


def save_corpus(corpus: TimeBucketedCorpus, out_dir: str | Path) -> None:
    """Write a corpus as one JSONL file per bucket plus an index file."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = {
        "format": 1,
        "bucket_ranges": {
            name: list(rng) for name, rng in corpus.bucket_ranges.items()
        },
    }
    (out_dir / "corpus.json").write_text(
        json.dumps(index, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    for name in corpus.bucket_order():
        lines = [_doc_to_json(d) for d in corpus.buckets[name]]
        (out_dir / f"bucket_{name}.jsonl").write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )
    lines = [_doc_to_json(d) for d in corpus.unassigned]
    (out_dir / "unassigned.jsonl").write_text(
        "".join(line + "\n" for line in lines), encoding="utf-8"
    )


def load_corpus(in_dir: str | Path) -> TimeBucketedCorpus:
    """Load a corpus directory written by :func:`save_corpus`."""
    in_dir = Path(in_dir)
    index = json.loads((in_dir / "corpus.json").read_text(encoding="utf-8"))
    ranges = {
        name: (int(lo), int(hi))
        for name, (lo, hi) in index["bucket_ranges"].items()
    }
    buckets = {}
    for name in ranges:
        path = in_dir / f"bucket_{name}.jsonl"
        docs = []
        if path.exists():
            with open(path, encoding="utf-8") as fh:
                docs = [_doc_from_json(line) for line in fh if line.strip()]
        buckets[name] = tuple(docs)
    unassigned = []
    upath = in_dir / "unassigned.jsonl"
    if upath.exists():
        with open(upath, encoding="utf-8") as fh:
            unassigned = [_doc_from_json(line) for line in fh if line.strip()]
    return TimeBucketedCorpus(
        buckets=buckets, bucket_ranges=ranges, unassigned=tuple(unassigned)
    )
