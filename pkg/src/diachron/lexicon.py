"""Lexical resources: valence ratings, WEAT word sets, gazetteers, religion map.

All types here are immutable after loading and safe to share across threads.
Each loader has a matching ``save_*`` so that load/save round-trips can be
verified.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from diachron.corpus.text import tokenize
from diachron.errors import (
    InvalidGazetteerEntry,
    InvalidLabel,
    InvalidLexiconToken,
    InvalidWeatSpec,
    MissingColumn,
    OutOfRangeValence,
)

RELIGION_LABELS = frozenset(
    {"hindu", "muslim", "sikh", "christian", "parsi", "multiple"}
)

GAZETTEER_KINDS = frozenset({"city", "state"})


# --------------------------------------------------------------------------
# valence lexicon


@dataclass(frozen=True)
class ValenceLexicon:
    """Token to valence rating on a 1..10 scale.

    ``duplicate_count`` reports how many input rows were overwritten by a
    later row for the same token (last row wins).
    """

    ratings: Mapping[str, float]
    duplicate_count: int = 0

    def __contains__(self, token: str) -> bool:
        return token in self.ratings

    def __len__(self) -> int:
        return len(self.ratings)

    def get(self, token: str) -> float | None:
        return self.ratings.get(token)


def _check_valence_row(token: str, value: str) -> tuple[str, float]:
    token = token.strip().lower()
    if not token or any(ch.isspace() for ch in token):
        raise InvalidLexiconToken(
            f"valence token must be a single non-empty token, got {token!r}"
        )
    try:
        rating = float(value)
    except (TypeError, ValueError):
        raise OutOfRangeValence(
            f"{token}: valence {value!r} is not a number"
        ) from None
    if not (1.0 <= rating <= 10.0):
        raise OutOfRangeValence(f"{token}: valence {rating} outside [1, 10]")
    return token, rating


def load_valence_lexicon(path: str | Path) -> ValenceLexicon:
    """Load a ``token,valence`` CSV into a validated lexicon."""
    ratings: dict[str, float] = {}
    duplicates = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in ("token", "valence") if c not in header]
        if missing:
            raise MissingColumn(
                f"valence lexicon {path} lacks columns: {', '.join(missing)}"
            )
        for row in reader:
            token, rating = _check_valence_row(row["token"], row["valence"])
            if token in ratings:
                duplicates += 1
            ratings[token] = rating
    return ValenceLexicon(ratings=ratings, duplicate_count=duplicates)


def save_valence_lexicon(lexicon: ValenceLexicon, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["token", "valence"])
        for token in sorted(lexicon.ratings):
            writer.writerow([token, repr(lexicon.ratings[token])])


# --------------------------------------------------------------------------
# WEAT specs


@dataclass(frozen=True)
class WeatSpec:
    """Two target sets and two attribute sets for the association test."""

    s1: tuple[str, ...]
    s2: tuple[str, ...]
    a1: tuple[str, ...]
    a2: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        if not self.s1 or len(self.s1) != len(self.s2):
            raise InvalidWeatSpec(
                f"target sets must be non-empty and equal-sized, "
                f"got {len(self.s1)} and {len(self.s2)}"
            )
        if not self.a1 or not self.a2:
            raise InvalidWeatSpec("attribute sets must be non-empty")
        for label, tokens in (
            ("s1", self.s1),
            ("s2", self.s2),
            ("a1", self.a1),
            ("a2", self.a2),
        ):
            if len(set(tokens)) != len(tokens):
                raise InvalidWeatSpec(f"{label} contains duplicate tokens")


_GENDER_OCCUPATIONS = WeatSpec(
    s1=(
        "maestro",
        "skipper",
        "protege",
        "philosopher",
        "captain",
        "architect",
        "financier",
        "warrior",
        "broadcaster",
        "magician",
        "pilot",
        "boss",
    ),
    s2=(
        "homemaker",
        "nurse",
        "receptionist",
        "librarian",
        "socialite",
        "hairdresser",
        "nanny",
        "bookkeeper",
        "stylist",
        "housekeeper",
        "designer",
        "counselor",
    ),
    a1=("he", "man", "male"),
    a2=("she", "woman", "female"),
    name="gender-occupations",
)


def builtin_weat_gender_occupations() -> WeatSpec:
    """The built-in gendered occupation test sets (always the same object)."""
    return _GENDER_OCCUPATIONS


def load_weat_spec(path: str | Path) -> WeatSpec:
    """Load a custom spec from JSON with keys s1, s2, a1, a2."""
    path = Path(path)
    payload = json.loads(path.read_text(encoding="utf-8"))
    missing = [k for k in ("s1", "s2", "a1", "a2") if k not in payload]
    if missing:
        raise MissingColumn(
            f"weat spec {path} lacks keys: {', '.join(missing)}"
        )
    return WeatSpec(
        s1=tuple(payload["s1"]),
        s2=tuple(payload["s2"]),
        a1=tuple(payload["a1"]),
        a2=tuple(payload["a2"]),
        name=payload.get("name", path.stem),
    )


def save_weat_spec(spec: WeatSpec, path: str | Path) -> None:
    payload = {
        "s1": list(spec.s1),
        "s2": list(spec.s2),
        "a1": list(spec.a1),
        "a2": list(spec.a2),
        "name": spec.name,
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


# --------------------------------------------------------------------------
# gazetteers


@dataclass(frozen=True)
class Gazetteer:
    """Canonical place names mapped to lowercase alias token sequences."""

    entries: Mapping[str, tuple[tuple[str, ...], ...]]
    kind: str = "city"

    def max_alias_len(self) -> int:
        return max(
            (len(alias) for aliases in self.entries.values() for alias in aliases),
            default=0,
        )


def load_gazetteers(path: str | Path) -> dict[str, Gazetteer]:
    """Load ``canonical,kind,alias1;alias2;...`` rows, one Gazetteer per kind."""
    by_kind: dict[str, dict[str, tuple[tuple[str, ...], ...]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in ("canonical", "kind", "aliases") if c not in header]
        if missing:
            raise MissingColumn(
                f"gazetteer {path} lacks columns: {', '.join(missing)}"
            )
        for row in reader:
            canonical = (row["canonical"] or "").strip()
            kind = (row["kind"] or "").strip().lower()
            if kind not in GAZETTEER_KINDS:
                raise InvalidGazetteerEntry(
                    f"{canonical!r}: unknown kind {kind!r}"
                )
            aliases = []
            for chunk in (row["aliases"] or "").split(";"):
                alias_tokens = tuple(tokenize(chunk))
                if alias_tokens:
                    aliases.append(alias_tokens)
            if not canonical or not aliases:
                raise InvalidGazetteerEntry(
                    f"gazetteer row {canonical!r} has no usable alias"
                )
            by_kind.setdefault(kind, {})[canonical] = tuple(aliases)
    return {
        kind: Gazetteer(entries=entries, kind=kind)
        for kind, entries in by_kind.items()
    }


def save_gazetteers(
    gazetteers: Mapping[str, Gazetteer] | Iterable[Gazetteer],
    path: str | Path,
) -> None:
    if isinstance(gazetteers, Mapping):
        gazetteers = list(gazetteers.values())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["canonical", "kind", "aliases"])
        for gaz in sorted(gazetteers, key=lambda g: g.kind):
            for canonical in sorted(gaz.entries):
                aliases = ";".join(
                    " ".join(alias) for alias in gaz.entries[canonical]
                )
                writer.writerow([canonical, gaz.kind, aliases])


# --------------------------------------------------------------------------
# religion map


@dataclass(frozen=True)
class ReligionMap:
    """Surname token (lowercase) to one of the six religion labels."""

    mapping: Mapping[str, str]

    def label_for(self, surname: str) -> str | None:
        return self.mapping.get(surname.strip().lower())


def load_religion_map(path: str | Path) -> ReligionMap:
    mapping: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in ("surname", "label") if c not in header]
        if missing:
            raise MissingColumn(
                f"religion map {path} lacks columns: {', '.join(missing)}"
            )
        for row in reader:
            surname = (row["surname"] or "").strip().lower()
            label = (row["label"] or "").strip().lower()
            if not surname:
                raise InvalidLexiconToken("religion map row with empty surname")
            if label not in RELIGION_LABELS:
                raise InvalidLabel(
                    f"{surname}: label {label!r} not one of "
                    f"{sorted(RELIGION_LABELS)}"
                )
            mapping[surname] = label
    return ReligionMap(mapping=mapping)


def save_religion_map(rmap: ReligionMap, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["surname", "label"])
        for surname in sorted(rmap.mapping):
            writer.writerow([surname, rmap.mapping[surname]])
