"""Count-based and template-based corpus analyses.

All functions here are pure: they read immutable corpus structures and
return plain records. Percentages are floats in [0, 100].
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from diachron.corpus.documents import (
    FrequencyTable,
    SubtitleDocument,
    TimeBucketedCorpus,
)
from diachron.corpus.text import tokenize
from diachron.errors import (
    AllTokensOutOfLexicon,
    DegenerateAgreement,
    EmptyDenominator,
    InvalidLabel,
    LengthMismatch,
    MissingColumn,
    NoLabeledRecords,
    NoMappedSurnames,
)
from diachron.lexicon import Gazetteer, ReligionMap, ValenceLexicon

MALE_PRONOUNS = ("he", "him")
FEMALE_PRONOUNS = ("she", "her")

BIRTH_KEYWORDS = frozenset(
    {"birth", "baby", "pregnant", "pregnancy", "congratulations"}
)
BOY_PHRASE = "it's a boy"
GIRL_PHRASE = "it's a girl"

HONORIFIC_TRIGGERS = frozenset({"mr.", "mrs.", "dr.", "doctor"})
DOCTOR_TRIGGERS = frozenset({"dr.", "doctor"})

# Tokens that never count as a surname after an honorific. Small curated
# list of English function words plus common address terms.
SURNAME_STOPWORDS = frozenset(
    """
    a about all am an and any are as at back be been but by can come could
    did do does done down for from get go going gone good got had has have
    he her here him his how i if in is it its ji just know like madam may me
    might mine must my no not now of off ok okay on one or our out over
    please right sahib said say says see she should sir so some such than
    that the their them then there these they this those to too two up us
    very was we well were what when where which who why will with would yes
    yet you your
    """.split()
)

DEFAULT_MONEY_UNITS: dict[str, float] = {
    "thousand": 1e3,
    "lakh": 1e5,
    "million": 1e6,
    "crore": 1e7,
}

_NUMBER_WORDS: dict[str, float] = {
    "one": 1,
    "two": 2,
    "three": 3,
    "four": 4,
    "five": 5,
    "six": 6,
    "seven": 7,
    "eight": 8,
    "nine": 9,
    "ten": 10,
    "eleven": 11,
    "twelve": 12,
    "thirteen": 13,
    "fourteen": 14,
    "fifteen": 15,
    "sixteen": 16,
    "seventeen": 17,
    "eighteen": 18,
    "nineteen": 19,
    "twenty": 20,
    "thirty": 30,
    "forty": 40,
    "fifty": 50,
    "sixty": 60,
    "seventy": 70,
    "eighty": 80,
    "ninety": 90,
    "hundred": 100,
}

_DIGIT_NUMBER = r"\d+(?:,\d{2,3})*(?:\.\d+)?"


# --------------------------------------------------------------------------
# pronoun ratio


@dataclass(frozen=True)
class PronounCounts:
    he: int = 0
    him: int = 0
    she: int = 0
    her: int = 0


def pronoun_counts(table: FrequencyTable) -> PronounCounts:
    """Pick the four gendered pronoun counts out of a frequency table."""
    return PronounCounts(
        he=table.get("he"),
        him=table.get("him"),
        she=table.get("she"),
        her=table.get("her"),
    )


def compute_mpr(counts: PronounCounts) -> float:
    """Male pronoun ratio: (he+him) / (he+him+she+her) * 100.

    Computed from the minority side, so that swapping the male and female
    counts yields values adding to exactly 100.0 in floating point.
    """
    male = counts.he + counts.him
    female = counts.she + counts.her
    total = male + female
    if total == 0:
        raise EmptyDenominator("all four pronoun counts are zero")
    if male == female:
        return 50.0
    if male < female:
        return male / total * 100.0
    return 100.0 - (female / total * 100.0)


# --------------------------------------------------------------------------
# childbirth candidates and MBR


@dataclass(frozen=True)
class BirthRecord:
    """One matched childbirth dialogue.

    ``cue_index`` is the SRT cue index inside the film, which is the merge
    key for external annotations.
    """

    dialogue: str
    film_id: str
    bucket: str
    cue_index: int
    gender_label: str = "unlabeled"


def _phrase_label(normalized: str) -> str:
    boy = BOY_PHRASE in normalized
    girl = GIRL_PHRASE in normalized
    if boy and not girl:
        return "boy"
    if girl and not boy:
        return "girl"
    return "unlabeled"


def extract_childbirth_candidates(
    corpus: TimeBucketedCorpus,
) -> list[BirthRecord]:
    """Find cues that talk about childbirth.

    A cue matches if any keyword appears as a token or either gender phrase
    appears as a substring of the normalized (tokenized and re-joined) text.
    Phrase matches carry a boy/girl label; a cue containing both phrases
    stays unlabeled. Only bucketed documents are scanned.
    """
    records: list[BirthRecord] = []
    for bucket in corpus.bucket_order():
        for doc in corpus.buckets[bucket]:
            for cue in doc.cues:
                tokens = tokenize(cue.text)
                normalized = " ".join(tokens)
                has_keyword = any(t in BIRTH_KEYWORDS for t in tokens)
                has_phrase = BOY_PHRASE in normalized or GIRL_PHRASE in normalized
                if not (has_keyword or has_phrase):
                    continue
                label = _phrase_label(normalized) if has_phrase else "unlabeled"
                records.append(
                    BirthRecord(
                        dialogue=cue.text,
                        film_id=doc.film_id,
                        bucket=bucket,
                        cue_index=cue.index,
                        gender_label=label,
                    )
                )
    return records


def merge_birth_annotations(
    records: Sequence[BirthRecord], path: str | Path
) -> list[BirthRecord]:
    """Apply a ``film_id,cue_index,gender`` annotation CSV to records.

    Annotations are keyed by (film_id, cue_index) and override existing
    labels (manual annotation is ground truth). Rows that match no record
    are ignored.
    """
    annotations: dict[tuple[str, int], str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [
            c for c in ("film_id", "cue_index", "gender") if c not in header
        ]
        if missing:
            raise MissingColumn(
                f"annotation file {path} lacks columns: {', '.join(missing)}"
            )
        for row in reader:
            gender = (row["gender"] or "").strip().lower()
            if gender not in ("boy", "girl"):
                raise InvalidLabel(
                    f"annotation gender must be boy or girl, got {gender!r}"
                )
            annotations[(row["film_id"].strip(), int(row["cue_index"]))] = gender

    merged = []
    for record in records:
        label = annotations.get((record.film_id, record.cue_index))
        if label is None:
            merged.append(record)
        else:
            merged.append(
                BirthRecord(
                    dialogue=record.dialogue,
                    film_id=record.film_id,
                    bucket=record.bucket,
                    cue_index=record.cue_index,
                    gender_label=label,
                )
            )
    return merged


def compute_mbr(records: Iterable[BirthRecord]) -> float:
    """Male birth ratio: boys / (boys + girls) * 100; unlabeled ignored."""
    boys = 0
    girls = 0
    for record in records:
        if record.gender_label == "boy":
            boys += 1
        elif record.gender_label == "girl":
            girls += 1
    if boys + girls == 0:
        raise NoLabeledRecords("no record labeled boy or girl")
    return boys / (boys + girls) * 100.0


# --------------------------------------------------------------------------
# place mentions


@dataclass(frozen=True)
class MentionReport:
    """Per-bucket place mention counts plus never-mentioned places."""

    per_bucket: Mapping[str, Mapping[str, int]]
    zero_mention_places: tuple[str, ...]
    kind: str
    level: str = "film"


def _doc_ngrams(tokens: Sequence[str], max_n: int) -> set[tuple[str, ...]]:
    grams: set[tuple[str, ...]] = set()
    for n in range(1, max_n + 1):
        grams.update(
            tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
        )
    return grams


def _count_occurrences(
    tokens: Sequence[str], alias: tuple[str, ...]
) -> int:
    n = len(alias)
    if n == 0 or n > len(tokens):
        return 0
    return sum(
        1 for i in range(len(tokens) - n + 1) if tuple(tokens[i : i + n]) == alias
    )


def count_mentions(
    corpus: TimeBucketedCorpus, gazetteer: Gazetteer, level: str = "film"
) -> MentionReport:
    """Count gazetteer place mentions per bucket.

    With ``level="film"`` (default) each film counts once per canonical
    place no matter how often it mentions it; aliases pool into their
    canonical name. ``level="token"`` counts alias occurrences instead
    (occurrences of different aliases add up).
    """
    if level not in ("film", "token"):
        raise ValueError(f"level must be 'film' or 'token', got {level!r}")
    max_n = gazetteer.max_alias_len()
    per_bucket: dict[str, dict[str, int]] = {}
    totals: dict[str, int] = {name: 0 for name in gazetteer.entries}
    for bucket in corpus.bucket_order():
        counts: dict[str, int] = {}
        for doc in corpus.buckets[bucket]:
            if level == "film":
                grams = _doc_ngrams(doc.tokens, max_n)
                for canonical, aliases in gazetteer.entries.items():
                    if any(alias in grams for alias in aliases):
                        counts[canonical] = counts.get(canonical, 0) + 1
            else:
                for canonical, aliases in gazetteer.entries.items():
                    hits = sum(
                        _count_occurrences(doc.tokens, alias)
                        for alias in aliases
                    )
                    if hits:
                        counts[canonical] = counts.get(canonical, 0) + hits
        for canonical, value in counts.items():
            totals[canonical] += value
        per_bucket[bucket] = dict(sorted(counts.items()))
    zero = tuple(sorted(name for name, total in totals.items() if total == 0))
    return MentionReport(
        per_bucket=per_bucket,
        zero_mention_places=zero,
        kind=gazetteer.kind,
        level=level,
    )


# --------------------------------------------------------------------------
# surnames and religion distribution


def _scan_surnames(
    documents: Iterable[SubtitleDocument], triggers: frozenset[str]
) -> FrequencyTable:
    counts: dict[str, int] = {}
    total = 0
    for doc in documents:
        for sentence in doc.sentences():
            for i, token in enumerate(sentence[:-1]):
                if token not in triggers:
                    continue
                nxt = sentence[i + 1]
                if not nxt.isalpha() or nxt in SURNAME_STOPWORDS:
                    continue
                surname = nxt.capitalize()
                counts[surname] = counts.get(surname, 0) + 1
                total += 1
    return FrequencyTable(counts=counts, total_tokens=total)


def extract_surnames(
    corpus: TimeBucketedCorpus | Iterable[SubtitleDocument],
    doctor_only: bool = False,
) -> FrequencyTable:
    """Count surnames following honorifics (mr./mrs./dr.) or "doctor".

    The token after the trigger must be purely alphabetic and not a
    stopword; it is reported capitalized. With ``doctor_only`` only the
    dr./doctor patterns count.
    """
    if isinstance(corpus, TimeBucketedCorpus):
        documents: Iterable[SubtitleDocument] = corpus.documents()
    else:
        documents = corpus
    triggers = DOCTOR_TRIGGERS if doctor_only else HONORIFIC_TRIGGERS
    return _scan_surnames(documents, triggers)


@dataclass(frozen=True)
class ReligionDistribution:
    """Percentages over mapped surname occurrences, with coverage report."""

    percentages: Mapping[str, float]
    coverage: float
    unmapped: tuple[str, ...]


def religion_distribution(
    surnames: FrequencyTable, religion_map: ReligionMap
) -> ReligionDistribution:
    """Distribute surname occurrences over religion labels.

    Percentages are over mapped occurrences only and sum to 100; the
    coverage field reports the mapped fraction of all occurrences, and
    unmapped surnames are listed separately.
    """
    label_counts: dict[str, int] = {}
    mapped = 0
    unmapped: list[str] = []
    for surname, count in sorted(surnames.items()):
        label = religion_map.label_for(surname)
        if label is None:
            unmapped.append(surname)
        else:
            label_counts[label] = label_counts.get(label, 0) + count
            mapped += count
    if mapped == 0:
        raise NoMappedSurnames("no extracted surname has a religion mapping")
    percentages = {
        label: label_counts[label] / mapped * 100.0
        for label in sorted(label_counts)
    }
    coverage = mapped / surnames.total_tokens if surnames.total_tokens else 0.0
    return ReligionDistribution(
        percentages=percentages, coverage=coverage, unmapped=tuple(unmapped)
    )


# --------------------------------------------------------------------------
# valence scoring


@dataclass(frozen=True)
class ValenceScore:
    """Mean valence over in-lexicon tokens plus the skip report."""

    mean: float
    used: int
    skipped: tuple[str, ...]

    def __float__(self) -> float:
        return self.mean


def score_valence(
    tokens: Sequence[str], lexicon: ValenceLexicon
) -> ValenceScore:
    """Arithmetic mean of ratings of in-lexicon tokens.

    Out-of-lexicon tokens are skipped and reported on the returned record.
    """
    values: list[float] = []
    skipped: list[str] = []
    for token in tokens:
        rating = lexicon.get(token)
        if rating is None:
            skipped.append(token)
        else:
            values.append(rating)
    if not values:
        raise AllTokensOutOfLexicon(
            f"none of {len(tokens)} tokens is in the lexicon"
        )
    return ValenceScore(
        mean=sum(values) / len(values),
        used=len(values),
        skipped=tuple(skipped),
    )


# --------------------------------------------------------------------------
# inter-annotator agreement


def cohen_kappa(labels_a: Sequence[str], labels_b: Sequence[str]) -> float:
    """Two-rater Cohen kappa over nominal labels.

    kappa = (p_o - p_e) / (1 - p_e) with chance agreement p_e from the
    per-annotator marginal label frequencies.
    """
    if len(labels_a) != len(labels_b) or len(labels_a) == 0:
        raise LengthMismatch(
            f"label lists must have equal nonzero length, "
            f"got {len(labels_a)} and {len(labels_b)}"
        )
    n = len(labels_a)
    observed = sum(1 for x, y in zip(labels_a, labels_b) if x == y) / n
    labels = set(labels_a) | set(labels_b)
    expected = 0.0
    for label in labels:
        pa = sum(1 for x in labels_a if x == label) / n
        pb = sum(1 for y in labels_b if y == label) / n
        expected += pa * pb
    if expected == 1.0:
        raise DegenerateAgreement(
            "chance agreement is 1, kappa is undefined"
        )
    return (observed - expected) / (1.0 - expected)


# --------------------------------------------------------------------------
# monetary amounts


def _money_pattern(units: Mapping[str, float]) -> re.Pattern[str]:
    unit_alt = "|".join(
        re.escape(u) for u in sorted(units, key=len, reverse=True)
    )
    word_alt = "|".join(
        re.escape(w) for w in sorted(_NUMBER_WORDS, key=len, reverse=True)
    )
    return re.compile(
        rf"\b(?:(?P<qty>{_DIGIT_NUMBER}|{word_alt})\s+(?P<unit>(?:{unit_alt})s?)"
        rf"|(?P<plain>{_DIGIT_NUMBER}))\b"
    )


def _parse_quantity(raw: str) -> float:
    if raw in _NUMBER_WORDS:
        return float(_NUMBER_WORDS[raw])
    return float(raw.replace(",", ""))


def extract_monetary_amounts(
    text: str, units: Mapping[str, float] | None = None
) -> list[float]:
    """Extract numeric amounts from free text, in source order.

    Recognizes digit groups with Western or Indian comma grouping
    ("200000", "2,00,000") and decimal forms, plus a number (digits or a
    small number-word vocabulary) followed by a multiplier word from
    ``units`` (default thousand/lakh/million/crore). Multiplier words without an
    adjacent number are ignored; no match yields an empty list.
    """
    if units is None:
        units = DEFAULT_MONEY_UNITS
    pattern = _money_pattern(units)
    amounts: list[float] = []
    for match in pattern.finditer(text.lower()):
        if match.group("unit"):
            unit = match.group("unit")
            if unit not in units:
                unit = unit[:-1]  # plural form
            amounts.append(_parse_quantity(match.group("qty")) * units[unit])
        else:
            amounts.append(_parse_quantity(match.group("plain")))
    return amounts
