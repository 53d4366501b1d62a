"""Exception types shared across the toolkit.

Every error raised by diachron's own logic derives from :class:`DiachronError`
so callers can catch one base class at pipeline boundaries.
"""

from __future__ import annotations


class DiachronError(Exception):
    """Base class for all toolkit errors."""


# --------------------------------------------------------------------------
# corpus


class EncodingError(DiachronError):
    """Subtitle bytes are not valid UTF-8."""


class MalformedTimestamp(DiachronError):
    """A time line could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvalidCue(DiachronError):
    """A cue violates its structural invariants (bad index, bad bounds)."""


class OverlappingRanges(DiachronError):
    """Two bucket year ranges intersect."""


class InvalidBucketRange(DiachronError):
    """A bucket range is malformed (start after end, or bad types)."""


class InvalidDocument(DiachronError):
    """Document metadata violates its invariants (year, industry, ...)."""


class DuplicateFilmId(DiachronError):
    """The same film_id appears more than once in a corpus."""


class MissingColumn(DiachronError):
    """A CSV input lacks a required header column."""


# --------------------------------------------------------------------------
# lexicon


class OutOfRangeValence(DiachronError):
    """A valence rating falls outside [1, 10]."""


class InvalidLexiconToken(DiachronError):
    """A lexicon key is empty or spans multiple tokens."""


class InvalidWeatSpec(DiachronError):
    """A WEAT spec violates its size or uniqueness invariants."""


class InvalidLabel(DiachronError):
    """A religion label is outside the six supported labels."""


class InvalidGazetteerEntry(DiachronError):
    """A gazetteer row has a bad kind or no usable alias."""


# --------------------------------------------------------------------------
# metrics


class EmptyDenominator(DiachronError):
    """All four pronoun counts are zero."""


class NoLabeledRecords(DiachronError):
    """No birth record carries a boy or girl label."""


class NoMappedSurnames(DiachronError):
    """No extracted surname has a religion mapping."""


class AllTokensOutOfLexicon(DiachronError):
    """Every token fell outside the valence lexicon."""


class LengthMismatch(DiachronError):
    """Two annotation lists differ in length (or are empty)."""


class DegenerateAgreement(DiachronError):
    """Chance agreement is 1, so kappa is undefined."""


# --------------------------------------------------------------------------
# embed


class EmptyVocabulary(DiachronError):
    """No token survives the min_count threshold."""


class NonFiniteLoss(DiachronError):
    """Training loss became NaN or infinite."""


class OutOfVocabulary(DiachronError):
    """A queried token is not in the vocabulary."""


class ZeroVector(DiachronError):
    """Cosine similarity requested against an all-zero vector."""


# --------------------------------------------------------------------------
# align


class EmptyIntersection(DiachronError):
    """Two vocabularies share no token."""


class DimensionMismatch(DiachronError):
    """Operands have incompatible dimensions."""


# --------------------------------------------------------------------------
# weat


class EmptyAttributeSet(DiachronError):
    """An attribute set has no in-vocabulary token."""


class EmptyTargetSet(DiachronError):
    """A target set is empty after out-of-vocabulary handling."""


class DegenerateSpread(DiachronError):
    """The g values have zero spread, so the effect size is undefined."""


class UnbalancedAfterDrop(DiachronError):
    """Target sets are unequal after dropping OOV tokens (error policy)."""


# --------------------------------------------------------------------------
# cli / pipeline


class ConfigError(DiachronError):
    """A run configuration field is missing or invalid; carries the field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class OutputLocked(DiachronError):
    """Another run owns the output directory's lock file."""


class PipelineStageError(DiachronError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
