"""SRT subtitle parsing and serialization.

Parses UTF-8 SubRip files into :class:`Cue` records with millisecond
timestamps and markup-free text. The time-line format is strict:
``HH:MM:SS,mmm --> HH:MM:SS,mmm`` with a comma before the milliseconds.

Parameters are bytes in, cues out; ``serialize_srt`` is the inverse used by
the round-trip tests.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from diachron.errors import EncodingError, InvalidCue, MalformedTimestamp

_TIMESTAMP_RE = re.compile(r"^(\d{2,}):([0-5]\d):([0-5]\d),(\d{3})$")
_ARROW_RE = re.compile(r"\s*-->\s*")
_TAG_RE = re.compile(r"<[^>]*>")
_BRACKET_RE = re.compile(r"\[[^\]]*\]")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Cue:
    """One subtitle cue: display interval plus cleaned dialogue text."""

    index: int
    start_ms: int
    end_ms: int
    text: str

    def __post_init__(self):
        if self.index < 1:
            raise InvalidCue(f"cue index must be >= 1, got {self.index}")
        if self.start_ms < 0:
            raise InvalidCue(f"negative start time {self.start_ms}")
        if self.start_ms > self.end_ms:
            raise InvalidCue(
                f"cue start {self.start_ms} after end {self.end_ms}"
            )


def _parse_timestamp(raw: str, line_no: int) -> int:
    m = _TIMESTAMP_RE.match(raw.strip())
    if m is None:
        raise MalformedTimestamp(f"bad timestamp {raw.strip()!r}", line_no)
    hours, minutes, seconds, millis = (int(g) for g in m.groups())
    return ((hours * 60 + minutes) * 60 + seconds) * 1000 + millis


def _parse_time_line(raw: str, line_no: int) -> tuple[int, int]:
    parts = _ARROW_RE.split(raw.strip())
    if len(parts) != 2:
        raise MalformedTimestamp(f"bad time line {raw.strip()!r}", line_no)
    start = _parse_timestamp(parts[0], line_no)
    end = _parse_timestamp(parts[1], line_no)
    if start > end:
        raise MalformedTimestamp(
            f"start {parts[0].strip()} after end {parts[1].strip()}", line_no
        )
    return start, end


def clean_text(raw: str) -> str:
    """Strip HTML-like tags and bracketed annotations, collapse whitespace."""
    cleaned = _TAG_RE.sub(" ", raw)
    cleaned = _BRACKET_RE.sub(" ", cleaned)
    return _WS_RE.sub(" ", cleaned).strip()


def parse_srt(raw_bytes: bytes) -> list[Cue]:
    """Parse SRT bytes into cues, in file order.

    Parameters
    ----------
    raw_bytes:
        UTF-8 encoded SubRip text, optionally with a BOM.

    Returns
    -------
    list of Cue
        Cleaned cues; cues whose text is empty after markup stripping are
        dropped.

    Raises
    ------
    EncodingError
        If the bytes are not valid UTF-8.
    MalformedTimestamp
        If a time line cannot be parsed, with its 1-based line number.
    InvalidCue
        If an index line is present but not a positive integer.
    """
    try:
        text = raw_bytes.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"input is not valid UTF-8: {exc}") from exc

    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    cues: list[Cue] = []
    last_index = 0
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        block: list[tuple[int, str]] = []
        while i < len(lines) and lines[i].strip():
            block.append((i + 1, lines[i]))
            i += 1

        arrow_at = next(
            (pos for pos, (_, ln) in enumerate(block) if "-->" in ln), None
        )
        if arrow_at is None:
            raise MalformedTimestamp("cue block has no time line", block[0][0])
        if arrow_at > 1:
            raise InvalidCue(
                f"line {block[0][0]}: unexpected lines before time line"
            )

        if arrow_at == 1:
            index_line_no, index_raw = block[0]
            index_str = index_raw.strip()
            if not index_str.isdigit():
                raise InvalidCue(
                    f"line {index_line_no}: cue index {index_str!r} is not a"
                    " positive integer"
                )
            index = int(index_str)
        else:
            index = last_index + 1

        time_line_no, time_raw = block[arrow_at]
        start_ms, end_ms = _parse_time_line(time_raw, time_line_no)

        body = clean_text(" ".join(ln for _, ln in block[arrow_at + 1 :]))
        last_index = index
        if body:
            cues.append(Cue(index, start_ms, end_ms, body))
    return cues


def format_timestamp(ms: int) -> str:
    """Milliseconds to ``HH:MM:SS,mmm``."""
    seconds, millis = divmod(ms, 1000)
    minutes, seconds = divmod(seconds, 60)
    hours, minutes = divmod(minutes, 60)
    return f"{hours:02d}:{minutes:02d}:{seconds:02d},{millis:03d}"


def serialize_srt(cues: list[Cue]) -> str:
    """Render cues back to SRT text (inverse of parse_srt on clean cues)."""
    blocks = []
    for cue in cues:
        blocks.append(
            f"{cue.index}\n"
            f"{format_timestamp(cue.start_ms)} --> "
            f"{format_timestamp(cue.end_ms)}\n"
            f"{cue.text}\n"
        )
    return "\n".join(blocks)
