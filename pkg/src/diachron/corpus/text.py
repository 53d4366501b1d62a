"""Dialogue tokenization."""

from __future__ import annotations

import re
import unicodedata

# Word characters with in-word apostrophes, or one of the three honorifics
# kept together with their period. Underscore is excluded from word chars.
_TOKEN_RE = re.compile(r"(?:dr|mr|mrs)\.|[^\W_]+(?:['’][^\W_]+)*")


def tokenize(text: str) -> list[str]:
    """Split text into lowercase NFC tokens.

    Splits on whitespace and punctuation, keeps apostrophes inside words
    ("it's" stays one token) and keeps the honorific pairs "dr.", "mr." and
    "mrs." as single tokens. Empty input yields an empty list.
    """
    if not text:
        return []
    lowered = unicodedata.normalize("NFC", text).lower()
    return _TOKEN_RE.findall(lowered)
