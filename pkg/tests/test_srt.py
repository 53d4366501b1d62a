"""SRT block parsing, including malformed-input errors and text cleanup."""

from __future__ import annotations

import random

import pytest

from diachron.corpus.srt import (
    Cue,
    clean_text,
    format_timestamp,
    parse_srt,
    serialize_srt,
)
from diachron.errors import EncodingError, InvalidCue, MalformedTimestamp

BASIC = b"""1
00:00:01,000 --> 00:00:02,500
Hello there.

2
00:00:03,000 --> 00:00:04,000
How are you?
"""


class TestParse:
    def test_basic_two_cues(self):
        cues = parse_srt(BASIC)
        assert [c.index for c in cues] == [1, 2]
        assert cues[0].start_ms == 1000
        assert cues[0].end_ms == 2500
        assert cues[0].text == "Hello there."
        assert cues[1].text == "How are you?"

    def test_bom_is_ignored(self):
        cues = parse_srt(b"\xef\xbb\xbf" + BASIC)
        assert cues[0].index == 1
        assert cues[0].text == "Hello there."

    def test_crlf_and_lone_cr_newlines(self):
        for sep in (b"\r\n", b"\r"):
            raw = BASIC.replace(b"\n", sep)
            cues = parse_srt(raw)
            assert len(cues) == 2
            assert cues[1].text == "How are you?"

    def test_multiline_body_joined_with_space(self):
        raw = b"1\n00:00:01,000 --> 00:00:02,000\nfirst line\nsecond line\n"
        (cue,) = parse_srt(raw)
        assert cue.text == "first line second line"

    def test_tags_and_brackets_stripped(self):
        raw = (
            b"1\n00:00:01,000 --> 00:00:02,000\n"
            b"<i>He whispers</i> the plan [door slams] quietly.\n"
        )
        (cue,) = parse_srt(raw)
        assert cue.text == "He whispers the plan quietly."

    def test_cue_empty_after_cleanup_is_dropped(self):
        raw = (
            b"1\n00:00:01,000 --> 00:00:02,000\n[music]\n\n"
            b"2\n00:00:03,000 --> 00:00:04,000\nStill here.\n"
        )
        cues = parse_srt(raw)
        assert [c.index for c in cues] == [2]

    def test_missing_index_line_continues_numbering(self):
        raw = (
            b"7\n00:00:01,000 --> 00:00:02,000\nSeven.\n\n"
            b"00:00:03,000 --> 00:00:04,000\nEight, implicitly.\n"
        )
        cues = parse_srt(raw)
        assert [c.index for c in cues] == [7, 8]

    def test_empty_input_yields_no_cues(self):
        assert parse_srt(b"") == []
        assert parse_srt(b"\n\n\n") == []

    def test_hours_beyond_two_digits(self):
        raw = b"1\n100:00:00,000 --> 100:00:01,000\nLong film.\n"
        (cue,) = parse_srt(raw)
        assert cue.start_ms == 100 * 3600 * 1000


class TestParseErrors:
    def test_non_utf8_bytes(self):
        with pytest.raises(EncodingError):
            parse_srt(b"1\n00:00:01,000 --> 00:00:02,000\n\xff\xfe\n")

    def test_block_without_time_line_reports_block_start(self):
        raw = b"Hello there.\nNo timestamps anywhere.\n"
        with pytest.raises(MalformedTimestamp) as err:
            parse_srt(raw)
        assert err.value.line == 1

    def test_bad_timestamp_reports_line_number(self):
        raw = BASIC + b"\n3\n00:61:00,000 --> 00:62:00,000\nBad minutes.\n"
        with pytest.raises(MalformedTimestamp) as err:
            parse_srt(raw)
        assert err.value.line == 10

    def test_dot_millis_separator_rejected(self):
        raw = b"1\n00:00:01.000 --> 00:00:02.000\nWrong separator.\n"
        with pytest.raises(MalformedTimestamp):
            parse_srt(raw)

    def test_start_after_end_rejected(self):
        raw = b"1\n00:00:05,000 --> 00:00:02,000\nBackwards.\n"
        with pytest.raises(MalformedTimestamp):
            parse_srt(raw)

    def test_non_numeric_index(self):
        raw = b"one\n00:00:01,000 --> 00:00:02,000\nText.\n"
        with pytest.raises(InvalidCue, match="line 1"):
            parse_srt(raw)

    def test_extra_lines_before_time_line(self):
        raw = b"1\njunk\n00:00:01,000 --> 00:00:02,000\nText.\n"
        with pytest.raises(InvalidCue, match="before time line"):
            parse_srt(raw)


class TestCueInvariants:
    def test_index_must_be_positive(self):
        with pytest.raises(InvalidCue):
            Cue(index=0, start_ms=0, end_ms=1, text="x")

    def test_start_must_be_non_negative(self):
        with pytest.raises(InvalidCue):
            Cue(index=1, start_ms=-5, end_ms=1, text="x")

    def test_start_must_not_exceed_end(self):
        with pytest.raises(InvalidCue):
            Cue(index=1, start_ms=10, end_ms=9, text="x")
        Cue(index=1, start_ms=10, end_ms=10, text="x")


class TestCleanText:
    def test_collapses_whitespace(self):
        assert clean_text("  a \t b\n c  ") == "a b c"

    def test_nested_annotations(self):
        assert clean_text("<b><i>bold</i></b> [SHOUTING] hi") == "bold hi"

    def test_unclosed_tag_left_alone(self):
        assert clean_text("a < b stays") == "a < b stays"


class TestSerialize:
    def test_format_timestamp(self):
        assert format_timestamp(0) == "00:00:00,000"
        assert format_timestamp(3_723_456) == "01:02:03,456"
        assert format_timestamp(360_000_000) == "100:00:00,000"

    def test_exact_output(self):
        cues = [Cue(1, 1000, 2500, "Hello there.")]
        assert serialize_srt(cues) == (
            "1\n00:00:01,000 --> 00:00:02,500\nHello there.\n"
        )

    def test_round_trip_identity_on_clean_cues(self):
        """parse(serialize(cues)) reproduces cues whose text is clean."""
        rng = random.Random(42)
        words = "the a boy girl doctor said went home again never".split()
        for _ in range(25):
            cues = []
            t = 0
            for i in range(rng.randint(1, 12)):
                start = t + rng.randint(0, 2000)
                end = start + rng.randint(1, 3000)
                t = end
                text = " ".join(
                    rng.choice(words) for _ in range(rng.randint(1, 8))
                )
                cues.append(Cue(i + 1, start, end, text))
            assert parse_srt(serialize_srt(cues).encode("utf-8")) == cues
