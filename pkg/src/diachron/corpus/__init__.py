from diachron.corpus.documents import (
    DEFAULT_BUCKET_RANGES,
    FrequencyTable,
    Industry,
    SubtitleDocument,
    TimeBucketedCorpus,
    bucketize,
    count_tokens,
    ingest_corpus,
    load_corpus,
    save_corpus,
)
from diachron.corpus.srt import Cue, clean_text, parse_srt, serialize_srt
from diachron.corpus.text import tokenize

__all__ = [
    "Cue",
    "DEFAULT_BUCKET_RANGES",
    "FrequencyTable",
    "Industry",
    "SubtitleDocument",
    "TimeBucketedCorpus",
    "bucketize",
    "clean_text",
    "count_tokens",
    "ingest_corpus",
    "load_corpus",
    "parse_srt",
    "save_corpus",
    "serialize_srt",
    "tokenize",
]
