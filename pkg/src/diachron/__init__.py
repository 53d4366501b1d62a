"""Diachronic gender-bias measurement for time-bucketed subtitle corpora.

The package splits into ingestion (:mod:`diachron.corpus`), resource
loading (:mod:`diachron.lexicon`), count-based metrics
(:mod:`diachron.metrics`), embedding training (:mod:`diachron.embed`),
space alignment (:mod:`diachron.align`), association tests
(:mod:`diachron.weat`), and the pipeline driving all of them
(:mod:`diachron.pipeline`).
"""

__version__ = "0.1.0"

from diachron.align import (
    AlignmentMap,
    align_spaces,
    apply_alignment,
    neighbor_report,
    nearest_neighbors,
    solve_procrustes,
)
from diachron.corpus import (
    SubtitleDocument,
    TimeBucketedCorpus,
    bucketize,
    ingest_corpus,
    parse_srt,
    tokenize,
)
from diachron.embed import (
    EmbeddingSpace,
    SgnsConfig,
    cosine,
    load_embeddings,
    save_embeddings,
    train_sgns,
)
from diachron.errors import DiachronError
from diachron.lexicon import (
    ValenceLexicon,
    WeatSpec,
    builtin_weat_gender_occupations,
    load_valence_lexicon,
)
from diachron.metrics import (
    cohen_kappa,
    compute_mbr,
    compute_mpr,
    count_mentions,
    extract_monetary_amounts,
    score_valence,
)
from diachron.pipeline import RunConfig, RunReport, run_pipeline
from diachron.weat import weat_batch, weat_effect_size

__all__ = [
    "AlignmentMap",
    "DiachronError",
    "EmbeddingSpace",
    "RunConfig",
    "RunReport",
    "SgnsConfig",
    "SubtitleDocument",
    "TimeBucketedCorpus",
    "ValenceLexicon",
    "WeatSpec",
    "__version__",
    "align_spaces",
    "apply_alignment",
    "bucketize",
    "builtin_weat_gender_occupations",
    "cohen_kappa",
    "compute_mbr",
    "compute_mpr",
    "cosine",
    "count_mentions",
    "extract_monetary_amounts",
    "ingest_corpus",
    "load_embeddings",
    "load_valence_lexicon",
    "nearest_neighbors",
    "neighbor_report",
    "parse_srt",
    "run_pipeline",
    "save_embeddings",
    "score_valence",
    "solve_procrustes",
    "tokenize",
    "train_sgns",
    "weat_batch",
    "weat_effect_size",
]
