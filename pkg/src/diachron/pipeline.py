"""End-to-end pipeline: one config in, a directory of reports out.

Stages run in a fixed order (ingest, metrics, train, align, neighbors,
weat); the pipeline stops at the first fatal stage error but keeps partial
outputs and always writes run_report.json. All CSV and JSON analysis
outputs are deterministic for a fixed config and seed; only the wall times
inside run_report.json vary between runs.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from diachron import __version__
from diachron.align import (
    align_spaces,
    apply_alignment,
    neighbor_report,
    save_alignment,
    write_neighbor_csv,
    write_neighbor_json,
)
from diachron.corpus.documents import (
    DEFAULT_BUCKET_RANGES,
    TimeBucketedCorpus,
    bucketize,
    count_tokens,
    ingest_corpus,
    save_corpus,
)
from diachron.embed.sgns import (
    EmbeddingSpace,
    SgnsConfig,
    active_kernel_name,
    save_embeddings,
    train_sgns,
)
from diachron.errors import (
    AllTokensOutOfLexicon,
    ConfigError,
    DiachronError,
    EmptyDenominator,
    EmptyIntersection,
    EmptyVocabulary,
    NoLabeledRecords,
    NoMappedSurnames,
    OutOfVocabulary,
    OutputLocked,
)
from diachron.lexicon import (
    ValenceLexicon,
    builtin_weat_gender_occupations,
    load_gazetteers,
    load_religion_map,
    load_valence_lexicon,
    load_weat_spec,
)
from diachron.metrics import (
    compute_mbr,
    compute_mpr,
    count_mentions,
    extract_childbirth_candidates,
    extract_monetary_amounts,
    extract_surnames,
    merge_birth_annotations,
    pronoun_counts,
    religion_distribution,
    score_valence,
)
from diachron.weat import weat_batch, write_weat_csv, write_weat_json

LOCK_FILE = ".diachron.lock"

ENV_SEED = "DIACHRON_SEED"


def effective_seed(config_seed: int) -> int:
    """The config seed, unless the DIACHRON_SEED env var overrides it."""
    raw = os.environ.get(ENV_SEED)
    if raw is None:
        return config_seed
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(ENV_SEED, f"must be an integer, got {raw!r}") from None


def _filename_safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name)


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline run needs. Paths are resolved as given."""

    manifest: Path
    output_dir: Path
    bucket_ranges: Mapping[str, tuple[int, int]] = field(
        default_factory=lambda: dict(DEFAULT_BUCKET_RANGES)
    )
    valence_lexicon: Path | None = None
    gazetteer: Path | None = None
    religion_map: Path | None = None
    birth_annotations: Path | None = None
    amounts_text: Path | None = None
    sgns: SgnsConfig = field(default_factory=SgnsConfig)
    anchors_k: int = 10000
    weat_spec: Path | None = None
    oov_policy: str = "drop_and_rebalance"
    query_tokens: tuple[str, ...] = ()
    neighbors_n: int = 10
    preprocess_alignment: bool = True
    workers: int = 1

    @classmethod
    def from_json(cls, path: str | Path) -> "RunConfig":
        """Load a config file, applying the DIACHRON_SEED override."""
        path = Path(path)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError("config", f"file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        known = set(cls.__dataclass_fields__)
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(
                "config", f"unknown fields: {', '.join(sorted(unknown))}"
            )
        kwargs: dict[str, Any] = {}
        base = path.parent
        for key in (
            "manifest",
            "output_dir",
            "valence_lexicon",
            "gazetteer",
            "religion_map",
            "birth_annotations",
            "amounts_text",
            "weat_spec",
        ):
            if payload.get(key) is not None:
                kwargs[key] = base / str(payload[key])
        if "manifest" not in kwargs or "output_dir" not in kwargs:
            raise ConfigError(
                "config", "manifest and output_dir are required"
            )
        if "bucket_ranges" in payload:
            kwargs["bucket_ranges"] = {
                name: (int(lo), int(hi))
                for name, (lo, hi) in payload["bucket_ranges"].items()
            }
        sgns_payload = dict(payload.get("sgns", {}))
        try:
            sgns = SgnsConfig(**sgns_payload)
        except (TypeError, ValueError) as exc:
            raise ConfigError("sgns", str(exc)) from None
        sgns = SgnsConfig(**{**sgns.to_dict(), "seed": effective_seed(sgns.seed)})
        kwargs["sgns"] = sgns
        for key in (
            "anchors_k",
            "oov_policy",
            "neighbors_n",
            "preprocess_alignment",
            "workers",
        ):
            if key in payload:
                kwargs[key] = payload[key]
        if "query_tokens" in payload:
            kwargs["query_tokens"] = tuple(payload["query_tokens"])
        return cls(**kwargs)

    def validate(self) -> None:
        """Check field values and referenced paths; ConfigError on failure."""
        if not Path(self.manifest).is_file():
            raise ConfigError("manifest", f"no such file: {self.manifest}")
        for name in (
            "valence_lexicon",
            "gazetteer",
            "religion_map",
            "birth_annotations",
            "amounts_text",
            "weat_spec",
        ):
            value = getattr(self, name)
            if value is not None and not Path(value).is_file():
                raise ConfigError(name, f"no such file: {value}")
        if self.anchors_k < 1:
            raise ConfigError("anchors_k", "must be >= 1")
        if self.neighbors_n < 1:
            raise ConfigError("neighbors_n", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if self.oov_policy not in ("error", "drop_and_rebalance"):
            raise ConfigError("oov_policy", f"unknown policy {self.oov_policy!r}")
        try:
            bucketize([], self.bucket_ranges)
        except DiachronError as exc:
            raise ConfigError("bucket_ranges", str(exc)) from None

    def config_hash(self) -> str:
        """sha256 over the semantically meaningful fields (not output_dir)."""
        payload = {
            "manifest": str(self.manifest),
            "bucket_ranges": {
                name: list(rng) for name, rng in sorted(self.bucket_ranges.items())
            },
            "valence_lexicon": _opt_str(self.valence_lexicon),
            "gazetteer": _opt_str(self.gazetteer),
            "religion_map": _opt_str(self.religion_map),
            "birth_annotations": _opt_str(self.birth_annotations),
            "amounts_text": _opt_str(self.amounts_text),
            "sgns": self.sgns.to_dict(),
            "anchors_k": self.anchors_k,
            "weat_spec": _opt_str(self.weat_spec),
            "oov_policy": self.oov_policy,
            "query_tokens": list(self.query_tokens),
            "neighbors_n": self.neighbors_n,
            "preprocess_alignment": self.preprocess_alignment,
            "workers": self.workers,
        }
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _opt_str(value) -> str | None:
    return None if value is None else str(value)


@dataclass
class RunReport:
    """What a run produced: files, timings, warnings, provenance."""

    outputs: dict[str, str] = field(default_factory=dict)
    stage_seconds: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    version: str = __version__
    config_hash: str = ""
    seed: int = 0
    kernel: str = ""
    failed_stage: str | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "outputs": dict(sorted(self.outputs.items())),
            "stage_seconds": self.stage_seconds,
            "warnings": list(self.warnings),
            "version": self.version,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "kernel": self.kernel,
            "failed_stage": self.failed_stage,
            "error": self.error,
        }


def _write_lines(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


class _Pipeline:
    def __init__(self, config: RunConfig):
        self.config = config
        self.out = Path(config.output_dir)
        self.report = RunReport(
            config_hash=config.config_hash(),
            seed=config.sgns.seed,
            kernel=active_kernel_name(),
        )
        self.corpus: TimeBucketedCorpus | None = None
        self.lexicon: ValenceLexicon | None = None
        self.spaces: dict[str, EmbeddingSpace] = {}
        self.aligned: dict[str, EmbeddingSpace] = {}

    # ------------------------------------------------------------------
    def run(self) -> RunReport:
        stages = (
            ("ingest", self.stage_ingest),
            ("metrics", self.stage_metrics),
            ("train", self.stage_train),
            ("align", self.stage_align),
            ("neighbors", self.stage_neighbors),
            ("weat", self.stage_weat),
        )
        for name, fn in stages:
            started = time.perf_counter()
            try:
                fn()
            except DiachronError as exc:
                self.report.failed_stage = name
                self.report.error = f"{type(exc).__name__}: {exc}"
                break
            finally:
                self.report.stage_seconds[name] = round(
                    time.perf_counter() - started, 3
                )
        report_path = self.out / "run_report.json"
        _write_json(report_path, self.report.to_dict())
        self.report.outputs["run_report"] = str(report_path)
        return self.report

    def _register(self, name: str, path: Path) -> None:
        self.report.outputs[name] = str(path)

    def _warn(self, message: str) -> None:
        self.report.warnings.append(message)

    # ------------------------------------------------------------------
    def stage_ingest(self):
        documents = ingest_corpus(self.config.manifest)
        self.corpus = bucketize(documents, self.config.bucket_ranges)
        for doc in self.corpus.unassigned:
            self._warn(
                f"film {doc.film_id} (year {doc.year}) outside all buckets"
            )
        corpus_dir = self.out / "corpus"
        save_corpus(self.corpus, corpus_dir)
        self._register("corpus", corpus_dir)
        if self.config.valence_lexicon is not None:
            self.lexicon = load_valence_lexicon(self.config.valence_lexicon)
            if self.lexicon.duplicate_count:
                self._warn(
                    f"valence lexicon had {self.lexicon.duplicate_count} "
                    "duplicate tokens (last row wins)"
                )

    # ------------------------------------------------------------------
    def stage_metrics(self):
        corpus = self.corpus
        assert corpus is not None
        order = corpus.bucket_order()

        # MPR
        rows = ["bucket,he,him,she,her,mpr"]
        mpr_json: dict[str, Any] = {}
        for bucket in order + ["all"]:
            docs = (
                corpus.documents()
                if bucket == "all"
                else corpus.buckets[bucket]
            )
            counts = pronoun_counts(count_tokens(docs))
            try:
                value = compute_mpr(counts)
                cell = repr(value)
                mpr_json[bucket] = value
            except EmptyDenominator:
                self._warn(f"mpr: bucket {bucket} has no gendered pronouns")
                cell = ""
                mpr_json[bucket] = None
            rows.append(
                f"{bucket},{counts.he},{counts.him},{counts.she},"
                f"{counts.her},{cell}"
            )
        path = self.out / "mpr.csv"
        _write_lines(path, rows)
        self._register("mpr", path)
        _write_json(self.out / "mpr.json", mpr_json)

        # births / MBR
        records = extract_childbirth_candidates(corpus)
        if self.config.birth_annotations is not None:
            records = merge_birth_annotations(
                records, self.config.birth_annotations
            )
        rows = ["bucket,boys,girls,unlabeled,mbr"]
        mbr_json: dict[str, Any] = {}
        for bucket in order + ["all"]:
            group = [
                r for r in records if bucket == "all" or r.bucket == bucket
            ]
            boys = sum(1 for r in group if r.gender_label == "boy")
            girls = sum(1 for r in group if r.gender_label == "girl")
            unlabeled = len(group) - boys - girls
            try:
                value = compute_mbr(group)
                cell = repr(value)
                mbr_json[bucket] = value
            except NoLabeledRecords:
                self._warn(f"mbr: bucket {bucket} has no labeled births")
                cell = ""
                mbr_json[bucket] = None
            rows.append(f"{bucket},{boys},{girls},{unlabeled},{cell}")
        path = self.out / "mbr.csv"
        _write_lines(path, rows)
        self._register("mbr", path)
        _write_json(self.out / "mbr.json", mbr_json)

        # mentions
        if self.config.gazetteer is not None:
            gazetteers = load_gazetteers(self.config.gazetteer)
            rows = ["bucket,kind,place,count"]
            mentions_json: dict[str, Any] = {}
            for kind in sorted(gazetteers):
                mention = count_mentions(corpus, gazetteers[kind])
                for bucket in order:
                    for place, count in mention.per_bucket[bucket].items():
                        rows.append(f"{bucket},{kind},{place},{count}")
                for place in mention.zero_mention_places:
                    rows.append(f"all,{kind},{place},0")
                mentions_json[kind] = {
                    "per_bucket": {
                        b: dict(mention.per_bucket[b]) for b in order
                    },
                    "zero_mention_places": list(mention.zero_mention_places),
                }
            path = self.out / "mentions.csv"
            _write_lines(path, rows)
            self._register("mentions", path)
            _write_json(self.out / "mentions.json", mentions_json)

        # surnames
        rows = ["pattern,surname,count"]
        surn_json: dict[str, Any] = {}
        for pattern, doctor_only in (("any", False), ("doctor", True)):
            table = extract_surnames(corpus, doctor_only=doctor_only)
            ordered = sorted(table.items(), key=lambda sc: (-sc[1], sc[0]))
            for surname, count in ordered:
                rows.append(f"{pattern},{surname},{count}")
            surn_json[pattern] = dict(ordered)
        path = self.out / "surnames.csv"
        _write_lines(path, rows)
        self._register("surnames", path)
        _write_json(self.out / "surnames.json", surn_json)

        # religion distribution
        if self.config.religion_map is not None:
            rmap = load_religion_map(self.config.religion_map)
            rows = ["bucket,label,value"]
            religion_json: dict[str, Any] = {}
            for bucket in order + ["all"]:
                docs = (
                    corpus.documents()
                    if bucket == "all"
                    else corpus.buckets[bucket]
                )
                table = extract_surnames(docs)
                try:
                    dist = religion_distribution(table, rmap)
                except NoMappedSurnames:
                    self._warn(
                        f"religion: bucket {bucket} has no mapped surnames"
                    )
                    continue
                for label, pct in dist.percentages.items():
                    rows.append(f"{bucket},{label},{pct!r}")
                rows.append(f"{bucket},coverage,{dist.coverage!r}")
                religion_json[bucket] = {
                    "percentages": dict(dist.percentages),
                    "coverage": dist.coverage,
                    "unmapped": list(dist.unmapped),
                }
            path = self.out / "religion.csv"
            _write_lines(path, rows)
            self._register("religion", path)
            _write_json(self.out / "religion.json", religion_json)

        # monetary amounts over external text
        if self.config.amounts_text is not None:
            text = Path(self.config.amounts_text).read_text(encoding="utf-8")
            rows = ["line,amount"]
            all_amounts: list[float] = []
            for line_no, line in enumerate(text.splitlines(), start=1):
                for amount in extract_monetary_amounts(line):
                    rows.append(f"{line_no},{amount!r}")
                    all_amounts.append(amount)
            path = self.out / "amounts.csv"
            _write_lines(path, rows)
            self._register("amounts", path)
            mean = sum(all_amounts) / len(all_amounts) if all_amounts else None
            _write_json(
                self.out / "amounts.json",
                {"count": len(all_amounts), "mean": mean},
            )

    # ------------------------------------------------------------------
    def stage_train(self):
        corpus = self.corpus
        assert corpus is not None
        emb_dir = self.out / "embeddings"
        for bucket in corpus.bucket_order():
            docs = corpus.buckets[bucket]
            if not docs:
                self._warn(f"train: bucket {bucket} has no documents")
                continue
            try:
                space = train_sgns(
                    docs,
                    self.config.sgns,
                    bucket=bucket,
                    workers=self.config.workers,
                )
            except EmptyVocabulary as exc:
                self._warn(f"train: bucket {bucket}: {exc}")
                continue
            self.spaces[bucket] = space
            path = emb_dir / f"{_filename_safe(bucket)}.vec"
            save_embeddings(space, path)
            self._register(f"embeddings/{bucket}", path)

    # ------------------------------------------------------------------
    def stage_align(self):
        corpus = self.corpus
        assert corpus is not None
        trained = [b for b in corpus.bucket_order() if b in self.spaces]
        if not trained:
            self._warn("align: no trained buckets")
            return
        newest = trained[-1]
        self.aligned = {newest: self.spaces[newest]}
        align_dir = self.out / "alignments"
        for bucket in trained[:-1]:
            try:
                alignment = align_spaces(
                    self.spaces[bucket],
                    self.spaces[newest],
                    k=self.config.anchors_k,
                    preprocess=self.config.preprocess_alignment,
                )
            except EmptyIntersection as exc:
                self._warn(f"align: {bucket} -> {newest}: {exc}")
                self.aligned[bucket] = self.spaces[bucket]
                continue
            if alignment.rank_deficient:
                self._warn(
                    f"align: {bucket} -> {newest}: rank deficient "
                    f"({alignment.small_singular_values} near-zero "
                    "singular values)"
                )
            path = align_dir / (
                f"{_filename_safe(bucket)}_to_{_filename_safe(newest)}.json"
            )
            save_alignment(alignment, path)
            self._register(f"alignment/{bucket}_to_{newest}", path)
            self.aligned[bucket] = apply_alignment(
                self.spaces[bucket], alignment
            )

    # ------------------------------------------------------------------
    def stage_neighbors(self):
        corpus = self.corpus
        assert corpus is not None
        if not self.config.query_tokens or not self.aligned:
            return
        frame = {
            bucket: self.aligned[bucket]
            for bucket in corpus.bucket_order()
            if bucket in self.aligned
        }
        neigh_dir = self.out / "neighbors"
        for token in self.config.query_tokens:
            try:
                report = neighbor_report(frame, token, self.config.neighbors_n)
            except OutOfVocabulary:
                self._warn(f"neighbors: {token!r} is in no bucket vocabulary")
                continue
            if self.lexicon is not None:
                valence: dict[str, float | None] = {}
                for bucket, neighbors in report.per_bucket.items():
                    try:
                        score = score_valence(
                            [t for t, _ in neighbors], self.lexicon
                        )
                        valence[bucket] = score.mean
                    except AllTokensOutOfLexicon:
                        self._warn(
                            f"neighbors: {token!r} bucket {bucket}: all "
                            "neighbors outside the valence lexicon"
                        )
                        valence[bucket] = None
                report = replace(report, valence=valence)
            safe = _filename_safe(token)
            csv_path = neigh_dir / f"{safe}.csv"
            json_path = neigh_dir / f"{safe}.json"
            write_neighbor_csv(report, csv_path)
            write_neighbor_json(report, json_path)
            self._register(f"neighbors/{token}.csv", csv_path)
            self._register(f"neighbors/{token}.json", json_path)

    # ------------------------------------------------------------------
    def stage_weat(self):
        corpus = self.corpus
        assert corpus is not None
        if not self.aligned:
            self._warn("weat: no spaces to test")
            return
        if self.config.weat_spec is not None:
            spec = load_weat_spec(self.config.weat_spec)
        else:
            spec = builtin_weat_gender_occupations()
        ordered = [
            self.aligned[bucket]
            for bucket in corpus.bucket_order()
            if bucket in self.aligned
        ]
        batch = weat_batch(ordered, spec, oov_policy=self.config.oov_policy)
        for row in batch.rows:
            if row.error is not None:
                self._warn(f"weat: {row.space_id}: {row.error}")
            elif row.result is not None and row.result.dropped_tokens:
                self._warn(
                    f"weat: {row.space_id}: dropped "
                    + ",".join(row.result.dropped_tokens)
                )
        csv_path = self.out / "weat.csv"
        json_path = self.out / "weat.json"
        write_weat_csv(batch, csv_path)
        write_weat_json(batch, json_path)
        self._register("weat.csv", csv_path)
        self._register("weat.json", json_path)


def run_pipeline(config: RunConfig) -> RunReport:
    """Validate the configuration, then run all stages under an output lock.

    Returns the RunReport (also written as run_report.json); a stage
    failure is recorded on the report rather than raised. Raises
    OutputLocked if another run holds the output directory.
    """
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    lock_path = out / LOCK_FILE
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise OutputLocked(
            f"output directory is locked by {lock_path}; remove the file "
            "if no other run is active"
        ) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return _Pipeline(config).run()
    finally:
        try:
            os.unlink(lock_path)
        except FileNotFoundError:
            pass
