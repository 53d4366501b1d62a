"""Command line entry points.

Exit codes: 0 on success; 1 when an analysis fails on the data, for
example an empty vocabulary intersection; 2 for usage and configuration
errors. argparse itself exits with 2 on bad flags, which matches.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

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
    bucketize,
    count_tokens,
    ingest_corpus,
    load_corpus,
    save_corpus,
)
from diachron.embed.sgns import (
    SgnsConfig,
    active_kernel_name,
    load_embeddings,
    save_embeddings,
    train_sgns,
)
from diachron.errors import ConfigError, DiachronError
from diachron.lexicon import (
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
)
from diachron.pipeline import RunConfig, effective_seed, run_pipeline
from diachron.weat import weat_batch, write_weat_csv, write_weat_json


def _parse_buckets(raw: str | None):
    if raw is None:
        return DEFAULT_BUCKET_RANGES
    try:
        payload = json.loads(raw)
        return {name: (int(lo), int(hi)) for name, (lo, hi) in payload.items()}
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ConfigError("buckets", f"expected JSON like "
                          f'{{"old": [1950, 1969]}}: {exc}') from None


def _cmd_ingest(args) -> int:
    documents = ingest_corpus(args.manifest)
    corpus = bucketize(documents, _parse_buckets(args.buckets))
    save_corpus(corpus, args.out)
    for bucket in corpus.bucket_order():
        docs = corpus.buckets[bucket]
        tokens = sum(len(d.tokens) for d in docs)
        print(f"{bucket}: {len(docs)} documents, {tokens} tokens")
    if corpus.unassigned:
        print(f"unassigned: {len(corpus.unassigned)} documents")
    return 0


def _bucket_docs(corpus, bucket: str | None):
    if bucket is None:
        return corpus.documents()
    if bucket not in corpus.buckets:
        raise ConfigError("bucket", f"unknown bucket {bucket!r}")
    return corpus.buckets[bucket]


def _cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus)
    label = args.bucket or "all"
    csv_rows: list[str] = []
    if args.metric == "mpr":
        counts = pronoun_counts(count_tokens(_bucket_docs(corpus, args.bucket)))
        value = compute_mpr(counts)
        print(f"mpr {label} {value!r}")
        csv_rows = [
            "bucket,he,him,she,her,mpr",
            f"{label},{counts.he},{counts.him},{counts.she},{counts.her},"
            f"{value!r}",
        ]
    elif args.metric == "mbr":
        records = extract_childbirth_candidates(corpus)
        if args.births:
            records = merge_birth_annotations(records, args.births)
        if args.bucket is not None:
            records = [r for r in records if r.bucket == args.bucket]
        boys = sum(1 for r in records if r.gender_label == "boy")
        girls = sum(1 for r in records if r.gender_label == "girl")
        value = compute_mbr(records)
        print(f"mbr {label} {value!r}")
        csv_rows = [
            "bucket,boys,girls,unlabeled,mbr",
            f"{label},{boys},{girls},{len(records) - boys - girls},{value!r}",
        ]
    elif args.metric == "mentions":
        if not args.gazetteer:
            raise ConfigError("gazetteer", "required for the mentions metric")
        gazetteers = load_gazetteers(args.gazetteer)
        csv_rows = ["bucket,kind,place,count"]
        for kind in sorted(gazetteers):
            report = count_mentions(corpus, gazetteers[kind], level=args.level)
            for bucket in corpus.bucket_order():
                for place, count in report.per_bucket[bucket].items():
                    print(f"{bucket} {kind} {place} {count}")
                    csv_rows.append(f"{bucket},{kind},{place},{count}")
            for place in report.zero_mention_places:
                print(f"all {kind} {place} 0")
                csv_rows.append(f"all,{kind},{place},0")
    elif args.metric == "surnames":
        table = extract_surnames(
            _bucket_docs(corpus, args.bucket), doctor_only=args.doctor_only
        )
        pattern = "doctor" if args.doctor_only else "any"
        csv_rows = ["pattern,surname,count"]
        for surname, count in sorted(table.items(), key=lambda sc: (-sc[1], sc[0])):
            print(f"{surname} {count}")
            csv_rows.append(f"{pattern},{surname},{count}")
    elif args.metric == "religion":
        if not args.religion_map:
            raise ConfigError("religion_map", "required for the religion metric")
        rmap = load_religion_map(args.religion_map)
        table = extract_surnames(_bucket_docs(corpus, args.bucket))
        dist = religion_distribution(table, rmap)
        csv_rows = ["bucket,label,value"]
        for lab, pct in dist.percentages.items():
            print(f"{lab} {pct!r}")
            csv_rows.append(f"{label},{lab},{pct!r}")
        print(f"coverage {dist.coverage!r}")
        csv_rows.append(f"{label},coverage,{dist.coverage!r}")
    elif args.metric == "amounts":
        if not args.text:
            raise ConfigError("text", "required for the amounts metric")
        body = Path(args.text).read_text(encoding="utf-8")
        csv_rows = ["line,amount"]
        for line_no, line in enumerate(body.splitlines(), start=1):
            for amount in extract_monetary_amounts(line):
                print(f"{line_no} {amount!r}")
                csv_rows.append(f"{line_no},{amount!r}")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("\n".join(csv_rows) + "\n", encoding="utf-8")
    return 0


def _cmd_train(args) -> int:
    corpus = load_corpus(args.corpus)
    docs = _bucket_docs(corpus, args.bucket)
    config = SgnsConfig(
        dim=args.dim,
        window=args.window,
        negatives=args.negatives,
        epochs=args.epochs,
        initial_lr=args.lr,
        min_count=args.min_count,
        subsample_t=args.subsample,
        seed=effective_seed(args.seed),
    )
    space = train_sgns(
        docs,
        config,
        bucket=args.bucket or "all",
        workers=args.workers,
        kernel=args.kernel,
    )
    save_embeddings(space, args.out)
    print(
        f"trained {len(space.vocab)} tokens x {space.dim} dims "
        f"({active_kernel_name() if args.kernel is None else args.kernel} kernel)"
    )
    return 0


def _cmd_align(args) -> int:
    source = load_embeddings(args.source)
    target = load_embeddings(args.target)
    alignment = align_spaces(
        source, target, k=args.anchors, preprocess=not args.no_preprocess
    )
    save_alignment(alignment, args.out)
    print(
        f"aligned {alignment.source_bucket or 'source'} -> "
        f"{alignment.target_bucket or 'target'}: "
        f"{len(alignment.anchor_tokens)} anchors, "
        f"residual {alignment.residual!r}"
    )
    if alignment.rank_deficient:
        print(
            f"warning: rank deficient ({alignment.small_singular_values} "
            "near-zero singular values)",
            file=sys.stderr,
        )
    if args.apply:
        save_embeddings(apply_alignment(source, alignment), args.apply)
        print(f"wrote rotated source space to {args.apply}")
    return 0


def _cmd_neighbors(args) -> int:
    paths = list(args.space or [])
    if args.all_buckets:
        if not args.spaces_dir:
            raise ConfigError(
                "spaces_dir", "--all-buckets needs --spaces-dir"
            )
        paths.extend(sorted(str(p) for p in Path(args.spaces_dir).glob("*.vec")))
    if not paths:
        raise ConfigError("space", "give --space or --spaces-dir with --all-buckets")
    spaces = {}
    for item in paths:
        space = load_embeddings(item)
        spaces[space.bucket or Path(item).stem] = space
    report = neighbor_report(spaces, args.token, args.n)
    for bucket in sorted(report.per_bucket):
        for rank, (token, sim) in enumerate(report.per_bucket[bucket], start=1):
            print(f"{bucket} {rank} {token} {sim!r}")
    if args.out:
        write_neighbor_csv(report, args.out)
    if args.json:
        write_neighbor_json(report, args.json)
    return 0


def _cmd_weat(args) -> int:
    spaces = [load_embeddings(item) for item in args.space]
    if args.spec and args.builtin:
        raise ConfigError("spec", "--spec and --builtin are mutually exclusive")
    if args.spec:
        spec = load_weat_spec(args.spec)
    else:
        spec = builtin_weat_gender_occupations()
    batch = weat_batch(
        spaces, spec, oov_policy=args.oov_policy, sample_stddev=args.sample_stddev
    )
    for row in batch.rows:
        if row.error is not None:
            print(f"{row.space_id} failed: {row.error}")
        elif row.result is not None:
            print(f"{row.space_id} {row.result.effect_size!r}")
    if batch.mean_effect_size is not None:
        print(f"mean {batch.mean_effect_size!r}")
    if args.out:
        write_weat_csv(batch, args.out)
    if args.json:
        write_weat_json(batch, args.json)
    failed = any(row.error is not None for row in batch.rows)
    return 1 if failed and batch.mean_effect_size is None else 0


def _cmd_report(args) -> int:
    config = RunConfig.from_json(args.config)
    report = run_pipeline(config)
    for stage, seconds in report.stage_seconds.items():
        print(f"{stage}: {seconds}s")
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"report: {report.outputs['run_report']}")
    if report.failed_stage is not None:
        print(
            f"failed at stage {report.failed_stage}: {report.error}",
            file=sys.stderr,
        )
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diachron",
        description="Gender-bias metrics over time-bucketed subtitle corpora.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read a manifest, bucketize, save a corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--buckets", help='JSON mapping, e.g. {"old": [1950, 1969]}')
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("stats", help="count-based metrics over a saved corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument(
        "--metric",
        required=True,
        choices=["mpr", "mbr", "mentions", "surnames", "religion", "amounts"],
    )
    p.add_argument("--bucket")
    p.add_argument("--births")
    p.add_argument("--gazetteer")
    p.add_argument("--religion-map", dest="religion_map")
    p.add_argument("--text")
    p.add_argument("--doctor-only", action="store_true")
    p.add_argument("--level", choices=["film", "token"], default="film")
    p.add_argument("--out", help="also write the result as CSV rows")
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("train", help="train one embedding space from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--bucket")
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--min-count", dest="min_count", type=int, default=5)
    p.add_argument("--subsample", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--kernel", choices=["auto", "cython", "numpy"])
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("align", help="rotate one space onto another")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--anchors", type=int, default=10000)
    p.add_argument("--no-preprocess", action="store_true")
    p.add_argument("--apply", help="also write the rotated source space here")
    p.set_defaults(fn=_cmd_align)

    p = sub.add_parser("neighbors", help="nearest neighbors across spaces")
    p.add_argument("--space", action="append")
    p.add_argument("--spaces-dir", dest="spaces_dir")
    p.add_argument("--all-buckets", dest="all_buckets", action="store_true")
    p.add_argument("--token", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--json", help="JSON output path")
    p.set_defaults(fn=_cmd_neighbors)

    p = sub.add_parser("weat", help="association effect sizes per space")
    p.add_argument("--space", action="append", required=True)
    p.add_argument("--spec", help="JSON word-set spec")
    p.add_argument(
        "--builtin",
        choices=["gender-occupations"],
        help="use a named builtin word-set spec (the default)",
    )
    p.add_argument(
        "--oov-policy",
        choices=["error", "drop_and_rebalance"],
        default="drop_and_rebalance",
    )
    p.add_argument("--sample-stddev", action="store_true")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--json", help="JSON output path")
    p.set_defaults(fn=_cmd_weat)

    p = sub.add_parser("report", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DiachronError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
