"""Word-embedding association test: differential association and effect size.

The effect size for target sets S1, S2 and attribute sets A1, A2 is

    B = (mean_{s in S1} g(s) - mean_{t in S2} g(t)) / stddev_{c in S1+S2} g(c)

where g(c) is the mean cosine of c to A1 minus its mean cosine to A2. The
standard deviation is the population one by default. Reductions over the
union run in sorted value order, so swapping S1 and S2 negates the result
exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from diachron.embed.sgns import EmbeddingSpace, cosine
from diachron.errors import (
    DegenerateSpread,
    DiachronError,
    EmptyAttributeSet,
    EmptyTargetSet,
    UnbalancedAfterDrop,
)
from diachron.lexicon import WeatSpec

OOV_POLICIES = ("error", "drop_and_rebalance")


@dataclass(frozen=True)
class WeatResult:
    """One effect size with its per-target associations and OOV report."""

    effect_size: float
    g_values: Mapping[str, float]
    dropped_tokens: tuple[str, ...]
    spec_name: str = ""
    space_id: str = ""
    oov_policy: str = "drop_and_rebalance"
    stddev: str = "population"


@dataclass(frozen=True)
class WeatBatchRow:
    space_id: str
    bucket: str
    result: WeatResult | None = None
    error: str | None = None


@dataclass(frozen=True)
class WeatBatch:
    """Per-space outcomes plus the aggregate over the successful ones."""

    rows: tuple[WeatBatchRow, ...]
    mean_effect_size: float | None
    aggregated_over: tuple[str, ...]


def differential_association(
    space: EmbeddingSpace,
    token_c: str,
    a1: Sequence[str],
    a2: Sequence[str],
) -> float:
    """Mean cosine of c to in-vocabulary A1 minus mean cosine to A2."""
    in_a1 = [a for a in a1 if a in space]
    in_a2 = [b for b in a2 if b in space]
    if not in_a1 or not in_a2:
        raise EmptyAttributeSet(
            f"attribute sets resolve to {len(in_a1)} and {len(in_a2)} "
            "in-vocabulary tokens"
        )
    mean_a1 = sum(cosine(space, token_c, a) for a in in_a1) / len(in_a1)
    mean_a2 = sum(cosine(space, token_c, b) for b in in_a2) / len(in_a2)
    return mean_a1 - mean_a2


def _spread(values: Sequence[float], sample: bool) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mean = sum(ordered) / n
    sq = sum((x - mean) ** 2 for x in ordered)
    if sample and n > 1:
        return math.sqrt(sq / (n - 1))
    return math.sqrt(sq / n)


def weat_effect_size(
    space: EmbeddingSpace,
    spec: WeatSpec,
    oov_policy: str = "drop_and_rebalance",
    sample_stddev: bool = False,
) -> WeatResult:
    """Effect size over one space, handling out-of-vocabulary targets.

    Policy "error" raises UnbalancedAfterDrop when dropping OOV targets
    leaves unequal sets; "drop_and_rebalance" additionally trims the larger
    set from its tail (list order is priority). All drops are reported.
    """
    if oov_policy not in OOV_POLICIES:
        raise ValueError(f"oov_policy must be one of {OOV_POLICIES}")
    retained1 = [t for t in spec.s1 if t in space]
    retained2 = [t for t in spec.s2 if t in space]
    dropped = [t for t in spec.s1 if t not in space]
    dropped += [t for t in spec.s2 if t not in space]

    if len(retained1) != len(retained2):
        if oov_policy == "error":
            raise UnbalancedAfterDrop(
                f"retained {len(retained1)} vs {len(retained2)} targets"
            )
        keep = min(len(retained1), len(retained2))
        dropped += retained1[keep:] + retained2[keep:]
        retained1 = retained1[:keep]
        retained2 = retained2[:keep]

    if not retained1 or not retained2:
        raise EmptyTargetSet(
            "no target tokens left after out-of-vocabulary handling"
        )

    dropped += [a for a in spec.a1 + spec.a2 if a not in space]

    g_values = {
        token: differential_association(space, token, spec.a1, spec.a2)
        for token in retained1 + retained2
    }
    mean1 = sum(g_values[t] for t in retained1) / len(retained1)
    mean2 = sum(g_values[t] for t in retained2) / len(retained2)
    spread = _spread(list(g_values.values()), sample=sample_stddev)
    if spread == 0.0:
        raise DegenerateSpread("g values have zero spread")
    return WeatResult(
        effect_size=(mean1 - mean2) / spread,
        g_values=g_values,
        dropped_tokens=tuple(dropped),
        spec_name=spec.name,
        space_id=space.bucket,
        oov_policy=oov_policy,
        stddev="sample" if sample_stddev else "population",
    )


def weat_batch(
    spaces: Iterable[EmbeddingSpace],
    spec: WeatSpec,
    oov_policy: str = "drop_and_rebalance",
    sample_stddev: bool = False,
    aggregate: bool = True,
) -> WeatBatch:
    """Run the test over many spaces; failures are recorded, not raised.

    Aggregation (the mean effect size) runs over the successful rows in
    bucket-name order.
    """
    rows: list[WeatBatchRow] = []
    for i, space in enumerate(spaces):
        space_id = space.bucket or f"space{i}"
        try:
            result = weat_effect_size(
                space, spec, oov_policy=oov_policy, sample_stddev=sample_stddev
            )
            rows.append(
                WeatBatchRow(space_id=space_id, bucket=space.bucket, result=result)
            )
        except DiachronError as exc:
            rows.append(
                WeatBatchRow(
                    space_id=space_id,
                    bucket=space.bucket,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    mean_effect = None
    aggregated: tuple[str, ...] = ()
    if aggregate:
        successes = sorted(
            (row for row in rows if row.result is not None),
            key=lambda row: row.bucket,
        )
        if successes:
            mean_effect = sum(r.result.effect_size for r in successes) / len(
                successes
            )
            aggregated = tuple(r.space_id for r in successes)
    return WeatBatch(
        rows=tuple(rows),
        mean_effect_size=mean_effect,
        aggregated_over=aggregated,
    )


def write_weat_csv(batch: WeatBatch, path: str | Path) -> None:
    """Emit ``space,bucket,effect_size,dropped`` rows plus a mean row."""
    lines = ["space,bucket,effect_size,dropped"]
    for row in batch.rows:
        if row.result is not None:
            dropped = ";".join(row.result.dropped_tokens)
            lines.append(
                f"{row.space_id},{row.bucket},{row.result.effect_size!r},{dropped}"
            )
        else:
            lines.append(f"{row.space_id},{row.bucket},failed: {row.error},")
    if batch.mean_effect_size is not None:
        lines.append(f"mean,,{batch.mean_effect_size!r},")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_weat_json(batch: WeatBatch, path: str | Path) -> None:
    payload = {
        "rows": [
            {
                "space": row.space_id,
                "bucket": row.bucket,
                "effect_size": (
                    row.result.effect_size if row.result is not None else None
                ),
                "dropped": (
                    list(row.result.dropped_tokens)
                    if row.result is not None
                    else []
                ),
                "error": row.error,
            }
            for row in batch.rows
        ],
        "mean_effect_size": batch.mean_effect_size,
        "aggregated_over": list(batch.aggregated_over),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
