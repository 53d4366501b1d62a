#!/usr/bin/env python3
"""Regenerate the golden pipeline outputs under tests/golden/.

The count-based CSVs do not depend on the embedding kernel and live in
tests/golden/counts. The embedding-dependent CSVs (weat, neighbors) are
stored once per kernel under tests/golden/<kernel>. Run from the
repository root after any intentional output change:

    python3 tools/update_goldens.py

Embedding goldens are additionally tied to the build environment's
floating-point libraries; if they drift on a new toolchain, regenerate
and review the diff before committing.
"""

from __future__ import annotations

import argparse
import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent

COUNT_FILES = [
    "mpr.csv",
    "mbr.csv",
    "mentions.csv",
    "surnames.csv",
    "religion.csv",
    "amounts.csv",
]
EMBED_FILES = [
    "weat.csv",
    "neighbors/he.csv",
    "neighbors/she.csv",
    "neighbors/dowry.csv",
]
KERNELS = ["cython", "numpy"]


def emit(out_dir: Path) -> None:
    """Child mode: run the pipeline once with the suite's frozen config."""
    sys.path.insert(0, str(REPO / "tests"))
    from conftest import mini_run_config

    from diachron.pipeline import run_pipeline

    report = run_pipeline(mini_run_config(out_dir))
    if report.failed_stage is not None:
        raise SystemExit(
            f"stage {report.failed_stage} failed: {report.error}"
        )
    for name in COUNT_FILES + EMBED_FILES:
        if not (out_dir / name).is_file():
            raise SystemExit(f"expected output {name} is missing")
    print(f"kernel={report.kernel} seed={report.seed} ok")


def regenerate() -> None:
    golden = REPO / "tests" / "golden"
    with tempfile.TemporaryDirectory() as tmp:
        runs: dict[str, Path] = {}
        for kernel in KERNELS:
            out_dir = Path(tmp) / kernel
            env = dict(os.environ, DIACHRON_SGNS_KERNEL=kernel)
            subprocess.run(
                [sys.executable, __file__, "--emit", str(out_dir)],
                check=True,
                env=env,
                cwd=REPO,
            )
            runs[kernel] = out_dir
            dest = golden / kernel
            if dest.exists():
                shutil.rmtree(dest)
            for name in EMBED_FILES:
                target = dest / name
                target.parent.mkdir(parents=True, exist_ok=True)
                shutil.copyfile(out_dir / name, target)

        reference = runs[KERNELS[0]]
        for kernel, out_dir in runs.items():
            for name in COUNT_FILES:
                if (out_dir / name).read_bytes() != (
                    reference / name
                ).read_bytes():
                    raise SystemExit(
                        f"{name} differs between kernels "
                        f"{KERNELS[0]} and {kernel}; counts must not "
                        "depend on the embedding kernel"
                    )
        counts_dir = golden / "counts"
        if counts_dir.exists():
            shutil.rmtree(counts_dir)
        counts_dir.mkdir(parents=True)
        for name in COUNT_FILES:
            shutil.copyfile(reference / name, counts_dir / name)
    print(f"golden files written under {golden}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--emit", metavar="DIR", default=None)
    args = parser.parse_args()
    if args.emit:
        emit(Path(args.emit))
    else:
        regenerate()


if __name__ == "__main__":
    main()
