"""Compare the two SGNS kernels on a synthetic corpus.

Trains the same corpus with the compiled kernel and the numpy fallback
and prints each kernel's wall time and throughput along with its final
epoch loss, so a slowdown or a numerical divergence between them is
visible at a glance. Token frequencies follow a rough power law to keep the noise
table and subsampling paths realistic.

Run from the repository root:

    python3 benchmarks/bench_sgns.py
    python3 benchmarks/bench_sgns.py --sentences 20000 --dim 100
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from diachron.embed.sgns import SgnsConfig, train_sgns


def synthetic_sentences(
    n_sentences: int, length: int, vocab_size: int, seed: int
) -> list[list[str]]:
    rng = np.random.default_rng(seed)
    tokens = np.array([f"w{i}" for i in range(vocab_size)])
    weights = 1.0 / np.arange(1, vocab_size + 1)
    probabilities = weights / weights.sum()
    draws = rng.choice(vocab_size, size=(n_sentences, length), p=probabilities)
    return [list(tokens[row]) for row in draws]


def bench_kernel(
    kernel: str, sentences: list[list[str]], config: SgnsConfig
) -> dict | None:
    try:
        started = time.perf_counter()
        space = train_sgns(sentences, config, kernel=kernel)
        elapsed = time.perf_counter() - started
    except ImportError:
        return None
    corpus_words = space.training_config["corpus_words"]
    losses = space.training_config["epoch_mean_loss"]
    return {
        "seconds": elapsed,
        "words_per_second": corpus_words * config.epochs / elapsed,
        "final_loss": losses[-1] if losses else float("nan"),
        "vocab": len(space.vocab),
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sentences", type=int, default=8000)
    parser.add_argument("--length", type=int, default=12)
    parser.add_argument("--vocab", type=int, default=2000)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    sentences = synthetic_sentences(
        args.sentences, args.length, args.vocab, args.seed
    )
    config = SgnsConfig(
        dim=args.dim,
        window=5,
        negatives=5,
        epochs=args.epochs,
        initial_lr=0.025,
        min_count=1,
        subsample_t=1e-3,
        seed=args.seed,
    )
    total_words = args.sentences * args.length
    print(
        f"corpus: {args.sentences} sentences, {total_words} words, "
        f"vocab {args.vocab}, dim {args.dim}, {args.epochs} epochs"
    )

    results = {}
    for kernel in ("cython", "numpy"):
        outcome = bench_kernel(kernel, sentences, config)
        if outcome is None:
            print(f"{kernel:>7}: unavailable (extension not built)")
            continue
        results[kernel] = outcome
        print(
            f"{kernel:>7}: {outcome['seconds']:8.2f}s  "
            f"{outcome['words_per_second']:12.0f} words/s  "
            f"final loss {outcome['final_loss']:.6f}  "
            f"vocab {outcome['vocab']}"
        )

    if len(results) == 2:
        ratio = (
            results["numpy"]["seconds"] / results["cython"]["seconds"]
        )
        print(f"speedup: cython is {ratio:.1f}x faster than numpy here")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
