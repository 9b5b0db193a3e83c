#!/usr/bin/env python3
"""Benchmark the sentence-diff kernels: compiled extension vs pure Python.

Builds a randomized corpus of draft pairs (the same shape the acceptance
suite uses: up to 200 sentences per draft, mostly small with a large tail),
then times the LCS pair-matching kernel of every importable backend on the
identical workload and cross-checks that their outputs agree pair-for-pair.
Finally the end-to-end diff (``compute_diff`` on the selected backend) is
timed on the same corpus.

Exit status is nonzero when the selected backend's end-to-end run exceeds
the acceptance budget (60 s for the full 1,000-pair workload, prorated for
smaller ``--pairs`` runs).

Usage:
    python3 benchmarks/bench_diff.py [--pairs N] [--seed N]
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from redpen._native import BACKEND_NAME, available_backends
from redpen.anchoring import _diff_units, compute_diff

FULL_WORKLOAD_PAIRS = 1_000
FULL_WORKLOAD_BUDGET_S = 60.0

_POOL = [
    f"Point {i} says {adj} things about topic {i % 7}."
    for i, adj in enumerate(
        [
            "useful", "vague", "strong", "weak", "clear", "odd", "bold",
            "subtle", "plain", "sharp", "broad", "narrow", "fresh", "stale",
            "firm", "loose", "quick", "slow", "deep", "flat", "wide", "thin",
            "warm", "cold", "new", "old", "fair", "harsh", "calm", "loud",
        ]
    )
]


def _random_doc(rng: random.Random) -> str:
    bucket = rng.random()
    if bucket < 0.6:
        n = rng.randrange(0, 51)
    elif bucket < 0.9:
        n = rng.randrange(51, 121)
    else:
        n = rng.randrange(121, 201)
    out = ""
    for i in range(n):
        sep = rng.choice([" ", "  ", "\n", "\n\n"]) if i else ""
        out += sep + rng.choice(_POOL)
    return out


def _mutate(rng: random.Random, text: str) -> str:
    sentences = [u.strip() for u, _ in _diff_units(text) if u.strip()]
    for _ in range(rng.randrange(0, max(2, len(sentences) // 3) + 1)):
        roll = rng.random()
        if roll < 0.34 and sentences:
            sentences.pop(rng.randrange(len(sentences)))
        elif roll < 0.67:
            sentences.insert(rng.randrange(len(sentences) + 1), rng.choice(_POOL))
        elif sentences:
            sentences[rng.randrange(len(sentences))] = rng.choice(_POOL)
    return " ".join(sentences)


def build_corpus(pairs: int, seed: int) -> list[tuple[list[str], list[str], str, str]]:
    rng = random.Random(seed)
    corpus = []
    for _ in range(pairs):
        first = _random_doc(rng)
        final = _mutate(rng, first) if rng.random() < 0.8 else _random_doc(rng)
        corpus.append((
            [u for u, _ in _diff_units(first)],
            [u for u, _ in _diff_units(final)],
            first,
            final,
        ))
    return corpus


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=FULL_WORKLOAD_PAIRS,
                        help="number of draft pairs (default: %(default)s)")
    parser.add_argument("--seed", type=int, default=0xD1FF,
                        help="corpus seed (default: %(default)s)")
    args = parser.parse_args(argv)

    print(f"building corpus: {args.pairs} pairs, seed {args.seed} ...")
    corpus = build_corpus(args.pairs, args.seed)
    total_units = sum(len(xs) + len(ys) for xs, ys, _, _ in corpus)
    print(f"corpus ready: {total_units} sentence units total\n")

    backends = available_backends()
    kernel_times: dict[str, float] = {}
    reference: list[list[tuple[int, int]]] | None = None
    reference_name = ""
    for name, backend in sorted(backends.items()):
        start = time.perf_counter()
        results = [backend.lcs_match_pairs(xs, ys) for xs, ys, _, _ in corpus]
        kernel_times[name] = time.perf_counter() - start
        if reference is None:
            reference, reference_name = results, name
        elif results != reference:
            bad = next(i for i, (r, ref) in enumerate(zip(results, reference)) if r != ref)
            print(f"FAIL: backends {name!r} and {reference_name!r} disagree on pair {bad}")
            return 2

    width = max(len(n) for n in kernel_times)
    print(f"kernel (lcs_match_pairs), {args.pairs} pairs:")
    baseline = kernel_times.get("pure")
    for name, seconds in sorted(kernel_times.items(), key=lambda kv: kv[1]):
        note = ""
        if baseline is not None and name != "pure" and seconds > 0:
            note = f"  ({baseline / seconds:.1f}x vs pure)"
        print(f"  {name:<{width}}  {seconds:8.3f}s{note}")
    if len(backends) > 1:
        print(f"  outputs identical across {len(backends)} backends")
    else:
        print("  (compiled extension not built; only the pure backend ran)")

    start = time.perf_counter()
    for _, _, first, final in corpus:
        compute_diff(first, final)
    e2e = time.perf_counter() - start
    budget = FULL_WORKLOAD_BUDGET_S * args.pairs / FULL_WORKLOAD_PAIRS
    verdict = "within" if e2e < budget else "OVER"
    print(f"\nend-to-end compute_diff on selected backend ({BACKEND_NAME}): "
          f"{e2e:.3f}s — {verdict} the {budget:.0f}s budget")
    return 0 if e2e < budget else 1


if __name__ == "__main__":
    sys.exit(main())
