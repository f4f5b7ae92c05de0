#!/usr/bin/env python3
"""Evaluation-time scaling over synthetic documents: prints per-size timings
and the fitted log-log slope for a fixed ten-node query.

Usage: python scripts/scaling_experiment.py [--sizes 250,500,1000,2000,4000]
"""

import argparse
import math
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from equix.evaluator import query_evaluate
from equix.query import translate
from equix.synth import scaling_document, scaling_query


def fit_slope(xs, ys):
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    n = len(xs)
    mx, my = sum(lx) / n, sum(ly) / n
    num = sum((a - mx) * (b - my) for a, b in zip(lx, ly))
    den = sum((a - mx) ** 2 for a in lx)
    return num / den


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="250,500,1000,2000,4000")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    aq = translate(scaling_query())
    print(f"{'target':>8} {'nodes':>8} {'best (ms)':>10}")
    measured = []
    for target in sizes:
        doc = scaling_document(random.Random(target), target)
        best = min(_time_once(doc, aq) for _ in range(args.repeats))
        measured.append((len(doc), best))
        print(f"{target:>8} {len(doc):>8} {best * 1000:>10.3f}")
    slope = fit_slope([n for n, _ in measured], [t for _, t in measured])
    print(f"\nlog-log slope: {slope:.3f}")
    return 0


def _time_once(doc, aq) -> float:
    t0 = time.perf_counter()
    query_evaluate(doc, aq)
    return time.perf_counter() - t0


if __name__ == "__main__":
    sys.exit(main())
