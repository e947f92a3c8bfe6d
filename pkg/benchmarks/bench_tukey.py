"""Benchmark the permutation kernel: compiled extension vs numpy fallback.

Times ``max_stat_sample`` on a grid of matrix shapes with both backends,
checks that their outputs are bit-identical, and prints a comparison table.

Usage:
    python3 benchmarks/bench_tukey.py
    python3 benchmarks/bench_tukey.py --permutations 100000 --shapes 100x80
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from sigaudit._kernel import HAVE_NATIVE, backend_name, max_stat_sample

DEFAULT_SHAPES = ("2x50", "10x50", "25x100", "100x80")


def parse_shape(text: str) -> tuple[int, int]:
    try:
        runs, _, topics = text.partition("x")
        shape = (int(runs), int(topics))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RUNSxTOPICS, got {text!r}")
    if shape[0] < 2 or shape[1] < 1:
        raise argparse.ArgumentTypeError(f"need at least 2 runs and 1 topic, got {text!r}")
    return shape


def run_backend(values, permutations, seed, workers, force_fallback):
    """Time one kernel call, forcing the numpy path when asked."""
    saved = os.environ.pop("SIGAUDIT_FORCE_FALLBACK", None)
    if force_fallback:
        os.environ["SIGAUDIT_FORCE_FALLBACK"] = "1"
    try:
        start = time.perf_counter()
        sample = max_stat_sample(values, permutations, seed, workers=workers)
        return time.perf_counter() - start, sample
    finally:
        os.environ.pop("SIGAUDIT_FORCE_FALLBACK", None)
        if saved is not None:
            os.environ["SIGAUDIT_FORCE_FALLBACK"] = saved


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--permutations", type=int, default=20000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=0, help="threads for the compiled backend")
    parser.add_argument("--repeats", type=int, default=3, help="keep the best of N timings")
    parser.add_argument(
        "--shapes", type=parse_shape, nargs="+", default=[parse_shape(s) for s in DEFAULT_SHAPES],
        metavar="RUNSxTOPICS",
    )
    args = parser.parse_args(argv)

    print(f"backend available: {backend_name()}  permutations: {args.permutations}")
    if not HAVE_NATIVE:
        print("compiled extension not importable; timing the numpy fallback only")
    header = f"{'shape':>9} {'numpy':>10} {'native':>10} {'speedup':>8}  identical"
    print(header)
    print("-" * len(header))

    rng = np.random.default_rng(args.seed)
    for runs, topics in args.shapes:
        values = rng.random((runs, topics))
        fallback_t = min(
            run_backend(values, args.permutations, args.seed, args.workers, True)[0]
            for _ in range(args.repeats)
        )
        _, fallback_sample = run_backend(values, args.permutations, args.seed, args.workers, True)
        label = f"{runs}x{topics}"
        if HAVE_NATIVE:
            native_t = min(
                run_backend(values, args.permutations, args.seed, args.workers, False)[0]
                for _ in range(args.repeats)
            )
            _, native_sample = run_backend(values, args.permutations, args.seed, args.workers, False)
            same = "yes" if np.array_equal(fallback_sample, native_sample) else "NO"
            print(
                f"{label:>9} {fallback_t:>9.3f}s {native_t:>9.3f}s"
                f" {fallback_t / native_t:>7.1f}x  {same}"
            )
            if same != "yes":
                return 1
        else:
            print(f"{label:>9} {fallback_t:>9.3f}s {'-':>10} {'-':>8}  -")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
