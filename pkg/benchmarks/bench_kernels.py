#!/usr/bin/env python3
"""Benchmark the compiled loop kernels against the pure-numpy fallbacks.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 8,10,12] [--repeat 5]

Each kernel is run on the same random inputs under both implementations and
the best-of-``repeat`` wall time is reported side by side.  Run with
``LEXICHOICE_NO_NUMBA=1`` to confirm the package itself works without the
compiled path (this script always times both).
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from lexichoice import Lexicographic, materialize, make_universe
from lexichoice._kernels import LOOP_IMPLS, NUMPY_IMPLS, USE_NUMBA
from lexichoice.rules import PriorityOrdering, PriorityProfile


def random_profile(rng: random.Random, n: int) -> PriorityProfile:
    return PriorityProfile(
        tuple(
            PriorityOrdering(tuple(rng.sample(range(n), n))) for _ in range(n)
        )
    )


def make_inputs(rng: random.Random, n: int) -> dict:
    u = make_universe([f"x{i}" for i in range(n)])
    profile = random_profile(rng, n)
    rule = Lexicographic(profile)
    keys = rule.keys()
    table = materialize(rule, u).entries
    feas = np.ones(1 << n, dtype=np.bool_)
    # knock out a random down-closed chunk to keep the flex kernel honest
    banned = rng.randrange(1, 1 << n)
    for mask in range(1 << n):
        if mask & banned == banned:
            feas[mask] = False
    return {"keys": keys, "table": np.ascontiguousarray(table), "feas": feas}


def calls_for(name: str, n: int, inp: dict):
    if name == "cwlex_fill":
        return lambda impl: impl(
            n, inp["keys"], np.zeros((1 << n, n + 1), dtype=np.int64)
        )
    if name == "flex_fill":
        keys1 = np.ascontiguousarray(inp["keys"][:, 0, :])
        return lambda impl: impl(
            n, keys1, inp["feas"], np.zeros((1 << n, n + 1), dtype=np.int64)
        )
    if name in ("chosen_over_wit", "revealed_wit"):
        q = max(2, n // 2)
        return lambda impl: impl(
            n, inp["table"], q, np.zeros((n, n), dtype=np.int64)
        )
    if name == "gs_first_violation":
        return lambda impl: impl(n, inp["table"], np.full(4, -1, dtype=np.int64))
    if name == "path_independence_first":
        return lambda impl: impl(n, inp["table"], np.full(3, -1, dtype=np.int64))
    raise KeyError(name)


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="8,10,12", help="comma-separated n values")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = [int(x) for x in args.sizes.split(",")]
    rng = random.Random(args.seed)

    if not USE_NUMBA:
        print(
            "note: LEXICHOICE_NO_NUMBA is set; the 'loops' column runs "
            "uncompiled Python and will be slow"
        )
    header = f"{'kernel':<24} {'n':>3} {'loops':>12} {'numpy':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        inp = make_inputs(rng, n)
        for name in LOOP_IMPLS:
            call = calls_for(name, n, inp)
            loop_impl, numpy_impl = LOOP_IMPLS[name], NUMPY_IMPLS[name]
            call(loop_impl)  # warm-up (JIT compile)
            t_loop = best_time(lambda: call(loop_impl), args.repeat)
            t_np = best_time(lambda: call(numpy_impl), args.repeat)
            print(
                f"{name:<24} {n:>3} {t_loop * 1e3:>10.2f}ms {t_np * 1e3:>10.2f}ms "
                f"{t_np / t_loop:>7.1f}x"
            )


if __name__ == "__main__":
    main()
