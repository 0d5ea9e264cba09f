"""Compare the pure-Python and compiled expression-evaluation lanes.

Two workloads:

* raw: a bag of random compiled expression programs evaluated repeatedly
  against a fixed slot vector (the simulator's inner loop in isolation);
* sim: full matmul simulations end to end.

Usage: python benchmarks/bench_eval.py [--raw-iters N] [--sims N]
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from sectionhdl import evalcore, fresh_library, run
from sectionhdl.designs import get
from sectionhdl.evalcore.program import compile_expr
from sectionhdl.expr import Binary, Const, Kind, Mux, Ref, Signal, Unary

OPS = ["+", "-", "*", "&", "|", "^", "<<", ">>", "==", "<", ">="]


def random_expr(rng, pool, depth):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.6:
            return Ref(rng.choice(pool))
        return Const(32, rng.randrange(1 << 32))
    roll = rng.random()
    if roll < 0.75:
        return Binary(rng.choice(OPS), random_expr(rng, pool, depth - 1), random_expr(rng, pool, depth - 1))
    if roll < 0.85:
        return Unary(rng.choice(["~", "-"]), random_expr(rng, pool, depth - 1))
    cond = Binary("==", random_expr(rng, pool, depth - 1), random_expr(rng, pool, depth - 1))
    return Mux(cond, random_expr(rng, pool, depth - 1), random_expr(rng, pool, depth - 1))


def bench_raw(iterations: int) -> dict[str, float]:
    rng = random.Random(7)
    pool = [Signal(f"s{i}", 32, Kind.REG) for i in range(12)]
    slots = {s.name: i for i, s in enumerate(pool)}
    programs = [compile_expr(random_expr(rng, pool, 5), slots, {}) for _ in range(64)]
    values = [rng.randrange(1 << 32) for _ in pool]

    start = time.perf_counter()
    for _ in range(iterations):
        for prog in programs:
            evalcore.run_pure(prog, values, [], [], [])
    pure = time.perf_counter() - start

    timings = {"pure": pure}
    if evalcore.NATIVE_AVAILABLE:
        values_np = np.array(values, dtype=np.uint64)
        arena = np.zeros(1, dtype=np.uint64)
        off = np.zeros(1, dtype=np.int64)
        length = np.zeros(1, dtype=np.int64)
        stack = np.zeros(max(p.max_stack for p in programs) + 1, dtype=np.uint64)
        # Warm up (builds the numpy form of each program).
        for prog in programs:
            evalcore.run_native(prog, values_np, arena, off, length, stack)
        start = time.perf_counter()
        for _ in range(iterations):
            for prog in programs:
                evalcore.run_native(prog, values_np, arena, off, length, stack)
        timings["native"] = time.perf_counter() - start

        mismatch = sum(
            evalcore.run_pure(p, values, [], [], [])
            != evalcore.run_native(p, values_np, arena, off, length, stack)
            for p in programs
        )
        assert mismatch == 0, "lane disagreement"
    return timings


def bench_sim(sims: int) -> dict[str, float]:
    rng = random.Random(11)
    design = get("matmul")
    cases = [
        (
            [rng.randrange(0, 256) for _ in range(16)],
            [rng.randrange(0, 256) for _ in range(16)],
        )
        for _ in range(sims)
    ]
    timings = {}
    lanes = ["pure"] + (["native"] if evalcore.NATIVE_AVAILABLE else [])
    results = {}
    for lane in lanes:
        start = time.perf_counter()
        outs = []
        for a, b in cases:
            top = design.build({"N": 4, "Q": 4, "M": 4})
            report = run(top, stimuli={"fA": a, "fB": b}, max_cycles=10_000, backend=lane)
            outs.append(report.fifos["fC"])
        timings[lane] = time.perf_counter() - start
        results[lane] = outs
    if "native" in results:
        assert results["pure"] == results["native"], "lane disagreement"
    return timings


def report(title: str, timings: dict[str, float], unit_count: int, unit: str):
    print(f"\n{title}")
    for lane, seconds in timings.items():
        rate = unit_count / seconds
        print(f"  {lane:7} {seconds:8.3f} s   ({rate:,.0f} {unit}/s)")
    if "native" in timings:
        print(f"  speedup {timings['pure'] / timings['native']:.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--raw-iters", type=int, default=2000)
    parser.add_argument("--sims", type=int, default=30)
    args = parser.parse_args()

    if not evalcore.NATIVE_AVAILABLE:
        print("note: compiled kernel not built; benchmarking the pure lane only")
    raw = bench_raw(args.raw_iters)
    report(
        f"raw program evaluation ({args.raw_iters} x 64 programs)",
        raw,
        args.raw_iters * 64,
        "evals",
    )
    sim = bench_sim(args.sims)
    report(f"matmul 4x4 simulation ({args.sims} runs)", sim, args.sims, "sims")


if __name__ == "__main__":
    main()
