#!/usr/bin/env python3
"""Throughput comparison of the two sampling kernels.

Runs the compiled kernel (when built) and the numpy fallback over the same
counter ranges, checks they produce bit-identical counts, and reports
samples/second plus the speedup.  Usage::

    python benchmarks/bench_montecarlo.py [--samples N] [--seed S] [MODEL...]

Without MODEL arguments both bundled fixtures are measured.
"""

from __future__ import annotations

import argparse
import pathlib
import sys
import time

import numpy as np

from goalrisk import GoalModel, parse
from goalrisk.montecarlo import _ckernel, _kernel_py
from goalrisk.montecarlo._program import Program, compile_program

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
DEFAULT_MODELS = [REPO_ROOT / "fixtures" / "s3.gm", REPO_ROOT / "fixtures" / "ddp.gm"]


def load(path: pathlib.Path) -> GoalModel:
    result = parse(path.read_text(encoding="utf-8"))
    if not isinstance(result, GoalModel):
        raise SystemExit(f"{path}: not a valid model")
    return result


def run_numpy(program: Program, seed: int, n: int) -> np.ndarray:
    return _kernel_py.count_range(program, seed, 0, n)


def run_compiled(program: Program, seed: int, n: int) -> np.ndarray:
    return np.asarray(
        _ckernel.count_range(
            program.op,
            program.arg_off,
            program.args,
            program.arg_sites,
            program.node_site,
            program.site_thresholds,
            seed,
            0,
            n,
        )
    )


def timed(fn, program: Program, seed: int, n: int) -> tuple[float, np.ndarray]:
    fn(program, seed, min(n, 1000))  # warm up
    start = time.perf_counter()
    counts = fn(program, seed, n)
    return time.perf_counter() - start, counts


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("models", nargs="*", type=pathlib.Path, default=DEFAULT_MODELS)
    ap.add_argument("--samples", type=int, default=1_000_000, metavar="N")
    ap.add_argument("--seed", type=int, default=42, metavar="S")
    args = ap.parse_args(argv)

    for path in args.models:
        model = load(path)
        program = compile_program(model)
        print(
            f"{path.name}: {program.n_slots} nodes, {program.n_sites} sites, "
            f"{args.samples} samples"
        )
        np_time, np_counts = timed(run_numpy, program, args.seed, args.samples)
        print(f"  numpy     {np_time:8.3f}s  {args.samples / np_time:12,.0f} samples/s")
        if _ckernel is None:
            print("  compiled  (extension not built)")
            continue
        cy_time, cy_counts = timed(run_compiled, program, args.seed, args.samples)
        print(f"  compiled  {cy_time:8.3f}s  {args.samples / cy_time:12,.0f} samples/s")
        if not np.array_equal(np_counts, cy_counts):
            print("  MISMATCH: kernels disagree", file=sys.stderr)
            return 1
        print(f"  identical counts; speedup x{np_time / cy_time:.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
