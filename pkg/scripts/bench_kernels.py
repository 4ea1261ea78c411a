#!/usr/bin/env python3
"""Time the JIT-compiled kernels against their NumPy fallbacks.

The kernel implementation is chosen once at import time (see
progsim._kernels), so this script runs each path in its own subprocess:
one with PROGSIM_NO_NUMBA=1 and one without.  The parent merges the
timings into a side-by-side table.

    python3 scripts/bench_kernels.py                # default sizes
    python3 scripts/bench_kernels.py --rows 600 --cols 5000 --repeat 5
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

SRC = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src")


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=400,
                        help="documents in the pairwise benchmarks (default 400)")
    parser.add_argument("--cols", type=int, default=2000,
                        help="vocabulary size of the row matrix (default 2000)")
    parser.add_argument("--types", type=int, default=120,
                        help="word types per side in the transport benchmark "
                             "(default 120)")
    parser.add_argument("--repeat", type=int, default=3,
                        help="timed repetitions per kernel; best one counts "
                             "(default 3)")
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    return parser.parse_args(argv)


def bench_worker(args: argparse.Namespace) -> None:
    """Run inside one subprocess: time every kernel, print JSON."""
    import numpy as np

    from progsim import _kernels

    rng = np.random.default_rng(12345)
    M = rng.dirichlet(np.full(args.cols, 0.2), size=args.rows)
    Z = rng.standard_normal((args.rows, 200))
    w = rng.random(200) + 0.5
    p = rng.random(args.types) + 0.05
    q = rng.random(args.types) + 0.05
    p /= p.sum()
    q /= q.sum()
    va = rng.standard_normal((args.types, 8))
    vb = rng.standard_normal((args.types, 8))
    C = np.sqrt(((va[:, None, :] - vb[None, :, :]) ** 2).sum(axis=2))

    cases = {
        "pairwise_l1": lambda: _kernels.pairwise_l1(M),
        "pairwise_l2": lambda: _kernels.pairwise_l2(M),
        "pairwise_cosine": lambda: _kernels.pairwise_cosine(M),
        "pairwise_weighted_l1_mean": lambda: _kernels.pairwise_weighted_l1_mean(Z, w),
        "transport_simplex": lambda: _kernels.transport_simplex(p, q, C),
    }

    timings: dict[str, float] = {}
    for name, fn in cases.items():
        fn()  # warm-up; also pays the one-off JIT compilation cost
        best = min(_timed(fn) for _ in range(args.repeat))
        timings[name] = best
    print(json.dumps({"use_numba": _kernels.USE_NUMBA, "timings": timings}))


def _timed(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def run_path(no_numba: bool, argv: list[str]) -> dict:
    env = dict(os.environ)
    env["PROGSIM_NO_NUMBA"] = "1" if no_numba else "0"
    env["PYTHONPATH"] = SRC + os.pathsep + env.get("PYTHONPATH", "")
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--worker", *argv],
        env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = parse_args(argv)
    if args.worker:
        bench_worker(args)
        return 0

    passthrough = [a for a in argv if a != "--worker"]
    jit = run_path(no_numba=False, argv=passthrough)
    plain = run_path(no_numba=True, argv=passthrough)
    if not jit["use_numba"]:
        print("warning: numba path unavailable; both columns use the fallback",
              file=sys.stderr)

    print(f"matrix {args.rows} x {args.cols}, transport {args.types} x "
          f"{args.types}, best of {args.repeat}")
    header = f"{'kernel':<28}{'numba':>10}{'numpy':>10}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name in jit["timings"]:
        a = jit["timings"][name]
        b = plain["timings"][name]
        ratio = b / a if a > 0 else float("inf")
        print(f"{name:<28}{a:>9.4f}s{b:>9.4f}s{ratio:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
