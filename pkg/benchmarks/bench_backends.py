"""Timing comparison: compiled kernels vs the numpy reference.

Each hot kernel is timed on representative workloads, then one full
Monte-Carlo scenario run is timed end to end on each backend.

Usage:
    python3 benchmarks/bench_backends.py [--repeat N]
"""

from __future__ import annotations

import argparse
import os
import statistics
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
SCENARIO = ROOT / "scenarios" / "three_segment.json"

COEFF_14IN = (
    3.0, 0.2, 0.05, 0.05, 9.81,
    0.0, 1.0,
    0.769206734239892, 0.769206734239892, 0.769206734239892,
    0.639, 5.0, 0.0,
)


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_workloads(mod):
    """Closures exercising each kernel of a backend module."""
    rng = np.random.default_rng(0)
    n = 100_000
    s = rng.uniform(0.0, 6.5, size=n)
    noise = rng.normal(scale=0.01, size=n)
    w = rng.random(n)
    w /= w.sum()
    lik = rng.random(n)
    expected = rng.uniform(0.02, 4.0, size=n)
    bounds = np.array([2.0, 4.5, 6.5])
    y0 = (0.0, 0.1, 0.05, 0.0, -0.02, 0.0)
    forces = (7.0, 7.2, 6.9)

    return {
        "rk4_advance (10 substeps)": lambda: mod.rk4_advance(y0, forces, COEFF_14IN, 1e-3, 10),
        f"shift_clamp ({n//1000}k)": lambda: mod.shift_clamp(s, 0.002, noise, 0.0, 6.5),
        f"ranges_to_next_feature ({n//1000}k)": lambda: mod.ranges_to_next_feature(s, bounds),
        f"sonar_likelihood ({n//1000}k)": lambda: mod.sonar_likelihood(
            1.5, False, False, expected, 0.01, 0.05, 0.02, 4.0
        ),
        f"weights_mul_norm ({n//1000}k)": lambda: mod.weights_mul_norm(w.copy(), lik),
        f"systematic_indices ({n//1000}k)": lambda: mod.systematic_indices(w, n, 0.5),
        f"occupied_bins ({n//1000}k)": lambda: mod.occupied_bins(s, w, 1e-9, 0.05, 6.5),
    }


def bench_kernels(repeat: int) -> None:
    from pipenav.kernels import pyref

    try:
        from pipenav.kernels import _native as native
    except ImportError:
        native = None

    print(f"{'kernel':<34} {'python':>12} {'native':>12} {'speedup':>9}")
    print("-" * 69)
    py_work = kernel_workloads(pyref)
    nat_work = kernel_workloads(native) if native is not None else None
    for name, fn in py_work.items():
        t_py = _time(fn, repeat)
        if nat_work is not None:
            t_nat = _time(nat_work[name], repeat)
            print(f"{name:<34} {t_py * 1e6:>10.1f}us {t_nat * 1e6:>10.1f}us "
                  f"{t_py / t_nat:>8.1f}x")
        else:
            print(f"{name:<34} {t_py * 1e6:>10.1f}us {'n/a':>12} {'':>9}")


def bench_full_run(repeat: int) -> None:
    print()
    print("full scenario run (three_segment.json, one seed) via the CLI:")
    for backend in ("python", "native"):
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            proc = subprocess.run(
                [sys.executable, "-m", "pipenav.cli", "simulate",
                 "--scenario", str(SCENARIO)],
                env=dict(os.environ, PIPENAV_BACKEND=backend),
                capture_output=True,
                text=True,
            )
            elapsed = time.perf_counter() - t0
            if proc.returncode != 0:
                print(f"  {backend:<8} unavailable: {proc.stderr.strip().splitlines()[-1]}")
                break
            times.append(elapsed)
        else:
            print(f"  {backend:<8} best {min(times):.2f} s   "
                  f"median {statistics.median(times):.2f} s   (includes interpreter startup)")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions (best-of)")
    args = parser.parse_args()
    bench_kernels(args.repeat)
    bench_full_run(max(3, min(args.repeat, 5)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
