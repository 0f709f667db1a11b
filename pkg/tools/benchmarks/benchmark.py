#!/usr/bin/env python3
"""
Performance Benchmark Tool - Optional Doob Core

Measures and reports timings for:
- Regularity test and decomposition on random instances
- Cone solver on random moment systems
- G0 solution families per level
- A full harness run
- The ratio-identity sweep (target under 5 s) and the solver
  completeness sweep (target under 10 s)

Usage:
    python tools/benchmarks/benchmark.py [--full] [--seed N]

Options:
    --full    Run comprehensive benchmarks (deeper trees, more repetitions)
"""

import argparse
import gc
import statistics
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

import numpy as np

from optional_doob import (
    ConeSolver,
    ConeSystem,
    LemmaHarness,
    d1_instance,
    decompose,
    solve_g0,
    verify_lemmas,
)
from optional_doob.config import Config, HarnessConfig
from optional_doob.exceptions import DoobError
from optional_doob.instances import random_instance, random_supermartingale


@dataclass
class BenchmarkResult:
    """Results from a benchmark run."""
    name: str
    iterations: int
    total_time_ms: float
    avg_time_ms: float
    min_time_ms: float
    max_time_ms: float
    std_dev_ms: float
    errors: int = 0
    details: dict = field(default_factory=dict)

    def __str__(self) -> str:
        extra = "".join(f"\n  {k}: {v}" for k, v in self.details.items())
        return (
            f"{self.name}:\n"
            f"  Iterations: {self.iterations}\n"
            f"  Total time: {self.total_time_ms:.1f}ms\n"
            f"  Avg: {self.avg_time_ms:.2f}ms | Min: {self.min_time_ms:.2f}ms | Max: {self.max_time_ms:.2f}ms\n"
            f"  Std Dev: {self.std_dev_ms:.2f}ms\n"
            f"  Errors: {self.errors}"
            f"{extra}"
        )


class Benchmark:
    """Performance benchmark suite."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.results: list[BenchmarkResult] = []

    def _time(self, name: str, cases: list[Callable[[], object]], **details) -> BenchmarkResult:
        times_ms = []
        errors = 0
        for case in cases:
            gc.collect()
            start = time.perf_counter()
            try:
                case()
            except DoobError:
                # Not-regular processes and infeasible systems are expected outcomes
                errors += 1
            times_ms.append((time.perf_counter() - start) * 1000)

        result = BenchmarkResult(
            name=name,
            iterations=len(times_ms),
            total_time_ms=sum(times_ms),
            avg_time_ms=statistics.mean(times_ms) if times_ms else 0,
            min_time_ms=min(times_ms) if times_ms else 0,
            max_time_ms=max(times_ms) if times_ms else 0,
            std_dev_ms=statistics.stdev(times_ms) if len(times_ms) > 1 else 0,
            errors=errors,
            details=details,
        )
        self.results.append(result)
        return result

    def run_decomposition_benchmark(self, branching: list[int], k: int, iterations: int) -> BenchmarkResult:
        """Time decompose on random supermartingales over one tree shape."""
        rng = np.random.default_rng(self.seed)
        cases = []
        for _ in range(iterations):
            family = random_instance(rng, branching=branching, k=k)
            f = random_supermartingale(family, rng)
            cases.append(lambda family=family, f=f: decompose(family, f))
        return self._time(f"decompose {branching} k={k}", cases, errors_are="not regular")

    def run_cone_benchmark(self, m: int, iterations: int) -> BenchmarkResult:
        """Time the solution family of random 2 x m systems with interior targets."""
        rng = np.random.default_rng(self.seed)
        solver = ConeSolver()
        cases = []
        for _ in range(iterations):
            vectors = rng.uniform(0.05, 1.0, size=(2, m))
            system = ConeSystem(vectors, vectors @ rng.uniform(0.1, 1.0, size=m))
            cases.append(lambda system=system: solver.solve(system))
        return self._time(f"cone solve 2x{m}", cases)

    def run_g0_benchmark(self, branching: list[int], k: int, iterations: int) -> BenchmarkResult:
        """Time solve_g0 at the deepest level."""
        rng = np.random.default_rng(self.seed)
        families = [random_instance(rng, branching=branching, k=k) for _ in range(iterations)]
        depth = len(branching)
        return self._time(
            f"g0 {branching} k={k}",
            [lambda family=family: solve_g0(family, depth) for family in families],
        )

    def run_harness_benchmark(self, branching: list[int], k: int, trials: int) -> BenchmarkResult:
        """Time one full harness run."""
        rng = np.random.default_rng(self.seed)
        family = random_instance(rng, branching=branching, k=k)
        config = Config(harness=HarnessConfig(seed=self.seed, trials=trials))
        return self._time(
            f"verify-lemmas {branching} k={k}",
            [lambda: verify_lemmas(family, config)],
            trials=trials,
        )

    def run_ratio_identity_sweep(self, families: int = 100, target_s: float = 5.0) -> BenchmarkResult:
        """Ratio and measure-change identities on random families, timed as one sweep."""
        rng = np.random.default_rng(self.seed)
        config = Config(harness=HarnessConfig(seed=self.seed))
        harnesses = [LemmaHarness(random_instance(rng), config) for _ in range(families)]

        def sweep():
            for harness in harnesses:
                harness.check_rn_ratio_identity()
                harness.check_measure_change_identity()

        result = self._time(f"ratio identities x{families}", [sweep], target_s=target_s)
        result.details["within_target"] = result.total_time_ms <= target_s * 1000
        return result

    def run_completeness_sweep(self, samples: int = 1000, target_s: float = 10.0) -> BenchmarkResult:
        """Solution-family completeness on the binary example, timed as one sweep."""
        config = Config(harness=HarnessConfig(seed=self.seed, completeness_samples=samples))
        harness = LemmaHarness(d1_instance(), config)
        result = self._time(
            f"solver completeness x{samples}",
            [harness.check_cone_solution_family],
            target_s=target_s,
        )
        result.details["within_target"] = result.total_time_ms <= target_s * 1000
        return result

    def print_summary(self):
        """Print summary of all benchmark results."""
        print("\n" + "=" * 70)
        print("  BENCHMARK SUMMARY")
        print("=" * 70)

        for result in self.results:
            print(f"\n{result}")

        print("\n" + "=" * 70)


def run_quick_benchmark(seed: int):
    """Run a quick benchmark suite."""
    bench = Benchmark(seed)

    print("\n" + "=" * 70)
    print("  Optional Doob Core - Performance Benchmark (Quick)")
    print("=" * 70)

    print("\n[1/5] Decomposition...")
    bench.run_decomposition_benchmark([2, 2], k=2, iterations=20)

    print("\n[2/5] Cone solver...")
    bench.run_cone_benchmark(m=4, iterations=50)

    print("\n[3/5] G0...")
    bench.run_g0_benchmark([2, 3], k=2, iterations=10)

    print("\n[4/5] Harness...")
    bench.run_harness_benchmark([2, 2], k=2, trials=10)

    print("\n[5/5] Timed sweeps...")
    bench.run_ratio_identity_sweep()
    bench.run_completeness_sweep()

    bench.print_summary()


def run_full_benchmark(seed: int):
    """Run comprehensive benchmark suite."""
    bench = Benchmark(seed)

    print("\n" + "=" * 70)
    print("  Optional Doob Core - Performance Benchmark (Full)")
    print("=" * 70)

    print("\n[1/5] Decomposition...")
    for branching in ([2, 2], [3, 3], [2, 2, 2], [3, 3, 3]):
        for k in (1, 2, 3):
            bench.run_decomposition_benchmark(list(branching), k=k, iterations=50)

    print("\n[2/5] Cone solver...")
    for m in (2, 4, 8, 16):
        bench.run_cone_benchmark(m=m, iterations=200)

    print("\n[3/5] G0...")
    for branching in ([2, 2], [3, 3], [2, 2, 2]):
        bench.run_g0_benchmark(list(branching), k=2, iterations=20)

    print("\n[4/5] Harness...")
    bench.run_harness_benchmark([2, 2], k=2, trials=50)
    bench.run_harness_benchmark([3, 2, 2], k=3, trials=50)

    print("\n[5/5] Timed sweeps...")
    bench.run_ratio_identity_sweep(families=500, target_s=25.0)
    bench.run_completeness_sweep(samples=5000, target_s=50.0)

    bench.print_summary()


def main():
    parser = argparse.ArgumentParser(description="Optional Doob Core Benchmark")
    parser.add_argument("--full", action="store_true", help="Run full benchmark suite")
    parser.add_argument("--seed", type=int, default=0, help="Seed for the random instances")
    args = parser.parse_args()

    if args.full:
        run_full_benchmark(args.seed)
    else:
        run_quick_benchmark(args.seed)


if __name__ == "__main__":
    main()
