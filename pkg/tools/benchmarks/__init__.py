"""Performance benchmarking tools for Optional Doob Core."""

from .benchmark import Benchmark, BenchmarkResult

__all__ = ["Benchmark", "BenchmarkResult"]
