"""Benchmark objectives with their conventional domains and known minima."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import BINARY, CONTINUOUS, SearchSpace


def sphere(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x))


def rosenbrock(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rastrigin(x):
    x = np.asarray(x, dtype=float)
    return float(10.0 * len(x) + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def ackley(x):
    x = np.asarray(x, dtype=float)
    d = len(x)
    return float(-20.0 * np.exp(-0.2 * np.sqrt(np.sum(x * x) / d))
                 - np.exp(np.sum(np.cos(2.0 * np.pi * x)) / d) + 20.0 + np.e)


def onemax(bits):
    bits = np.asarray(bits)
    return float(len(bits) - np.sum(bits))


@dataclass(frozen=True)
class BenchmarkFunction:
    name: str
    fn: Callable[[np.ndarray], float]
    space_kind: str
    default_bounds: tuple = (None, None)
    minimizer: Callable[[int], np.ndarray] = None

    def space(self, dim: int, lower=None, upper=None) -> SearchSpace:
        if self.space_kind == BINARY:
            return SearchSpace.binary(dim)
        lo = self.default_bounds[0] if lower is None else lower
        hi = self.default_bounds[1] if upper is None else upper
        return SearchSpace.box(lo, hi, dim)

    def known_minimum(self, dim: int) -> tuple[np.ndarray, float]:
        x = self.minimizer(dim)
        return x, 0.0

    def __call__(self, x) -> float:
        return self.fn(x)


BENCHMARKS = {
    b.name: b
    for b in (
        BenchmarkFunction("sphere", sphere, CONTINUOUS, (-5.12, 5.12), lambda d: np.zeros(d)),
        BenchmarkFunction("rosenbrock", rosenbrock, CONTINUOUS, (-2.048, 2.048), lambda d: np.ones(d)),
        BenchmarkFunction("rastrigin", rastrigin, CONTINUOUS, (-5.12, 5.12), lambda d: np.zeros(d)),
        BenchmarkFunction("ackley", ackley, CONTINUOUS, (-32.768, 32.768), lambda d: np.zeros(d)),
        BenchmarkFunction("onemax", onemax, BINARY, (None, None), lambda d: np.ones(d, dtype=np.int64)),
    )
}


def get_benchmark(name: str) -> BenchmarkFunction:
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}") from None


def eval_benchmark(name: str, x) -> float:
    return get_benchmark(name)(x)
