"""Differential evolution with segment (exponential) crossover."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    Candidate,
    Evaluator,
    InvalidConfig,
    Objective,
    Population,
    RandomStream,
    RunTrace,
    SearchSpace,
    StopCriteria,
    StopSearch,
    UnsupportedSpace,
    clamp,
    sample_uniform,
)

RAND1 = "rand1"
BEST1_GREEDY = "best1-greedy"


@dataclass(frozen=True)
class DeConfig:
    """``greediness`` is the pull toward the generation best in the
    ``best1-greedy`` scheme; None means "same as diff_weight"."""

    pop_size: int = 50
    diff_weight: float = 0.5
    greediness: Optional[float] = None
    crossover_prob: float = 0.9
    scheme: str = RAND1

    def __post_init__(self):
        if self.pop_size < 4:
            raise InvalidConfig("pop_size must be >= 4")
        if self.diff_weight <= 0:
            raise InvalidConfig("diff_weight must be positive")
        if self.greediness is not None and self.greediness < 0:
            raise InvalidConfig("greediness must be nonnegative")
        if not 0.0 <= self.crossover_prob < 1.0:
            raise InvalidConfig("crossover_prob must lie in [0, 1)")
        if self.scheme not in (RAND1, BEST1_GREEDY):
            raise InvalidConfig(f"unknown DE scheme {self.scheme!r}")

    @property
    def lam(self) -> float:
        return self.diff_weight if self.greediness is None else self.greediness

    def check_space(self, space: SearchSpace) -> None:
        if space.is_binary:
            raise UnsupportedSpace("DE is defined for continuous boxes only")


def rand1(x_r1, x_r2, x_r3, f: float) -> np.ndarray:
    return x_r1 + f * (x_r2 - x_r3)


def best1_greedy(x_i, x_best, x_r2, x_r3, lam: float, f: float) -> np.ndarray:
    return x_i + lam * (x_best - x_i) + f * (x_r2 - x_r3)


def _distinct_indices(n: int, exclude: int, k: int, rng: RandomStream) -> list[int]:
    chosen: list[int] = []
    while len(chosen) < k:
        r = int(rng.integers(0, n - 1))
        if r != exclude and r not in chosen:
            chosen.append(r)
    return chosen


def de_mutate(pop: Population, i: int, best: Candidate, cfg: DeConfig, rng: RandomStream) -> np.ndarray:
    """Trial vector for slot ``i``; not clamped."""
    n = len(pop)
    if n < 4:
        raise InvalidConfig("DE mutation needs at least 4 population members")
    if cfg.scheme == RAND1:
        r1, r2, r3 = _distinct_indices(n, i, 3, rng)
        return rand1(pop[r1].values, pop[r2].values, pop[r3].values, cfg.diff_weight)
    r2, r3 = _distinct_indices(n, i, 2, rng)
    return best1_greedy(pop[i].values, best.values, pop[r2].values, pop[r3].values,
                        cfg.lam, cfg.diff_weight)


def sample_segment_length(crossover_prob: float, d: int, rng: RandomStream) -> int:
    length = 1
    while length < d and rng.random() < crossover_prob:
        length += 1
    return length


def segment_positions(n: int, length: int, d: int) -> np.ndarray:
    """0-based positions n, n+1, ..., n+L-1 (1-based, wrapping modulo d)."""
    return (n - 1 + np.arange(length)) % d


def de_crossover(target: np.ndarray, trial: np.ndarray, n: int, length: int) -> np.ndarray:
    d = len(target)
    if not (1 <= n <= d and 1 <= length <= d):
        raise ValueError(f"need 1 <= n <= d and 1 <= L <= d, got n={n}, L={length}, d={d}")
    u = np.array(target, dtype=float, copy=True)
    pos = segment_positions(n, length, d)
    u[pos] = trial[pos]
    return u


def de_select(current: Candidate, trial: Candidate) -> Candidate:
    if current.loss is None or trial.loss is None:
        raise ValueError("de_select needs evaluated candidates")
    return trial if trial.loss < current.loss else current


def de_run(objective: Objective, space: SearchSpace, cfg: DeConfig, criteria: StopCriteria,
           rng: RandomStream, callback: Optional[Callable[[Population], None]] = None) -> RunTrace:
    """Run DE. Per slot the draw order is: mutation indices, start n, length L.

    Trial vectors are built from the whole current generation and the
    generation best is frozen for the sweep; the greedy replacements take
    effect together at the end of the generation.  ``callback`` receives the
    population after every generation.
    """
    cfg.check_space(space)
    ev = Evaluator(objective, criteria)
    reason = ""
    d = space.dim
    try:
        pop = Population([sample_uniform(space, rng) for _ in range(cfg.pop_size)])
        ev.evaluate_all(pop)
        while True:
            if callback is not None:
                callback(pop)
            reason = ev.end_iteration()
            if reason:
                break
            best = pop.best()
            nxt = list(pop.members)
            for i in range(cfg.pop_size):
                v = de_mutate(pop, i, best, cfg, rng)
                n = int(rng.integers(1, d))
                length = sample_segment_length(cfg.crossover_prob, d, rng)
                u = clamp(space, de_crossover(pop[i].values, v, n, length))
                nxt[i] = de_select(pop[i], ev(Candidate(u)))
            pop = Population(nxt)
    except StopSearch as stop:
        reason = stop.reason
    return ev.finish(rng, "de", reason)
