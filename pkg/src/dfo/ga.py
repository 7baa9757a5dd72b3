"""Generational genetic algorithm for binary and real-coded search spaces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .core import (
    Candidate,
    EmptyPopulation,
    Evaluator,
    InvalidConfig,
    Objective,
    Population,
    RandomStream,
    RunTrace,
    SearchSpace,
    StopCriteria,
    StopSearch,
    clamp,
)

UNIFORM = "uniform"


@dataclass(frozen=True)
class GaConfig:
    """GA hyperparameters.

    ``crossover_points`` is the number k of cut points, or ``"uniform"`` for
    per-position swapping.  ``init_mean``/``init_stddev`` default to the box
    center and a sixth of its width; ``real_mutation_stddev`` defaults to a
    tenth of the width.  Both defaults are per coordinate.
    """

    pop_size: int = 50
    mutation_prob: float = 0.05
    crossover_points: Union[int, str] = 1
    init_bernoulli_p: float = 0.5
    init_mean: Optional[float] = None
    init_stddev: Optional[float] = None
    real_mutation_stddev: Optional[float] = None
    elitism: int = 1

    def __post_init__(self):
        if self.pop_size < 2 or self.pop_size % 2:
            raise InvalidConfig("pop_size must be even and >= 2")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise InvalidConfig("mutation_prob must lie in [0, 1]")
        if not 0.0 <= self.init_bernoulli_p <= 1.0:
            raise InvalidConfig("init_bernoulli_p must lie in [0, 1]")
        if self.crossover_points != UNIFORM and (
            not isinstance(self.crossover_points, (int, np.integer)) or self.crossover_points < 1
        ):
            raise InvalidConfig("crossover_points must be a positive integer or 'uniform'")
        if self.init_stddev is not None and self.init_stddev <= 0:
            raise InvalidConfig("init_stddev must be positive")
        if self.real_mutation_stddev is not None and self.real_mutation_stddev <= 0:
            raise InvalidConfig("real_mutation_stddev must be positive")
        if not 0 <= self.elitism <= self.pop_size:
            raise InvalidConfig("elitism must lie in [0, pop_size]")

    def check_space(self, space: SearchSpace) -> None:
        if self.crossover_points != UNIFORM and self.crossover_points >= space.dim:
            raise InvalidConfig(
                f"crossover_points={self.crossover_points} needs dim > k, got dim={space.dim}")


def ga_init(space: SearchSpace, cfg: GaConfig, rng: RandomStream) -> Population:
    members = []
    for _ in range(cfg.pop_size):
        if space.is_binary:
            bits = (rng.random(space.dim) < cfg.init_bernoulli_p).astype(np.int64)
            members.append(Candidate(bits))
        else:
            mean = space.center if cfg.init_mean is None else cfg.init_mean
            std = space.width / 6.0 if cfg.init_stddev is None else cfg.init_stddev
            x = mean + std * rng.normal(space.dim)
            members.append(Candidate(clamp(space, x)))
    return Population(members)


def selection_probs(losses) -> np.ndarray:
    """Softmax of the negated losses, shifted by the minimum loss for stability."""
    losses = np.asarray(losses, dtype=float)
    if losses.size == 0:
        raise EmptyPopulation("no losses to select from")
    if not np.all(np.isfinite(losses)):
        raise ValueError("selection_probs needs finite losses")
    w = np.exp(-(losses - losses.min()))
    return w / w.sum()


def _draw_pair(probs: np.ndarray, rng: RandomStream) -> tuple[int, int]:
    i = rng.choice(probs)
    # redrawing until j != i has the same law as drawing from probs with i removed
    rest = probs.copy()
    rest[i] = 0.0
    if rest.sum() <= 0.0:
        rest = np.ones_like(probs)
        rest[i] = 0.0
    j = rng.choice(rest)
    return i, j


def select_parent_pairs(pop: Population, probs, rng: RandomStream) -> list[tuple[Candidate, Candidate]]:
    n = len(pop)
    if n < 2:
        raise EmptyPopulation("need at least two candidates to form a pair")
    probs = np.asarray(probs, dtype=float)
    pairs = []
    for _ in range(n // 2):
        i, j = _draw_pair(probs, rng)
        pairs.append((pop[i], pop[j]))
    return pairs


def crossover_at(a: np.ndarray, b: np.ndarray, cuts) -> tuple[np.ndarray, np.ndarray]:
    """Swap alternating segments. A cut ``c`` splits positions ``< c`` from ``>= c``."""
    d = len(a)
    seg = np.zeros(d, dtype=np.int64)
    for c in cuts:
        seg[c:] += 1
    swap = seg % 2 == 1
    return np.where(swap, b, a), np.where(swap, a, b)


def crossover(a: np.ndarray, b: np.ndarray, k: Union[int, str], rng: RandomStream):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("parents must have equal length")
    d = len(a)
    if k == UNIFORM:
        swap = rng.random(d) < 0.5
        return np.where(swap, b, a), np.where(swap, a, b)
    if not 1 <= k < d:
        raise InvalidConfig(f"k-point crossover needs 1 <= k < d, got k={k}, d={d}")
    # the d-1 gaps between positions are 1..d-1
    cuts = np.sort(rng.permutation(d - 1)[:k] + 1)
    return crossover_at(a, b, cuts)


def mutate(v: np.ndarray, cfg: GaConfig, space: SearchSpace, rng: RandomStream) -> np.ndarray:
    mask = rng.random(space.dim) < cfg.mutation_prob
    out = np.array(v, copy=True)
    if space.is_binary:
        out[mask] = 1 - out[mask]
        return out
    std = space.width * 0.1 if cfg.real_mutation_stddev is None else cfg.real_mutation_stddev
    noise = rng.normal(space.dim) * std
    out = out + np.where(mask, noise, 0.0)
    return clamp(space, out)


def ga_run(objective: Objective, space: SearchSpace, cfg: GaConfig, criteria: StopCriteria,
           rng: RandomStream, callback: Optional[Callable[[Population], None]] = None) -> RunTrace:
    """Evolve a population generation by generation.

    Each generation: evaluate, compute selection probabilities, draw p/2
    parent pairs, cross and mutate them, and replace the population with the
    children, keeping the ``elitism`` best parents unchanged.  ``callback``
    receives the evaluated, sorted population after every generation.
    """
    cfg.check_space(space)
    ev = Evaluator(objective, criteria)
    reason = ""
    pop = ga_init(space, cfg, rng)
    try:
        while True:
            ev.evaluate_all(pop)
            pop.sort()
            if callback is not None:
                callback(pop)
            reason = ev.end_iteration()
            if reason:
                break
            probs = selection_probs(pop.losses())
            children = []
            for a, b in select_parent_pairs(pop, probs, rng):
                x, y = crossover(a.values, b.values, cfg.crossover_points, rng)
                children.append(Candidate(mutate(x, cfg, space, rng)))
                children.append(Candidate(mutate(y, cfg, space, rng)))
            elites = [m.copy() for m in pop.members[:cfg.elitism]]
            pop = Population(elites + children[:cfg.pop_size - cfg.elitism])
    except StopSearch as stop:
        reason = stop.reason
    return ev.finish(rng, "ga", reason)
