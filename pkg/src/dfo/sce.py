"""Shuffled complex evolution with competitive complex evolution (CCE) inner loop."""

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
    sample_uniform,
)


@dataclass(frozen=True)
class SceConfig:
    num_complexes: int = 2          # p
    complex_size: int = 5           # m, at least dim + 1
    cce_parents: int = 3            # q, 2 <= q <= m
    cce_offspring_rounds: int = 2   # alpha
    cce_evolution_rounds: int = 2   # beta

    def __post_init__(self):
        if self.num_complexes < 1:
            raise InvalidConfig("num_complexes must be >= 1")
        if not 2 <= self.cce_parents <= self.complex_size:
            raise InvalidConfig("cce_parents must satisfy 2 <= q <= complex_size")
        if self.cce_offspring_rounds < 1 or self.cce_evolution_rounds < 1:
            raise InvalidConfig("alpha and beta must be >= 1")

    @property
    def sample_size(self) -> int:
        return self.num_complexes * self.complex_size

    def check_space(self, space: SearchSpace) -> None:
        if space.is_binary:
            raise UnsupportedSpace("SCE needs a continuous box")
        if self.complex_size < space.dim + 1:
            raise InvalidConfig(f"complex_size must be >= dim + 1 = {space.dim + 1}")


def partition_complexes(sorted_pop: Population, p: int, m: int) -> list[Population]:
    """Deal sorted ranks round-robin: complex k gets ranks k, k+p, k+2p, ..."""
    if len(sorted_pop) != p * m:
        raise ValueError(f"population of {len(sorted_pop)} cannot form {p} complexes of {m}")
    complexes = []
    for k in range(p):
        cx = Population(sorted_pop.members[k::p])
        cx.sort()
        complexes.append(cx)
    return complexes


def cce_sampling_probs(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("m must be >= 1")
    i = np.arange(1, m + 1)
    return 2.0 * (m + 1 - i) / (m * (m + 1))


def centroid(points: np.ndarray) -> np.ndarray:
    """Mean of all rows but the last (the worst point)."""
    return points[:-1].mean(axis=0)


def reflect(g: np.ndarray, worst: np.ndarray) -> np.ndarray:
    return 2.0 * g - worst


def contract(g: np.ndarray, worst: np.ndarray) -> np.ndarray:
    return (g + worst) / 2.0


def bounding_box(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return points.min(axis=0), points.max(axis=0)


def _uniform_in(lo: np.ndarray, hi: np.ndarray, rng: RandomStream) -> np.ndarray:
    return lo + rng.random(len(lo)) * (hi - lo)


def _pick_parents(q: int, m: int, rng: RandomStream) -> list[int]:
    probs = cce_sampling_probs(m)
    picked = []
    for _ in range(q):
        i = rng.choice(probs)
        picked.append(i)
        probs = probs.copy()
        probs[i] = 0.0
    return sorted(picked)


def cce_evolve(complex_: Population, cfg: SceConfig, space: SearchSpace, evaluate,
               rng: RandomStream) -> Population:
    """Evolve one sorted complex in place and return it.

    ``evaluate`` is the run's evaluator; every compared probe point costs
    one evaluation.  Draw order per internal round: the uniform point z for
    an infeasible reflection, then the uniform point z for a failed
    contraction.
    """
    members = complex_.members
    m = len(members)
    for _ in range(cfg.cce_evolution_rounds):
        idx = _pick_parents(cfg.cce_parents, m, rng)
        for _ in range(cfg.cce_offspring_rounds):
            idx.sort(key=lambda i: members[i].loss)
            u = np.array([members[i].values for i in idx])
            worst_slot = idx[-1]
            worst = members[worst_slot]
            lo, hi = bounding_box(np.array([c.values for c in members]))
            g = centroid(u)
            r = reflect(g, worst.values)
            if not space.contains(r):
                r = _uniform_in(lo, hi, rng)
            cand = evaluate(Candidate(r))
            if cand.loss < worst.loss:
                members[worst_slot] = cand
                continue
            cand = evaluate(Candidate(contract(g, worst.values)))
            if cand.loss < worst.loss:
                members[worst_slot] = cand
                continue
            members[worst_slot] = evaluate(Candidate(_uniform_in(lo, hi, rng)))
        complex_.sort()
    return complex_


def sce_run(objective: Objective, space: SearchSpace, cfg: SceConfig, criteria: StopCriteria,
            rng: RandomStream, callback: Optional[Callable[[Population], None]] = None) -> RunTrace:
    """Sample s = p*m points, then repeat partition, CCE per complex, merge and sort."""
    cfg.check_space(space)
    ev = Evaluator(objective, criteria)
    reason = ""
    try:
        pop = Population([sample_uniform(space, rng) for _ in range(cfg.sample_size)])
        ev.evaluate_all(pop)
        pop.sort()
        while True:
            complexes = partition_complexes(pop, cfg.num_complexes, cfg.complex_size)
            for cx in complexes:
                cce_evolve(cx, cfg, space, ev, rng)
            pop = Population([c for cx in complexes for c in cx])
            pop.sort()
            if callback is not None:
                callback(pop)
            reason = ev.end_iteration()
            if reason:
                break
    except StopSearch as stop:
        reason = stop.reason
    return ev.finish(rng, "sce", reason)
