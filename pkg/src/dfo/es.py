"""(mu/rho +, lambda) evolution strategy with a fixed Gaussian mutation shape."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    Candidate,
    DfoError,
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
    UnsupportedSpace,
    clamp,
    sample_uniform,
)
from .ga import selection_probs

PLUS = "plus"
COMMA = "comma"
DISCRETE = "discrete"
INTERMEDIATE = "intermediate"
WEIGHTED = "weighted"
FITNESS_BASED = "fitness-based"
FITNESS_INDEPENDENT = "fitness-independent"


class NotPositiveDefinite(DfoError, ValueError):
    pass


def log_weights(n: int) -> np.ndarray:
    """Rank weights proportional to ln(n+1) - ln(i), normalized to sum to 1."""
    w = np.log(n + 1) - np.log(np.arange(1, n + 1))
    return w / w.sum()


def sqrt_factor(cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(B, D) with cov = B diag(D)^2 B^T, from a symmetric eigendecomposition."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or not np.allclose(cov, cov.T, rtol=0, atol=1e-10):
        raise NotPositiveDefinite("covariance must be a symmetric square matrix")
    eigvals, basis = np.linalg.eigh((cov + cov.T) / 2.0)
    if not np.all(np.isfinite(eigvals)) or eigvals.min() <= 0.0:
        raise NotPositiveDefinite(f"covariance is not positive definite (min eigenvalue {eigvals.min()})")
    return basis, np.sqrt(eigvals)


@dataclass(frozen=True)
class Isotropic:
    """C = c * I."""
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidConfig("isotropic variance must be positive")

    def sample(self, d: int, rng: RandomStream) -> np.ndarray:
        return np.sqrt(self.c) * rng.normal(d)


@dataclass(frozen=True)
class Diagonal:
    """C = diag(sigma^2)."""
    sigma: tuple

    def __post_init__(self):
        if len(self.sigma) == 0 or min(self.sigma) <= 0:
            raise InvalidConfig("diagonal standard deviations must be positive")

    def sample(self, d: int, rng: RandomStream) -> np.ndarray:
        if len(self.sigma) != d:
            raise InvalidConfig(f"need {d} standard deviations, got {len(self.sigma)}")
        return np.asarray(self.sigma, dtype=float) * rng.normal(d)


@dataclass(frozen=True)
class FullCov:
    """Arbitrary symmetric positive definite C, sampled as A z with A = B D."""
    cov: np.ndarray = field(compare=False)

    def __post_init__(self):
        basis, scales = sqrt_factor(self.cov)
        object.__setattr__(self, "cov", np.array(self.cov, dtype=float))
        object.__setattr__(self, "_factor", basis * scales)

    def sample(self, d: int, rng: RandomStream) -> np.ndarray:
        if self.cov.shape[0] != d:
            raise InvalidConfig(f"covariance is {self.cov.shape[0]}x{self.cov.shape[0]}, need {d}")
        return self._factor @ rng.normal(d)


@dataclass(frozen=True)
class EsConfig:
    mu: int = 5
    rho: int = 2
    lam: int = 20
    mode: str = COMMA
    recombination: str = INTERMEDIATE
    weights: Optional[tuple] = None
    mutation: object = field(default_factory=lambda: Isotropic(0.01))
    mate_selection: str = FITNESS_INDEPENDENT

    def __post_init__(self):
        if self.mu < 1 or self.lam < 1:
            raise InvalidConfig("mu and lambda must be positive")
        if not 1 <= self.rho <= self.mu:
            raise InvalidConfig("rho must satisfy 1 <= rho <= mu")
        if self.mode not in (PLUS, COMMA):
            raise InvalidConfig(f"unknown selection mode {self.mode!r}")
        if self.mode == COMMA and self.mu > self.lam:
            raise InvalidConfig("comma selection needs mu <= lambda")
        if self.recombination not in (DISCRETE, INTERMEDIATE, WEIGHTED):
            raise InvalidConfig(f"unknown recombination {self.recombination!r}")
        if self.mate_selection not in (FITNESS_BASED, FITNESS_INDEPENDENT):
            raise InvalidConfig(f"unknown mate selection {self.mate_selection!r}")
        if not isinstance(self.mutation, (Isotropic, Diagonal, FullCov)):
            raise InvalidConfig("mutation must be Isotropic, Diagonal or FullCov")
        if self.weights is not None:
            check_weights(self.weights, self.rho)

    def recombination_weights(self) -> Optional[np.ndarray]:
        if self.recombination != WEIGHTED:
            return None
        return log_weights(self.rho) if self.weights is None else np.asarray(self.weights, dtype=float)

    def check_space(self, space: SearchSpace) -> None:
        if space.is_binary:
            raise UnsupportedSpace("ES needs a continuous box")


def check_weights(weights, n: int) -> None:
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise InvalidConfig(f"need {n} weights, got {w.size}")
    if np.any(w < 0) or np.any(np.diff(w) > 0) or abs(w.sum() - 1.0) > 1e-12:
        raise InvalidConfig("weights must be nonnegative, nonincreasing and sum to 1")


def recombine(parents: Sequence[np.ndarray], method: str, rng: RandomStream,
              weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Combine rho parents (best first, for the weighted method) into one vector."""
    if len(parents) == 0:
        raise EmptyPopulation("recombination needs at least one parent")
    mat = np.asarray(parents, dtype=float)
    if method == INTERMEDIATE:
        return mat.mean(axis=0)
    if method == WEIGHTED:
        if weights is None:
            weights = log_weights(len(mat))
        check_weights(weights, len(mat))
        return np.asarray(weights) @ mat
    if method == DISCRETE:
        pick = rng.integers(0, len(mat) - 1, size=mat.shape[1])
        return mat[pick, np.arange(mat.shape[1])]
    raise InvalidConfig(f"unknown recombination {method!r}")


def es_mutate(v: np.ndarray, shape, rng: RandomStream, space: Optional[SearchSpace] = None) -> np.ndarray:
    out = v + shape.sample(len(v), rng)
    return out if space is None else clamp(space, out)


def _pick_mates(parents: Population, cfg: EsConfig, rng: RandomStream) -> list[Candidate]:
    n = len(parents)
    if cfg.mate_selection == FITNESS_BASED:
        probs = selection_probs(parents.losses())
    else:
        probs = np.ones(n)
    picked = []
    for _ in range(cfg.rho):
        i = rng.choice(probs)
        picked.append(i)
        probs = probs.copy()
        probs[i] = 0.0
        if probs.sum() <= 0.0:
            probs = np.ones(n)
            probs[picked] = 0.0
    # best mate first; ties by pick order
    picked.sort(key=lambda i: parents[i].loss)
    return [parents[i] for i in picked]


def es_run(objective: Objective, space: SearchSpace, cfg: EsConfig, criteria: StopCriteria,
           rng: RandomStream, callback: Optional[Callable[[Population], None]] = None) -> RunTrace:
    """Generational ES loop.

    Parents start uniform in the box.  Each offspring draws its rho mates,
    recombines them (rank-weighted for the weighted method) and adds the
    configured Gaussian perturbation.  Environmental selection keeps the mu
    best of parents+offspring (plus) or of the offspring alone (comma), with
    ties broken by insertion order.  ``callback`` gets the new parent set.
    """
    cfg.check_space(space)
    ev = Evaluator(objective, criteria)
    weights = cfg.recombination_weights()
    reason = ""
    try:
        parents = Population([sample_uniform(space, rng) for _ in range(cfg.mu)])
        ev.evaluate_all(parents)
        parents.sort()
        while True:
            if callback is not None:
                callback(parents)
            reason = ev.end_iteration()
            if reason:
                break
            offspring = []
            for _ in range(cfg.lam):
                mates = _pick_mates(parents, cfg, rng)
                x = recombine([m.values for m in mates], cfg.recombination, rng, weights)
                child = ev(Candidate(es_mutate(x, cfg.mutation, rng, space)))
                offspring.append(child)
            pool = parents.members + offspring if cfg.mode == PLUS else offspring
            parents = Population(pool).sort()
            parents = Population(parents.members[:cfg.mu], sorted=True)
    except StopSearch as stop:
        reason = stop.reason
    return ev.finish(rng, "es", reason)
