"""Search spaces, candidates, seeded randomness, stop criteria and run traces.

Every optimizer in the package is written against the objects in this
module: an objective is any callable mapping a 1-d numpy array to a float,
and a run returns a :class:`RunTrace` recording each improvement of the
best-so-far loss together with the evaluation count at which it happened.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Objective = Callable[[np.ndarray], float]

CONTINUOUS = "continuous"
BINARY = "binary"

MAX_SEED = 2**64 - 1


class DfoError(Exception):
    """Base class for errors raised by the package."""


class InvalidSpace(DfoError, ValueError):
    pass


class UnsupportedSpace(DfoError, ValueError):
    """The operation or algorithm is not defined for this kind of space."""


class InvalidConfig(DfoError, ValueError):
    pass


class EmptyPopulation(DfoError, ValueError):
    pass


class NonFiniteLoss(DfoError, ArithmeticError):
    """The objective returned NaN or an infinity."""

    def __init__(self, values: np.ndarray, loss: float):
        self.values = np.array(values, copy=True)
        self.loss = loss
        super().__init__(f"objective returned {loss!r} at {self.values.tolist()}")


class StopSearch(Exception):
    """Raised inside a run when an evaluation-level stop criterion fires."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


@dataclass(frozen=True)
class SearchSpace:
    """Feasible region: a continuous box or the binary hypercube {0,1}^dim."""

    kind: str
    dim: int
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, BINARY):
            raise InvalidSpace(f"unknown space kind {self.kind!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidSpace(f"dim must be a positive integer, got {self.dim!r}")
        if self.kind == CONTINUOUS:
            if self.lower is None or self.upper is None:
                raise InvalidSpace("a continuous box needs lower and upper bounds")
            lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.dim,)).copy()
            hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.dim,)).copy()
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
                raise InvalidSpace("bounds must be finite")
            if np.any(lo >= hi):
                raise InvalidSpace("lower[j] < upper[j] must hold for every coordinate")
            lo.flags.writeable = False
            hi.flags.writeable = False
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        else:
            object.__setattr__(self, "lower", None)
            object.__setattr__(self, "upper", None)

    @classmethod
    def box(cls, lower, upper, dim: Optional[int] = None) -> "SearchSpace":
        if dim is None:
            dim = np.size(lower) if np.ndim(lower) else np.size(upper)
        return cls(CONTINUOUS, int(dim), lower, upper)

    @classmethod
    def binary(cls, dim: int) -> "SearchSpace":
        return cls(BINARY, int(dim))

    @property
    def is_binary(self) -> bool:
        return self.kind == BINARY

    @property
    def width(self) -> np.ndarray:
        if self.is_binary:
            raise UnsupportedSpace("binary space has no width")
        return self.upper - self.lower

    @property
    def center(self) -> np.ndarray:
        if self.is_binary:
            raise UnsupportedSpace("binary space has no center")
        return (self.lower + self.upper) / 2.0

    def contains(self, values) -> bool:
        v = np.asarray(values)
        if v.shape != (self.dim,):
            return False
        if self.is_binary:
            return bool(np.all((v == 0) | (v == 1)))
        return bool(np.all(v >= self.lower) and np.all(v <= self.upper))


@dataclass
class Candidate:
    values: np.ndarray
    loss: Optional[float] = None

    def copy(self) -> "Candidate":
        return Candidate(self.values.copy(), self.loss)

    @property
    def evaluated(self) -> bool:
        return self.loss is not None


class Population:
    """Ordered candidates; ``sorted`` is true only after :meth:`sort`."""

    def __init__(self, members: Sequence[Candidate] = (), sorted: bool = False):
        self.members = list(members)
        self.sorted = sorted
        if len({m.values.shape for m in self.members}) > 1:
            raise InvalidSpace("population members must share one dimension")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def sort(self) -> "Population":
        # stable: ties keep insertion order
        if any(m.loss is None for m in self.members):
            raise ValueError("cannot sort a population with unevaluated members")
        self.members.sort(key=lambda m: m.loss)
        self.sorted = True
        return self

    def losses(self) -> np.ndarray:
        return np.array([m.loss for m in self.members], dtype=float)

    def matrix(self) -> np.ndarray:
        return np.array([m.values for m in self.members])

    def best(self) -> Candidate:
        if not self.members:
            raise EmptyPopulation("empty population")
        if self.sorted:
            return self.members[0]
        return min(self.members, key=lambda m: m.loss)


class RandomStream:
    """Seeded random source shared by every stochastic operator of one run.

    Backed by numpy's PCG64 bit generator, whose output for a given seed is
    the same on every platform.  All draws of a run come from this single
    stream, in the order the algorithm documents.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed <= MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def random(self, size=None):
        """Uniform real(s) in [0, 1)."""
        return self._gen.random(size)

    def integers(self, a: int, b: int, size=None):
        """Uniform integer(s) in the closed range [a, b]."""
        return self._gen.integers(a, b, size=size, endpoint=True)

    def normal(self, size=None):
        """Standard normal deviate(s)."""
        return self._gen.standard_normal(size)

    def choice(self, probs: np.ndarray) -> int:
        """One index drawn from the discrete distribution ``probs``."""
        cdf = np.cumsum(probs)
        u = self._gen.random() * cdf[-1]
        i = int(np.searchsorted(cdf, u, side="right"))
        return min(i, len(probs) - 1)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


@dataclass(frozen=True)
class StopCriteria:
    max_evals: int = 100_000
    target_loss: Optional[float] = None
    max_iters: Optional[int] = None
    stall_iters: Optional[int] = None
    stall_tol: float = 0.0

    def __post_init__(self):
        if self.max_evals < 1:
            raise InvalidConfig("max_evals must be >= 1")
        if self.max_iters is not None and self.max_iters < 1:
            raise InvalidConfig("max_iters must be >= 1")
        if self.stall_iters is not None and self.stall_iters < 1:
            raise InvalidConfig("stall_iters must be >= 1")
        if self.stall_tol < 0:
            raise InvalidConfig("stall_tol must be >= 0")


@dataclass
class RunTrace:
    seed: int
    algorithm_id: str
    history: list[tuple[int, float]]
    best: Candidate
    total_evals: int
    stop_reason: str = ""
    info: dict = field(default_factory=dict)


class EvalCounter:
    __slots__ = ("count",)

    def __init__(self, count: int = 0):
        self.count = count


def evaluate(objective: Objective, c: Candidate, counter: EvalCounter,
             nonfinite_as_worst: bool = False) -> Candidate:
    """Set ``c.loss`` by calling the objective once; cached candidates are free."""
    if c.loss is not None:
        return c
    loss = float(objective(c.values))
    counter.count += 1
    if not math.isfinite(loss):
        if not nonfinite_as_worst:
            raise NonFiniteLoss(c.values, loss)
        loss = math.inf
    c.loss = loss
    return c


def sample_uniform(space: SearchSpace, rng: RandomStream) -> Candidate:
    if space.is_binary:
        bits = (rng.random(space.dim) < 0.5).astype(np.int64)
        return Candidate(bits)
    u = rng.random(space.dim)
    return Candidate(space.lower + u * (space.upper - space.lower))


def clamp(space: SearchSpace, v: np.ndarray) -> np.ndarray:
    if space.is_binary:
        raise UnsupportedSpace("clamp is only defined on a continuous box")
    return np.minimum(np.maximum(v, space.lower), space.upper)


def should_stop(iteration: int, evals: int, best_history: Sequence[float],
                criteria: StopCriteria) -> Optional[str]:
    """Name of the first firing criterion, or None to continue.

    ``best_history`` holds the best-so-far loss at the end of each completed
    iteration.  Priority: target_loss, max_evals, max_iters, stall.
    """
    best = best_history[-1] if len(best_history) else math.inf
    if criteria.target_loss is not None and best <= criteria.target_loss:
        return "target_loss"
    if evals >= criteria.max_evals:
        return "max_evals"
    if criteria.max_iters is not None and iteration >= criteria.max_iters:
        return "max_iters"
    k = criteria.stall_iters
    if k is not None and len(best_history) > k:
        if best_history[-k - 1] - best_history[-1] <= criteria.stall_tol:
            return "stall"
    return None


class Evaluator:
    """Counts evaluations, tracks the best-so-far and enforces stop criteria.

    Calling the evaluator on an unevaluated candidate spends one evaluation.
    It raises :class:`StopSearch` before exceeding ``max_evals`` and right
    after the target loss is reached, so algorithms never overspend.
    """

    def __init__(self, objective: Objective, criteria: StopCriteria,
                 nonfinite_as_worst: bool = False):
        self.objective = objective
        self.criteria = criteria
        self.nonfinite_as_worst = nonfinite_as_worst
        self.counter = EvalCounter()
        self.best: Optional[Candidate] = None
        self.history: list[tuple[int, float]] = []
        self.iteration = 0
        self.iter_best: list[float] = []
        self.stop_reason = ""

    @property
    def evals(self) -> int:
        return self.counter.count

    def __call__(self, c: Candidate) -> Candidate:
        if c.loss is not None:
            return c
        if self.counter.count >= self.criteria.max_evals:
            raise StopSearch("max_evals")
        evaluate(self.objective, c, self.counter, self.nonfinite_as_worst)
        if self.best is None or c.loss < self.best.loss:
            self.best = c.copy()
            self.history.append((self.counter.count, c.loss))
        target = self.criteria.target_loss
        if target is not None and c.loss <= target:
            raise StopSearch("target_loss")
        return c

    def evaluate_all(self, members: Sequence[Candidate]) -> None:
        for c in members:
            self(c)

    def end_iteration(self) -> Optional[str]:
        self.iteration += 1
        self.iter_best.append(self.best.loss if self.best is not None else math.inf)
        reason = should_stop(self.iteration, self.evals, self.iter_best, self.criteria)
        if reason:
            self.stop_reason = reason
        return reason

    def finish(self, rng: RandomStream, algorithm_id: str, reason: str = "",
               info: Optional[dict] = None) -> RunTrace:
        if reason:
            self.stop_reason = reason
        if self.best is None:
            raise EmptyPopulation("run ended before any evaluation")
        history = list(self.history)
        if history[-1][0] < self.evals:
            history.append((self.evals, self.best.loss))
        return RunTrace(seed=rng.seed, algorithm_id=algorithm_id, history=history,
                        best=self.best.copy(), total_evals=self.evals,
                        stop_reason=self.stop_reason, info=info or {})
