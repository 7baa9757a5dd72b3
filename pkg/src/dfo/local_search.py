"""Single-point searches: greedy hill climbing, simulated annealing, uniform random search.

All three minimize.  Hill climbing moves to the best strictly improving
neighbour and stops at a local minimum; simulated annealing accepts a worse
proposal with probability exp(-delta / T) and cools T geometrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    Candidate,
    Evaluator,
    InvalidConfig,
    Objective,
    RandomStream,
    RunTrace,
    SearchSpace,
    StopCriteria,
    StopSearch,
    UnsupportedSpace,
    clamp,
    sample_uniform,
)


@dataclass(frozen=True)
class CoordinateStep:
    step: float = 1.0

    def __post_init__(self):
        if not self.step > 0:
            raise InvalidConfig("step must be positive")


@dataclass(frozen=True)
class BitFlip:
    pass


@dataclass(frozen=True)
class GaussianPerturb:
    """One uniformly chosen coordinate gets N(0, stddev^2) noise.

    stddev None means a tenth of that coordinate's box width.
    """
    stddev: Optional[float] = None

    def __post_init__(self):
        if self.stddev is not None and not self.stddev > 0:
            raise InvalidConfig("stddev must be positive")


def _check(neighbourhood, space: SearchSpace) -> None:
    if isinstance(neighbourhood, BitFlip) != space.is_binary:
        raise UnsupportedSpace(f"{type(neighbourhood).__name__} does not apply to a {space.kind} space")


def neighbors(c: np.ndarray, neighbourhood, space: SearchSpace) -> list[np.ndarray]:
    """Enumerate the neighbourhood in a fixed order (coordinate i: +step, then -step)."""
    _check(neighbourhood, space)
    c = np.asarray(c)
    out = []
    if isinstance(neighbourhood, BitFlip):
        for i in range(space.dim):
            v = c.copy()
            v[i] = 1 - v[i]
            out.append(v)
        return out
    if not isinstance(neighbourhood, CoordinateStep):
        raise UnsupportedSpace(f"{type(neighbourhood).__name__} has no enumerable neighbourhood")
    for i in range(space.dim):
        for sign in (1.0, -1.0):
            v = np.array(c, dtype=float, copy=True)
            v[i] += sign * neighbourhood.step
            if space.lower[i] <= v[i] <= space.upper[i]:
                out.append(v)
    return out


def hill_climb(objective: Objective, space: SearchSpace, neighbourhood, start=None,
               criteria: Optional[StopCriteria] = None, rng: Optional[RandomStream] = None,
               callback: Optional[Callable[[Candidate], None]] = None) -> RunTrace:
    """Steepest-descent over the neighbourhood until no neighbour is strictly better.

    The start is drawn uniformly when not given.  Among equally good
    neighbours the one enumerated first wins.  ``callback`` sees each
    accepted point, the start included.
    """
    _check(neighbourhood, space)
    criteria = criteria or StopCriteria()
    rng = rng or RandomStream(0)
    ev = Evaluator(objective, criteria)
    reason = ""
    moves = 0
    try:
        current = sample_uniform(space, rng) if start is None else Candidate(np.array(start))
        ev(current)
        if callback is not None:
            callback(current)
        while True:
            best = None
            for v in neighbors(current.values, neighbourhood, space):
                cand = ev(Candidate(v))
                if best is None or cand.loss < best.loss:
                    best = cand
            if best is None or not best.loss < current.loss:
                reason = "local_minimum"
                break
            current = best
            moves += 1
            if callback is not None:
                callback(current)
            reason = ev.end_iteration()
            if reason:
                break
    except StopSearch as stop:
        reason = stop.reason
    return ev.finish(rng, "hill-climb", reason, info={"moves": moves, "final": current.copy()})


@dataclass(frozen=True)
class AnnealSchedule:
    t_initial: float = 1.0
    alpha: float = 0.999
    max_iters: int = 10_000

    def __post_init__(self):
        if not self.t_initial > 0:
            raise InvalidConfig("t_initial must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidConfig("alpha must lie in [0, 1]")
        if self.max_iters < 1:
            raise InvalidConfig("max_iters must be >= 1")

    def temperature(self, k: int) -> float:
        """Temperature used at iteration k (0-based): T0 * alpha**k."""
        return self.t_initial * self.alpha ** k


def sa_accept_probability(loss_current: float, loss_proposed: float, t: float) -> float:
    delta = loss_proposed - loss_current
    if delta <= 0:
        return 1.0
    if t <= 0:
        return 0.0
    return math.exp(-delta / t)


def propose(current: np.ndarray, neighbourhood, space: SearchSpace, rng: RandomStream) -> np.ndarray:
    """One random neighbour. Draws the coordinate index, then (Gaussian) one normal deviate."""
    v = np.array(current, copy=True)
    i = int(rng.integers(0, space.dim - 1))
    if isinstance(neighbourhood, BitFlip):
        v[i] = 1 - v[i]
        return v
    if isinstance(neighbourhood, GaussianPerturb):
        std = 0.1 * space.width[i] if neighbourhood.stddev is None else neighbourhood.stddev
        v = v.astype(float)
        v[i] += std * rng.normal()
        return clamp(space, v)
    # coordinate step: random direction on a random axis
    v = v.astype(float)
    v[i] += neighbourhood.step if rng.random() < 0.5 else -neighbourhood.step
    return clamp(space, v)


def simulated_annealing(objective: Objective, space: SearchSpace, proposal, schedule: AnnealSchedule,
                        criteria: Optional[StopCriteria] = None, rng: Optional[RandomStream] = None,
                        start=None,
                        callback: Optional[Callable[[int, Candidate, float], None]] = None) -> RunTrace:
    """Anneal for ``schedule.max_iters`` proposals, one per temperature.

    Draw order per iteration: proposal, then the acceptance uniform (only
    for worse proposals).  ``info`` reports how many worse proposals were
    seen and accepted.  ``callback(k, current, T)`` runs after each step.
    """
    _check(proposal, space)
    criteria = criteria or StopCriteria()
    rng = rng or RandomStream(0)
    ev = Evaluator(objective, criteria)
    reason = "max_iters"
    worse_seen = worse_accepted = 0
    t = schedule.t_initial
    try:
        current = sample_uniform(space, rng) if start is None else Candidate(np.array(start))
        ev(current)
        for k in range(schedule.max_iters):
            t = schedule.temperature(k)
            cand = ev(Candidate(propose(current.values, proposal, space, rng)))
            if cand.loss <= current.loss:
                current = cand
            else:
                worse_seen += 1
                if rng.random() < sa_accept_probability(current.loss, cand.loss, t):
                    current = cand
                    worse_accepted += 1
            if callback is not None:
                callback(k, current, t)
            r = ev.end_iteration()
            if r:
                reason = r
                break
    except StopSearch as stop:
        reason = stop.reason
    return ev.finish(rng, "sa", reason, info={"worse_seen": worse_seen, "worse_accepted": worse_accepted,
                                              "temperature": t, "final": current.copy()})


def random_search(objective: Objective, space: SearchSpace, criteria: StopCriteria,
                  rng: RandomStream) -> RunTrace:
    """Uniform sampling of the space until the budget runs out."""
    ev = Evaluator(objective, criteria)
    reason = ""
    try:
        while True:
            ev(sample_uniform(space, rng))
            reason = ev.end_iteration()
            if reason:
                break
    except StopSearch as stop:
        reason = stop.reason
    return ev.finish(rng, "random-search", reason)
