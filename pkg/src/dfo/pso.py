"""Particle swarm optimization: binary, standard, inertia and constriction variants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    Candidate,
    DfoError,
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

BINARY = "binary"
STANDARD = "standard"
INERTIA = "inertia"
CONSTRICTION = "constriction"
VARIANTS = (BINARY, STANDARD, INERTIA, CONSTRICTION)


class InvalidConstriction(DfoError, ValueError):
    """c1 + c2 < 4 makes the constriction coefficient complex."""


def constriction_coefficient(c1: float, c2: float, k: float = 1.0) -> float:
    psi = c1 + c2
    if psi < 4.0:
        raise InvalidConstriction(f"constriction needs c1 + c2 >= 4, got {psi}")
    if k <= 0:
        raise InvalidConstriction("k must be positive")
    # psi * (psi - 4) avoids cancellation next to psi = 4
    return 2.0 * k / abs(2.0 - psi - math.sqrt(psi * (psi - 4.0)))


@dataclass(frozen=True)
class PsoConfig:
    """Swarm hyperparameters.

    ``v_min``/``v_max`` default to -/+ half the box width per coordinate
    (continuous) or -/+4 (binary).  ``ring_radius`` of None selects the
    global topology; an integer r makes each particle follow the best of
    its 2r+1 ring neighbours.  ``psi_per_coordinate`` False shares one psi1
    and one psi2 across all coordinates of a particle.
    """

    swarm_size: int = 30
    variant: str = CONSTRICTION
    c1: float = 2.05
    c2: float = 2.05
    v_min: Optional[float] = None
    v_max: Optional[float] = None
    w_start: float = 0.9
    w_end: float = 0.4
    t_max: int = 1000
    k_constriction: float = 1.0
    ring_radius: Optional[int] = None
    psi_per_coordinate: bool = True

    def __post_init__(self):
        if self.swarm_size < 1:
            raise InvalidConfig("swarm_size must be >= 1")
        if self.variant not in VARIANTS:
            raise InvalidConfig(f"unknown PSO variant {self.variant!r}")
        if self.c1 <= 0 or self.c2 <= 0:
            raise InvalidConfig("c1 and c2 must be positive")
        if (self.v_min is None) != (self.v_max is None):
            raise InvalidConfig("give both v_min and v_max or neither")
        if self.v_min is not None and not self.v_min < self.v_max:
            raise InvalidConfig("v_min < v_max must hold")
        if self.t_max < 1:
            raise InvalidConfig("t_max must be >= 1")
        if self.ring_radius is not None and self.ring_radius < 0:
            raise InvalidConfig("ring_radius must be >= 0")
        if self.variant == CONSTRICTION:
            constriction_coefficient(self.c1, self.c2, self.k_constriction)

    def check_space(self, space: SearchSpace) -> None:
        if (self.variant == BINARY) != space.is_binary:
            raise UnsupportedSpace(
                f"PSO variant {self.variant!r} does not match a {space.kind} space")

    def velocity_bounds(self, space: SearchSpace) -> tuple[np.ndarray, np.ndarray]:
        if self.v_min is not None:
            return (np.full(space.dim, float(self.v_min)), np.full(space.dim, float(self.v_max)))
        if space.is_binary:
            return np.full(space.dim, -4.0), np.full(space.dim, 4.0)
        half = space.width / 2.0
        return -half, half


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    personal_best: Candidate
    loss: Optional[float] = None


def inertia_weight(tau: int, cfg: PsoConfig) -> float:
    if not 0 <= tau <= cfg.t_max:
        raise ValueError(f"inertia schedule is defined on [0, {cfg.t_max}], got {tau}")
    return (cfg.t_max - tau) * (cfg.w_start - cfg.w_end) / cfg.t_max + cfg.w_end


def velocity_update(p: Particle, neighbor_best: np.ndarray, cfg: PsoConfig, tau: int,
                    rng: RandomStream, v_bounds: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """New clamped velocity. Draws the psi1 vector, then the psi2 vector."""
    size = len(p.position) if cfg.psi_per_coordinate else None
    psi1 = rng.random(size)
    psi2 = rng.random(size)
    x = p.position
    pull = cfg.c1 * psi1 * (p.personal_best.values - x) + cfg.c2 * psi2 * (neighbor_best - x)
    if cfg.variant == INERTIA:
        v = inertia_weight(tau, cfg) * p.velocity + pull
    elif cfg.variant == CONSTRICTION:
        v = constriction_coefficient(cfg.c1, cfg.c2, cfg.k_constriction) * (p.velocity + pull)
    else:
        v = p.velocity + pull
    return np.minimum(np.maximum(v, v_bounds[0]), v_bounds[1])


def sigmoid(v):
    return 1.0 / (1.0 + np.exp(-v))


def position_update(p: Particle, new_v: np.ndarray, space: SearchSpace, rng: RandomStream) -> np.ndarray:
    if space.is_binary:
        # every bit is resampled from its own psi3 draw
        return (rng.random(space.dim) < sigmoid(new_v)).astype(np.int64)
    return clamp(space, p.position + new_v)


def neighbor_bests(swarm: list[Particle], ring_radius: Optional[int]) -> list[np.ndarray]:
    n = len(swarm)
    if ring_radius is None:
        g = min(range(n), key=lambda i: swarm[i].personal_best.loss)
        return [swarm[g].personal_best.values] * n
    out = []
    for i in range(n):
        hood = [(i + k) % n for k in range(-ring_radius, ring_radius + 1)]
        j = min(hood, key=lambda h: (swarm[h].personal_best.loss, h))
        out.append(swarm[j].personal_best.values)
    return out


def pso_run(objective: Objective, space: SearchSpace, cfg: PsoConfig, criteria: StopCriteria,
            rng: RandomStream, callback: Optional[Callable[[list[Particle]], None]] = None) -> RunTrace:
    """Synchronous swarm loop.

    Iteration tau: evaluate every particle, update personal bests, snapshot
    the neighbour bests, then move each particle in index order.  Particles
    start at uniform positions with zero velocity.  The inertia variant ends
    once tau exceeds ``t_max``.  ``callback`` sees the swarm after each move.
    """
    cfg.check_space(space)
    ev = Evaluator(objective, criteria)
    bounds = cfg.velocity_bounds(space)
    reason = ""
    swarm = []
    for _ in range(cfg.swarm_size):
        x = sample_uniform(space, rng).values
        swarm.append(Particle(x, np.zeros(space.dim), Candidate(x.copy())))
    tau = 0
    try:
        while True:
            for p in swarm:
                c = ev(Candidate(p.position.copy()))
                p.loss = c.loss
                pb = p.personal_best
                if pb.loss is None or c.loss < pb.loss:
                    p.personal_best = c.copy()
            reason = ev.end_iteration()
            if reason:
                break
            tau += 1
            if cfg.variant == INERTIA and tau > cfg.t_max:
                reason = "t_max"
                break
            hood = neighbor_bests(swarm, cfg.ring_radius)
            for p, nb in zip(swarm, hood):
                p.velocity = velocity_update(p, nb, cfg, tau, rng, bounds)
                p.position = position_update(p, p.velocity, space, rng)
            if callback is not None:
                callback(swarm)
    except StopSearch as stop:
        reason = stop.reason
    return ev.finish(rng, "pso-" + cfg.variant, reason)
