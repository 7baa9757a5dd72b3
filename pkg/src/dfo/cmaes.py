"""CMA-ES: rank-one plus rank-mu covariance adaptation with cumulative step-size control."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
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
)
from .es import log_weights


class CovarianceDegenerate(DfoError, ArithmeticError):
    """C lost symmetry or positive definiteness. ``trace`` holds the partial run."""

    def __init__(self, msg: str, trace: Optional[RunTrace] = None):
        super().__init__(msg)
        self.trace = trace


@dataclass(frozen=True)
class CmaConfig:
    lam: int
    mu: int
    weights: tuple
    c_m: float
    c_1: float
    c_mu: float
    c_c: float
    c_sigma: float
    d_sigma: float
    literal_rank_mu: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if self.lam < 1 or not 1 <= self.mu <= self.lam:
            raise InvalidConfig("need 1 <= mu <= lambda")
        if w.shape != (self.mu,):
            raise InvalidConfig(f"need {self.mu} weights, got {w.size}")
        if np.any(w < 0) or np.any(np.diff(w) > 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidConfig("weights must be nonnegative, nonincreasing and sum to 1")
        if not 0 < self.c_m <= 1:
            raise InvalidConfig("c_m must lie in (0, 1]")
        if self.c_1 < 0 or self.c_mu < 0 or self.c_1 + self.c_mu > 1:
            raise InvalidConfig("need c_1, c_mu >= 0 and c_1 + c_mu <= 1")
        if not 0 < self.c_c <= 1:
            raise InvalidConfig("c_c must lie in (0, 1]")
        if not 0 < self.c_sigma < 1:
            raise InvalidConfig("c_sigma must lie in (0, 1)")
        if self.d_sigma <= 0:
            raise InvalidConfig("d_sigma must be positive")

    @property
    def mu_eff(self) -> float:
        w = np.asarray(self.weights, dtype=float)
        return 1.0 / float(np.sum(w * w))

    @classmethod
    def default(cls, d: int, lam: Optional[int] = None, **overrides) -> "CmaConfig":
        """Standard settings for dimension ``d``; any field can be overridden."""
        if lam is None:
            lam = 4 + int(math.floor(3 * math.log(d)))
        mu = overrides.pop("mu", lam // 2)
        weights = overrides.pop("weights", None)
        w = log_weights(mu) if weights is None else np.asarray(weights, dtype=float)
        mu_eff = 1.0 / float(np.sum(w * w))
        c_sigma = (mu_eff + 2) / (d + mu_eff + 5)
        c_1 = 2 / ((d + 1.3) ** 2 + mu_eff)
        c_mu = min(1 - c_1, 2 * (mu_eff - 2 + 1 / mu_eff) / ((d + 2) ** 2 + mu_eff))
        base = dict(lam=lam, mu=mu, weights=tuple(float(x) for x in w), c_m=1.0, c_1=c_1,
                    c_mu=max(c_mu, 0.0), c_c=4 / (d + 4), c_sigma=c_sigma, d_sigma=1 + c_sigma)
        base.update(overrides)
        return cls(**base)

    def with_(self, **changes) -> "CmaConfig":
        return replace(self, **changes)


@dataclass
class CmaState:
    mean: np.ndarray
    sigma: float
    cov: np.ndarray
    path_c: np.ndarray
    path_sigma: np.ndarray
    generation: int = 0
    basis: Optional[np.ndarray] = None
    scales: Optional[np.ndarray] = None

    @classmethod
    def initial(cls, mean, sigma: float) -> "CmaState":
        mean = np.asarray(mean, dtype=float)
        d = len(mean)
        state = cls(mean.copy(), float(sigma), np.eye(d), np.zeros(d), np.zeros(d))
        state.refactor()
        return state

    def refactor(self) -> None:
        """Refresh (B, D) with cov = B diag(D)^2 B^T."""
        cov = self.cov
        if not np.all(np.isfinite(cov)):
            raise CovarianceDegenerate("covariance has non-finite entries")
        if np.max(np.abs(cov - cov.T)) >= 1e-10:
            raise CovarianceDegenerate("covariance lost symmetry")
        eigvals, basis = np.linalg.eigh(cov)
        if eigvals.min() <= 0.0:
            raise CovarianceDegenerate(f"covariance lost positive definiteness "
                                       f"(min eigenvalue {eigvals.min():.3e})")
        self.basis = basis
        self.scales = np.sqrt(eigvals)

    def inv_sqrt(self) -> np.ndarray:
        return (self.basis / self.scales) @ self.basis.T


MAX_CONDITION = 1e14


def expected_norm(d: int) -> float:
    """Approximate E||N(0, I_d)||."""
    return math.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d * d))


def cma_sample(state: CmaState, cfg: CmaConfig, rng: RandomStream) -> tuple[np.ndarray, np.ndarray]:
    """(thetas, zs): lambda rows theta = m + sigma B D z with z standard normal."""
    d = len(state.mean)
    z = rng.normal((cfg.lam, d))
    y = (z * state.scales) @ state.basis.T
    return state.mean + state.sigma * y, z


def cma_update_mean(state: CmaState, top: np.ndarray, cfg: CmaConfig) -> np.ndarray:
    """``top`` holds the mu best samples as rows, best first."""
    w = np.asarray(cfg.weights)
    return state.mean + cfg.c_m * (w @ (top - state.mean))


def cma_update_paths(state: CmaState, new_mean: np.ndarray, cfg: CmaConfig) -> tuple[np.ndarray, np.ndarray]:
    step = (new_mean - state.mean) / state.sigma
    mu_eff = cfg.mu_eff
    p = (1 - cfg.c_c) * state.path_c + math.sqrt(cfg.c_c * (2 - cfg.c_c) * mu_eff) * step
    q = (1 - cfg.c_sigma) * state.path_sigma \
        + math.sqrt(cfg.c_sigma * (2 - cfg.c_sigma) * mu_eff) * (state.inv_sqrt() @ step)
    return p, q


def cma_update_cov(state: CmaState, top: np.ndarray, new_mean: np.ndarray, new_path_c: np.ndarray,
                   cfg: CmaConfig) -> np.ndarray:
    """Rank-one plus rank-mu update; the rank-mu sum runs over the mu selected rows.

    Rank-mu deviations are (theta_i - m_old) / sigma, the same units as the
    evolution path.  With ``cfg.literal_rank_mu`` they are the raw
    theta_i - m_new instead.
    """
    w = np.asarray(cfg.weights)
    if cfg.literal_rank_mu:
        dev = top - new_mean
    else:
        dev = (top - state.mean) / state.sigma
    rank_mu = (dev.T * w) @ dev
    cov = (1 - cfg.c_1 - cfg.c_mu * w.sum()) * state.cov \
        + cfg.c_1 * np.outer(new_path_c, new_path_c) + cfg.c_mu * rank_mu
    cov = (cov + cov.T) / 2.0
    if not np.all(np.isfinite(cov)):
        raise CovarianceDegenerate("covariance has non-finite entries")
    return cov


def cma_update_sigma(state: CmaState, new_path_sigma: np.ndarray, cfg: CmaConfig, d: int) -> float:
    ratio = np.linalg.norm(new_path_sigma) / expected_norm(d)
    return state.sigma * math.exp(cfg.c_sigma / cfg.d_sigma * (ratio - 1))


def cmaes_run(objective: Objective, space: SearchSpace, cfg: Optional[CmaConfig], criteria: StopCriteria,
              rng: RandomStream, callback: Optional[Callable[[CmaState], None]] = None,
              sigma0: Optional[float] = None, mean0=None) -> RunTrace:
    """Run CMA-ES from the box center with sigma = 0.3 * max width unless given.

    Per generation: sample, evaluate (clamped copies), rank, then update the
    mean, both paths, the covariance and the step size, and refactor C.
    Updates always use the raw samples.  ``callback`` gets the new state.
    The run ends with reason "ill_conditioned" once the condition number of
    C exceeds ``MAX_CONDITION`` (typically after the losses have flattened
    to exact ties), before the factorization can break down.
    """
    if space.is_binary:
        raise UnsupportedSpace("CMA-ES needs a continuous box")
    d = space.dim
    cfg = cfg or CmaConfig.default(d)
    mean = space.center if mean0 is None else np.asarray(mean0, dtype=float)
    sigma = 0.3 * float(np.max(space.width)) if sigma0 is None else sigma0
    state = CmaState.initial(mean, sigma)
    ev = Evaluator(objective, criteria)
    reason = ""
    try:
        while True:
            thetas, _ = cma_sample(state, cfg, rng)
            losses = np.array([ev(Candidate(clamp(space, t))).loss for t in thetas])
            order = np.argsort(losses, kind="stable")
            top = thetas[order[:cfg.mu]]
            new_mean = cma_update_mean(state, top, cfg)
            p, q = cma_update_paths(state, new_mean, cfg)
            cov = cma_update_cov(state, top, new_mean, p, cfg)
            new_sigma = cma_update_sigma(state, q, cfg, d)
            state = CmaState(new_mean, new_sigma, cov, p, q, state.generation + 1)
            state.refactor()
            if callback is not None:
                callback(state)
            reason = ev.end_iteration()
            if not reason and (state.scales.max() / state.scales.min()) ** 2 > MAX_CONDITION:
                reason = "ill_conditioned"
            if reason:
                break
    except StopSearch as stop:
        reason = stop.reason
    except CovarianceDegenerate as err:
        err.trace = ev.finish(rng, "cma-es", "covariance_degenerate") if ev.best else None
        raise
    return ev.finish(rng, "cma-es", reason, info={"sigma": state.sigma, "generation": state.generation})
