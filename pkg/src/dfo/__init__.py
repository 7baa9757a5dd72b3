"""Derivative-free optimizers with seeded, reproducible runs."""

from .core import (
    BINARY,
    CONTINUOUS,
    Candidate,
    DfoError,
    EmptyPopulation,
    InvalidConfig,
    InvalidSpace,
    NonFiniteLoss,
    Population,
    RandomStream,
    RunTrace,
    SearchSpace,
    StopCriteria,
    UnsupportedSpace,
)
from .ga import GaConfig, ga_run
from .sce import SceConfig, sce_run
from .de import DeConfig, de_run
from .pso import PsoConfig, pso_run
from .es import Diagonal, EsConfig, FullCov, Isotropic, es_run
from .cmaes import CmaConfig, CovarianceDegenerate, cmaes_run
from .local_search import (
    AnnealSchedule,
    BitFlip,
    CoordinateStep,
    GaussianPerturb,
    hill_climb,
    random_search,
    simulated_annealing,
)
from .benchmarks import BENCHMARKS, eval_benchmark, get_benchmark
from .config import ConfigError, ExperimentConfig, parse_config, serialize
from .runner import read_trace, run_experiment, write_trace

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "Candidate",
    "DfoError",
    "EmptyPopulation",
    "InvalidConfig",
    "InvalidSpace",
    "NonFiniteLoss",
    "Population",
    "RandomStream",
    "RunTrace",
    "SearchSpace",
    "StopCriteria",
    "UnsupportedSpace",
    "AnnealSchedule",
    "BitFlip",
    "CoordinateStep",
    "GaussianPerturb",
    "hill_climb",
    "random_search",
    "simulated_annealing",
    "GaConfig",
    "ga_run",
    "SceConfig",
    "sce_run",
    "DeConfig",
    "de_run",
    "PsoConfig",
    "pso_run",
    "Diagonal",
    "EsConfig",
    "FullCov",
    "Isotropic",
    "es_run",
    "CmaConfig",
    "CovarianceDegenerate",
    "cmaes_run",
    "BENCHMARKS",
    "eval_benchmark",
    "get_benchmark",
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "serialize",
    "read_trace",
    "run_experiment",
    "write_trace",
]
