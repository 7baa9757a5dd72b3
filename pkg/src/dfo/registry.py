"""Algorithm ids, their tunable parameters and how to build and run them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import cmaes, de, es, ga, local_search, pso, sce
from .core import BINARY, CONTINUOUS, InvalidConfig, RandomStream, RunTrace, SearchSpace, StopCriteria


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(t) for t in text.split(","))


def _int_or_uniform(text: str):
    return ga.UNIFORM if text.strip() == ga.UNIFORM else int(text)


def _choice(*options):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    parse.options = options
    return parse


@dataclass(frozen=True)
class Algorithm:
    id: str
    summary: str
    params: dict
    spaces: tuple
    run: Callable[[Callable, SearchSpace, dict, StopCriteria, RandomStream], RunTrace]


def _run_ga(obj, space, params, criteria, rng):
    cfg = ga.GaConfig(**params)
    return ga.ga_run(obj, space, cfg, criteria, rng)


def _sce_config(space, params):
    d = space.dim
    m = params.get("complex_size", 2 * d + 1)
    base = dict(num_complexes=2, complex_size=m, cce_parents=min(d + 1, m),
                cce_offspring_rounds=1, cce_evolution_rounds=m)
    base.update(params)
    return sce.SceConfig(**base)


def _run_sce(obj, space, params, criteria, rng):
    return sce.sce_run(obj, space, _sce_config(space, params), criteria, rng)


def _run_de(obj, space, params, criteria, rng):
    return de.de_run(obj, space, de.DeConfig(**params), criteria, rng)


def _pso_config(space, params):
    params = dict(params)
    if "variant" not in params:
        params["variant"] = pso.BINARY if space.is_binary else pso.CONSTRICTION
    if params["variant"] != pso.CONSTRICTION:
        params.setdefault("c1", 2.0)
        params.setdefault("c2", 2.0)
    return pso.PsoConfig(**params)


def _run_pso(obj, space, params, criteria, rng):
    return pso.pso_run(obj, space, _pso_config(space, params), criteria, rng)


def _es_config(space, params):
    params = dict(params)
    shape = params.pop("mutation", "isotropic")
    scale = params.pop("mutation_scale", 0.01)
    sigma = params.pop("mutation_sigma", None)
    cov = params.pop("mutation_cov", None)
    if shape == "isotropic":
        mutation = es.Isotropic(scale)
    elif shape == "diagonal":
        if sigma is None:
            raise InvalidConfig("diagonal mutation needs algo.mutation_sigma")
        mutation = es.Diagonal(tuple(sigma))
    else:
        if cov is None:
            raise InvalidConfig("fullcov mutation needs algo.mutation_cov")
        d = space.dim
        if len(cov) != d * d:
            raise InvalidConfig(f"algo.mutation_cov needs {d * d} entries (row-major)")
        try:
            mutation = es.FullCov(np.reshape(cov, (d, d)))
        except es.NotPositiveDefinite as err:
            raise InvalidConfig(str(err)) from None
    if sigma is not None and len(sigma) != space.dim and shape == "diagonal":
        raise InvalidConfig(f"algo.mutation_sigma needs {space.dim} entries")
    return es.EsConfig(mutation=mutation, **params)


def _run_es(obj, space, params, criteria, rng):
    return es.es_run(obj, space, _es_config(space, params), criteria, rng)


def _cma_config(space, params):
    params = dict(params)
    params.pop("sigma0", None)
    lam = params.pop("lam", None)
    return cmaes.CmaConfig.default(space.dim, lam=lam, **params)


def _run_cma(obj, space, params, criteria, rng):
    return cmaes.cmaes_run(obj, space, _cma_config(space, params), criteria, rng,
                           sigma0=params.get("sigma0"))


def _neighbourhood(space, params):
    if space.is_binary:
        return local_search.BitFlip()
    step = params.get("step", 0.01 * float(np.max(space.width)))
    return local_search.CoordinateStep(step)


def _run_hill(obj, space, params, criteria, rng):
    return local_search.hill_climb(obj, space, _neighbourhood(space, params), None, criteria, rng)


def _sa_parts(space, params):
    params = dict(params)
    if space.is_binary:
        proposal = local_search.BitFlip()
        params.pop("stddev", None)
    else:
        proposal = local_search.GaussianPerturb(params.pop("stddev", None))
    return proposal, local_search.AnnealSchedule(**params)


def _run_sa(obj, space, params, criteria, rng):
    proposal, schedule = _sa_parts(space, params)
    return local_search.simulated_annealing(obj, space, proposal, schedule, criteria, rng)


def _run_random(obj, space, params, criteria, rng):
    return local_search.random_search(obj, space, criteria, rng)


BOTH = (CONTINUOUS, BINARY)

ALGORITHMS = {
    a.id: a
    for a in (
        Algorithm("ga", "genetic algorithm (softmax selection, k-point crossover)", {
            "pop_size": int, "mutation_prob": float, "crossover_points": _int_or_uniform,
            "init_bernoulli_p": float, "init_mean": float, "init_stddev": float,
            "real_mutation_stddev": float, "elitism": int,
        }, BOTH, _run_ga),
        Algorithm("sce", "shuffled complex evolution", {
            "num_complexes": int, "complex_size": int, "cce_parents": int,
            "cce_offspring_rounds": int, "cce_evolution_rounds": int,
        }, (CONTINUOUS,), _run_sce),
        Algorithm("de", "differential evolution", {
            "pop_size": int, "diff_weight": float, "greediness": float,
            "crossover_prob": float, "scheme": _choice(de.RAND1, de.BEST1_GREEDY),
        }, (CONTINUOUS,), _run_de),
        Algorithm("pso", "particle swarm (binary/standard/inertia/constriction)", {
            "swarm_size": int, "variant": _choice(*pso.VARIANTS), "c1": float, "c2": float,
            "v_min": float, "v_max": float, "w_start": float, "w_end": float, "t_max": int,
            "k_constriction": float, "ring_radius": int, "psi_per_coordinate": _bool,
        }, BOTH, _run_pso),
        Algorithm("es", "(mu/rho +, lambda) evolution strategy", {
            "mu": int, "rho": int, "lam": int, "mode": _choice(es.PLUS, es.COMMA),
            "recombination": _choice(es.DISCRETE, es.INTERMEDIATE, es.WEIGHTED),
            "weights": _floats, "mutation": _choice("isotropic", "diagonal", "fullcov"),
            "mutation_scale": float, "mutation_sigma": _floats, "mutation_cov": _floats,
            "mate_selection": _choice(es.FITNESS_BASED, es.FITNESS_INDEPENDENT),
        }, (CONTINUOUS,), _run_es),
        Algorithm("cma-es", "covariance matrix adaptation evolution strategy", {
            "lam": int, "mu": int, "c_m": float, "c_1": float, "c_mu": float, "c_c": float,
            "c_sigma": float, "d_sigma": float, "sigma0": float, "literal_rank_mu": _bool,
        }, (CONTINUOUS,), _run_cma),
        Algorithm("hill-climb", "steepest-descent hill climbing", {"step": float}, BOTH, _run_hill),
        Algorithm("sa", "simulated annealing", {
            "t_initial": float, "alpha": float, "max_iters": int, "stddev": float,
        }, BOTH, _run_sa),
        Algorithm("random-search", "uniform random sampling baseline", {}, BOTH, _run_random),
    )
}

_BUILDERS = {
    "ga": lambda space, p: ga.GaConfig(**p).check_space(space),
    "sce": lambda space, p: _sce_config(space, p).check_space(space),
    "de": lambda space, p: de.DeConfig(**p).check_space(space),
    "pso": lambda space, p: _pso_config(space, p).check_space(space),
    "es": lambda space, p: _es_config(space, p).check_space(space),
    "cma-es": lambda space, p: _cma_config(space, p),
    "hill-climb": lambda space, p: _neighbourhood(space, p),
    "sa": lambda space, p: _sa_parts(space, p),
    "random-search": lambda space, p: None,
}


def check_algorithm(algo_id: str, space: SearchSpace, params: dict) -> None:
    """Raise InvalidConfig/UnsupportedSpace if the run cannot start."""
    algo = ALGORITHMS[algo_id]
    if space.kind not in algo.spaces:
        raise InvalidConfig(f"{algo_id} does not support {space.kind} spaces")
    try:
        _BUILDERS[algo_id](space, params)
    except TypeError as err:
        raise InvalidConfig(str(err)) from None
