"""Experiment configuration: flat ``key = value`` text, namespaced ``algo.``, ``fn.``, ``run.``.

Example::

    algo.id = cma-es
    fn.name = sphere
    fn.dim = 10
    run.seeds = 1,2,3      # one run per seed
    run.max_evals = 20000

Algorithm parameters live under ``algo.`` next to ``algo.id``; the set
accepted for each id is listed by ``dfo list-algos``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .benchmarks import BENCHMARKS
from .core import MAX_SEED, StopCriteria
from .registry import ALGORITHMS

DEFAULT_MAX_EVALS = 100_000


class ConfigError(ValueError):
    """Bad configuration text; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    fn: str
    dim: int
    seeds: tuple
    params: dict = field(default_factory=dict)
    lower: Optional[float] = None
    upper: Optional[float] = None
    criteria: StopCriteria = field(default_factory=StopCriteria)
    out: Optional[str] = None
    workers: int = 1


def _int(text):
    return int(text)


def _seeds(text):
    seeds = tuple(int(t) for t in text.split(","))
    for s in seeds:
        if not 0 <= s <= MAX_SEED:
            raise ValueError(f"seed {s} outside [0, 2^64 - 1]")
    return seeds


def _text(text):
    if not text:
        raise ValueError("empty value")
    return text


# key -> (parser, required)
_FIXED = {
    "algo.id": (_text, True),
    "fn.name": (_text, True),
    "fn.dim": (_int, True),
    "fn.lower": (float, False),
    "fn.upper": (float, False),
    "run.seeds": (_seeds, True),
    "run.max_evals": (_int, False),
    "run.target_loss": (float, False),
    "run.max_iters": (_int, False),
    "run.stall_iters": (_int, False),
    "run.stall_tol": (float, False),
    "run.out": (_text, False),
    "run.workers": (_int, False),
}


def _split_lines(text: str) -> list[tuple[int, str, str]]:
    entries = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", number)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("missing key before '='", number)
        entries.append((number, key, value))
    return entries


def parse_config(text: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse configuration text; ``overrides`` maps keys to replacement value strings.

    Raises ConfigError naming the offending line for unknown keys, repeated
    keys, unparsable values and unknown algorithm or function names.
    """
    raw: dict[str, tuple[Optional[int], str]] = {}
    for number, key, value in _split_lines(text):
        if key in raw:
            raise ConfigError(f"key {key!r} repeated (first on line {raw[key][0]})", number)
        raw[key] = (number, value)
    for key, value in (overrides or {}).items():
        raw[key] = (None, str(value))

    algo_line, algo_id = raw.get("algo.id", (None, None))
    if algo_id is not None and algo_id not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm id {algo_id!r}; choose from {', '.join(ALGORITHMS)}",
                          algo_line)
    param_parsers = ALGORITHMS[algo_id].params if algo_id else {}

    values, params = {}, {}
    for key, (number, value) in raw.items():
        if key in _FIXED:
            parser = _FIXED[key][0]
            target, name = values, key
        elif key.startswith("algo.") and key[5:] in param_parsers:
            parser = param_parsers[key[5:]]
            target, name = params, key[5:]
        else:
            raise ConfigError(f"unknown key {key!r}", number)
        try:
            target[name] = parser(value)
        except ValueError as err:
            raise ConfigError(f"bad value for {key}: {err}", number) from None

    for key, (_, required) in _FIXED.items():
        if required and key not in values:
            raise ConfigError(f"missing required key {key!r}")

    fn_line = raw["fn.name"][0]
    if values["fn.name"] not in BENCHMARKS:
        raise ConfigError(f"unknown function {values['fn.name']!r}; choose from {', '.join(BENCHMARKS)}",
                          fn_line)
    if values["fn.dim"] < 1:
        raise ConfigError("fn.dim must be >= 1", raw["fn.dim"][0])
    if values.get("run.workers", 1) < 1:
        raise ConfigError("run.workers must be >= 1", raw["run.workers"][0])

    try:
        criteria = StopCriteria(
            max_evals=values.get("run.max_evals", DEFAULT_MAX_EVALS),
            target_loss=values.get("run.target_loss"),
            max_iters=values.get("run.max_iters"),
            stall_iters=values.get("run.stall_iters"),
            stall_tol=values.get("run.stall_tol", 0.0),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from None

    return ExperimentConfig(
        algorithm=values["algo.id"], fn=values["fn.name"], dim=values["fn.dim"],
        seeds=values["run.seeds"], params=params, lower=values.get("fn.lower"),
        upper=values.get("fn.upper"), criteria=criteria, out=values.get("run.out"),
        workers=values.get("run.workers", 1),
    )


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(_format(v) for v in value)
    return str(value)


def serialize(cfg: ExperimentConfig) -> str:
    """Canonical text form; parsing it back gives an equal config."""
    rows = [("algo.id", cfg.algorithm)]
    rows += [(f"algo.{k}", v) for k, v in sorted(cfg.params.items())]
    rows += [("fn.name", cfg.fn), ("fn.dim", cfg.dim), ("fn.lower", cfg.lower), ("fn.upper", cfg.upper)]
    c = cfg.criteria
    rows += [("run.seeds", cfg.seeds), ("run.max_evals", c.max_evals), ("run.target_loss", c.target_loss),
             ("run.max_iters", c.max_iters), ("run.stall_iters", c.stall_iters),
             ("run.stall_tol", float(c.stall_tol)), ("run.out", cfg.out), ("run.workers", cfg.workers)]
    return "".join(f"{k} = {_format(v)}\n" for k, v in rows if v is not None)
