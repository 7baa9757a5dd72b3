"""Run experiments over seeds and persist best-loss traces as CSV."""

from __future__ import annotations

import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from .benchmarks import get_benchmark
from .config import ConfigError, ExperimentConfig
from .core import DfoError, RandomStream, RunTrace, SearchSpace
from .registry import ALGORITHMS, check_algorithm


def build_space(cfg: ExperimentConfig) -> SearchSpace:
    bench = get_benchmark(cfg.fn)
    return bench.space(cfg.dim, cfg.lower, cfg.upper)


def validate(cfg: ExperimentConfig) -> SearchSpace:
    """Check the function, box and algorithm fit together; raise ConfigError if not."""
    try:
        space = build_space(cfg)
        check_algorithm(cfg.algorithm, space, cfg.params)
    except (DfoError, KeyError, ValueError) as err:
        raise ConfigError(f"{cfg.algorithm} on {cfg.fn} (dim {cfg.dim}): {err}") from None
    if not cfg.seeds:
        raise ConfigError("at least one seed is required")
    return space


def run_seed(cfg: ExperimentConfig, seed: int) -> RunTrace:
    space = build_space(cfg)
    objective = get_benchmark(cfg.fn).fn
    return ALGORITHMS[cfg.algorithm].run(objective, space, dict(cfg.params), cfg.criteria,
                                         RandomStream(seed))


def trace_path(cfg: ExperimentConfig, seed: int) -> Path:
    return Path(cfg.out) / f"{cfg.algorithm}_{cfg.fn}_d{cfg.dim}_seed{seed}.csv"


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> list[RunTrace]:
    """One trace per seed, in seed order. Writes CSV files when ``cfg.out`` is set.

    Seeds run in separate processes when ``workers`` (default ``cfg.workers``)
    exceeds 1; every run owns its stream, so results do not depend on it.
    """
    validate(cfg)
    workers = cfg.workers if workers is None else workers
    if workers > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(cfg.seeds))) as pool:
            traces = list(pool.map(run_seed, [cfg] * len(cfg.seeds), cfg.seeds))
    else:
        traces = [run_seed(cfg, s) for s in cfg.seeds]
    if cfg.out is not None:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        for trace in traces:
            write_trace(trace, trace_path(cfg, trace.seed), cfg.fn, cfg.dim, cfg.algorithm)
    return traces


def format_trace(trace: RunTrace, fn_name: str, dim: int, algo_id: Optional[str] = None) -> str:
    algo_id = algo_id or trace.algorithm_id
    lines = [f"# algo={algo_id} fn={fn_name} dim={dim} seed={trace.seed}", "eval,best_loss"]
    lines += [f"{e},{loss:.17g}" for e, loss in trace.history]
    return "\n".join(lines) + "\n"


def write_trace(trace: RunTrace, path, fn_name: str, dim: int, algo_id: Optional[str] = None) -> None:
    """Write the CSV atomically: a temporary sibling file is renamed into place.

    On any failure the temporary file is removed and the OSError propagates.
    """
    path = Path(path)
    text = format_trace(trace, fn_name, dim, algo_id)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def read_trace(path) -> tuple[dict, list[tuple[int, float]]]:
    """Parse a trace file into (header fields, [(eval, best_loss), ...])."""
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2 or not lines[0].startswith("# ") or lines[1] != "eval,best_loss":
        raise ValueError(f"{path}: not a trace file")
    header = dict(field.split("=", 1) for field in lines[0][2:].split())
    rows = []
    for line in lines[2:]:
        e, loss = line.split(",")
        rows.append((int(e), float(loss)))
    return header, rows
