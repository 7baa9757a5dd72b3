"""Command line entry point: ``dfo run``, ``dfo list-algos``, ``dfo list-fns``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .benchmarks import BENCHMARKS
from .cmaes import CovarianceDegenerate
from .config import ConfigError, parse_config, serialize
from .core import DfoError, NonFiniteLoss
from .registry import ALGORITHMS
from .runner import run_experiment, validate

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dfo", description="Derivative-free optimizer benchmarks.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write one CSV trace per seed")
    run.add_argument("--config", help="configuration file (key = value lines)")
    run.add_argument("--algo", help="override algo.id")
    run.add_argument("--fn", help="override fn.name")
    run.add_argument("--dim", help="override fn.dim")
    run.add_argument("--seed", help="override run.seeds (comma separated)")
    run.add_argument("--max-evals", help="override run.max_evals")
    run.add_argument("--out", help="override run.out (output directory)")
    run.add_argument("--workers", help="override run.workers")
    sub.add_parser("list-algos", help="list algorithm ids and their parameters")
    sub.add_parser("list-fns", help="list benchmark functions")
    return ap


def _list_algos() -> None:
    for algo in ALGORITHMS.values():
        kinds = "/".join(algo.spaces)
        print(f"{algo.id:14s} {algo.summary} [{kinds}]")
        if algo.params:
            print(f"{'':14s}   params: {', '.join(algo.params)}")


def _list_fns() -> None:
    for b in BENCHMARKS.values():
        box = "{0,1}^d" if b.default_bounds[0] is None else f"[{b.default_bounds[0]}, {b.default_bounds[1]}]^d"
        print(f"{b.name:12s} {b.space_kind:10s} {box}")


def _run(args) -> int:
    overrides = {key: value for key, value in (
        ("algo.id", args.algo), ("fn.name", args.fn), ("fn.dim", args.dim), ("run.seeds", args.seed),
        ("run.max_evals", args.max_evals), ("run.out", args.out), ("run.workers", args.workers),
    ) if value is not None}
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as err:
        print(f"dfo: cannot read config: {err}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text, overrides)
        validate(cfg)
    except ConfigError as err:
        where = args.config or "<flags>"
        print(f"dfo: {where}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    for line in serialize(cfg).splitlines():
        print(f"# {line}")
    try:
        traces = run_experiment(cfg)
    except ConfigError as err:
        print(f"dfo: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonFiniteLoss, CovarianceDegenerate, DfoError) as err:
        print(f"dfo: run failed: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as err:
        print(f"dfo: cannot write trace: {err}", file=sys.stderr)
        return EXIT_IO
    for t in traces:
        print(f"seed={t.seed} best_loss={t.best.loss:.17g} evals={t.total_evals} stop={t.stop_reason}")
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-algos":
        _list_algos()
        return EXIT_OK
    if args.command == "list-fns":
        _list_fns()
        return EXIT_OK
    return _run(args)


if __name__ == "__main__":
    sys.exit(main())
