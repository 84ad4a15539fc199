"""Command-line entry point: ``bmsim run | validate | solve``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .carbon import emission_delta, write_emission_csv
from .dispatch import DispatchError, solve_dispatch, write_solution_csv
from .io import load_scenario
from .lp import MalformedProblem
from .model import ScenarioError
from .sweep import candidate_nodes, emit_reports, load_config, run_sweep

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("bmsim")


def _configure_logging() -> None:
    name = os.environ.get("BMSIM_LOG", "error").strip().lower()
    level = LOG_LEVELS.get(name)
    logging.basicConfig(level=level or logging.ERROR, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if level is None:
        # reported directly: the fallback level would hide a warning
        print(f"bmsim: ignoring BMSIM_LOG={name!r}; expected one of {', '.join(LOG_LEVELS)}", file=sys.stderr)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bmsim", description="Balancing-mechanism storage simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a base-versus-storage sweep")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--parallel", type=int, default=None, help="worker processes (overrides config)")
    run.add_argument("--out", type=Path, default=None, help="output directory (overrides config)")

    validate = sub.add_parser("validate", help="check a sweep config and its scenario without solving")
    validate.add_argument("--config", required=True, type=Path)

    solve = sub.add_parser("solve", help="solve a single scenario")
    solve.add_argument("--scenario", required=True, type=Path)
    solve.add_argument("--solution", required=True, type=Path)
    solve.add_argument("--emissions", type=Path, default=None,
                       help="also write the emission change against the storage-free case")
    return parser


def _run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.parallel is not None:
        overrides["parallel"] = args.parallel
    if args.out is not None:
        overrides["out"] = args.out
    if overrides:
        config = dataclasses.replace(config, **overrides)
    result = run_sweep(config)
    for path in emit_reports(result, config.out):
        log.info("wrote %s", path)
    failed = sum(1 for r in result.rows if r.error)
    if failed:
        log.warning("%d of %d cases failed; see the error column", failed, len(result.rows))
    return EXIT_OK


def _validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    scenario = load_scenario(config.scenario)
    if scenario.storage_fleet:
        raise ScenarioError("sweep scenarios must not already contain storage")
    nodes = candidate_nodes(config, scenario)
    print(f"ok: {len(config.technologies)} technologies x {len(config.sizes)} sizes x "
          f"{len(nodes)} nodes = {len(config.technologies) * len(config.sizes) * len(nodes)} cases")
    return EXIT_OK


def _solve(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    solution = solve_dispatch(scenario)
    write_solution_csv(solution, args.solution)
    print(f"objective_cost {solution.objective_cost!r}")
    if args.emissions is not None:
        base = solve_dispatch(dataclasses.replace(scenario, storage_fleet=()))
        write_emission_csv(emission_delta(base, solution), args.emissions)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = _parser().parse_args(argv)
    handler = {"run": _run, "validate": _validate, "solve": _solve}[args.command]
    try:
        return handler(args)
    except DispatchError as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except (ScenarioError, MalformedProblem, FileNotFoundError, ValueError) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
