"""Command-line entry point: ``multiprio <command> ...``.

Errors are reported on stderr as one JSON object and a nonzero exit code.
Set ``MULTIPRIO_LOG`` (e.g. ``DEBUG``) to change the log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import experiment
from .config import ConfigError, parse_config
from .coupling import CapacityError
from .mapf import GridInstance, classify_solvability
from .prioritization import STRATEGIES
from .schedule import build_schedule, unique_schedule_sets
from .sim import CollisionError, ScenarioError

EXIT_ERROR = 1
EXIT_COLLISION = 2


class CLIError(Exception):
    def __init__(self, kind: str, message: str, details=None, code: int = EXIT_ERROR):
        super().__init__(message)
        self.kind, self.details, self.code = kind, details, code


def _load(path: str, seed: Optional[int]):
    try:
        cfg = parse_config(path)
    except FileNotFoundError as exc:
        raise CLIError("file_not_found", str(exc)) from exc
    except ConfigError as exc:
        raise CLIError("config_error", "invalid configuration", exc.violations) from exc
    if seed is not None:
        cfg = cfg.with_overrides(seeds=[seed])
    return cfg


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_simulate(args) -> int:
    cfg = _load(args.config, args.seed)
    out = Path(args.out)
    for seed in cfg.seeds:
        try:
            report = experiment.run_experiment(cfg, seed)
        except CollisionError as exc:
            raise CLIError("collision", str(exc), exc.dump, EXIT_COLLISION) from exc
        stem = out / f"{cfg.name}_{report['strategy']}_seed{seed}"
        _write(stem.with_suffix(".json"), experiment.report_json(report))
        _write(stem.with_suffix(".csv"), experiment.report_csv(report))
        _write(stem.with_suffix(".jsonl"), experiment.steps_jsonl(report))
        print(json.dumps({"seed": seed, "strategy": report["strategy"],
                          "total_cost": report["total_cost"], "report": str(stem) + ".json"}))
    return 0


def cmd_compare(args) -> int:
    cfg = _load(args.config, args.seed)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    bad = [s for s in strategies if s not in STRATEGIES]
    if bad:
        raise CLIError("config_error", f"unknown strategies {bad}",
                       {"valid": list(STRATEGIES)})
    try:
        results = experiment.compare(cfg, strategies)
    except CollisionError as exc:
        raise CLIError("collision", str(exc), exc.dump, EXIT_COLLISION) from exc
    table = experiment.normalized_cost_table(results)
    if args.out:
        _write(Path(args.out), table)
    sys.stdout.write(table)
    return 0


def cmd_schedule(args) -> int:
    if args.enumerate is not None:
        print(len(unique_schedule_sets(args.enumerate)))
        return 0
    if args.classes is None:
        raise CLIError("usage", "either --classes or --enumerate is required")
    sched = build_schedule(args.classes, args.seed)
    for row in sched.matrix.tolist():
        print(" ".join(str(c + 1) for c in row))
    return 0


def cmd_mapf(args) -> int:
    try:
        inst = GridInstance.load(args.instance)
    except FileNotFoundError as exc:
        raise CLIError("file_not_found", str(exc)) from exc
    print(json.dumps(classify_solvability(inst).to_dict()))
    return 0


def cmd_plot_data(args) -> int:
    try:
        report = json.loads(Path(args.report).read_text())
    except FileNotFoundError as exc:
        raise CLIError("file_not_found", str(exc)) from exc
    out = Path(args.out) if args.out else Path(args.report).with_suffix("")
    for name, text in experiment.plot_series(report).items():
        path = out.parent / f"{out.name}_{name}.csv"
        _write(path, text)
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multiprio", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a closed-loop experiment")
    s.add_argument("config")
    s.add_argument("--seed", type=int, help="override the configured seeds")
    s.add_argument("--out", default="reports")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("compare", help="run several strategies with shared seeds")
    s.add_argument("config")
    s.add_argument("--strategies", default="constant,explore")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="also write the table to this CSV file")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("schedule", help="print a computation schedule matrix")
    s.add_argument("--classes", type=int)
    s.add_argument("--seed", type=int, default=0, help="time-step seed")
    s.add_argument("--enumerate", type=int, metavar="N",
                   help="print the number of unique row sets of N x N schedules")
    s.set_defaults(func=cmd_schedule)

    s = sub.add_parser("mapf", help="classify a grid MAPF instance")
    s.add_argument("instance", help="JSON sidecar of the instance")
    s.set_defaults(func=cmd_mapf)

    s = sub.add_parser("plot-data", help="per-figure CSV series from a report")
    s.add_argument("report")
    s.add_argument("--out", help="output prefix")
    s.set_defaults(func=cmd_plot_data)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("MULTIPRIO_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        err = {"error": exc.kind, "message": str(exc)}
        if exc.details is not None:
            err["details"] = exc.details
        sys.stderr.write(json.dumps(err, default=str) + "\n")
        return exc.code
    except (CapacityError, ScenarioError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
