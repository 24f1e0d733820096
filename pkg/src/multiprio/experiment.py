"""Experiment orchestration: closed-loop runs, reports and CSV tables."""

from __future__ import annotations

import csv
import io
import json
import logging
from functools import lru_cache
from typing import Dict, List, Optional, Sequence

from .config import ScenarioConfig
from .mpa import MPAConfig, MotionPrimitiveAutomaton, generate_mpa
from .sim import Simulation, StepRecord

log = logging.getLogger(__name__)

CSV_COLUMNS = ("k", "networked_cost", "networked_time", "n_classes", "n_edges",
               "selected", "n_fallback")


@lru_cache(maxsize=8)
def automaton(config: MPAConfig) -> MotionPrimitiveAutomaton:
    return generate_mpa(config)


def make_simulation(config: ScenarioConfig, seed: int) -> Simulation:
    return Simulation(automaton(config.mpa), config.vehicle_setup(), budget=config.budget,
                      seed=seed, max_classes=config.max_classes, timing_mode=config.timing,
                      expansion_time=config.expansion_time)


def run_experiment(config: ScenarioConfig, seed: Optional[int] = None,
                   strategy: Optional[str] = None) -> dict:
    """Run one closed-loop experiment and return its report."""
    strategy = strategy or config.strategy
    seed = config.seeds[0] if seed is None else seed
    sim = make_simulation(config, seed)
    records: List[StepRecord] = []
    for _ in range(config.n_steps):
        records.append(sim.step(strategy))
        log.debug("step %d cost %.4f", records[-1].k, records[-1].networked_cost)
    return build_report(config, strategy, seed, records)


def build_report(config: ScenarioConfig, strategy: str, seed: int,
                 records: Sequence[StepRecord]) -> dict:
    steps = [r.to_dict() for r in records]
    return {
        "name": config.name,
        "strategy": strategy,
        "seed": seed,
        "n_vehicles": config.n_vehicles,
        "n_steps": len(records),
        "total_cost": float(sum(r.networked_cost for r in records)),
        "max_networked_time": max((r.networked_time for r in records), default=0.0),
        "total_networked_time": float(sum(r.networked_time for r in records)),
        "max_classes_seen": max((r.n_classes for r in records), default=0),
        "collision_free": all(r.collision_free for r in records),
        "steps": steps,
    }


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1) + "\n"


def steps_jsonl(report: dict) -> str:
    return "".join(json.dumps(s, sort_keys=True) + "\n" for s in report["steps"])


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def report_csv(report: dict) -> str:
    rows = []
    for s in report["steps"]:
        rows.append([s["k"], repr(s["networked_cost"]), repr(s["networked_time"]),
                     s["n_classes"], len(s["edges"]), s["selected"],
                     sum(bool(f) for f in s["fallback"].values())])
    return _csv(CSV_COLUMNS, rows)


def compare(config: ScenarioConfig, strategies: Sequence[str],
            seeds: Optional[Sequence[int]] = None) -> Dict[str, List[dict]]:
    """One run per strategy and seed; every strategy sees the same seeds."""
    seeds = list(seeds if seeds is not None else config.seeds)
    return {s: [run_experiment(config, seed, s) for seed in seeds] for s in strategies}


def normalized_cost_table(results: Dict[str, List[dict]]) -> str:
    """Total cost per strategy and seed, normalized by the constant strategy."""
    base = results.get("constant")
    rows = []
    for strategy, reports in results.items():
        for i, rep in enumerate(reports):
            ref = base[i]["total_cost"] if base else None
            norm = rep["total_cost"] / ref if ref else float("nan")
            rows.append([strategy, rep["seed"], repr(rep["total_cost"]), repr(norm),
                         repr(rep["total_networked_time"]), rep["max_classes_seen"]])
    return _csv(("strategy", "seed", "total_cost", "normalized_cost", "total_time",
                 "max_classes"), rows)


def plot_series(report: dict) -> Dict[str, str]:
    """Per-figure CSV series: cost, computation time and class count per step."""
    steps = report["steps"]
    return {
        "cost": _csv(("k", "networked_cost"), [[s["k"], repr(s["networked_cost"])] for s in steps]),
        "time": _csv(("k", "networked_time"), [[s["k"], repr(s["networked_time"])] for s in steps]),
        "levels": _csv(("k", "n_classes"), [[s["k"], s["n_classes"]] for s in steps]),
    }
