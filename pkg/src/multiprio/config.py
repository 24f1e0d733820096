"""Scenario configuration files (JSON, ``"schema": 1``).

Example::

    {
      "schema": 1,
      "map": {"lanes": {"a": {"loop": {"center": [0, 0], "length": 4, "height": 2,
                                       "radius": 0.5}}}},
      "vehicles": [{"lane": "a", "start_s": 0.0, "speed": 0.8}],
      "step_time": 0.2, "horizon": 6, "duration": 7.0,
      "strategy": "explore", "seeds": [0], "budget": 300
    }

A lane is either a ``loop`` (rounded rectangle, optionally rotated by
``angle`` degrees about its center) or an explicit ``start`` pose plus
``segments`` of ``["line", length]`` and ``["arc", radius, degrees]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Tuple

from .mpa import MPAConfig
from .prioritization import STRATEGIES
from .roads import Lane, rounded_rectangle

SCHEMA_VERSION = 1
TIMING_MODES = ("synthetic", "wall")
_KNOWN_KEYS = {"schema", "name", "n_vehicles", "map", "vehicles", "step_time", "horizon",
               "duration", "strategy", "seeds", "budget", "max_classes", "timing",
               "expansion_time", "mpa"}


class ConfigError(ValueError):
    """Raised with every violation found in a configuration."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class VehicleSpec:
    lane: str
    start_s: float
    speed: float


@dataclass
class ScenarioConfig:
    lanes: dict
    vehicles: List[VehicleSpec]
    step_time: float = 0.2
    horizon: int = 6
    duration: float = 7.0
    strategy: str = "explore"
    seeds: List[int] = field(default_factory=lambda: [0])
    budget: int = 300
    max_classes: Optional[int] = None
    timing: str = "synthetic"
    expansion_time: float = 1e-4
    mpa: MPAConfig = field(default_factory=MPAConfig)
    name: str = "scenario"

    @property
    def n_vehicles(self) -> int:
        return len(self.vehicles)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.step_time))

    def vehicle_setup(self) -> List[Tuple[Lane, float, float]]:
        return [(self.lanes[v.lane], v.start_s, v.speed) for v in self.vehicles]

    def with_overrides(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)


def _lane_from_doc(name: str, doc: dict) -> Lane:
    width = float(doc.get("width", 0.4))
    if "loop" in doc:
        lp = doc["loop"]
        cx, cy = lp["center"]
        start, segs = rounded_rectangle(cx, cy, lp["length"], lp["height"], lp["radius"],
                                        lp.get("clockwise", False))
        a = math.radians(lp.get("angle", 0.0))
        dx, dy = start[0] - cx, start[1] - cy
        start = (cx + math.cos(a) * dx - math.sin(a) * dy,
                 cy + math.sin(a) * dx + math.cos(a) * dy, start[2] + a)
        return Lane(name, start, segs, width=width)
    return Lane(name, tuple(doc["start"]), [tuple(s) for s in doc["segments"]], width=width)


def _is_multiple(a: float, b: float) -> bool:
    r = a / b
    return abs(r - round(r)) < 1e-9 and round(r) > 0


def config_from_dict(doc: dict) -> ScenarioConfig:
    errors: List[str] = []
    if doc.get("schema") != SCHEMA_VERSION:
        errors.append(f"schema: expected {SCHEMA_VERSION}, got {doc.get('schema')!r}")
    for key in sorted(set(doc) - _KNOWN_KEYS):
        errors.append(f"{key}: unknown field")

    mpa_doc = dict(doc.get("mpa", {}))
    step_time = float(doc.get("step_time", 0.2))
    horizon = int(doc.get("horizon", 6))
    try:
        mpa = MPAConfig(step_time=step_time, horizon=horizon, **mpa_doc)
    except TypeError as exc:
        errors.append(f"mpa: {exc}")
        mpa = MPAConfig(step_time=step_time, horizon=horizon)

    strategy = doc.get("strategy", "explore")
    if strategy not in STRATEGIES:
        errors.append(f"strategy: unknown value {strategy!r}; valid options are "
                      f"{', '.join(STRATEGIES)}")
    timing = doc.get("timing", "synthetic")
    if timing not in TIMING_MODES:
        errors.append(f"timing: unknown value {timing!r}; valid options are "
                      f"{', '.join(TIMING_MODES)}")

    duration = float(doc.get("duration", 7.0))
    if step_time <= 0 or not _is_multiple(duration, step_time):
        errors.append(f"duration: {duration} is not an integral multiple of step_time {step_time}")

    seeds = doc.get("seeds", [0])
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        errors.append("seeds: expected a non-empty list of integers")
        seeds = [0]
    budget = doc.get("budget", 300)
    if not isinstance(budget, int) or budget < 1:
        errors.append("budget: expected a positive integer")
    max_classes = doc.get("max_classes")
    if max_classes is not None and (not isinstance(max_classes, int) or max_classes < 1):
        errors.append("max_classes: expected a positive integer or null")

    lanes = {}
    for name, ldoc in doc.get("map", {}).get("lanes", {}).items():
        try:
            lane = _lane_from_doc(name, ldoc)
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"map.lanes.{name}: invalid lane ({exc})")
            continue
        if not lane.is_closed:
            errors.append(f"map.lanes.{name}: path is not closed")
        lanes[name] = lane
    if not lanes:
        errors.append("map.lanes: at least one lane required")

    vehicles = []
    for idx, vdoc in enumerate(doc.get("vehicles", [])):
        where = f"vehicles[{idx}]"
        lane = vdoc.get("lane")
        if lane not in lanes:
            errors.append(f"{where}.lane: unknown lane {lane!r}")
        speed = float(vdoc.get("speed", 0.8))
        if not any(abs(speed - s) < 1e-9 for s in mpa.speeds):
            errors.append(f"{where}.speed: {speed} is not an MPA speed level {list(mpa.speeds)}")
        vehicles.append(VehicleSpec(lane, float(vdoc.get("start_s", 0.0)), speed))
    if not vehicles:
        errors.append("vehicles: at least one vehicle required")
    if "n_vehicles" in doc and doc["n_vehicles"] != len(vehicles):
        errors.append(f"n_vehicles: {doc['n_vehicles']} does not match {len(vehicles)} vehicles")

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        lanes=lanes, vehicles=vehicles, step_time=step_time, horizon=horizon,
        duration=duration, strategy=strategy, seeds=list(seeds), budget=budget,
        max_classes=max_classes, timing=timing,
        expansion_time=float(doc.get("expansion_time", 1e-4)), mpa=mpa,
        name=str(doc.get("name", "scenario")))


def parse_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON ({exc})"]) from exc
    return config_from_dict(doc)
