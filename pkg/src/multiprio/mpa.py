"""Motion-primitive automaton (MPA) and offline reachable sets.

Automaton states are (speed level, steering level) pairs.  A primitive moves
between two states over one step time with linearly ramped speed and
steering; its trajectory is stored in the local frame of its start pose so
primitives chain by rigid transformation without drift.  The update function
only admits a primitive at horizon position ``l`` if a standstill state can
still be reached before the horizon ends.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import VehicleParams, integrate
from .geometry import (PreparedPolygons, compose, convex_hull, pad_polygon, rectangle,
                       transform, transform_many)

_EPS = 1e-9


class MPAConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MPAConfig:
    speeds: Tuple[float, ...] = (0.0, 0.4, 0.8, 1.2)
    steerings: Tuple[float, ...] = (-0.3, -0.15, 0.0, 0.15, 0.3)
    step_time: float = 0.2
    max_accel: float = 2.0
    max_steer_rate: float = 0.75
    horizon: int = 6
    n_samples: int = 5
    safety_margin: float = 0.01
    vehicle: VehicleParams = field(default_factory=VehicleParams)

    def __post_init__(self):
        object.__setattr__(self, "speeds", tuple(float(v) for v in self.speeds))
        object.__setattr__(self, "steerings", tuple(float(d) for d in self.steerings))
        if isinstance(self.vehicle, dict):
            object.__setattr__(self, "vehicle", VehicleParams(**self.vehicle))


@dataclass(frozen=True)
class MotionPrimitive:
    id: int
    start: int
    end: int
    inputs: Tuple[float, float]
    states: np.ndarray  # (n_samples, 5) local-frame samples, first at the origin
    occupancy: np.ndarray  # (n, 2) convex hull of the swept footprint, local frame

    @property
    def poses(self) -> np.ndarray:
        return self.states[:, :3]

    @property
    def end_pose(self) -> np.ndarray:
        return self.states[-1, :3]


def primitive_occupancy(prim: MotionPrimitive, pose) -> np.ndarray:
    """The primitive's swept polygon placed at a world pose."""
    return transform(prim.occupancy, pose)


class MotionPrimitiveAutomaton:
    def __init__(self, config: MPAConfig, primitives: Sequence[MotionPrimitive]):
        self.config = config
        self.states: List[Tuple[float, float]] = [
            (v, d) for v in config.speeds for d in config.steerings]
        self.primitives = list(primitives)
        self.outgoing: Dict[int, List[int]] = {q: [] for q in range(len(self.states))}
        for p in self.primitives:
            self.outgoing[p.start].append(p.id)
        self.steps_to_stop = self._steps_to_stop()
        self._admissible = {
            (q, l): [s for s in self.outgoing[q] if self.gamma(q, s, l) is not None]
            for q in self.outgoing for l in range(config.horizon)}
        self._admissible_arr = {key: np.array(v, dtype=np.int64)
                                for key, v in self._admissible.items()}
        self.primitive_ends = np.array([p.end for p in self.primitives], dtype=np.int64)
        self._reach_cache: Dict[int, List[np.ndarray]] = {}

    # -- automaton structure -------------------------------------------------
    @property
    def horizon(self) -> int:
        return self.config.horizon

    @property
    def step_time(self) -> float:
        return self.config.step_time

    def state_index(self, v: float, delta: float) -> int:
        for q, (sv, sd) in enumerate(self.states):
            if abs(sv - v) < 1e-9 and abs(sd - delta) < 1e-9:
                return q
        raise KeyError(f"no automaton state with v={v}, delta={delta}")

    @property
    def initial_state(self) -> int:
        d0 = min(self.config.steerings, key=abs)
        return self.state_index(self.config.speeds[0], d0)

    @property
    def final_states(self) -> frozenset:
        return frozenset(q for q, (v, _) in enumerate(self.states) if abs(v) < _EPS)

    def is_final(self, q: int) -> bool:
        return abs(self.states[q][0]) < _EPS

    def _steps_to_stop(self) -> List[float]:
        dist = [0 if self.is_final(q) else np.inf for q in range(len(self.states))]
        changed = True
        while changed:
            changed = False
            for p in self.primitives:
                if dist[p.end] + 1 < dist[p.start]:
                    dist[p.start] = dist[p.end] + 1
                    changed = True
        return dist

    def gamma(self, q: int, prim_id: int, step: int) -> Optional[int]:
        """Successor state, or ``None`` if the primitive is not admissible."""
        p = self.primitives[prim_id]
        if p.start != q or not 0 <= step < self.horizon:
            return None
        if self.steps_to_stop[p.end] > self.horizon - 1 - step:
            return None
        return p.end

    def admissible(self, q: int, step: int) -> List[int]:
        return self._admissible[(q, step)]

    def admissible_array(self, q: int, step: int) -> np.ndarray:
        return self._admissible_arr[(q, step)]

    def stand_still(self, q: int) -> int:
        for s in self.outgoing[q]:
            p = self.primitives[s]
            if p.end == q and self.is_final(q):
                return s
        raise KeyError(f"state {q} has no stand-still primitive")

    @cached_property
    def footprint(self) -> np.ndarray:
        veh, m = self.config.vehicle, self.config.safety_margin
        return rectangle(veh.length + 2 * m, veh.width + 2 * m)

    @cached_property
    def max_occupancy_vertices(self) -> int:
        return max(len(p.occupancy) for p in self.primitives)

    @cached_property
    def padded_occupancy(self) -> np.ndarray:
        n = self.max_occupancy_vertices
        return np.stack([pad_polygon(p.occupancy, n) for p in self.primitives])

    @cached_property
    def prepared_occupancy(self) -> PreparedPolygons:
        return PreparedPolygons(self.padded_occupancy)

    @cached_property
    def end_poses(self) -> np.ndarray:
        return np.stack([p.end_pose for p in self.primitives])

    # -- reachable sets --------------------------------------------------------
    def reachable_polygons(self, q0: int) -> List[np.ndarray]:
        """Per horizon step, a convex polygon (local frame) covering all occupancies."""
        if q0 not in self._reach_cache:
            self._reach_cache[q0] = self._compute_reachable(q0)
        return self._reach_cache[q0]

    def _compute_reachable(self, q0: int) -> List[np.ndarray]:
        poses = {q0: np.zeros((1, 3))}
        polys = []
        for step in range(self.horizon):
            points = []
            nxt: Dict[int, List[np.ndarray]] = {}
            for q, pset in poses.items():
                for s in self.admissible(q, step):
                    p = self.primitives[s]
                    occ = transform_many(p.occupancy, pset).reshape(-1, 2)
                    points.append(convex_hull(occ) if len(occ) > 64 else occ)
                    ends = compose(pset, np.broadcast_to(p.end_pose, pset.shape))
                    nxt.setdefault(p.end, []).append(ends)
            polys.append(convex_hull(np.vstack(points)))
            poses = {q: _unique_poses(np.vstack(arrs)) for q, arrs in nxt.items()}
        return polys

    # -- serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        return {
            "config": cfg,
            "states": [list(s) for s in self.states],
            "primitives": [
                {"id": p.id, "start": p.start, "end": p.end, "inputs": list(p.inputs),
                 "states": p.states.tolist(), "occupancy": p.occupancy.tolist()}
                for p in self.primitives
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "MotionPrimitiveAutomaton":
        cfg = dict(doc["config"])
        cfg["vehicle"] = VehicleParams(**cfg["vehicle"])
        config = MPAConfig(**cfg)
        prims = [MotionPrimitive(d["id"], d["start"], d["end"], tuple(d["inputs"]),
                                 np.array(d["states"]), np.array(d["occupancy"]))
                 for d in doc["primitives"]]
        return cls(config, prims)

    @classmethod
    def from_json(cls, text: str) -> "MotionPrimitiveAutomaton":
        return cls.from_dict(json.loads(text))


def _unique_poses(poses: np.ndarray) -> np.ndarray:
    key = np.round(poses, 9)
    key[:, 2] = np.mod(key[:, 2], 2 * np.pi)
    _, idx = np.unique(key, axis=0, return_index=True)
    return poses[np.sort(idx)]


def _primitive(config: MPAConfig, pid: int, start: int, end: int,
               s0: Tuple[float, float], s1: Tuple[float, float]) -> MotionPrimitive:
    T = config.step_time
    u = np.array([(s1[0] - s0[0]) / T, (s1[1] - s0[1]) / T])
    times = np.linspace(0.0, T, config.n_samples)
    x = np.array([0.0, 0.0, 0.0, s0[0], s0[1]])
    samples = [x]
    for t0, t1 in zip(times[:-1], times[1:]):
        x = integrate(x, u, t1 - t0, config.vehicle)
        samples.append(x)
    states = np.array(samples)
    # snap ramp endpoints to the automaton levels exactly
    states[-1, 3], states[-1, 4] = s1
    if np.allclose(states[:, :2], 0.0) and np.allclose(states[:, 2], 0.0):
        states[:, :3] = 0.0
    veh, m = config.vehicle, config.safety_margin
    body = rectangle(veh.length + 2 * m, veh.width + 2 * m)
    occ = convex_hull(transform_many(body, states[:, :3]).reshape(-1, 2))
    return MotionPrimitive(pid, start, end, (float(u[0]), float(u[1])), states, occ)


def generate_mpa(config: MPAConfig = None) -> MotionPrimitiveAutomaton:
    config = config or MPAConfig()
    if not config.speeds or abs(config.speeds[0]) > _EPS:
        raise MPAConfigError("speed levels must start at 0 (standstill)")
    if list(config.speeds) != sorted(config.speeds):
        raise MPAConfigError("speed levels must be ascending")
    if config.horizon < 1 or config.n_samples < 2:
        raise MPAConfigError("horizon >= 1 and n_samples >= 2 required")
    states = [(v, d) for v in config.speeds for d in config.steerings]
    dv_max = config.max_accel * config.step_time + _EPS
    dd_max = config.max_steer_rate * config.step_time + _EPS
    prims = []
    for a, s0 in enumerate(states):
        for b, s1 in enumerate(states):
            if abs(s1[0] - s0[0]) <= dv_max and abs(s1[1] - s0[1]) <= dd_max:
                prims.append(_primitive(config, len(prims), a, b, s0, s1))
    mpa = MotionPrimitiveAutomaton(config, prims)
    stuck = [states[q] for q, d in enumerate(mpa.steps_to_stop) if d > config.horizon]
    if stuck:
        raise MPAConfigError(
            f"states {stuck} cannot reach standstill within horizon {config.horizon}")
    return mpa
