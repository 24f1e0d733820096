"""Receding-horizon networked simulation with prioritized planning.

Every step the coupling graph is recomputed from reachable sets.  A
strategy fixes one prioritization (or, for ``optimal``, every acyclic
orientation); ``explore`` builds a Latin-square schedule from the retained
prioritization and solves all of its rows, one agent class per time slot.
The row with the lowest networked cost is applied.

When an agent's search fails in a row, every agent in its coupling-graph
component reuses its previous plan shifted by one step.  Previous plans are
pairwise collision-free and uncoupled agents cannot meet, so the executed
motion stays collision-free.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import timing
from .coupling import (CapacityError, ComputationSequence, DirectedCouplingGraph,
                       UndirectedCouplingGraph, connected_components,
                       enumerate_acyclic_orientations, find_agent_classes, orient)
from .geometry import batch_intersects, bbox, pad_polygon, transform_many
from .mpa import MotionPrimitiveAutomaton
from .planner import (Plan, PlanningProblem, fallback_plan, mcts_plan, standstill_plan,
                      trajectory_cost)
from .prioritization import (p_color, p_constant, p_constraint, p_random,
                             priorities_from_sequence)
from .roads import Lane
from .schedule import build_schedule, row_sequences

log = logging.getLogger(__name__)

SINGLE_STRATEGIES = ("constant", "random", "constraint", "color", "optimal")
MAX_OPTIMAL_ORIENTATIONS = 720


class CollisionError(RuntimeError):
    def __init__(self, message: str, dump: dict):
        super().__init__(message)
        self.dump = dump


class ScenarioError(ValueError):
    pass


@dataclass
class Vehicle:
    lane: Lane
    speed: float  # reference speed [m/s]
    pose: np.ndarray
    state: int
    s: float  # progress along the lane [m]
    plan: Optional[Plan] = None


@dataclass
class RowResult:
    plans: Dict[int, Plan]
    times: Dict[int, float]
    fallback: Dict[int, bool]
    received: Dict[int, List[int]]  # agent -> predecessors whose plans it used

    @property
    def cost(self) -> float:
        return float(sum(p.cost for p in self.plans.values()))


@dataclass
class StepRecord:
    k: int
    strategy: str
    edges: List[Tuple[int, int]]
    n_classes: int
    row_costs: List[float]
    selected: int
    networked_cost: float
    networked_time: float
    solve_times: Dict[str, float]
    fallback: Dict[int, bool]
    sequences: List[List[List[int]]] = field(default_factory=list)
    schedule: Optional[List[List[int]]] = None
    schedule_restarts: int = 0
    messages: int = 0
    message_bytes: int = 0
    collision_free: bool = True
    plans: Dict[int, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "k": self.k, "strategy": self.strategy,
            "edges": [list(e) for e in self.edges], "n_classes": self.n_classes,
            "row_costs": self.row_costs, "selected": self.selected,
            "networked_cost": self.networked_cost, "networked_time": self.networked_time,
            "solve_times": self.solve_times,
            "fallback": {str(i): f for i, f in sorted(self.fallback.items())},
            "sequences": self.sequences, "schedule": self.schedule,
            "schedule_restarts": self.schedule_restarts,
            "messages": self.messages, "message_bytes": self.message_bytes,
            "collision_free": self.collision_free,
            "plans": {str(i): p for i, p in sorted(self.plans.items())},
        }


class Mailbox:
    """Per-(row, agent) trajectory messages with send-after-solve semantics."""

    def __init__(self):
        self._box: Dict[Tuple[int, int], np.ndarray] = {}
        self.messages = 0
        self.bytes = 0

    def send(self, row: int, agent: int, occupancy: np.ndarray):
        self._box[(row, agent)] = occupancy
        self.messages += 1
        self.bytes += occupancy.nbytes + 8  # trajectory plus cost

    def receive(self, row: int, agent: int) -> np.ndarray:
        return self._box[(row, agent)]


def compute_coupling(poses: Sequence, states: Sequence[int],
                     mpa: MotionPrimitiveAutomaton) -> UndirectedCouplingGraph:
    """Couple agents whose step-wise reachable sets intersect within the horizon."""
    n = len(poses)
    H = mpa.horizon
    world = []
    for pose, q in zip(poses, states):
        world.append([transform_many(p, np.asarray(pose)[None])[0]
                      for p in mpa.reachable_polygons(q)])
    size = max(len(p) for polys in world for p in polys)
    stacked = np.array([[pad_polygon(p, size) for p in polys] for polys in world])
    boxes = bbox(stacked)  # (n, H, 4)
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            bi, bj = boxes[i], boxes[j]
            near = ((bi[:, 0] <= bj[:, 2]) & (bj[:, 0] <= bi[:, 2])
                    & (bi[:, 1] <= bj[:, 3]) & (bj[:, 1] <= bi[:, 3]))
            for l in np.flatnonzero(near):
                if batch_intersects(stacked[i, l][None], stacked[j, l][None])[0, 0]:
                    edges.add((i + 1, j + 1))
                    break
    return UndirectedCouplingGraph(n, frozenset(edges))


class Simulation:
    """World state plus the per-step prioritized planning procedure."""

    def __init__(self, mpa: MotionPrimitiveAutomaton, vehicles: Sequence[Tuple[Lane, float, float]],
                 budget: int = 500, seed: int = 0, max_classes: Optional[int] = None,
                 timing_mode: str = "synthetic", expansion_time: float = 1e-4):
        self.mpa = mpa
        self.budget = budget
        self.seed = seed
        self.max_classes = max_classes
        if timing_mode not in ("synthetic", "wall"):
            raise ValueError(f"unknown timing mode {timing_mode!r}")
        self.timing_mode = timing_mode
        self.expansion_time = expansion_time
        self.k = 0
        self.vehicles: List[Vehicle] = []
        for lane, start_s, speed in vehicles:
            pose = lane.pose_at(start_s)
            q = mpa.initial_state
            v = Vehicle(lane, speed, pose, q, float(start_s))
            v.plan = standstill_plan(pose, q, mpa)
            self.vehicles.append(v)
        self.retained = p_constant(self.n_agents)
        self.executed: List[np.ndarray] = []  # per step (n_agents, n_samples, 3)
        self._validate_initial()

    @property
    def n_agents(self) -> int:
        return len(self.vehicles)

    def _validate_initial(self):
        fp = self.mpa.footprint
        polys = [transform_many(fp, v.pose[None])[0] for v in self.vehicles]
        for i in range(self.n_agents):
            for j in range(i + 1, self.n_agents):
                if batch_intersects(polys[i][None], polys[j][None])[0, 0]:
                    raise ScenarioError(f"vehicles {i + 1} and {j + 1} overlap initially")
            walls = self.vehicles[i].lane.boundaries_near(self.vehicles[i].pose[:2], 0.5)
            if len(walls) and batch_intersects(polys[i][None], walls).any():
                raise ScenarioError(f"vehicle {i + 1} starts on its lane boundary")

    # -- per-agent planning data ----------------------------------------------
    def reference(self, i: int) -> np.ndarray:
        v = self.vehicles[i - 1]
        return v.lane.reference(v.s, v.speed, self.mpa.step_time, self.mpa.horizon)

    def _static_obstacles(self, i: int, pad: int) -> List[np.ndarray]:
        """Own-lane boundary pieces near the step-wise reachable set, per horizon step."""
        v = self.vehicles[i - 1]
        reach = [transform_many(p, v.pose[None])[0] for p in self.mpa.reachable_polygons(v.state)]
        radius = float(max(np.linalg.norm(p - v.pose[:2], axis=1).max() for p in reach))
        walls = v.lane.boundaries_near(v.pose[:2], radius)
        walls = np.array([pad_polygon(w, pad) for w in walls]).reshape(-1, pad, 2)
        wb = bbox(walls) if len(walls) else np.zeros((0, 4))
        out = []
        for p in reach:
            lo, hi = p.min(0), p.max(0)
            keep = ((wb[:, 0] <= hi[0]) & (wb[:, 2] >= lo[0])
                    & (wb[:, 1] <= hi[1]) & (wb[:, 3] >= lo[1]))
            out.append(walls[keep])
        return out

    def coupling(self) -> UndirectedCouplingGraph:
        return compute_coupling([v.pose for v in self.vehicles],
                                [v.state for v in self.vehicles], self.mpa)

    # -- solving ---------------------------------------------------------------
    def _solve_time(self, plan: Plan, wall: float) -> float:
        if self.timing_mode == "wall":
            return wall
        return plan.expansions * self.expansion_time

    def solve_rows(self, graph: UndirectedCouplingGraph, dags: Sequence[DirectedCouplingGraph],
                   sequences: Sequence[ComputationSequence], k: int,
                   mailbox: Optional[Mailbox] = None) -> List[RowResult]:
        """Solve all rows slot by slot; a slot is a barrier across rows."""
        mailbox = mailbox or Mailbox()
        H = self.mpa.horizon
        pad = max(4, self.mpa.max_occupancy_vertices)
        refs = {i: self.reference(i) for i in range(1, self.n_agents + 1)}
        static = {i: self._static_obstacles(i, pad) for i in refs}
        results = [RowResult({}, {}, {}, {}) for _ in dags]
        failed: List[set] = [set() for _ in dags]
        n_slots = max(len(s) for s in sequences)
        for slot in range(n_slots):
            for q, (dag, seq) in enumerate(zip(dags, sequences)):
                if slot >= len(seq):
                    continue
                for i in seq[slot]:
                    preds = sorted(dag.predecessors(i))
                    msgs = [mailbox.receive(q, j) for j in preds]
                    obstacles = []
                    for l in range(H):
                        dyn = [pad_polygon(m[l], pad) for m in msgs]
                        obstacles.append(np.concatenate([static[i][l], np.array(dyn).reshape(-1, pad, 2)]))
                    veh = self.vehicles[i - 1]
                    problem = PlanningProblem(veh.pose, veh.state, refs[i], obstacles)
                    t0 = time.perf_counter()
                    plan = mcts_plan(problem, self.mpa, self.budget, seed=[self.seed, k, i])
                    wall = time.perf_counter() - t0
                    res = results[q]
                    res.times[i] = self._solve_time(plan, wall)
                    res.received[i] = preds
                    if not plan.feasible:
                        failed[q].add(i)
                        plan = fallback_plan(veh.plan, self.mpa, refs[i])
                    res.plans[i] = plan
                    mailbox.send(q, i, plan.occupancies(self.mpa))
        comps = connected_components(graph)
        for q, res in enumerate(results):
            fall = set()
            for comp in comps:
                if failed[q] & set(comp):
                    fall.update(comp)
            for i in res.plans:
                res.fallback[i] = i in fall
                if i in fall and not res.plans[i].fallback:
                    res.plans[i] = fallback_plan(self.vehicles[i - 1].plan, self.mpa, refs[i])
        self._last_mailbox = mailbox
        return results

    # -- steps -----------------------------------------------------------------
    def decide(self, strategy: str):
        """Plan one step without changing the world: ``(record, plans, retained)``."""
        if strategy == "explore":
            return self._step_explore()
        if strategy in SINGLE_STRATEGIES:
            rec, plans = self._step_single(strategy)
            return rec, plans, self.retained
        raise ValueError(f"unknown strategy {strategy!r}")

    def step(self, strategy: str) -> StepRecord:
        rec, plans, retained = self.decide(strategy)
        self._apply(plans, rec)
        self.retained = retained
        self.k += 1
        return rec

    def _step_explore(self):
        k = self.k
        graph = self.coupling()
        initial = find_agent_classes(orient(graph, self.retained))
        schedule = build_schedule(len(initial), k)
        sequences = row_sequences(schedule, initial)
        if self.max_classes is not None:
            sequences = sequences[:max(1, self.max_classes)]
        prios = [priorities_from_sequence(s, self.n_agents) for s in sequences]
        dags = [orient(graph, p) for p in prios]
        mailbox = Mailbox()
        rows = self.solve_rows(graph, dags, sequences, k, mailbox)
        costs = [r.cost for r in rows]
        sel = int(np.argmin(costs))
        times = {(i, q): t for q, r in enumerate(rows) for i, t in r.times.items()}
        ntime = timing.networked_computation_time("explore", dags, sequences, times)
        rec = StepRecord(
            k, "explore", graph.sorted_edges(), len(initial), costs, sel, costs[sel], ntime,
            {f"{i},{q}": t for (i, q), t in sorted(times.items())}, rows[sel].fallback,
            [[list(c) for c in s] for s in sequences], schedule.matrix.tolist(),
            schedule.restarts, mailbox.messages, mailbox.bytes)
        return rec, rows[sel].plans, prios[sel]

    def _single_dags(self, strategy: str, graph: UndirectedCouplingGraph):
        if strategy == "optimal":
            try:
                dags = enumerate_acyclic_orientations(graph)
            except CapacityError as exc:
                raise CapacityError(f"optimal strategy: {exc}") from exc
            if len(dags) > MAX_OPTIMAL_ORIENTATIONS:
                raise CapacityError(
                    f"optimal strategy: {len(dags)} orientations exceed cap "
                    f"{MAX_OPTIMAL_ORIENTATIONS}")
            return dags
        if strategy == "constant":
            p = p_constant(self.n_agents)
        elif strategy == "random":
            p = p_random(self.n_agents, self.k, self.seed)
        elif strategy == "constraint":
            p = p_constraint(graph)
        elif strategy == "color":
            p = p_color(graph)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        return [orient(graph, p)]

    def _step_single(self, strategy: str):
        k = self.k
        graph = self.coupling()
        dags = self._single_dags(strategy, graph)
        costs, ntime, results, seqs = [], 0.0, [], []
        mailbox = Mailbox()
        for q, dag in enumerate(dags):
            seq = find_agent_classes(dag)
            (res,) = self.solve_rows(graph, [dag], [seq], k, Mailbox())
            results.append(res)
            seqs.append(seq)
            costs.append(res.cost)
            # orientations are evaluated one after another
            ntime += timing.networked_computation_time("single", dag, times=res.times)
            mailbox.messages += self._last_mailbox.messages
            mailbox.bytes += self._last_mailbox.bytes
        sel = int(np.argmin(costs))
        rec = StepRecord(
            k, strategy, graph.sorted_edges(), len(seqs[sel]), costs, sel, costs[sel], ntime,
            {f"{i},{sel}": t for i, t in sorted(results[sel].times.items())},
            results[sel].fallback, [[list(c) for c in seqs[sel]]], None, 0,
            mailbox.messages, mailbox.bytes)
        return rec, results[sel].plans

    def _apply(self, plans: Dict[int, Plan], rec: StepRecord):
        """Execute the first primitive of every plan and audit the motion."""
        samples = []
        for i in range(1, self.n_agents + 1):
            plan = plans[i]
            if not self.mpa.is_final(plan.end_state):
                raise CollisionError(f"plan of agent {i} does not end at standstill",
                                     {"k": self.k, "agent": i})
            samples.append(plan.sampled_poses(self.mpa)[0])
        samples = np.array(samples)
        rec.plans = {i: plans[i].to_dict() for i in sorted(plans)}
        self._audit(samples, rec)
        for i, v in enumerate(self.vehicles, start=1):
            plan = plans[i]
            v.pose = plan.poses[0].copy()
            v.state = plan.states[0]
            v.s = v.lane.project(v.pose[:2], v.s)
            v.plan = plan
        self.executed.append(samples)

    def _audit(self, samples: np.ndarray, rec: StepRecord):
        fp = self.mpa.footprint
        n, m = samples.shape[:2]
        for t in range(m):
            polys = transform_many(fp, samples[:, t])
            hits = batch_intersects(polys, polys)
            np.fill_diagonal(hits, False)
            if hits.any():
                i, j = (int(x) + 1 for x in np.argwhere(hits)[0])
                rec.collision_free = False
                raise CollisionError(
                    f"agents {i} and {j} collide at step {self.k}, sample {t}",
                    {"k": self.k, "agents": [i, j], "record": rec.to_dict(),
                     "poses": samples.tolist()})


def run_steps(sim: Simulation, strategy: str, n_steps: int) -> List[StepRecord]:
    return [sim.step(strategy) for _ in range(n_steps)]
