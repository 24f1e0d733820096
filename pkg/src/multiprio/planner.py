"""Receding-horizon single-agent planner: tree search over the MPA.

The search grows a tree of primitive chains by expanding uniformly random
frontier vertices; each expansion generates every admissible, collision-free
child.  After the budget is spent, the cheapest complete chain (length H,
ending at standstill by construction of the automaton) is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .geometry import (PreparedPolygons, any_intersection, collision_free, compose,
                       transform_many)
from ._kernels import expand_children
from .mpa import MotionPrimitiveAutomaton

DEFAULT_BUDGET = 500


@dataclass
class PlanningProblem:
    pose: np.ndarray  # (3,) world pose of the CG
    state: int  # automaton state
    reference: np.ndarray  # (H, 2) reference positions for steps 1..H
    # per horizon step: (m, n, 2) padded convex keep-out polygons
    obstacles: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.pose = np.asarray(self.pose, dtype=float)
        self.reference = np.asarray(self.reference, dtype=float)
        if not self.obstacles:
            self.obstacles = [np.zeros((0, 3, 2)) for _ in range(len(self.reference))]
        if len(self.obstacles) != len(self.reference):
            raise ValueError("need one obstacle list per horizon step")


@dataclass
class Plan:
    feasible: bool
    start_pose: np.ndarray
    start_state: int
    primitives: List[int] = field(default_factory=list)
    poses: np.ndarray = None  # (H, 3) world poses after each step
    cost: float = float("inf")
    expansions: int = 0
    fallback: bool = False
    states: List[int] = field(default_factory=list)  # automaton state after each step

    @property
    def end_state(self) -> int:
        return self.states[-1] if self.states else self.start_state

    def bind(self, mpa: MotionPrimitiveAutomaton) -> "Plan":
        self.states = [mpa.primitives[s].end for s in self.primitives]
        return self

    def sampled_poses(self, mpa: MotionPrimitiveAutomaton) -> np.ndarray:
        """``(H, n_samples, 3)`` world poses sampled along every step."""
        out = []
        pose = self.start_pose
        for s in self.primitives:
            p = mpa.primitives[s]
            out.append(compose(np.broadcast_to(pose, p.poses.shape), p.poses))
            pose = compose(pose, p.end_pose)
        return np.array(out)

    def occupancies(self, mpa: MotionPrimitiveAutomaton) -> np.ndarray:
        """``(H, n, 2)`` world occupancy polygons, padded to a common size."""
        occ = mpa.padded_occupancy
        starts = [self.start_pose] + list(self.poses[:-1])
        return np.stack([transform_many(occ[s], start)[0]
                         for s, start in zip(self.primitives, starts)])

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "primitives": list(self.primitives),
                "cost": self.cost, "expansions": self.expansions, "fallback": self.fallback}


def trajectory_cost(positions, reference) -> float:
    """Sum of squared position errors; only x and y are weighted."""
    traj = np.asarray(positions, dtype=float)
    ref = np.asarray(reference, dtype=float)
    if len(traj) != len(ref):
        raise ValueError(f"trajectory has {len(traj)} steps, reference {len(ref)}")
    d = traj[:, :2] - ref[:, :2]
    return float(np.sum(d * d))


def chain_poses(mpa: MotionPrimitiveAutomaton, start_pose, primitives: Sequence[int]) -> np.ndarray:
    pose = np.asarray(start_pose, dtype=float)
    out = []
    for s in primitives:
        pose = compose(pose, mpa.primitives[s].end_pose)
        out.append(pose)
    return np.array(out).reshape(-1, 3)


def _prepare(obstacles: Sequence[np.ndarray]) -> List[PreparedPolygons]:
    return [PreparedPolygons(o) if len(o) else PreparedPolygons(np.zeros((0, 3, 2)))
            for o in obstacles]


def mcts_plan(problem: PlanningProblem, mpa: MotionPrimitiveAutomaton,
              budget: int = DEFAULT_BUDGET, seed=0) -> Plan:
    if budget < 1:
        raise ValueError("budget must be at least 1")
    H = mpa.horizon
    if len(problem.reference) != H:
        raise ValueError(f"reference must have {H} entries")
    rng = np.random.default_rng(seed)
    obstacles = _prepare(problem.obstacles)
    infeasible = Plan(False, problem.pose, problem.state).bind(mpa)

    start_fp = PreparedPolygons(mpa.footprint[None]).place([0], problem.pose)
    if any_intersection(start_fp, obstacles[0])[0]:
        return infeasible

    # tree arrays: parent, primitive, depth, state, pose, cost
    parent, prim, depth, state = [-1], [-1], [0], [problem.state]
    pose, cost = [problem.pose], [0.0]
    frontier = [0]
    best, best_cost = -1, np.inf
    occ = mpa.prepared_occupancy
    ends = mpa.end_poses
    prim_end = mpa.primitive_ends
    expansions = 0
    while expansions < budget and frontier:
        k = int(rng.integers(len(frontier)))
        node = frontier[k]
        frontier[k] = frontier[-1]
        frontier.pop()
        expansions += 1
        l = depth[node]
        ch = mpa.admissible_array(state[node], l)
        if len(ch) == 0:
            continue
        ob = obstacles[l]
        hit, new_poses, step_cost = expand_children(
            pose[node], ch, occ.polys, occ.axes, occ.lo, occ.hi, ends,
            ob.polys, ob.axes, ob.lo, ob.hi, ob.boxes, problem.reference[l])
        for c in np.flatnonzero(~hit):
            idx = len(parent)
            parent.append(node)
            prim.append(int(ch[c]))
            depth.append(l + 1)
            state.append(int(prim_end[ch[c]]))
            pose.append(new_poses[c])
            cost.append(cost[node] + float(step_cost[c]))
            if l + 1 == H:
                if cost[idx] < best_cost:
                    best, best_cost = idx, cost[idx]
            else:
                frontier.append(idx)
    if best < 0:
        infeasible.expansions = expansions
        return infeasible
    chain = []
    v = best
    while v > 0:
        chain.append(v)
        v = parent[v]
    chain.reverse()
    plan = Plan(True, problem.pose, problem.state, [prim[v] for v in chain],
                np.array([pose[v] for v in chain]), float(best_cost), expansions)
    return plan.bind(mpa)


def fallback_plan(previous: Plan, mpa: MotionPrimitiveAutomaton, reference=None) -> Plan:
    """Drop the first primitive and append a stand-still at the final state."""
    if not previous.feasible:
        raise ValueError("fallback requires a feasible previous plan")
    q_end = previous.end_state
    prims = list(previous.primitives[1:]) + [mpa.stand_still(q_end)]
    start_pose = previous.poses[0]
    start_state = mpa.primitives[previous.primitives[0]].end
    poses = chain_poses(mpa, start_pose, prims)
    cost = trajectory_cost(poses, reference) if reference is not None else previous.cost
    return Plan(True, start_pose, start_state, prims, poses, cost, 0, True).bind(mpa)


def standstill_plan(pose, state: int, mpa: MotionPrimitiveAutomaton, reference=None) -> Plan:
    prims = [mpa.stand_still(state)] * mpa.horizon
    poses = chain_poses(mpa, pose, prims)
    cost = trajectory_cost(poses, reference) if reference is not None else 0.0
    return Plan(True, np.asarray(pose, dtype=float), state, prims, poses, cost, 0, True).bind(mpa)


def plan_collision_free(plan: Plan, problem: PlanningProblem, mpa) -> bool:
    """Check every step's occupancy against that step's obstacles with scalar SAT."""
    for l, occ in enumerate(plan.occupancies(mpa)):
        for ob in problem.obstacles[l]:
            if not collision_free(_dedupe(occ), _dedupe(ob)):
                return False
    return True


def _dedupe(poly):
    keep = [0]
    for i in range(1, len(poly)):
        if np.linalg.norm(poly[i] - poly[keep[-1]]) > 1e-12:
            keep.append(i)
    if len(keep) > 1 and np.linalg.norm(poly[keep[-1]] - poly[keep[0]]) <= 1e-12:
        keep.pop()
    return poly[keep]
