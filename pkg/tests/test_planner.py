import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Polygon

from multiprio.geometry import compose, pad_polygon, rectangle, transform
from multiprio.planner import (Plan, PlanningProblem, chain_poses, fallback_plan, mcts_plan,
                               plan_collision_free, standstill_plan, trajectory_cost)


def exhaustive(mpa, q0, pose, ref):
    """Oracle: cost of the best H-step chain, enumerated depth first."""
    best = np.inf

    def walk(q, pose, l, acc):
        nonlocal best
        if l == mpa.horizon:
            best = min(best, acc)
            return
        for s in mpa.admissible(q, l):
            p = mpa.primitives[s]
            nxt = compose(pose, p.end_pose)
            walk(p.end, nxt, l + 1, acc + float(np.sum((nxt[:2] - ref[l]) ** 2)))

    walk(q0, np.asarray(pose, float), 0, 0.0)
    return best


def inner_nodes(mpa, q0):
    count, layer = 0, {q0: 1}
    for l in range(mpa.horizon):
        count += sum(layer.values())
        nxt = {}
        for q, c in layer.items():
            for s in mpa.admissible(q, l):
                e = mpa.primitives[s].end
                nxt[e] = nxt.get(e, 0) + c
        layer = nxt
    return count


def test_cost_examples():
    ref = np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
    assert trajectory_cost(ref, ref) == 0.0
    assert trajectory_cost(ref + [1.0, 0.0], ref) == pytest.approx(3.0)
    poses = np.column_stack([ref, [0.3, 1.0, 2.0]])
    assert trajectory_cost(poses, ref) == 0.0
    with pytest.raises(ValueError):
        trajectory_cost(ref[:2], ref)


def test_exhaustive_equivalence_tiny(tiny_mpa):
    rng = np.random.default_rng(5)
    q0 = tiny_mpa.initial_state
    budget = inner_nodes(tiny_mpa, q0)
    for _ in range(50):
        ref = np.cumsum(rng.uniform(-0.1, 0.15, size=(tiny_mpa.horizon, 2)), axis=0)
        plan = mcts_plan(PlanningProblem([0, 0, 0], q0, ref), tiny_mpa, budget, seed=int(rng.integers(1e9)))
        assert plan.feasible
        assert plan.cost == exhaustive(tiny_mpa, q0, [0, 0, 0], ref)


def test_plan_structure(mpa):
    ref = np.array([[0.1 * (l + 1), 0.0] for l in range(mpa.horizon)])
    plan = mcts_plan(PlanningProblem([0, 0, 0], mpa.initial_state, ref), mpa, 300, seed=1)
    assert plan.feasible and len(plan.primitives) == mpa.horizon
    assert mpa.is_final(plan.end_state)
    assert np.allclose(plan.poses, chain_poses(mpa, [0, 0, 0], plan.primitives))
    assert plan.cost == pytest.approx(trajectory_cost(plan.poses, ref))
    q = mpa.initial_state
    for l, s in enumerate(plan.primitives):
        q = mpa.gamma(q, s, l)
        assert q is not None
    assert plan.sampled_poses(mpa).shape == (mpa.horizon, mpa.config.n_samples, 3)


def test_deterministic_and_anytime(mpa):
    ref = np.array([[0.15 * (l + 1), 0.02 * l] for l in range(mpa.horizon)])
    prob = PlanningProblem([0, 0, 0], mpa.state_index(0.4, 0.0), ref)
    a, b = mcts_plan(prob, mpa, 200, seed=9), mcts_plan(prob, mpa, 200, seed=9)
    assert a.primitives == b.primitives and a.cost == b.cost and a.expansions == b.expansions
    costs = [mcts_plan(prob, mpa, n, seed=9).cost for n in (10, 30, 100, 300, 600)]
    assert all(x >= y for x, y in zip(costs, costs[1:]))


def test_wall_ahead_is_infeasible(mpa):
    q = mpa.state_index(0.8, 0.0)
    front = mpa.footprint[:, 0].max()
    wall = rectangle(0.05, 2.0) + [front + 0.03, 0.0]
    ref = np.zeros((mpa.horizon, 2))
    obstacles = [wall[None]] + [np.zeros((0, 4, 2))] * (mpa.horizon - 1)
    plan = mcts_plan(PlanningProblem([0, 0, 0], q, ref, obstacles), mpa, 500, seed=0)
    assert not plan.feasible


def test_colliding_start_is_infeasible(mpa):
    ref = np.zeros((mpa.horizon, 2))
    obstacles = [rectangle(0.1, 0.1)[None] for _ in range(mpa.horizon)]
    plan = mcts_plan(PlanningProblem([0, 0, 0], mpa.initial_state, ref, obstacles), mpa, 50)
    assert not plan.feasible and plan.expansions == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_plans_avoid_obstacles(mpa, seed):
    rng = np.random.default_rng(seed)
    H = mpa.horizon
    obstacles = []
    for _ in range(H):
        boxes = [pad_polygon(transform(rectangle(0.15, 0.15), [*rng.uniform([0.2, -0.6], [1.5, 0.6]),
                                                                 rng.uniform(0, 3)]), 6)
                 for _ in range(3)]
        obstacles.append(np.array(boxes))
    ref = np.array([[0.2 * (l + 1), 0.0] for l in range(H)])
    prob = PlanningProblem([0, 0, 0], mpa.state_index(0.4, 0.0), ref, obstacles)
    plan = mcts_plan(prob, mpa, 200, seed=seed)
    if not plan.feasible:
        return
    assert plan_collision_free(plan, prob, mpa)
    for l, occ in enumerate(plan.occupancies(mpa)):
        for ob in obstacles[l]:
            assert not Polygon(occ).intersects(Polygon(ob))


def test_budget_and_reference_checks(mpa):
    prob = PlanningProblem([0, 0, 0], mpa.initial_state, np.zeros((mpa.horizon, 2)))
    with pytest.raises(ValueError):
        mcts_plan(prob, mpa, 0)
    with pytest.raises(ValueError):
        mcts_plan(PlanningProblem([0, 0, 0], mpa.initial_state, np.zeros((2, 2))), mpa, 10)


def test_fallback_shifts_and_stops(mpa):
    ref = np.array([[0.1 * (l + 1), 0.0] for l in range(mpa.horizon)])
    plan = mcts_plan(PlanningProblem([0, 0, 0], mpa.initial_state, ref), mpa, 300, seed=2)
    fb = fallback_plan(plan, mpa)
    assert fb.primitives[:-1] == plan.primitives[1:]
    assert mpa.is_final(fb.end_state) and fb.fallback
    assert np.allclose(fb.poses[:-1], plan.poses[1:])
    assert np.allclose(fb.poses[-1], plan.poses[-1])  # stand-still keeps the pose
    again = fallback_plan(fb, mpa)
    assert mpa.is_final(again.end_state)
    shifted_ref = ref + 0.1
    assert fallback_plan(plan, mpa, shifted_ref).cost == pytest.approx(
        trajectory_cost(fb.poses, shifted_ref))


def test_fallback_of_standstill_is_itself(mpa):
    still = standstill_plan([1.0, 2.0, 0.5], mpa.initial_state, mpa)
    fb = fallback_plan(still, mpa)
    assert fb.primitives == still.primitives
    assert np.allclose(fb.poses, still.poses)


def test_fallback_needs_feasible_plan(mpa):
    with pytest.raises(ValueError):
        fallback_plan(Plan(False, np.zeros(3), mpa.initial_state), mpa)
