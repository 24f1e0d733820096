import math

import numpy as np
import pytest
from shapely.geometry import Point, Polygon

from multiprio.geometry import compose, rectangle, transform
from multiprio.mpa import (MPAConfig, MPAConfigError, MotionPrimitiveAutomaton, generate_mpa,
                           primitive_occupancy)


def test_default_levels_and_size(mpa):
    assert len(mpa.states) == 4 * 5
    # every transition changes speed by at most one level and steering by at most one level
    for p in mpa.primitives:
        (v0, d0), (v1, d1) = mpa.states[p.start], mpa.states[p.end]
        assert abs(v1 - v0) <= 0.4 + 1e-9 and abs(d1 - d0) <= 0.15 + 1e-9
    assert len(mpa.primitives) == 130


def test_primitive_shape(mpa):
    for p in mpa.primitives:
        assert np.allclose(p.states[0, :3], 0.0)
        assert tuple(p.states[0, 3:]) == mpa.states[p.start]
        assert tuple(p.states[-1, 3:]) == mpa.states[p.end]
        assert len(p.states) == mpa.config.n_samples
    # duration: speed ramps over exactly one step time
    p = next(p for p in mpa.primitives if mpa.states[p.start] == (0.0, 0.0)
             and mpa.states[p.end] == (0.4, 0.0))
    assert p.inputs[0] * mpa.step_time == pytest.approx(0.4)
    assert p.end_pose[0] == pytest.approx(0.5 * 0.4 * 0.2)


def test_standstill_is_identity(mpa):
    q0 = mpa.initial_state
    assert mpa.states[q0] == (0.0, 0.0)
    p = mpa.primitives[mpa.stand_still(q0)]
    assert p.start == p.end == q0
    assert np.array_equal(p.poses, np.zeros_like(p.poses))


def test_gamma_forces_standstill_at_horizon_end(mpa):
    H = mpa.horizon
    for q in range(len(mpa.states)):
        assert mpa.steps_to_stop[q] <= H
        for s in mpa.outgoing[q]:
            end = mpa.primitives[s].end
            if mpa.gamma(q, s, H - 1) is not None:
                assert mpa.is_final(end)
    # from any state reachable at horizon step l, a stop is still reachable
    frontier = {mpa.initial_state}
    for l in range(H):
        nxt = set()
        for q in frontier:
            assert mpa.admissible(q, l), (q, l)
            nxt.update(mpa.primitives[s].end for s in mpa.admissible(q, l))
        frontier = nxt
    assert all(mpa.is_final(q) for q in frontier)


def test_gamma_rejects_foreign_primitive(mpa):
    p = mpa.primitives[0]
    other = next(q for q in range(len(mpa.states)) if q != p.start)
    assert mpa.gamma(other, p.id, 0) is None
    assert mpa.gamma(p.start, p.id, mpa.horizon) is None


def test_chaining_is_exact(mpa):
    rng = np.random.default_rng(3)
    q, pose = mpa.initial_state, np.zeros(3)
    for l in range(mpa.horizon):
        s = int(rng.choice(mpa.admissible(q, l)))
        p = mpa.primitives[s]
        assert tuple(p.states[0, 3:]) == mpa.states[q]
        pose = compose(pose, p.end_pose)
        q = p.end
    assert mpa.is_final(q)


def test_occupancy_placement(mpa):
    p = mpa.primitives[5]
    assert np.allclose(primitive_occupancy(p, [0, 0, 0]), p.occupancy)
    assert np.allclose(primitive_occupancy(p, [1.5, -2.0, 0]), p.occupancy + [1.5, -2.0])
    assert np.allclose(primitive_occupancy(p, [0, 0, math.pi]), -p.occupancy)


def test_occupancy_covers_footprint_samples(mpa):
    fp = mpa.footprint
    for p in mpa.primitives[::7]:
        hull = Polygon(p.occupancy).buffer(1e-9)
        for pose in p.poses:
            assert hull.covers(Polygon(transform(fp, pose)))


def test_unstoppable_config_is_rejected():
    with pytest.raises(MPAConfigError):
        generate_mpa(MPAConfig(horizon=1))
    with pytest.raises(MPAConfigError):
        generate_mpa(MPAConfig(speeds=(0.4, 0.8)))
    with pytest.raises(MPAConfigError):
        generate_mpa(MPAConfig(speeds=(0.0, 0.8, 0.4)))


def test_json_round_trip(tiny_mpa):
    back = MotionPrimitiveAutomaton.from_json(tiny_mpa.to_json())
    assert back.config == tiny_mpa.config
    assert back.states == tiny_mpa.states
    for a, b in zip(back.primitives, tiny_mpa.primitives):
        assert (a.id, a.start, a.end, a.inputs) == (b.id, b.start, b.end, b.inputs)
        assert np.array_equal(a.states, b.states) and np.array_equal(a.occupancy, b.occupancy)
    assert back.steps_to_stop == tiny_mpa.steps_to_stop


def test_reachable_set_of_a_pure_stop_automaton():
    m = generate_mpa(MPAConfig(speeds=(0.0,), steerings=(0.0,)))
    fp = Polygon(m.footprint)
    for poly in m.reachable_polygons(m.initial_state):
        assert Polygon(poly).symmetric_difference(fp).area < 1e-12


def test_reachable_sets_contain_random_chains(mpa):
    rng = np.random.default_rng(11)
    for q0 in (mpa.initial_state, mpa.state_index(0.8, 0.15), mpa.state_index(1.2, -0.3)):
        reach = [Polygon(p).buffer(1e-9) for p in mpa.reachable_polygons(q0)]
        for _ in range(100):
            q, pose = q0, np.zeros(3)
            for l in range(mpa.horizon):
                s = int(rng.choice(mpa.admissible(q, l)))
                p = mpa.primitives[s]
                assert reach[l].covers(Polygon(primitive_occupancy(p, pose)))
                pose = compose(pose, p.end_pose)
                assert reach[l].covers(Point(pose[:2]))
                q = p.end


def test_reachable_union_grows(mpa):
    polys = [Polygon(p) for p in mpa.reachable_polygons(mpa.state_index(0.4, 0.0))]
    union = polys[0]
    for p in polys[1:]:
        bigger = union.union(p)
        assert bigger.area >= union.area - 1e-12
        union = bigger
