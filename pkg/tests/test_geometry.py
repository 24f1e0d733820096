import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Polygon

from multiprio._kernels import expand_children
from multiprio.geometry import (DegeneratePolygonError, PreparedPolygons, any_intersection,
                                batch_intersects, compose, convex_hull, pad_polygon,
                                polygon_area, polygons_intersect, rectangle, transform,
                                transform_many)

coord = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@st.composite
def convex_polygons(draw):
    pts = np.array(draw(st.lists(st.tuples(coord, coord), min_size=3, max_size=9)))
    try:
        hull = convex_hull(pts)
    except Exception:
        hull = None
    if hull is None or len(hull) < 3 or abs(polygon_area(hull)) < 1e-3:
        cx, cy = draw(coord), draw(coord)
        hull = rectangle(draw(st.floats(0.1, 2)), draw(st.floats(0.1, 2))) + [cx, cy]
    return hull


def shapely_hit(a, b):
    return Polygon(a).intersects(Polygon(b))


@settings(max_examples=400, deadline=None)
@given(convex_polygons(), convex_polygons())
def test_sat_matches_shapely(a, b):
    assert polygons_intersect(a, b) == shapely_hit(a, b)


@settings(max_examples=100, deadline=None)
@given(st.lists(convex_polygons(), min_size=1, max_size=5),
       st.lists(convex_polygons(), min_size=1, max_size=5))
def test_batch_variants_match_shapely(cands, obs):
    n = max(len(p) for p in cands)
    m = max(len(p) for p in obs)
    c = np.array([pad_polygon(p, n) for p in cands])
    o = np.array([pad_polygon(p, m) for p in obs])
    expected = np.array([[shapely_hit(x, y) for y in obs] for x in cands])
    assert np.array_equal(batch_intersects(c, o), expected)
    assert np.array_equal(any_intersection(PreparedPolygons(c), PreparedPolygons(o)),
                          expected.any(axis=1))


@settings(max_examples=100, deadline=None)
@given(convex_polygons(), st.tuples(coord, coord, st.floats(-7, 7)), convex_polygons())
def test_placed_polygons_keep_projections(local, pose, obstacle):
    prepared = PreparedPolygons(local[None]).place([0], np.array(pose))
    fresh = PreparedPolygons(transform(local, pose)[None])
    assert np.allclose(prepared.lo, fresh.lo) and np.allclose(prepared.hi, fresh.hi)
    world = transform(local, pose)
    assert any_intersection(prepared, PreparedPolygons(obstacle[None]))[0] == shapely_hit(world, obstacle)


def test_touching_counts_as_collision():
    a = rectangle(1, 1)
    assert polygons_intersect(a, a + [1.0, 0.0])
    assert not polygons_intersect(a, a + [1.0 + 1e-9, 0.0])
    assert polygons_intersect(a, a + [1.0, 1.0])  # corner contact


def test_degenerate_polygons():
    with pytest.raises(DegeneratePolygonError):
        polygons_intersect([[0, 0], [1, 0]], rectangle(1, 1))
    with pytest.raises(DegeneratePolygonError):
        polygons_intersect([[0, 0], [1, 0], [2, 0]], rectangle(1, 1))


def test_hull_is_counter_clockwise():
    hull = convex_hull(np.random.default_rng(0).normal(size=(30, 2)))
    assert polygon_area(hull) > 0


def test_compose_and_transform_agree():
    pose = np.array([1.0, 2.0, 0.7])
    delta = np.array([0.3, -0.2, 0.4])
    out = compose(pose, delta)
    assert np.allclose(out[:2], transform(delta[None, :2], pose)[0])
    assert out[2] == pytest.approx(1.1)
    poses = np.array([pose, [0, 0, 0]])
    assert np.allclose(transform_many(rectangle(1, 1), poses)[0], transform(rectangle(1, 1), pose))


def test_pad_polygon():
    p = pad_polygon(rectangle(1, 1), 6)
    assert p.shape == (6, 2) and np.allclose(p[4:], p[3])
    with pytest.raises(ValueError):
        pad_polygon(p, 4)


@settings(max_examples=60, deadline=None)
@given(st.tuples(coord, coord, st.floats(0, 6.28)), st.integers(0, 10**6))
def test_kernel_matches_numpy_path(mpa, mpa_pose, seed):
    rng = np.random.default_rng(seed)
    pose = np.array(mpa_pose)
    q = int(rng.integers(len(mpa.states)))
    ch = mpa.admissible_array(q, 0)
    if len(ch) == 0:
        return
    obs = np.array([rectangle(0.3, 0.2) + rng.uniform(-1, 1, 2) + pose[:2] for _ in range(6)])
    prep = PreparedPolygons(obs)
    occ = mpa.prepared_occupancy
    ref = pose[:2] + rng.normal(size=2)
    hit, new, cost = expand_children(pose, ch, occ.polys, occ.axes, occ.lo, occ.hi,
                                     mpa.end_poses, prep.polys, prep.axes, prep.lo, prep.hi,
                                     prep.boxes, ref)
    assert np.array_equal(hit, any_intersection(occ.place(ch, pose), prep))
    expect = compose(np.broadcast_to(pose, (len(ch), 3)), mpa.end_poses[ch])
    assert np.allclose(new, expect, atol=1e-12)
    assert np.allclose(cost, ((expect[:, :2] - ref) ** 2).sum(1))

