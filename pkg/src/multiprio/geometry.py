"""Convex polygon helpers: hulls, rigid transforms and separating-axis tests.

Polygons are ``(n, 2)`` float arrays with vertices in counter-clockwise order.
Touching boundaries count as intersection (closed-set semantics).
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull


class DegeneratePolygonError(ValueError):
    pass


def convex_hull(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    hull = ConvexHull(pts)
    return pts[hull.vertices]  # counter-clockwise for 2-D input


def rectangle(length: float, width: float) -> np.ndarray:
    hl, hw = length / 2.0, width / 2.0
    return np.array([[-hl, -hw], [hl, -hw], [hl, hw], [-hl, hw]])


def rotation(psi: float) -> np.ndarray:
    c, s = np.cos(psi), np.sin(psi)
    return np.array([[c, -s], [s, c]])


def transform(poly, pose) -> np.ndarray:
    """Rotate local vertices by ``pose[2]`` and translate by ``pose[:2]``."""
    x, y, psi = pose[0], pose[1], pose[2]
    return np.asarray(poly, dtype=float) @ rotation(psi).T + np.array([x, y])


def transform_many(poly, poses) -> np.ndarray:
    """``(k, n, 2)`` copies of ``poly`` placed at each of the ``k`` poses."""
    poses = np.asarray(poses, dtype=float).reshape(-1, 3)
    c, s = np.cos(poses[:, 2]), np.sin(poses[:, 2])
    px, py = poly[:, 0], poly[:, 1]
    xs = c[:, None] * px - s[:, None] * py + poses[:, 0:1]
    ys = s[:, None] * px + c[:, None] * py + poses[:, 1:2]
    return np.stack([xs, ys], axis=-1)


def compose(pose, delta) -> np.ndarray:
    """Apply a pose ``delta`` given in the local frame of ``pose``."""
    pose = np.asarray(pose, dtype=float)
    delta = np.asarray(delta, dtype=float)
    xy = pose[..., :2] + np.einsum("...ij,...j->...i", _rot_batch(pose[..., 2]), delta[..., :2])
    psi = np.mod(pose[..., 2] + delta[..., 2], 2 * np.pi)
    return np.concatenate([xy, psi[..., None]], axis=-1)


def _rot_batch(psi):
    c, s = np.cos(psi), np.sin(psi)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def polygon_area(poly) -> float:
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _check(poly) -> np.ndarray:
    p = np.asarray(poly, dtype=float)
    if p.ndim != 2 or p.shape[0] < 3 or p.shape[1] != 2:
        raise DegeneratePolygonError(f"polygon needs >= 3 vertices, got shape {p.shape}")
    if abs(polygon_area(p)) < 1e-12:
        raise DegeneratePolygonError("polygon has zero area")
    return p


def _axes(p) -> np.ndarray:
    edges = np.roll(p, -1, axis=0) - p
    return np.stack([-edges[:, 1], edges[:, 0]], axis=1)


def polygons_intersect(a, b) -> bool:
    """Separating-axis test for two convex polygons."""
    a, b = _check(a), _check(b)
    axes = np.vstack([_axes(a), _axes(b)])
    pa, pb = a @ axes.T, b @ axes.T
    separated = (pa.max(0) < pb.min(0)) | (pb.max(0) < pa.min(0))
    return not bool(separated.any())


def collision_free(a, b) -> bool:
    return not polygons_intersect(a, b)


def bbox(polys) -> np.ndarray:
    """Axis-aligned boxes ``[xmin, ymin, xmax, ymax]`` for ``(..., n, 2)`` input."""
    polys = np.asarray(polys, dtype=float)
    return np.concatenate([polys.min(axis=-2), polys.max(axis=-2)], axis=-1)


def pad_polygon(poly, n: int) -> np.ndarray:
    """Repeat the last vertex so the polygon has ``n`` vertices (zero-length edges)."""
    poly = np.asarray(poly, dtype=float)
    if len(poly) > n:
        raise ValueError("polygon has more vertices than the pad size")
    if len(poly) == n:
        return poly
    return np.vstack([poly, np.repeat(poly[-1:], n - len(poly), axis=0)])


def batch_intersects(cands: np.ndarray, obstacles: np.ndarray) -> np.ndarray:
    """Pairwise SAT between ``(k, n, 2)`` candidates and ``(m, p, 2)`` obstacles.

    Returns a ``(k, m)`` boolean matrix.  Polygons may be padded with repeated
    vertices; zero-length edges yield zero axes, which never separate.
    """
    k, m = len(cands), len(obstacles)
    if k == 0 or m == 0:
        return np.zeros((k, m), dtype=bool)
    ax_c = np.roll(cands, -1, axis=1) - cands
    ax_c = np.stack([-ax_c[..., 1], ax_c[..., 0]], axis=-1)  # (k, n, 2)
    ax_o = np.roll(obstacles, -1, axis=1) - obstacles
    ax_o = np.stack([-ax_o[..., 1], ax_o[..., 0]], axis=-1)  # (m, p, 2)
    # projections onto candidate axes
    c_min, c_max = _minmax_self(cands, ax_c)
    o_on_c = np.einsum("mvd,kad->kmav", obstacles, ax_c)
    sep1 = (c_max[:, None, :] < o_on_c.min(-1)) | (o_on_c.max(-1) < c_min[:, None, :])
    # projections onto obstacle axes
    o_min, o_max = _minmax_self(obstacles, ax_o)
    c_on_o = np.einsum("kvd,mad->kmav", cands, ax_o)
    sep2 = (o_max[None] < c_on_o.min(-1)) | (c_on_o.max(-1) < o_min[None])
    return ~(sep1.any(-1) | sep2.any(-1))


def _minmax_self(polys, axes):
    proj = np.einsum("kvd,kad->kav", polys, axes)
    return proj.min(-1), proj.max(-1)


class PreparedPolygons:
    """Padded convex polygons with cached edge normals, projections and boxes."""

    def __init__(self, polys, axes=None, lo=None, hi=None):
        self.polys = np.asarray(polys, dtype=float).reshape(-1, np.shape(polys)[-2], 2)
        if axes is None:
            e = np.roll(self.polys, -1, axis=1) - self.polys
            axes = np.stack([-e[..., 1], e[..., 0]], axis=-1)
            proj = np.einsum("kvd,kad->kav", self.polys, axes)
            lo, hi = proj.min(-1), proj.max(-1)
        self.axes, self.lo, self.hi = axes, lo, hi
        self.boxes = bbox(self.polys) if len(self.polys) else np.zeros((0, 4))

    def __len__(self) -> int:
        return len(self.polys)

    def place(self, idx, pose) -> "PreparedPolygons":
        """Subset ``idx`` moved by a rigid ``pose``; projections shift, never recomputed."""
        c, s = np.cos(pose[2]), np.sin(pose[2])
        rot = np.array([[c, -s], [s, c]])
        t = np.asarray(pose[:2], dtype=float)
        polys = self.polys[idx] @ rot.T + t
        axes = self.axes[idx] @ rot.T
        shift = axes @ t
        return PreparedPolygons(polys, axes, self.lo[idx] + shift, self.hi[idx] + shift)


def pairs_intersect(a: PreparedPolygons, ia, b: PreparedPolygons, ib) -> np.ndarray:
    """SAT for the polygon pairs ``(a[ia[t]], b[ib[t]])``."""
    if len(ia) == 0:
        return np.zeros(0, dtype=bool)
    b_on_a = np.einsum("tvd,tad->tav", b.polys[ib], a.axes[ia])
    sep = ((a.hi[ia] < b_on_a.min(-1)) | (b_on_a.max(-1) < a.lo[ia])).any(-1)
    a_on_b = np.einsum("tvd,tad->tav", a.polys[ia], b.axes[ib])
    sep |= ((b.hi[ib] < a_on_b.min(-1)) | (a_on_b.max(-1) < b.lo[ib])).any(-1)
    return ~sep


def any_intersection(cands: PreparedPolygons, obstacles: PreparedPolygons) -> np.ndarray:
    """Per candidate: does it intersect any obstacle?  Boxes prefilter the pairs."""
    hit = np.zeros(len(cands), dtype=bool)
    if len(cands) == 0 or len(obstacles) == 0:
        return hit
    cb, ob = cands.boxes, obstacles.boxes
    near = ((cb[:, None, 0] <= ob[None, :, 2]) & (ob[None, :, 0] <= cb[:, None, 2])
            & (cb[:, None, 1] <= ob[None, :, 3]) & (ob[None, :, 1] <= cb[:, None, 3]))
    ia, ib = np.nonzero(near)
    if len(ia):
        hit[ia[pairs_intersect(cands, ia, obstacles, ib)]] = True
    return hit
