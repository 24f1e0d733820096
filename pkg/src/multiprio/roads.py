"""Synthetic road network built from line and arc segments.

A lane is a closed centerline with a width.  Vehicles follow one lane each;
the lane's two boundary strips are keep-out polygons for that vehicle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np

from .geometry import bbox

_RESOLUTION = 0.01  # centerline sampling [m]


def _segment_points(start, seg) -> Tuple[np.ndarray, np.ndarray]:
    """Sample one segment; returns ``(points (n, 3), end_pose)``."""
    x, y, psi = start
    kind = seg[0]
    if kind == "line":
        length = float(seg[1])
        n = max(2, int(np.ceil(length / _RESOLUTION)) + 1)
        s = np.linspace(0.0, length, n)
        pts = np.stack([x + s * np.cos(psi), y + s * np.sin(psi), np.full(n, psi)], 1)
    elif kind == "arc":
        radius, angle = float(seg[1]), np.deg2rad(float(seg[2]))
        length = abs(radius * angle)
        n = max(2, int(np.ceil(length / _RESOLUTION)) + 1)
        a = np.linspace(0.0, angle, n)
        sign = np.sign(angle)
        cx, cy = x - sign * radius * np.sin(psi), y + sign * radius * np.cos(psi)
        heading = psi + a
        pts = np.stack([cx + sign * radius * np.sin(heading),
                        cy - sign * radius * np.cos(heading), heading], 1)
    else:
        raise ValueError(f"unknown segment kind {kind!r}")
    return pts, pts[-1]


@dataclass
class Lane:
    name: str
    start: Tuple[float, float, float]
    segments: Sequence[Sequence]
    width: float = 0.4
    boundary_thickness: float = 0.05
    boundary_chunk: float = 0.1

    def __post_init__(self):
        pose = np.asarray(self.start, dtype=float)
        pieces = []
        for seg in self.segments:
            pts, pose = _segment_points(pose, seg)
            pieces.append(pts if not pieces else pts[1:])
        pts = np.vstack(pieces)
        self.points = pts[:, :2]
        self.headings = pts[:, 2]
        d = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        self.arclength = np.concatenate([[0.0], np.cumsum(d)])

    @property
    def length(self) -> float:
        return float(self.arclength[-1])

    @property
    def is_closed(self) -> bool:
        gap = np.linalg.norm(self.points[0] - self.points[-1])
        dpsi = np.angle(np.exp(1j * (self.headings[0] - self.headings[-1])))
        return gap < 1e-6 and abs(dpsi) < 1e-6

    def point_at(self, s) -> np.ndarray:
        s = np.mod(np.asarray(s, dtype=float), self.length)
        x = np.interp(s, self.arclength, self.points[:, 0])
        y = np.interp(s, self.arclength, self.points[:, 1])
        return np.stack([x, y], axis=-1)

    def pose_at(self, s: float) -> np.ndarray:
        s = float(np.mod(s, self.length))
        i = int(np.clip(np.searchsorted(self.arclength, s) - 1, 0, len(self.points) - 2))
        d = self.points[i + 1] - self.points[i]
        x, y = self.point_at(s)
        return np.array([x, y, np.mod(np.arctan2(d[1], d[0]), 2 * np.pi)])

    def project(self, xy, s_hint: float = None, window: float = 1.0) -> float:
        """Arc length of the closest centerline point, searched near ``s_hint``."""
        xy = np.asarray(xy, dtype=float)
        if s_hint is None:
            idx = np.arange(len(self.points))
        else:
            ds = np.mod(self.arclength - s_hint + self.length / 2, self.length) - self.length / 2
            idx = np.flatnonzero(np.abs(ds) <= window)
        d = np.linalg.norm(self.points[idx] - xy, axis=1)
        return float(self.arclength[idx[int(np.argmin(d))]])

    def reference(self, s0: float, speed: float, step_time: float, horizon: int) -> np.ndarray:
        """``horizon`` points spaced ``speed * step_time`` apart, starting after ``s0``."""
        s = s0 + speed * step_time * np.arange(1, horizon + 1)
        return self.point_at(s)

    @cached_property
    def boundary_polygons(self) -> np.ndarray:
        """Keep-out strips on both sides, as ``(m, 4, 2)`` convex quads."""
        n_chunks = max(1, int(np.ceil(self.length / self.boundary_chunk)))
        s = np.linspace(0.0, self.length, n_chunks + 1)
        quads = []
        inner, outer = self.width / 2, self.width / 2 + self.boundary_thickness
        poses = [self.pose_at(si) for si in s[:-1]] + [self._end_pose()]
        for a, b in zip(poses[:-1], poses[1:]):
            for side in (1.0, -1.0):
                na = side * np.array([-np.sin(a[2]), np.cos(a[2])])
                nb = side * np.array([-np.sin(b[2]), np.cos(b[2])])
                quad = np.array([a[:2] + inner * na, b[:2] + inner * nb,
                                 b[:2] + outer * nb, a[:2] + outer * na])
                if side < 0:
                    quad = quad[::-1]
                quads.append(quad)
        return np.array(quads)

    def _end_pose(self) -> np.ndarray:
        d = self.points[-1] - self.points[-2]
        return np.array([*self.points[-1], np.arctan2(d[1], d[0])])

    @cached_property
    def boundary_bboxes(self) -> np.ndarray:
        return bbox(self.boundary_polygons)

    def boundaries_near(self, xy, radius: float) -> np.ndarray:
        b = self.boundary_bboxes
        x, y = xy
        keep = ((b[:, 0] <= x + radius) & (b[:, 2] >= x - radius)
                & (b[:, 1] <= y + radius) & (b[:, 3] >= y - radius))
        return self.boundary_polygons[keep]


@dataclass
class RoadMap:
    lanes: dict = field(default_factory=dict)

    @classmethod
    def from_spec(cls, spec: dict) -> "RoadMap":
        lanes = {}
        for name, d in spec["lanes"].items():
            lanes[name] = Lane(name, tuple(d["start"]), [tuple(s) for s in d["segments"]],
                               width=d.get("width", 0.4))
        return cls(lanes)


def rounded_rectangle(cx: float, cy: float, length: float, height: float,
                      radius: float, clockwise: bool = False) -> Tuple[Tuple, List]:
    """Closed loop centered at ``(cx, cy)``, starting mid bottom edge heading +x."""
    straight_x, straight_y = length - 2 * radius, height - 2 * radius
    turn = -90.0 if clockwise else 90.0
    if clockwise:
        start = (cx, cy + height / 2, 0.0)
    else:
        start = (cx, cy - height / 2, 0.0)
    segs = [("line", straight_x / 2), ("arc", radius, turn), ("line", straight_y),
            ("arc", radius, turn), ("line", straight_x), ("arc", radius, turn),
            ("line", straight_y), ("arc", radius, turn), ("line", straight_x / 2)]
    return start, segs
