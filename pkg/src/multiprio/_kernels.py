"""Compiled inner loop of the tree search: place, collision-check and score children."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def expand_children(pose, children, occ, occ_axes, occ_lo, occ_hi, ends,
                    obs, obs_axes, obs_lo, obs_hi, obs_box, ref):
    """For each child primitive: collision flag against all obstacles, end pose, step cost.

    ``occ*`` describe padded local occupancy polygons and their edge normals
    with precomputed projections; ``obs*`` the world obstacles of this step.
    """
    k = children.shape[0]
    n = occ.shape[1]
    m = obs.shape[0]
    p = obs.shape[1] if m > 0 else 0
    c = math.cos(pose[2])
    s = math.sin(pose[2])
    hit = np.zeros(k, dtype=np.bool_)
    new = np.empty((k, 3))
    cost = np.empty(k)
    poly = np.empty((n, 2))
    axes = np.empty((n, 2))
    for a in range(k):
        pid = children[a]
        ex, ey = ends[pid, 0], ends[pid, 1]
        # same association as geometry.compose so costs agree to the last bit
        nx = pose[0] + (c * ex - s * ey)
        ny = pose[1] + (s * ex + c * ey)
        new[a, 0] = nx
        new[a, 1] = ny
        psi = (pose[2] + ends[pid, 2]) % TWO_PI
        new[a, 2] = psi
        dx = nx - ref[0]
        dy = ny - ref[1]
        cost[a] = dx * dx + dy * dy
        if m == 0:
            continue
        xmin = ymin = np.inf
        xmax = ymax = -np.inf
        for v in range(n):
            lx, ly = occ[pid, v, 0], occ[pid, v, 1]
            wx = pose[0] + c * lx - s * ly
            wy = pose[1] + s * lx + c * ly
            poly[v, 0] = wx
            poly[v, 1] = wy
            xmin = min(xmin, wx)
            xmax = max(xmax, wx)
            ymin = min(ymin, wy)
            ymax = max(ymax, wy)
            ax, ay = occ_axes[pid, v, 0], occ_axes[pid, v, 1]
            axes[v, 0] = c * ax - s * ay
            axes[v, 1] = s * ax + c * ay
        for b in range(m):
            if (xmax < obs_box[b, 0] or obs_box[b, 2] < xmin
                    or ymax < obs_box[b, 1] or obs_box[b, 3] < ymin):
                continue
            separated = False
            for j in range(n):
                shift = axes[j, 0] * pose[0] + axes[j, 1] * pose[1]
                lo = occ_lo[pid, j] + shift
                hi = occ_hi[pid, j] + shift
                omin = np.inf
                omax = -np.inf
                for v in range(p):
                    d = obs[b, v, 0] * axes[j, 0] + obs[b, v, 1] * axes[j, 1]
                    omin = min(omin, d)
                    omax = max(omax, d)
                if hi < omin or omax < lo:
                    separated = True
                    break
            if not separated:
                for j in range(p):
                    cmin = np.inf
                    cmax = -np.inf
                    for v in range(n):
                        d = poly[v, 0] * obs_axes[b, j, 0] + poly[v, 1] * obs_axes[b, j, 1]
                        cmin = min(cmin, d)
                        cmax = max(cmax, d)
                    if obs_hi[b, j] < cmin or cmax < obs_lo[b, j]:
                        separated = True
                        break
            if not separated:
                hit[a] = True
                break
    return hit, new, cost
