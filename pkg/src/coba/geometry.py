"""Planar/volumetric geometry for airspace labeling and line-of-sight tests.

Coordinates live in a local east/north/up frame in meters. A restricted zone
is a convex polygon in the horizontal plane plus an upper height bound; any
point on the polygon boundary counts as inside (conservative for a safety
label).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RestrictedZone", "point_in_polygon", "polygon_area", "segment_intersects_box"]


def polygon_area(vertices) -> float:
    """Signed shoelace area of a polygon given as an (N, 2) vertex array."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_in_polygon(point, vertices, eps: float = 1e-9) -> bool:
    """Boundary-inclusive point-in-polygon test (ray casting + edge check).

    Points within ``eps`` of an edge are counted as inside.
    """
    v = np.asarray(vertices, dtype=float)
    px, py = float(point[0]), float(point[1])
    n = len(v)

    # On-edge check first so boundary points are deterministic.
    for i in range(n):
        ax, ay = v[i]
        bx, by = v[(i + 1) % n]
        abx, aby = bx - ax, by - ay
        apx, apy = px - ax, py - ay
        cross = abx * apy - aby * apx
        seg_len2 = abx * abx + aby * aby
        if cross * cross <= eps * eps * max(seg_len2, 1.0):
            t = (apx * abx + apy * aby) / max(seg_len2, eps)
            if -eps <= t <= 1.0 + eps:
                return True

    inside = False
    j = n - 1
    for i in range(n):
        xi, yi = v[i]
        xj, yj = v[j]
        if (yi > py) != (yj > py):
            x_cross = (xj - xi) * (py - yi) / (yj - yi) + xi
            if px < x_cross:
                inside = not inside
        j = i
    return inside


@dataclass
class RestrictedZone:
    """Convex polygon footprint with an upper altitude bound (meters AGL)."""

    polygon: np.ndarray
    height_max: float = 50.0

    def __post_init__(self):
        self.polygon = np.asarray(self.polygon, dtype=float)
        if self.polygon.ndim != 2 or self.polygon.shape[0] < 3 or self.polygon.shape[1] != 2:
            raise ValueError("restricted zone polygon needs at least 3 (x, y) vertices")
        if abs(polygon_area(self.polygon)) <= 0.0:
            raise ValueError("restricted zone polygon is degenerate (zero area)")

    def label(self, position) -> int:
        """1 (restricted) iff the horizontal point is inside-or-on the polygon
        and the altitude is at or below the height bound; else 0."""
        x, y, h = float(position[0]), float(position[1]), float(position[2])
        if h > self.height_max:
            return 0
        return 1 if point_in_polygon((x, y), self.polygon) else 0

    def centroid(self) -> np.ndarray:
        return self.polygon.mean(axis=0)


def segment_intersects_box(p0, p1, box_min, box_max) -> bool:
    """Slab test: does the segment p0->p1 pass through the axis-aligned box?"""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    lo = np.asarray(box_min, dtype=float)
    hi = np.asarray(box_max, dtype=float)
    d = p1 - p0
    t_min, t_max = 0.0, 1.0
    for k in range(3):
        if abs(d[k]) < 1e-12:
            if p0[k] < lo[k] or p0[k] > hi[k]:
                return False
            continue
        t0 = (lo[k] - p0[k]) / d[k]
        t1 = (hi[k] - p0[k]) / d[k]
        if t0 > t1:
            t0, t1 = t1, t0
        t_min = max(t_min, t0)
        t_max = min(t_max, t1)
        if t_min > t_max:
            return False
    return True
