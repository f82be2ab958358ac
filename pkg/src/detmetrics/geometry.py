"""Pure geometric kernels over oriented boxes.

BEV footprints are convex quads; the rotated-rectangle intersection uses
Sutherland-Hodgman clipping. All functions are stateless and operate on
plain floats, which keeps per-call overhead low for the frame loops.
"""
from __future__ import annotations

import math

from .core_types import OrientedBox3D, normalize_yaw

Point = tuple[float, float]


def box_corners_bev(box: OrientedBox3D) -> list[Point]:
    """Counter-clockwise BEV corners of a box footprint."""
    cx, cy = box.center_xy
    hl = 0.5 * box.dims[0]
    hw = 0.5 * box.dims[1]
    c = math.cos(box.yaw)
    s = math.sin(box.yaw)
    corners = []
    for dx, dy in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)):
        corners.append((cx + dx * c - dy * s, cy + dx * s + dy * c))
    return corners


def polygon_area(vertices: list[Point]) -> float:
    """Shoelace area; positive for counter-clockwise vertex order."""
    n = len(vertices)
    if n < 3:
        return 0.0
    acc = 0.0
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return 0.5 * acc


def clip_convex(subject: list[Point], clipper: list[Point]) -> list[Point]:
    """Sutherland-Hodgman clip of a convex polygon by a CCW convex clipper."""
    output = list(subject)
    n = len(clipper)
    for i in range(n):
        if not output:
            return []
        ax, ay = clipper[i]
        bx, by = clipper[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        input_pts = output
        output = []
        prev = input_pts[-1]
        prev_in = ex * (prev[1] - ay) - ey * (prev[0] - ax) >= 0.0
        for cur in input_pts:
            cur_in = ex * (cur[1] - ay) - ey * (cur[0] - ax) >= 0.0
            if cur_in != prev_in:
                output.append(_line_intersection(prev, cur, (ax, ay), (bx, by)))
            if cur_in:
                output.append(cur)
            prev, prev_in = cur, cur_in
    return output


def _line_intersection(p: Point, q: Point, a: Point, b: Point) -> Point:
    rx, ry = q[0] - p[0], q[1] - p[1]
    sx, sy = b[0] - a[0], b[1] - a[1]
    denom = rx * sy - ry * sx
    if denom == 0.0:
        return q
    t = ((a[0] - p[0]) * sy - (a[1] - p[1]) * sx) / denom
    return (p[0] + t * rx, p[1] + t * ry)


def bev_intersection_area(a: OrientedBox3D, b: OrientedBox3D) -> float:
    return max(0.0, polygon_area(clip_convex(box_corners_bev(a), box_corners_bev(b))))


def bev_iou(a: OrientedBox3D, b: OrientedBox3D) -> float:
    inter = bev_intersection_area(a, b)
    if inter <= 0.0:
        return 0.0
    area_a = a.dims[0] * a.dims[1]
    area_b = b.dims[0] * b.dims[1]
    union = area_a + area_b - inter
    return min(1.0, max(0.0, inter / union))


def z_overlap(a: OrientedBox3D, b: OrientedBox3D) -> float:
    lo_a, hi_a = a.z_interval
    lo_b, hi_b = b.z_interval
    return max(0.0, min(hi_a, hi_b) - max(lo_a, lo_b))


def iou_3d(a: OrientedBox3D, b: OrientedBox3D) -> float:
    dz = z_overlap(a, b)
    if dz <= 0.0:
        return 0.0
    inter = bev_intersection_area(a, b) * dz
    if inter <= 0.0:
        return 0.0
    vol_a = a.dims[0] * a.dims[1] * a.dims[2]
    vol_b = b.dims[0] * b.dims[1] * b.dims[2]
    union = vol_a + vol_b - inter
    return min(1.0, max(0.0, inter / union))


def center_distance_bev(a: OrientedBox3D, b: OrientedBox3D) -> float:
    ax, ay = a.center_xy
    bx, by = b.center_xy
    return math.hypot(ax - bx, ay - by)


def yaw_delta(a: float, b: float) -> float:
    """Smaller angular distance between two yaws, in [0, pi]."""
    return abs(normalize_yaw(a - b))


def aligned_iou(a: OrientedBox3D, b: OrientedBox3D) -> float:
    """3D IoU after aligning centers and yaw; closed form over dims only."""
    num = 1.0
    den = 1.0
    for da, db in zip(a.dims, b.dims):
        num *= min(da, db)
        den *= max(da, db)
    return num / den
