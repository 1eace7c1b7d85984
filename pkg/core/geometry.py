"""
Geometry Module
Planar polygon and segment primitives shared by the mesh, smoothing,
contact and shape modules
"""

from typing import List, Tuple

import numpy as np
from matplotlib.path import Path


def cross2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """z-component of the 2D cross product (broadcasts over leading axes)."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def polygon_signed_area(points: np.ndarray) -> float:
    """
    Signed area of a polygon (shoelace).

    Args:
        points: (n, 2) vertices in order

    Returns:
        Positive area for counter-clockwise vertex order
    """
    pts = np.asarray(points, dtype=float)
    nxt = np.roll(pts, -1, axis=0)
    return 0.5 * float(np.sum(cross2(pts, nxt)))


def polygon_centroid(points: np.ndarray) -> np.ndarray:
    """Area centroid of a simple polygon; falls back to the vertex mean for zero area."""
    pts = np.asarray(points, dtype=float)
    nxt = np.roll(pts, -1, axis=0)
    c = cross2(pts, nxt)
    area = 0.5 * np.sum(c)
    if abs(area) < 1e-300:
        return pts.mean(axis=0)
    return np.sum((pts + nxt) * c[:, None], axis=0) / (6.0 * area)


def closest_point_on_segment(
    p: np.ndarray,
    a: np.ndarray,
    b: np.ndarray
) -> Tuple[np.ndarray, float, float]:
    """
    Closest point to p on segment [a, b].

    Returns:
        Tuple of (closest point, parameter s in [0, 1], distance)
    """
    d = b - a
    len_sq = float(d @ d)
    if len_sq < 1e-300:
        s = 0.0
    else:
        s = float(np.clip((p - a) @ d / len_sq, 0.0, 1.0))
    q = a + s * d
    return q, s, float(np.linalg.norm(p - q))


def point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return closest_point_on_segment(p, a, b)[2]


def point_in_polygon(p: np.ndarray, points: np.ndarray, tol: float = 1e-9) -> bool:
    """
    Inclusive point-in-polygon test: points within tol of an edge count as inside.

    Args:
        p: Query point (2,)
        points: (n, 2) polygon vertices, either orientation
        tol: Boundary tolerance

    Returns:
        True if p is inside or on the boundary
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if any(point_segment_distance(p, pts[i], pts[(i + 1) % n]) <= tol for i in range(n)):
        return True
    # the path is closed implicitly
    return bool(Path(pts).contains_point((float(p[0]), float(p[1]))))


def _orientation(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    return float((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def _on_segment(a: np.ndarray, b: np.ndarray, c: np.ndarray, tol: float) -> bool:
    return (min(a[0], b[0]) - tol <= c[0] <= max(a[0], b[0]) + tol
            and min(a[1], b[1]) - tol <= c[1] <= max(a[1], b[1]) + tol)


def segments_intersect(
    p1: np.ndarray,
    p2: np.ndarray,
    q1: np.ndarray,
    q2: np.ndarray,
    tol: float = 1e-12
) -> bool:
    """True if closed segments [p1, p2] and [q1, q2] share at least one point."""
    o1 = _orientation(p1, p2, q1)
    o2 = _orientation(p1, p2, q2)
    o3 = _orientation(q1, q2, p1)
    o4 = _orientation(q1, q2, p2)

    if ((o1 > tol and o2 < -tol) or (o1 < -tol and o2 > tol)) and \
       ((o3 > tol and o4 < -tol) or (o3 < -tol and o4 > tol)):
        return True

    if abs(o1) <= tol and _on_segment(p1, p2, q1, tol):
        return True
    if abs(o2) <= tol and _on_segment(p1, p2, q2, tol):
        return True
    if abs(o3) <= tol and _on_segment(q1, q2, p1, tol):
        return True
    if abs(o4) <= tol and _on_segment(q1, q2, p2, tol):
        return True
    return False


def polyline_self_intersects(points: np.ndarray, closed: bool) -> bool:
    """
    Check a polyline for intersections between non-adjacent segments.

    Args:
        points: (n, 2) vertices
        closed: Whether the last vertex connects back to the first

    Returns:
        True if any two non-adjacent segments touch
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    n_seg = n if closed else n - 1
    for i in range(n_seg):
        a0, a1 = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n_seg):
            if j == i + 1 or (closed and i == 0 and j == n_seg - 1):
                continue
            if segments_intersect(a0, a1, pts[j], pts[(j + 1) % n]):
                return True
    return False


def ear_clip(points: np.ndarray) -> List[Tuple[int, int, int]]:
    """
    Triangulate a simple counter-clockwise polygon by ear clipping.

    Args:
        points: (n, 2) vertices, counter-clockwise

    Returns:
        List of vertex index triples, each counter-clockwise

    Raises:
        ValueError: If no ear can be found (polygon not simple)
    """
    pts = np.asarray(points, dtype=float)
    remaining = list(range(len(pts)))
    triangles = []

    while len(remaining) > 3:
        found = False
        m = len(remaining)
        for k in range(m):
            i0, i1, i2 = remaining[(k - 1) % m], remaining[k], remaining[(k + 1) % m]
            a, b, c = pts[i0], pts[i1], pts[i2]
            if _orientation(a, b, c) <= 1e-14:
                continue
            blocked = False
            for j in remaining:
                if j in (i0, i1, i2):
                    continue
                p = pts[j]
                if (_orientation(a, b, p) >= 0 and _orientation(b, c, p) >= 0
                        and _orientation(c, a, p) >= 0):
                    blocked = True
                    break
            if blocked:
                continue
            triangles.append((i0, i1, i2))
            remaining.pop(k)
            found = True
            break
        if not found:
            raise ValueError("Polygon is not simple; no ear found.")

    triangles.append(tuple(remaining))
    return triangles


def segment_distance(p1: np.ndarray, p2: np.ndarray, q1: np.ndarray, q2: np.ndarray) -> float:
    """Minimal distance between closed segments [p1, p2] and [q1, q2]."""
    if segments_intersect(p1, p2, q1, q2):
        return 0.0
    return min(
        point_segment_distance(p1, q1, q2),
        point_segment_distance(p2, q1, q2),
        point_segment_distance(q1, p1, p2),
        point_segment_distance(q2, p1, p2),
    )
