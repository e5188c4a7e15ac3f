"""
Convex obstacle polygons, closed polylines, Hausdorff distances, facets.

Polylines are (N, 2) arrays of vertices, implicitly closed, counter-clockwise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist
from shapely.geometry import LinearRing, Polygon
from shapely.geometry import box as shapely_box
from shapely.geometry.polygon import orient

from src.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

FACET_COLUMNS = ["normal_deg", "length", "mean_grad"]
DEFAULT_RESAMPLE = 2048


def make_polygon(vertices: Sequence[Sequence[float]]) -> Polygon:
    """
    Validated convex polygon, oriented counter-clockwise.

    Raises:
        ConfigurationError: Fewer than 3 vertices, invalid or non-convex polygon.
    """
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ConfigurationError(f"A polygon needs at least 3 planar vertices, got shape {pts.shape}")
    polygon = Polygon(pts)
    if not polygon.is_valid or polygon.area <= 0:
        raise ConfigurationError("Obstacle polygon is degenerate or self-intersecting")
    if abs(polygon.convex_hull.area - polygon.area) > 1e-9 * polygon.area:
        raise ConfigurationError("Obstacle polygon must be convex")
    return orient(polygon, sign=1.0)


def square(side: float, centre: Sequence[float] = (0.0, 0.0)) -> Polygon:
    half = side / 2.0
    cx, cy = centre
    return make_polygon(np.asarray(shapely_box(cx - half, cy - half, cx + half, cy + half).exterior.coords)[:-1])


def regular_polygon(n: int, radius: float, phase: float = 0.0) -> Polygon:
    if n < 3:
        raise ConfigurationError(f"A regular polygon needs n >= 3, got {n}")
    angles = phase + 2.0 * math.pi * np.arange(n) / n
    return make_polygon(np.column_stack([radius * np.cos(angles), radius * np.sin(angles)]))


def rounded_square(side: float, radius: float, quad_segs: int = 16) -> Polygon:
    """Square of the given side whose corners are quarter circles of `radius`."""
    if not 0.0 <= radius < side / 2.0:
        raise ConfigurationError(f"Corner radius must lie in [0, {side / 2.0}), got {radius}")
    core = shapely_box(-side / 2.0 + radius, -side / 2.0 + radius, side / 2.0 - radius, side / 2.0 - radius)
    shape = core.buffer(radius, quad_segs=quad_segs) if radius > 0 else core
    return make_polygon(np.asarray(shape.exterior.coords)[:-1])


def polygon_vertices(polygon: Polygon) -> np.ndarray:
    """Counter-clockwise vertices without the closing repeat."""
    return np.asarray(orient(polygon, sign=1.0).exterior.coords)[:-1]


def support_radius(polygon: Polygon, theta: np.ndarray) -> np.ndarray:
    """
    Distance from the origin to the polygon boundary along each ray angle.

    The origin must be interior; each edge line n.x = c with c > 0 is hit at
    rho = c / (n.u) and the boundary is the nearest such hit.
    """
    verts = polygon_vertices(polygon)
    edges = np.roll(verts, -1, axis=0) - verts
    normals = np.column_stack([edges[:, 1], -edges[:, 0]])
    normals /= np.hypot(normals[:, 0], normals[:, 1])[:, None]
    offsets = np.einsum("ij,ij->i", normals, verts)
    if np.any(offsets <= 0):
        raise ConfigurationError("Polygon must contain the origin in its interior")
    u = np.column_stack([np.cos(theta), np.sin(theta)])
    dots = u @ normals.T
    with np.errstate(divide="ignore"):
        hits = np.where(dots > 1e-15, offsets[None, :] / np.where(dots > 1e-15, dots, 1.0), np.inf)
    return hits.min(axis=1)


def _check_polyline(points: np.ndarray, name: str) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError(f"{name} must be a closed polyline with at least 3 vertices")
    if not LinearRing(pts).is_simple:
        raise ValueError(f"{name} intersects itself")
    return pts


def resample(points: np.ndarray, spacing: float) -> np.ndarray:
    """Subdivide each closed-polyline edge into pieces no longer than `spacing`."""
    pts = np.asarray(points, dtype=float)
    nxt = np.roll(pts, -1, axis=0)
    lengths = np.hypot(*(nxt - pts).T)
    pieces = []
    for a, b, length in zip(pts, nxt, lengths):
        count = max(1, int(math.ceil(length / spacing)))
        s = np.arange(count)[:, None] / count
        pieces.append(a + s * (b - a))
    return np.concatenate(pieces)


def perimeter(points: np.ndarray) -> float:
    pts = np.asarray(points, dtype=float)
    return float(np.hypot(*(np.roll(pts, -1, axis=0) - pts).T).sum())


def hausdorff(a: np.ndarray, b: np.ndarray, spacing: Optional[float] = None) -> float:
    """
    Symmetric Hausdorff distance between two closed polylines.

    Both curves are resampled with segments no longer than `spacing` (default
    the smaller perimeter / DEFAULT_RESAMPLE) and compared with cdist.
    """
    a = _check_polyline(a, "first polyline")
    b = _check_polyline(b, "second polyline")
    if spacing is None:
        spacing = min(perimeter(a), perimeter(b)) / DEFAULT_RESAMPLE
    dense_a = resample(a, spacing)
    dense_b = resample(b, spacing)
    distances = cdist(dense_a, dense_b)
    return float(max(distances.min(axis=1).max(), distances.min(axis=0).max()))


def convexity_violations(points: np.ndarray, tol: float = 1e-12) -> List[int]:
    """Indices of vertices where a counter-clockwise polyline turns clockwise."""
    pts = np.asarray(points, dtype=float)
    before = pts - np.roll(pts, 1, axis=0)
    after = np.roll(pts, -1, axis=0) - pts
    cross = before[:, 0] * after[:, 1] - before[:, 1] * after[:, 0]
    scale = np.hypot(*before.T) * np.hypot(*after.T)
    return [int(i) for i in np.nonzero(cross < -tol * np.maximum(scale, 1e-300))[0]]


@dataclass
class Facet:
    """Maximal flat run of a polyline."""

    normal_deg: float
    length: float
    mean_grad: float
    start: int
    stop: int

    def to_dict(self) -> dict:
        return {"normal_deg": self.normal_deg, "length": self.length, "mean_grad": self.mean_grad}


def _angle_diff(a: float, b: float) -> float:
    return abs((a - b + math.pi) % (2.0 * math.pi) - math.pi)


def detect_facets(
    points: np.ndarray,
    angle_tol: float = 2.0,
    min_len: float = 0.0,
    gradient: Optional[np.ndarray] = None,
) -> List[Facet]:
    """
    Greedy segmentation of a closed counter-clockwise polyline into facets.

    A run grows while each next edge's outward normal stays within angle_tol
    degrees of the run's length-weighted mean normal; runs whose chord is at
    least min_len are reported. The scan starts after the sharpest turn so no
    run is split by the wrap-around.

    Args:
        points: Polyline vertices.
        angle_tol: Normal tolerance in degrees.
        min_len: Shortest reported chord.
        gradient: Optional per-vertex |grad u|, averaged over each facet.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    edges = np.roll(pts, -1, axis=0) - pts
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    normal_angles = np.arctan2(-edges[:, 0], edges[:, 1])
    turns = np.array([_angle_diff(normal_angles[i], normal_angles[i - 1]) for i in range(n)])
    first = int(np.argmax(turns))
    tol = math.radians(angle_tol)

    facets: List[Facet] = []
    k = 0
    while k < n:
        start = (first + k) % n
        sx, sy = lengths[start] * math.cos(normal_angles[start]), lengths[start] * math.sin(normal_angles[start])
        members = [start]
        k += 1
        while k < n:
            idx = (first + k) % n
            mean = math.atan2(sy, sx)
            if _angle_diff(normal_angles[idx], mean) > tol:
                break
            sx += lengths[idx] * math.cos(normal_angles[idx])
            sy += lengths[idx] * math.sin(normal_angles[idx])
            members.append(idx)
            k += 1
        stop = (members[-1] + 1) % n
        chord = float(np.hypot(*(pts[stop] - pts[start])))
        if chord >= min_len and chord > 0:
            grad = float("nan")
            if gradient is not None:
                vertex_ids = members + [stop]
                grad = float(np.mean(np.asarray(gradient)[vertex_ids]))
            normal = math.degrees(math.atan2(sy, sx)) % 360.0
            facets.append(Facet(normal, chord, grad, start, stop))
    return sorted(facets, key=lambda f: f.normal_deg)


def facet_frame(facets: Sequence[Facet]) -> pd.DataFrame:
    """Facet table with columns normal_deg,length,mean_grad."""
    return pd.DataFrame([f.to_dict() for f in facets], columns=FACET_COLUMNS)


def facet_coverage(facets: Sequence[Facet], total: float, lattice_tol: float = 2.0) -> float:
    """Fraction of `total` covered by facets whose normal is within lattice_tol degrees of +-e1, +-e2."""
    covered = 0.0
    for f in facets:
        offset = f.normal_deg % 90.0
        if min(offset, 90.0 - offset) <= lattice_tol:
            covered += f.length
    return covered / total if total > 0 else 0.0
