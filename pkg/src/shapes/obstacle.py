"""
Free boundary problems outside a convex obstacle.

u = data on the obstacle K, u harmonic in {u > 0} \\ K, |grad u| = Q(x/epsilon)
on the free boundary. The front is a star-shaped radial graph rho(theta)
sampled at n_theta angles; the harmonic problem is solved on a Cartesian grid
with Shortley-Weller cut cells against both the obstacle and the front.

The minimal supersolution is approached from a thin strict-subsolution annulus
around K with the front moving outward only; the maximal subsolution from a
far circle with the front moving inward only.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
import scipy.sparse as sps
import shapely
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import brentq
from scipy.sparse.linalg import spsolve
from shapely.geometry import Polygon

from src.cell.corrector import FLIP_FRACTION, FLIP_PATIENCE, PATH_SAMPLES, SolveMode, reversed_columns
from src.grid.harmonic import FrontResponse
from src.medium.medium import MediumKind, PeriodicMedium, make_constant
from src.shapes.geometry import (
    Facet,
    convexity_violations,
    detect_facets,
    hausdorff,
    polygon_vertices,
    support_radius,
)
from src.utils.errors import (
    ConfigurationError,
    ConvergenceError,
    GraphAssumptionError,
    ObstacleDataError,
    SolverError,
)

logger = logging.getLogger(__name__)

THETA_MIN = 1e-3
SHAPE_COLUMNS = ["theta", "rho", "x", "y"]


@dataclass
class ObstacleSettings:
    """Tunables of the radial front fixed point."""

    n_theta: int = 720
    damping: float = 0.5
    min_damping: float = 1.0 / 32.0
    max_step_cells: float = 4.0
    max_iterations: int = 3000
    # Starting circle of max_subsolution, as a fraction of the half box
    far_fraction: float = 0.9
    facet_angle_tol: float = 2.0
    facet_min_len: float = 0.0


@dataclass(frozen=True)
class ObstacleProblem:
    """Exterior problem around a convex obstacle containing the origin."""

    obstacle: Polygon
    medium: PeriodicMedium
    epsilon: float
    box: float
    h: float
    data: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0 or self.h <= 0 or self.data <= 0:
            raise ConfigurationError("epsilon, h and data must be positive")
        if self.h > self.epsilon / 10.0 + 1e-15:
            raise ConfigurationError(f"h must not exceed epsilon/10 = {self.epsilon / 10.0}, got {self.h}")
        verts = polygon_vertices(self.obstacle)
        if np.any(np.abs(verts) >= self.box / 2.0):
            raise ConfigurationError(f"Obstacle must lie strictly inside the box of side {self.box}")
        if not self.obstacle.contains(shapely.Point(0.0, 0.0)):
            raise ConfigurationError("Obstacle must contain the origin")

    @property
    def axis(self) -> np.ndarray:
        n = int(round(self.box / self.h))
        return -self.box / 2.0 + self.h * np.arange(n + 1)

    def coefficient(self, points: np.ndarray) -> np.ndarray:
        return self.medium(np.asarray(points) / self.epsilon)

    def scaled(self, factor: float) -> "ObstacleProblem":
        """Same geometry with data scaled by `factor`."""
        return ObstacleProblem(self.obstacle, self.medium, self.epsilon, self.box, self.h, self.data * factor)


@dataclass
class CartesianField:
    """Node values on the square grid axis x axis."""

    values: np.ndarray
    axis: np.ndarray

    def interpolator(self) -> RegularGridInterpolator:
        return RegularGridInterpolator((self.axis, self.axis), self.values, bounds_error=False, fill_value=0.0)


@dataclass
class LimitShapeResult:
    """Free boundary of an obstacle problem with its diagnostics."""

    mode: SolveMode
    theta: np.ndarray
    rho: np.ndarray
    gradient: np.ndarray
    field: CartesianField
    iterations: int
    fb_residual: float
    hausdorff_to: Dict[str, float] = field(default_factory=dict)
    facets: List[Facet] = field(default_factory=list)
    convexity_violations: List[int] = field(default_factory=list)
    residual_history: List[float] = field(default_factory=list)

    @property
    def positivity_boundary(self) -> np.ndarray:
        return np.column_stack([self.rho * np.cos(self.theta), self.rho * np.sin(self.theta)])

    @property
    def perimeter(self) -> float:
        pts = self.positivity_boundary
        return float(np.hypot(*(np.roll(pts, -1, axis=0) - pts).T).sum())

    def summary(self) -> dict:
        return {
            "mode": self.mode.value,
            "iterations": self.iterations,
            "fb_residual": self.fb_residual,
            "mean_radius": float(self.rho.mean()),
            "facets": len(self.facets),
            "convexity_violations": len(self.convexity_violations),
            "hausdorff_to": dict(self.hausdorff_to),
        }


def _signed_obstacle_distance(problem: ObstacleProblem, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Positive outside the obstacle, negative inside."""
    pts = shapely.points(X.ravel(), Y.ravel())
    dist = shapely.distance(problem.obstacle.exterior, pts).reshape(X.shape)
    inside = shapely.contains_xy(problem.obstacle, X, Y)
    return np.where(inside, -dist, dist)


def _front_level(theta: np.ndarray, rho: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """rho(angle(x)) - |x|: positive inside the front."""
    angle = np.mod(np.arctan2(Y, X), 2.0 * math.pi)
    radius = np.interp(angle, theta, rho, period=2.0 * math.pi)
    return radius - np.hypot(X, Y)


def _harmonic_between(
    problem: ObstacleProblem,
    phi_obs: np.ndarray,
    phi_front: np.ndarray,
) -> np.ndarray:
    """Cut-cell harmonic solve on {phi_obs > 0, phi_front > 0}; data on K, 0 on the front."""
    n = phi_obs.shape[0]
    unknown = (phi_obs > 0) & (phi_front > 0)
    unknown[0, :] = unknown[-1, :] = unknown[:, 0] = unknown[:, -1] = False
    ii, jj = np.nonzero(unknown)
    count = ii.size
    values = np.where(phi_obs <= 0, problem.data, 0.0)
    if count == 0:
        return values
    index = -np.ones(phi_obs.shape, dtype=np.int64)
    index[ii, jj] = np.arange(count)
    here = np.arange(count)
    rows, cols, vals = [], [], []
    rhs = np.zeros(count)
    diag = np.zeros(count)

    def neighbour(ni, nj):
        inside = unknown[ni, nj]
        theta = np.ones(count)
        data = np.zeros(count)
        hit_obs = ~inside & (phi_obs[ni, nj] <= 0)
        hit_front = ~inside & ~hit_obs
        po, pf = phi_obs[ii, jj], phi_front[ii, jj]
        with np.errstate(divide="ignore", invalid="ignore"):
            t_obs = np.clip(po / (po - phi_obs[ni, nj]), THETA_MIN, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_front = np.clip(pf / (pf - phi_front[ni, nj]), THETA_MIN, 1.0)
        t_front = np.where(phi_front[ni, nj] <= 0, t_front, 1.0)
        # both boundaries cut the edge: the nearer one wins
        use_front = hit_front | (hit_obs & (phi_front[ni, nj] <= 0) & (t_front < t_obs))
        theta = np.where(use_front, t_front, np.where(hit_obs, t_obs, theta))
        data = np.where(hit_obs & ~use_front, problem.data, data)
        return inside, theta, data

    for minus, plus in (((ii - 1, jj), (ii + 1, jj)), ((ii, jj - 1), (ii, jj + 1))):
        in_m, a, data_m = neighbour(*minus)
        in_p, b, data_p = neighbour(*plus)
        c_m = 2.0 / (a * (a + b))
        c_p = 2.0 / (b * (a + b))
        diag -= 2.0 / (a * b)
        for (ni, nj), inside, coef, data in ((minus, in_m, c_m, data_m), (plus, in_p, c_p, data_p)):
            rhs[~inside] -= coef[~inside] * data[~inside]
            rows.append(here[inside])
            cols.append(index[ni[inside], nj[inside]])
            vals.append(coef[inside])
    rows.append(here)
    cols.append(here)
    vals.append(diag)
    matrix = sps.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(count, count)
    )
    u = spsolve(matrix, rhs)
    values[ii, jj] = u
    return values


def _front_gradient(
    interp: RegularGridInterpolator,
    theta: np.ndarray,
    rho: np.ndarray,
    rho_k: np.ndarray,
    h: float,
    data: float,
) -> np.ndarray:
    """|grad u| at the front from a quadratic along each inward ray."""
    ux, uy = np.cos(theta), np.sin(theta)
    width = rho - rho_k
    d2, d3 = 2.0 * h, 3.0 * h
    p2 = np.column_stack([(rho - d2) * ux, (rho - d2) * uy])
    p3 = np.column_stack([(rho - d3) * ux, (rho - d3) * uy])
    u2, u3 = interp(p2), interp(p3)
    radial = (9.0 * u2 - 4.0 * u3) / (6.0 * h)
    thin = width < 3.0 * h
    radial = np.where(thin, data / np.maximum(width, 1e-12), radial)
    d_theta = 2.0 * math.pi / theta.size
    slope = (np.roll(rho, -1) - np.roll(rho, 1)) / (2.0 * d_theta)
    return np.abs(radial) * np.sqrt(1.0 + (slope / rho) ** 2)


def _solve_field(problem, X, Y, phi_obs, theta, rho) -> CartesianField:
    phi_front = _front_level(theta, rho, X, Y)
    return CartesianField(_harmonic_between(problem, phi_obs, phi_front), problem.axis)


def solve_obstacle(
    problem: ObstacleProblem,
    mode=SolveMode.MIN_SUPERSOLUTION,
    tol: float = 1e-3,
    settings: Optional[ObstacleSettings] = None,
    references: Optional[Dict[str, np.ndarray]] = None,
) -> LimitShapeResult:
    """
    Radial front fixed point for the exterior free boundary problem.

    Each iteration solves the cut-cell harmonic problem and measures |grad u| on
    every ray. Rays that still violate the mode's inequality take a damped
    Newton move against the linearized response of an annulus with the mean
    radii, the other rays held fixed. Moves are capped and cut at the first
    sampled radius that meets the free boundary inequality under the 1/d
    gradient model.

    Args:
        problem: Obstacle problem.
        mode: Which extremal solution.
        tol: Stop once every ray moves less than tol * h.
        settings: Front tunables.
        references: Named reference polylines; Hausdorff distances to them
            are stored on the result.

    Raises:
        ObstacleDataError: The front collapsed onto the obstacle.
        SolverError: The front reached the box.
        ConvergenceError: Iteration cap reached.
    """
    settings = settings or ObstacleSettings()
    mode = SolveMode.parse(mode)
    super_mode = mode is SolveMode.MIN_SUPERSOLUTION
    h = problem.h
    axis = problem.axis
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    phi_obs = _signed_obstacle_distance(problem, X, Y)
    theta = 2.0 * math.pi * np.arange(settings.n_theta) / settings.n_theta
    rho_k = support_radius(problem.obstacle, theta)
    wall = settings.far_fraction * problem.box / 2.0
    if rho_k.max() + 4.0 * h >= wall:
        raise ConfigurationError("Box too small for the obstacle")

    if super_mode:
        rho = rho_k + max(2.0 * h, 0.5 * problem.data / problem.medium.qmax)
    else:
        rho = np.full(settings.n_theta, wall)
    omega = settings.damping
    max_step = settings.max_step_cells * h
    history: List[float] = []
    moved = np.zeros(settings.n_theta, dtype=bool)
    q_before = np.zeros(settings.n_theta)
    flip_streak = 0
    fractions = np.arange(1, PATH_SAMPLES + 1) / PATH_SAMPLES
    ux, uy = np.cos(theta), np.sin(theta)
    d_theta = 2.0 * math.pi / settings.n_theta

    for iteration in range(1, settings.max_iterations + 1):
        field_ = _solve_field(problem, X, Y, phi_obs, theta, rho)
        gradient = _front_gradient(field_.interpolator(), theta, rho, rho_k, h, problem.data)
        q = problem.coefficient(np.column_stack([rho * ux, rho * uy]))
        mismatch = gradient - q
        history.append(float(np.max(np.abs(mismatch))))
        width = rho - rho_k

        demand = mismatch / np.maximum(gradient, 1e-12)
        active = demand > 0 if super_mode else demand < 0
        mean_rho = float(rho.mean())
        depth = mean_rho * math.log(mean_rho / float(rho_k.mean()))
        response = FrontResponse.flat(settings.n_theta, mean_rho * d_theta, depth, h)
        raw = omega * response.newton_step(demand, active)
        step = np.clip(raw, 0.0, max_step) if super_mode else np.clip(raw, -max_step, 0.0)

        moving = step != 0
        if np.any(moving):
            cand = rho[:, None] + step[:, None] * fractions[None, :]
            qc = problem.coefficient(np.stack([cand * ux[:, None], cand * uy[:, None]], axis=-1))
            predicted = gradient[:, None] * width[:, None] / (cand - rho_k[:, None])
            hit = predicted <= qc if super_mode else predicted >= qc
            first = np.argmax(hit, axis=1)
            step = np.where(moving & hit.any(axis=1), step * fractions[first], step)

        reversed_ = reversed_columns(moved, gradient, q_before, super_mode)
        if np.any(moved):
            flip_streak = flip_streak + 1 if reversed_.sum() > FLIP_FRACTION * moved.sum() else 0
            if flip_streak >= FLIP_PATIENCE:
                omega /= 2.0
                flip_streak = 0
                logger.warning("Front oscillating at iteration %d; damping halved to %.4f", iteration, omega)
                if omega < settings.min_damping:
                    raise GraphAssumptionError(
                        "graph-assumption-violated: front keeps oscillating", residual_history=history
                    )
        moved = np.abs(step) >= tol * h
        q_before = q

        if np.max(np.abs(step)) < tol * h:
            break
        rho = rho + step
        if np.any(rho - rho_k < h):
            raise ObstacleDataError("obstacle data incompatible: front collapsed onto the obstacle",
                                    residual_history=history)
        if np.any(rho >= wall):
            raise SolverError("Front reached the box; enlarge the box", residual_history=history)
    else:
        raise ConvergenceError(
            f"Obstacle front did not converge within {settings.max_iterations} iterations",
            residual_history=history,
        )

    result = LimitShapeResult(
        mode=mode,
        theta=theta,
        rho=rho,
        gradient=gradient,
        field=field_,
        iterations=iteration,
        fb_residual=float(np.max(np.abs(mismatch))),
        residual_history=history,
    )
    polyline = result.positivity_boundary
    result.convexity_violations = convexity_violations(polyline)
    result.facets = detect_facets(polyline, settings.facet_angle_tol, settings.facet_min_len, gradient)
    for name, ref in (references or {}).items():
        result.hausdorff_to[name] = hausdorff(polyline, ref)
    logger.info(
        "Obstacle %s: mean radius %.4f after %d iterations, %d facets, %d convexity violations",
        mode.value, float(rho.mean()), iteration, len(result.facets), len(result.convexity_violations),
    )
    return result


def rescaling_defect(
    problem: ObstacleProblem,
    factor: float,
    tol: float = 1e-3,
    settings: Optional[ObstacleSettings] = None,
    mode=SolveMode.MIN_SUPERSOLUTION,
) -> float:
    """
    Homogeneous exactness: for Q = c the front with Q = factor * c and data d
    equals the front with Q = c and data d / factor. Returns their Hausdorff
    distance.
    """
    if problem.medium.kind is not MediumKind.CONSTANT:
        raise ValueError("rescaling_defect needs a constant medium")
    if factor <= 0:
        raise ValueError(f"factor must be positive, got {factor}")
    c = problem.medium.qmin
    steep = ObstacleProblem(problem.obstacle, make_constant(factor * c), problem.epsilon,
                            problem.box, problem.h, problem.data)
    shallow = ObstacleProblem(problem.obstacle, make_constant(c), problem.epsilon,
                              problem.box, problem.h, problem.data / factor)
    a = solve_obstacle(steep, mode, tol, settings)
    b = solve_obstacle(shallow, mode, tol, settings)
    return hausdorff(a.positivity_boundary, b.positivity_boundary)


def shape_frame(result: LimitShapeResult) -> pd.DataFrame:
    """Front polyline with columns theta,rho,x,y."""
    pts = result.positivity_boundary
    return pd.DataFrame(
        {"theta": result.theta, "rho": result.rho, "x": pts[:, 0], "y": pts[:, 1]},
        columns=SHAPE_COLUMNS,
    )


def homogeneous_disk_radius(obstacle_radius: float, q: float, data: float = 1.0) -> float:
    """Free boundary radius R of the disk problem: R log(R/a) q = data."""
    a = obstacle_radius
    return float(brentq(lambda R: q * R * math.log(R / a) - data, a * (1.0 + 1e-12), a + 10.0 * data / q + 10.0 * a))
