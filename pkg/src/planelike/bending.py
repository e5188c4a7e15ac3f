"""
Bending perturbations of plane-like solutions.

A bending profile is phi = eps_amp * exp(psi), where psi is the bounded
discrete harmonic function on the positive side of a reference line with
boundary data log h(tau / r): h is a smooth plateau equal to M near the
centre and 1 away from it. exp of a harmonic function satisfies
phi * lap(phi) = |grad phi|^2, which is the subharmonicity criterion for
the variable-radius sup-convolution in two dimensions.

psi is computed mode by mode in the tangential Fourier basis of the discrete
5-point Laplacian, truncated to zero at height 4r above the reference line.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from src.grid.convolution import sup_convolve_variable
from src.grid.harmonic import dirichlet_solve, laplacian
from src.grid.slab import GridField, SlabGrid
from src.medium.direction import Direction
from src.medium.medium import ball_field
from src.planelike.offsets import PlaneLikeSolution
from src.utils.errors import BendingError, ConfigurationError

logger = logging.getLogger(__name__)

RADIUS_FACTOR = 10.0
TRUNCATION_FACTOR = 4.0
DEFAULT_LIFT_ROWS = 5
SLOPE_COLUMNS = ["tau", "depth", "measured", "bound", "grad_phi", "ok"]


def plateau(t: np.ndarray, M: float) -> np.ndarray:
    """Smooth even function: M for |t| <= 1/3, 1 for |t| >= 2/3."""
    t = np.abs(np.asarray(t, dtype=float))
    x = np.clip((2.0 / 3.0 - t) * 3.0, 0.0, 1.0)

    def bump(v):
        return np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)

    step = bump(x) / (bump(x) + bump(1.0 - x))
    return 1.0 + (M - 1.0) * step


def strip_harmonic(data: np.ndarray, h: float, n_rows: int) -> np.ndarray:
    """
    Discrete harmonic function on a tangentially periodic strip of n_rows + 1
    rows: row 0 equals `data`, row n_rows is zero.

    Returns:
        Array of shape (len(data), n_rows + 1).
    """
    n = data.size
    coeffs = np.fft.rfft(data)
    k = np.arange(coeffs.size)
    # per-mode recurrence psi_{j+1} - 2 c psi_j + psi_{j-1} = 0
    c = 2.0 - np.cos(2.0 * math.pi * k / n)
    mu = c - np.sqrt(np.maximum(c ** 2 - 1.0, 0.0))
    j = np.arange(n_rows + 1)[:, None]
    profiles = np.empty((n_rows + 1, coeffs.size))
    profiles[:, 0] = 1.0 - j[:, 0] / n_rows
    if coeffs.size > 1:
        m = mu[None, 1:]
        profiles[:, 1:] = (m ** j - m ** (2 * n_rows - j)) / (1.0 - m ** (2 * n_rows))
    return np.fft.irfft(coeffs[None, :] * profiles, n=n, axis=1).T


@dataclass
class BendingProfile:
    """Bending radius field phi on a slab grid."""

    M: float
    r: float
    eps_amp: float
    phi: GridField
    psi: np.ndarray
    reference_depth: float
    centre: float
    convexity_defect: float

    @property
    def grid(self) -> SlabGrid:
        return self.phi.grid

    def heights(self) -> np.ndarray:
        """Plateau data h((tau - centre)/r) per column."""
        return plateau(_wrapped(self.grid, self.centre) / self.r, self.M)

    def boundary_bracket(self, reach: float = 0.05) -> Tuple[float, float]:
        """min and max of phi/(eps_amp h) over rows within reach * r above the reference line."""
        distance = self.reference_depth - self.grid.depths
        rows = (distance >= 0) & (distance <= reach * self.r)
        ratio = self.phi.values[:, rows] / (self.eps_amp * self.heights()[:, None])
        return float(ratio.min()), float(ratio.max())


def _wrapped(grid: SlabGrid, centre: float) -> np.ndarray:
    return (grid.taus - centre + grid.period_len / 2.0) % grid.period_len - grid.period_len / 2.0


def convexity_defect(phi: np.ndarray, h: float, rows: np.ndarray) -> Tuple[float, Tuple[int, int]]:
    """max of |grad phi|^2 - phi lap(phi) over the interior nodes of the selected rows."""
    gx = (np.roll(phi, -1, axis=0) - np.roll(phi, 1, axis=0)) / (2.0 * h)
    gy = np.full(phi.shape, np.nan)
    gy[:, 1:-1] = (phi[:, 2:] - phi[:, :-2]) / (2.0 * h)
    lap = np.full(phi.shape, np.nan)
    lap[:, 1:-1] = (
        np.roll(phi, 1, axis=0)[:, 1:-1] + np.roll(phi, -1, axis=0)[:, 1:-1]
        + phi[:, :-2] + phi[:, 2:] - 4.0 * phi[:, 1:-1]
    ) / h ** 2
    defect = gx ** 2 + gy ** 2 - phi * lap
    mask = np.zeros(phi.shape, dtype=bool)
    mask[:, rows] = True
    mask[:, 0] = mask[:, -1] = False
    defect = np.where(mask & np.isfinite(defect), defect, -np.inf)
    worst = np.unravel_index(int(np.argmax(defect)), defect.shape)
    return float(defect[worst]), (int(worst[0]), int(worst[1]))


def make_bending_profile(
    direction: Direction,
    M: float,
    r: float,
    eps_amp: float,
    grid: SlabGrid,
    reference_depth: Optional[float] = None,
    centre: Optional[float] = None,
) -> BendingProfile:
    """
    Build phi = eps_amp * exp(psi) on a slab grid.

    Args:
        direction: Direction of the slab; must match the grid.
        M: Plateau height, at least 1.
        r: Dilation; at least 10 M.
        eps_amp: Amplitude of phi.
        grid: Slab grid carrying the profile.
        reference_depth: Depth of the line carrying the plateau data; nodes
            below it use the data value. Defaults to the slab bottom.
        centre: Tangential position of the plateau centre; defaults to mid-period.

    Raises:
        ConfigurationError: On out-of-range parameters.
        BendingError: If the discrete convexity defect exceeds 10 h eps_amp / r^2.
    """
    if direction != grid.direction:
        raise ConfigurationError("Bending profile direction does not match the grid")
    if M < 1.0:
        raise ConfigurationError(f"M must be at least 1, got {M}")
    if eps_amp <= 0:
        raise ConfigurationError(f"eps_amp must be positive, got {eps_amp}")
    if r < RADIUS_FACTOR * M:
        raise ConfigurationError(f"r must be at least {RADIUS_FACTOR}*M = {RADIUS_FACTOR * M}, got {r}")
    h = grid.h
    reference_depth = grid.height if reference_depth is None else float(reference_depth)
    centre = grid.period_len / 2.0 if centre is None else float(centre)

    data = np.log(plateau(_wrapped(grid, centre) / r, M))
    n_strip = max(2, int(math.ceil(TRUNCATION_FACTOR * r / h)))
    strip = strip_harmonic(data, h, n_strip)
    # strip row j sits at depth reference_depth - j*h
    rows_above = np.round((reference_depth - grid.depths) / h).astype(int)
    psi = np.empty(grid.shape)
    below = rows_above <= 0
    psi[:, below] = data[:, None]
    inside = (~below) & (rows_above <= n_strip)
    psi[:, inside] = strip[:, rows_above[inside]]
    psi[:, rows_above > n_strip] = 0.0
    phi = eps_amp * np.exp(psi)

    harmonic_rows = np.nonzero((rows_above >= 1) & (rows_above < n_strip))[0]
    defect, worst = convexity_defect(phi, h, harmonic_rows) if harmonic_rows.size else (0.0, (0, 0))
    defect = max(defect, 0.0)
    slack = 10.0 * h * eps_amp / r ** 2
    if defect > slack:
        raise BendingError(
            f"Convexity defect {defect:.3e} exceeds slack {slack:.3e}", worst_node=worst,
        )
    logger.debug("Bending profile M=%.3g r=%.3g: phi in [%.4g, %.4g]", M, r, phi.min(), phi.max())
    return BendingProfile(
        M=float(M),
        r=float(r),
        eps_amp=float(eps_amp),
        phi=GridField(phi, grid),
        psi=psi,
        reference_depth=reference_depth,
        centre=centre,
        convexity_defect=defect,
    )


@dataclass
class BendResult:
    """Bent and lifted fields with their checks."""

    bent: GridField
    lifted: GridField
    slope_report: pd.DataFrame
    lift_ratio: Tuple[float, float]
    min_laplacian: float

    @property
    def slope_ok(self) -> bool:
        return bool(self.slope_report["ok"].all())


def _last_positive(values: np.ndarray) -> np.ndarray:
    positive = values > 0
    return values.shape[1] - 1 - np.argmax(positive[:, ::-1], axis=1)


def lift_bracket(
    v: GridField,
    lifted: GridField,
    phi: GridField,
    boundary: np.ndarray,
) -> Tuple[float, float]:
    """
    Measured (c, C) with c phi <= lifted - v <= C phi on nodes within phi/2 of
    the original free boundary depth.
    """
    distance = np.abs(boundary[:, None] - v.grid.depths[None, :])
    near = distance <= phi.values / 2.0
    if not near.any():
        return float("nan"), float("nan")
    ratio = (lifted.values - v.values)[near] / phi.values[near]
    return float(ratio.min()), float(ratio.max())


def bend(
    solution: PlaneLikeSolution,
    profile: BendingProfile,
    lift_rows: int = DEFAULT_LIFT_ROWS,
) -> BendResult:
    """
    Variable-radius sup-convolution of a plane-like solution and its harmonic lift.

    The lift replaces the bent field by its harmonic extension on the bent
    positivity set below the line lift_rows * h above the shallowest bent
    boundary point, keeping the bent values above that line.

    Raises:
        ValueError: If phi exceeds half the slab height or the bent field has
            no positive node below the data row.
    """
    cell = solution.cell_solution
    grid = cell.grid
    if cell.medium is None:
        raise ValueError("Cell solution carries no medium")
    if profile.grid.shape != grid.shape or abs(profile.grid.h - grid.h) > 1e-15:
        raise ValueError("Bending profile grid does not match the solution grid")
    if float(profile.phi.values.max()) > grid.height / 2.0:
        raise ValueError(f"phi must not exceed half the slab height {grid.height / 2.0}")
    v = cell.field
    bent = sup_convolve_variable(v, profile.phi.values)
    if not np.any(bent.values[:, 1:] > 0):
        raise ValueError("Bent field has an empty positivity set")

    last = _last_positive(bent.values)
    cut_row = max(int(last.min()) - lift_rows, 1)
    unknown = (bent.values > 0)
    unknown[:, : cut_row + 1] = False
    lifted = dirichlet_solve(bent, unknown)

    taus = grid.taus
    boundary_depth = last * grid.h
    cols = np.arange(grid.n_tan)
    # one node back from the bent boundary, clear of its kink
    inner = np.clip(last - 1, 0, grid.n_nrm)
    outer = np.clip(last - 2, 0, grid.n_nrm)
    measured = (bent.values[cols, outer] - bent.values[cols, inner]) / grid.h
    gx = (np.roll(profile.phi.values, -1, axis=0) - np.roll(profile.phi.values, 1, axis=0)) / (2.0 * grid.h)
    gy = np.gradient(profile.phi.values, grid.h, axis=1)
    grad_phi = float(np.max(np.hypot(gx, gy)))
    points = grid.to_physical(taus, boundary_depth)
    radii = np.clip(profile.phi.values[cols, last], grid.h, 1.0)
    q_inf = ball_field(cell.medium, points, radii, kind="inf")
    bound = (1.0 - grad_phi) * q_inf
    report = pd.DataFrame({
        "tau": taus,
        "depth": boundary_depth,
        "measured": measured,
        "bound": bound,
        "grad_phi": grad_phi,
        "ok": measured >= bound - 10.0 * grid.h,
    }, columns=SLOPE_COLUMNS)

    positive = bent.values > 0
    interior = positive & np.roll(positive, 1, axis=0) & np.roll(positive, -1, axis=0)
    interior[:, 1:-1] &= positive[:, 2:] & positive[:, :-2]
    interior[:, 0] = interior[:, -1] = False
    # rows whose ball reaches past the slab ends carry truncated maxima
    trusted = bent.valid.copy()
    trusted[:, 1:-1] &= bent.valid[:, 2:] & bent.valid[:, :-2]
    interior &= trusted
    lap = laplacian(bent)
    min_lap = float(np.min(lap[interior])) if interior.any() else 0.0

    ratio = lift_bracket(v, lifted, profile.phi, cell.boundary.g)
    logger.info(
        "Bend: lift ratio [%.3g, %.3g], min laplacian %.3g, slope ok %s",
        ratio[0], ratio[1], min_lap, bool(report["ok"].all()),
    )
    return BendResult(bent=bent, lifted=lifted, slope_report=report, lift_ratio=ratio, min_laplacian=min_lap)

