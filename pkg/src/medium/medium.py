"""
Z^2-periodic coefficient fields Q(x) and their statistics.

Built-in families:
- constant media
- laminar media Q(x) = profile(x . xi) along a rational lamination vector
- bump lattices Q(x) = 1 + A * sum_k rho((x - k) / delta)
- custom media sampled on a grid file

Media are immutable. The root-mean-square <Q^2>^{1/2} is computed lazily by
adaptive quadrature and cached on the instance.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import integrate, optimize

from src.medium.direction import Direction
from src.medium.fields import (
    BumpLatticeField,
    ConstantField,
    GridSampledField,
    LaminarField,
    bump_normalization,
    bump_profile,
    bump_slope_bound,
)
from src.utils.errors import MediumError, QuadratureError

logger = logging.getLogger(__name__)

PROFILE_SAMPLES = 4096
DEFAULT_RMS_TOL = 1e-8
MEDIUM_FILE_HEADER = "ac-medium v1"


class MediumKind(Enum):
    """Families of periodic media."""
    CONSTANT = "constant"
    LAMINAR = "laminar"
    BUMP_LATTICE = "bump_lattice"
    CUSTOM = "custom"


@dataclass(frozen=True)
class PeriodicMedium:
    """A Z^2-periodic Lipschitz coefficient with cached bounds."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    qmin: float
    qmax: float
    lipschitz: float
    kind: MediumKind
    params: Dict[str, Any] = field(default_factory=dict, compare=False)
    # Quadrature breakpoints per axis on the cell [-1/2, 1/2]^2
    breakpoints: Tuple[float, ...] = ()
    _cache: Dict[str, float] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not (0.0 < self.qmin <= self.qmax):
            raise MediumError(f"Bounds must satisfy 0 < qmin <= qmax, got ({self.qmin}, {self.qmax})")
        if self.lipschitz < 0:
            raise MediumError(f"Lipschitz bound must be nonnegative, got {self.lipschitz}")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluator(points)

    def at(self, x: float, y: float) -> float:
        return float(self.evaluator(np.array([x, y])))

    @property
    def rms(self) -> float:
        """<Q^2>^{1/2} at the default tolerance."""
        return rms_mean(self, DEFAULT_RMS_TOL)

    def describe(self) -> str:
        details = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind.value}({details})"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "params": {k: v for k, v in self.params.items()},
            "qmin": self.qmin,
            "qmax": self.qmax,
            "lipschitz": self.lipschitz,
        }


# ----------------------------------------------------------------------------
# Factories
# ----------------------------------------------------------------------------

def make_constant(value: float = 1.0) -> PeriodicMedium:
    """Constant medium Q = value."""
    if value <= 0:
        raise MediumError(f"Constant medium must be positive, got {value}")
    medium = PeriodicMedium(
        evaluator=ConstantField(float(value)),
        qmin=float(value),
        qmax=float(value),
        lipschitz=0.0,
        kind=MediumKind.CONSTANT,
        params={"value": float(value)},
    )
    medium._cache["rms"] = float(value)
    medium._cache["rms_tol"] = 0.0
    return medium


def _refine_extremum(profile: Callable, s0: float, step: float, sign: float) -> float:
    """Polish a sampled extremum of sign*profile on [s0 - step, s0 + step]."""
    res = optimize.minimize_scalar(
        lambda s: sign * float(profile(np.array(s))),
        bounds=(s0 - step, s0 + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return min(float(res.fun), sign * float(profile(np.array(s0))))


def make_laminar(profile: Callable, axis: Direction) -> PeriodicMedium:
    """
    Laminar medium Q(x) = profile(x . xi) along a rational lamination axis.

    Args:
        profile: 1-periodic, positive, Lipschitz function of one variable.
        axis: Rational direction; its irreducible lattice vector xi keeps Q
            Z^2-periodic.

    Returns:
        PeriodicMedium of kind LAMINAR.

    Raises:
        MediumError: If the axis is irrational or the profile is not positive.
    """
    if not axis.is_rational:
        raise MediumError(f"Lamination axis must be rational, got {axis.label()}")
    s = np.arange(PROFILE_SAMPLES) / PROFILE_SAMPLES
    values = np.asarray(profile(s), dtype=float)
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        bad = int(np.argmin(np.where(np.isfinite(values), values, -np.inf)))
        raise MediumError(
            f"Profile must be positive, got {values[bad]!r} at s = {s[bad]:.6f}",
            location=(float(s[bad]),),
        )
    if abs(float(profile(np.array(1.0))) - values[0]) > 1e-9 * max(1.0, abs(values[0])):
        raise MediumError("Profile must be 1-periodic")

    step = 1.0 / PROFILE_SAMPLES
    qmin = _refine_extremum(profile, float(s[np.argmin(values)]), step, 1.0)
    qmax = -_refine_extremum(profile, float(s[np.argmax(values)]), step, -1.0)
    if qmin <= 0:
        raise MediumError(f"Profile must be positive, refined minimum is {qmin}")

    slope = getattr(profile, "lipschitz", None)
    if slope is None:
        diffs = np.abs(np.diff(np.append(values, values[0]))) / step
        slope = float(diffs.max()) * 1.01
    xi = axis.rational
    params: Dict[str, Any] = {"xi": list(xi)}
    for name in ("mean", "amplitude", "phase"):
        if hasattr(profile, name):
            params[name] = getattr(profile, name)
    return PeriodicMedium(
        evaluator=LaminarField(profile, xi),
        qmin=float(qmin),
        qmax=float(qmax),
        lipschitz=float(slope) * axis.lattice_norm,
        kind=MediumKind.LAMINAR,
        params=params,
    )


def make_bump_lattice(A: float, delta: float) -> PeriodicMedium:
    """
    One smooth radial bump of height A * rho(0) per unit cell.

    Args:
        A: Bump amplitude (A = 0 gives the constant medium Q = 1).
        delta: Bump diameter scale in (0, 1); the support is B_{delta/2}(k).

    Raises:
        MediumError: If A < 0 or delta is outside (0, 1).
    """
    if A < 0:
        raise MediumError(f"Bump amplitude must be nonnegative, got {A}")
    if not (0.0 < delta < 1.0):
        raise MediumError(f"delta must lie in (0, 1), got {delta}")
    peak = bump_normalization() * math.exp(-1.0)
    return PeriodicMedium(
        evaluator=BumpLatticeField(float(A), float(delta)),
        qmin=1.0,
        qmax=1.0 + A * peak,
        lipschitz=A * bump_slope_bound() / delta,
        kind=MediumKind.BUMP_LATTICE,
        params={"A": float(A), "delta": float(delta)},
        breakpoints=(-delta / 2.0, 0.0, delta / 2.0),
    )


def medium_from_samples(values: np.ndarray, source: Optional[str] = None) -> PeriodicMedium:
    """Custom medium from an n x n array of positive samples on [0, 1)^2."""
    grid = np.asarray(values, dtype=float)
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
        raise MediumError(f"Samples must form a square array, got shape {grid.shape}")
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0):
        i, j = np.unravel_index(int(np.argmin(np.where(np.isfinite(grid), grid, -np.inf))), grid.shape)
        n = grid.shape[0]
        raise MediumError(
            f"Medium samples must be positive, got {grid[i, j]!r} at index ({i}, {j})",
            location=(i / n, j / n),
        )
    n = grid.shape[0]
    # Lipschitz estimate from periodic finite differences; an estimate, not a certificate
    dx = np.abs(np.roll(grid, -1, axis=0) - grid) * n
    dy = np.abs(np.roll(grid, -1, axis=1) - grid) * n
    lipschitz = float(np.sqrt(dx.max() ** 2 + dy.max() ** 2)) if n > 1 else 0.0
    edges = tuple(sorted({round(k / n - 0.5, 15) for k in range(n + 1)}))
    params: Dict[str, Any] = {"n": n}
    if source is not None:
        params["path"] = source
    return PeriodicMedium(
        evaluator=GridSampledField(tuple(tuple(row) for row in grid.tolist())),
        qmin=float(grid.min()),
        qmax=float(grid.max()),
        lipschitz=lipschitz,
        kind=MediumKind.CUSTOM,
        params=params,
        breakpoints=edges if n <= 64 else (),
    )


def load_custom_medium(path: Union[str, Path]) -> PeriodicMedium:
    """
    Read a custom medium file.

    Format: header line `ac-medium v1`, line `n <gridsize>`, then n^2
    whitespace-separated positive floats in row-major order over [0,1)^2.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Medium file not found: {path}")
    lines = path.read_text().split("\n")
    if not lines or lines[0].strip() != MEDIUM_FILE_HEADER:
        raise MediumError(f"{path}: expected header '{MEDIUM_FILE_HEADER}'")
    size_line = lines[1].split() if len(lines) > 1 else []
    if len(size_line) != 2 or size_line[0] != "n":
        raise MediumError(f"{path}: expected 'n <gridsize>' on line 2")
    n = int(size_line[1])
    numbers = np.array(" ".join(lines[2:]).split(), dtype=float)
    if numbers.size != n * n:
        raise MediumError(f"{path}: expected {n * n} samples, found {numbers.size}")
    return medium_from_samples(numbers.reshape(n, n), source=str(path))


def write_custom_medium(medium: PeriodicMedium, path: Union[str, Path], n: int) -> Path:
    """Sample a medium on an n x n grid and write it in the custom-medium format."""
    axis = np.arange(n) / n
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    values = medium(np.stack([xx, yy], axis=-1))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = "\n".join(" ".join(f"{v:.17g}" for v in row) for row in values)
    path.write_text(f"{MEDIUM_FILE_HEADER}\nn {n}\n{rows}\n")
    return path


# ----------------------------------------------------------------------------
# Statistics
# ----------------------------------------------------------------------------

def _integrate_square(medium: PeriodicMedium, tol: float, limit: int) -> Tuple[float, bool]:
    points = list(medium.breakpoints)
    opts = {"epsabs": tol, "epsrel": 0.0, "limit": max(limit, 4 * len(points) + 50)}
    if points:
        opts["points"] = points

    def integrand(y: float, x: float) -> float:
        return float(medium.evaluator(np.array([x, y]))) ** 2

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, _ = integrate.nquad(integrand, [(-0.5, 0.5), (-0.5, 0.5)], opts=[opts, opts])
    converged = not any(issubclass(w.category, integrate.IntegrationWarning) for w in caught)
    return float(value), converged


def rms_mean(medium: PeriodicMedium, tol: float = DEFAULT_RMS_TOL) -> float:
    """
    (int_{[0,1]^2} Q^2 dx)^{1/2} by nested adaptive quadrature.

    Args:
        medium: The medium.
        tol: Absolute tolerance (> 0).

    Returns:
        <Q^2>^{1/2}, cached on the medium for tolerances no tighter than the
        one it was computed with.

    Raises:
        QuadratureError: When refinement does not converge; carries the last
            two estimates.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    cached_tol = medium._cache.get("rms_tol")
    if cached_tol is not None and cached_tol <= tol:
        return medium._cache["rms"]

    # rms error ~ (error of the mean square) / (2 * rms) and rms >= qmin
    target = 2.0 * tol * medium.qmin
    estimates: List[float] = []
    limit = 50
    for attempt in range(3):
        value, converged = _integrate_square(medium, target, limit)
        estimates.append(value)
        if converged:
            break
        logger.warning("rms quadrature did not converge (limit=%d); refining", limit)
        limit *= 4
    else:
        raise QuadratureError(
            f"Quadrature for <Q^2> did not converge for {medium.describe()}",
            estimates=estimates[-2:],
        )
    result = math.sqrt(value)
    medium._cache["rms"] = result
    medium._cache["rms_tol"] = tol
    logger.debug("rms_mean(%s) = %.12f", medium.describe(), result)
    return result


def _ball_samples(x: np.ndarray, delta: float) -> Tuple[np.ndarray, float]:
    """Points covering the closed ball B_delta(x) to within delta/16."""
    spacing = delta / 16.0
    offsets = np.arange(-16, 17) * spacing
    ox, oy = np.meshgrid(offsets, offsets, indexing="ij")
    inside = ox ** 2 + oy ** 2 <= delta ** 2 * (1.0 + 1e-12)
    disk = np.stack([ox[inside], oy[inside]], axis=-1)
    n_ring = int(math.ceil(2.0 * math.pi * 16.0))
    angles = 2.0 * math.pi * np.arange(n_ring) / n_ring
    ring = delta * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return x + np.concatenate([disk, ring]), spacing


def _laminar_ball_extrema(medium: PeriodicMedium, x: np.ndarray, delta: float) -> Tuple[float, float]:
    field_ = medium.evaluator
    xi = np.asarray(field_.xi, dtype=float)
    centre = float(x @ xi)
    half = delta * float(np.hypot(*xi))
    s = np.linspace(centre - half, centre + half, 513)
    values = np.asarray(field_.profile(s - np.floor(s)), dtype=float)
    step = s[1] - s[0]

    def profile(t):
        t = np.asarray(t, dtype=float)
        return field_.profile(t - np.floor(t))

    def polish(idx: int, sign: float) -> float:
        lo = max(centre - half, s[idx] - step)
        hi = min(centre + half, s[idx] + step)
        res = optimize.minimize_scalar(lambda t: sign * float(profile(t)), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-13})
        return sign * min(float(res.fun), sign * float(values[idx]))

    return polish(int(np.argmin(values)), 1.0), polish(int(np.argmax(values)), -1.0)


def _bump_ball_extrema(medium: PeriodicMedium, x: np.ndarray, delta: float) -> Tuple[float, float]:
    A = medium.params["A"]
    bump_delta = medium.params["delta"]
    base = np.round(x)
    ks = base + np.array([(i, j) for i in range(-2, 3) for j in range(-2, 3)], dtype=float)
    dist = np.hypot(*(x - ks).T)
    sup = 1.0 + A * float(bump_profile(np.maximum(dist - delta, 0.0) / bump_delta).max())
    inf = 1.0
    nearest = float(dist.min())
    if nearest + delta < bump_delta / 2.0:
        inf = 1.0 + A * float(bump_profile(np.array((nearest + delta) / bump_delta)))
    return inf, sup


def ball_extrema(medium: PeriodicMedium, x, delta: float) -> Tuple[float, float]:
    """
    Bracket inf and sup of Q over the closed ball B_delta(x).

    Constant, laminar and bump media are handled in closed form (1-D extrema
    and radial monotonicity). Other media are sampled at resolution delta/16
    and padded by lipschitz * delta/16. Results are clipped to [qmin, qmax].
    """
    if not (0.0 < delta <= 1.0):
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    x = np.asarray(x, dtype=float)
    if medium.kind is MediumKind.CONSTANT:
        return medium.qmin, medium.qmax
    if medium.kind is MediumKind.LAMINAR:
        inf, sup = _laminar_ball_extrema(medium, x, delta)
    elif medium.kind is MediumKind.BUMP_LATTICE:
        inf, sup = _bump_ball_extrema(medium, x, delta)
    else:
        samples, spacing = _ball_samples(x, delta)
        values = medium(samples)
        pad = medium.lipschitz * spacing
        inf, sup = float(values.min()) - pad, float(values.max()) + pad
    return max(inf, medium.qmin), min(sup, medium.qmax)


def ball_field(medium: PeriodicMedium, points: np.ndarray, delta, kind: str = "inf") -> np.ndarray:
    """Q_delta (kind='inf') or Q^delta (kind='sup') at every point of an array."""
    if kind not in ("inf", "sup"):
        raise ValueError(f"kind must be 'inf' or 'sup', got {kind!r}")
    points = np.asarray(points, dtype=float)
    flat = points.reshape(-1, 2)
    radii = np.broadcast_to(np.asarray(delta, dtype=float), flat.shape[:1])
    pick = 0 if kind == "inf" else 1
    out = np.array([ball_extrema(medium, p, float(r))[pick] for p, r in zip(flat, radii)])
    return out.reshape(points.shape[:-1])
