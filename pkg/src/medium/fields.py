"""
Picklable coefficient evaluators.

Each evaluator maps an array of points with trailing dimension 2 onto the
values of a Z^2-periodic coefficient Q. They are plain frozen dataclasses so a
medium can be shipped to worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import RegularGridInterpolator


@dataclass(frozen=True)
class SineProfile:
    """Lamination profile s -> mean + amplitude * sin(2*pi*(s + phase))."""

    mean: float = 1.0
    amplitude: float = 0.5
    phase: float = 0.0

    def __call__(self, s):
        return self.mean + self.amplitude * np.sin(2.0 * np.pi * (np.asarray(s, dtype=float) + self.phase))

    @property
    def lipschitz(self) -> float:
        return 2.0 * math.pi * abs(self.amplitude)

    @property
    def mean_square(self) -> float:
        return self.mean ** 2 + 0.5 * self.amplitude ** 2


@dataclass(frozen=True)
class ConstantField:
    value: float

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.full(points.shape[:-1], self.value)


@dataclass(frozen=True)
class LaminarField:
    """Q(x) = profile(x . xi) for an integer lamination vector xi."""

    profile: Callable
    xi: Tuple[int, int]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        s = points[..., 0] * self.xi[0] + points[..., 1] * self.xi[1]
        return np.asarray(self.profile(s - np.floor(s)), dtype=float)


@lru_cache(maxsize=None)
def bump_normalization() -> float:
    """Constant c with int rho^2 = 1 for rho(y) = c exp(-1/(1 - 4|y|^2)) on |y| < 1/2."""
    tail, _ = integrate.quad(lambda v: math.exp(-2.0 / v), 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)
    return 1.0 / math.sqrt(0.25 * math.pi * tail)


def bump_profile(radius: np.ndarray) -> np.ndarray:
    """Radial standard bump rho as a function of |y|."""
    r = np.asarray(radius, dtype=float)
    out = np.zeros_like(r)
    inside = r < 0.5
    out[inside] = bump_normalization() * np.exp(-1.0 / (1.0 - 4.0 * r[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def bump_slope_bound() -> float:
    """max |rho'| over the support."""
    c = bump_normalization()

    def neg_slope(r: float) -> float:
        w = 1.0 - 4.0 * r * r
        return -c * math.exp(-1.0 / w) * 8.0 * r / (w * w)

    res = optimize.minimize_scalar(neg_slope, bounds=(1e-9, 0.5 - 1e-9), method="bounded",
                                   options={"xatol": 1e-12})
    return -float(res.fun)


@dataclass(frozen=True)
class BumpLatticeField:
    """Q(x) = 1 + amplitude * rho((x - k) / delta) with k the nearest lattice point."""

    amplitude: float
    delta: float

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        local = points - np.round(points)
        radius = np.hypot(local[..., 0], local[..., 1]) / self.delta
        return 1.0 + self.amplitude * bump_profile(radius)


@dataclass(frozen=True)
class GridSampledField:
    """Periodic bilinear interpolation of samples values[i, j] at (i/n, j/n)."""

    values: Tuple[Tuple[float, ...], ...]
    _interp: RegularGridInterpolator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.values, dtype=float)
        n = grid.shape[0]
        padded = np.empty((n + 1, n + 1))
        padded[:n, :n] = grid
        padded[n, :n] = grid[0, :]
        padded[:n, n] = grid[:, 0]
        padded[n, n] = grid[0, 0]
        axis = np.arange(n + 1) / n
        object.__setattr__(self, "_interp", RegularGridInterpolator((axis, axis), padded, method="linear"))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        wrapped = points - np.floor(points)
        flat = wrapped.reshape(-1, 2)
        return self._interp(flat).reshape(points.shape[:-1])
