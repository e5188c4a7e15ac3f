"""
Rotated slab grids aligned with a direction p.

Node (i, j) sits at tangential coordinate tau = i*h and depth s = j*h below the
data line, i.e. at x = tau * p_perp - s * p + shift * p. Row j = 0 is the data
line x.p = shift; the tangential index is periodic with period n_tan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from src.medium.direction import Direction

MAX_GRID_SPACING = 0.1
FIELD_FILE_TAG = "ac-field v1"


@dataclass(frozen=True)
class SlabGrid:
    """Tangentially periodic grid on the slab {-height <= x.p - shift <= 0}."""

    direction: Direction
    period_len: float
    height: float
    h: float
    n_tan: int
    n_nrm: int
    shift: float = 0.0

    def __post_init__(self):
        if abs(self.n_tan * self.h - self.period_len) > 1e-12 * max(1.0, self.period_len):
            raise ValueError(f"n_tan*h = {self.n_tan * self.h} does not match period_len = {self.period_len}")
        if abs(self.n_nrm * self.h - self.height) > 1e-12 * max(1.0, self.height):
            raise ValueError(f"n_nrm*h = {self.n_nrm * self.h} does not match height = {self.height}")
        if self.h > MAX_GRID_SPACING + 1e-15:
            raise ValueError(f"Grid spacing must be <= {MAX_GRID_SPACING}, got {self.h}")

    @classmethod
    def build(
        cls,
        direction: Direction,
        height: float,
        h_max: float,
        period_len: Optional[float] = None,
        shift: float = 0.0,
    ) -> "SlabGrid":
        """
        Grid with spacing <= h_max spanning one tangential period.

        For rational directions n_tan is a multiple of |xi|^2, so every lattice
        translation is an integer node shift.
        """
        if h_max <= 0:
            raise ValueError(f"h_max must be positive, got {h_max}")
        if period_len is None:
            if not direction.is_rational:
                raise ValueError("Irrational directions need an explicit period_len")
            period_len = direction.lattice_norm
            block = direction.lattice_norm_sq
            n_tan = block * max(1, math.ceil(period_len / (h_max * block) - 1e-12))
        else:
            n_tan = max(1, math.ceil(period_len / h_max - 1e-12))
        h = period_len / n_tan
        n_nrm = max(2, math.ceil(height / h - 1e-9))
        return cls(direction, period_len, n_nrm * h, h, n_tan, n_nrm, shift)

    @property
    def n_rows(self) -> int:
        return self.n_nrm + 1

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_tan, self.n_rows)

    @property
    def depths(self) -> np.ndarray:
        return np.arange(self.n_rows) * self.h

    @property
    def taus(self) -> np.ndarray:
        return np.arange(self.n_tan) * self.h

    def to_physical(self, tau, depth) -> np.ndarray:
        """Physical coordinates of (tau, depth) pairs; broadcasts."""
        tau = np.asarray(tau, dtype=float)
        depth = np.asarray(depth, dtype=float)
        p = np.asarray(self.direction.unit)
        q = np.asarray(self.direction.perp)
        along = self.shift - depth
        return tau[..., None] * q + along[..., None] * p

    def points(self) -> np.ndarray:
        """Physical coordinates of every node, shape (n_tan, n_rows, 2)."""
        tau, depth = np.meshgrid(self.taus, self.depths, indexing="ij")
        return self.to_physical(tau, depth)

    def lattice_shift(self, k: Tuple[int, int]) -> Tuple[int, int]:
        """
        Node offsets (di, dj) such that node (i, j) + (di, dj) sits at x + k.

        Raises:
            ValueError: If k does not map onto whole nodes.
        """
        kv = np.asarray(k, dtype=float)
        di = float(kv @ np.asarray(self.direction.perp)) / self.h
        dj = -float(kv @ np.asarray(self.direction.unit)) / self.h
        if abs(di - round(di)) > 1e-6 or abs(dj - round(dj)) > 1e-6:
            raise ValueError(f"Lattice vector {k} is not a whole node shift on this grid")
        return int(round(di)), int(round(dj))

    def rows_per_period(self) -> int:
        """Rows spanned by the normal period 1/|xi| of a rational direction."""
        rows = 1.0 / (self.direction.lattice_norm * self.h)
        if abs(rows - round(rows)) > 1e-6:
            raise ValueError("Normal period is not a whole number of rows on this grid")
        return int(round(rows))

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.to_dict(),
            "period_len": self.period_len,
            "height": self.height,
            "h": self.h,
            "n_tan": self.n_tan,
            "n_nrm": self.n_nrm,
            "shift": self.shift,
        }


@dataclass
class HeightFunction:
    """Free-boundary depth g[i] below the data line, per tangential column."""

    g: np.ndarray
    grid: SlabGrid

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        if self.g.shape != (self.grid.n_tan,):
            raise ValueError(f"Height function needs {self.grid.n_tan} entries, got {self.g.shape}")
        if np.any(self.g < 0) or np.any(self.g > self.grid.height + 1e-12):
            raise ValueError(f"Height function must lie in [0, {self.grid.height}]")

    @classmethod
    def flat(cls, grid: SlabGrid, depth: float) -> "HeightFunction":
        return cls(np.full(grid.n_tan, float(depth)), grid)

    @property
    def r(self) -> float:
        return float(self.g.min())

    @property
    def width(self) -> float:
        return float(self.g.max() - self.g.min())

    def slope(self) -> np.ndarray:
        """Periodic central-difference dg/dtau."""
        return (np.roll(self.g, -1) - np.roll(self.g, 1)) / (2.0 * self.grid.h)

    def boundary_points(self) -> np.ndarray:
        return self.grid.to_physical(self.grid.taus, self.g)

    def copy(self) -> "HeightFunction":
        return HeightFunction(self.g.copy(), self.grid)


@dataclass
class GridField:
    """Scalar samples on a slab grid, indexed (tangential, normal)."""

    values: np.ndarray
    grid: SlabGrid
    valid: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"Field shape {self.values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("GridField values must be finite")
        if self.valid is None:
            self.valid = np.ones(self.grid.shape, dtype=bool)

    def copy(self) -> "GridField":
        return GridField(self.values.copy(), self.grid, self.valid.copy())

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(values, self.grid, self.valid.copy())

    def positive(self) -> np.ndarray:
        return self.values > 0

    def translate(self, k: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
        """
        Values of x -> u(x + k) and the mask of rows where the translate is defined.
        """
        di, dj = self.grid.lattice_shift(k)
        rolled = np.roll(self.values, -di, axis=0)
        out = np.zeros_like(rolled)
        mask = np.zeros(rolled.shape, dtype=bool)
        rows = self.grid.n_rows
        if dj >= 0:
            out[:, : rows - dj] = rolled[:, dj:]
            mask[:, : rows - dj] = True
        else:
            out[:, -dj:] = rolled[:, : rows + dj]
            mask[:, -dj:] = True
        return out, mask


def dump_field(field_: GridField, path: Union[str, Path]) -> Path:
    """Write a field as plain text with the header `ac-field v1 n_tan n_nrm h`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = field_.grid
    header = f"{FIELD_FILE_TAG} {grid.n_tan} {grid.n_nrm} {grid.h:.17g}"
    np.savetxt(path, field_.values, fmt="%.17g", header=header, comments="")
    return path


def load_field(path: Union[str, Path]) -> Tuple[np.ndarray, float]:
    """Read a dumped field; returns (values, h)."""
    path = Path(path)
    with path.open() as handle:
        header = handle.readline().split()
    if len(header) != 5 or " ".join(header[:2]) != FIELD_FILE_TAG:
        raise ValueError(f"{path}: expected header '{FIELD_FILE_TAG} n_tan n_nrm h'")
    n_tan, n_nrm, h = int(header[2]), int(header[3]), float(header[4])
    values = np.loadtxt(path, skiprows=1, ndmin=2)
    if values.shape != (n_tan, n_nrm + 1):
        raise ValueError(f"{path}: expected shape {(n_tan, n_nrm + 1)}, found {values.shape}")
    return values, h
