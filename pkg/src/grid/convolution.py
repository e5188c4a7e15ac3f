"""
Discrete sup/inf convolution over Euclidean balls on a slab grid.

u^delta(x) = max of u over nodes within distance delta of x, and u_delta the
corresponding min. Balls are truncated at the first and last rows; the rows
within delta of either end are marked invalid on the result.
"""

from __future__ import annotations

import math
from typing import Iterator, Tuple

import numpy as np
from scipy.ndimage import map_coordinates

from src.grid.slab import GridField

CIRCLE_SAMPLES = 64


def _ball_offsets(radius_nodes: float) -> Iterator[Tuple[int, int, float]]:
    reach = int(math.floor(radius_nodes + 1e-9))
    for di in range(-reach, reach + 1):
        for dj in range(-reach, reach + 1):
            dist = math.hypot(di, dj)
            if dist <= radius_nodes + 1e-9:
                yield di, dj, dist


def _shifted(values: np.ndarray, di: int, dj: int, fill: float) -> np.ndarray:
    """values[i + di, j + dj] with periodic i and `fill` outside the row range."""
    rolled = np.roll(values, -di, axis=0)
    out = np.full_like(rolled, fill)
    rows = values.shape[1]
    if dj >= 0:
        out[:, : rows - dj] = rolled[:, dj:]
    else:
        out[:, -dj:] = rolled[:, : rows + dj]
    return out


def _check_radius(field: GridField, delta: float) -> None:
    grid = field.grid
    if delta < grid.h - 1e-12:
        raise ValueError(f"delta must be at least the grid spacing {grid.h}, got {delta}")
    if delta > grid.height / 2.0:
        raise ValueError(f"delta must not exceed half the slab height {grid.height / 2.0}, got {delta}")


def _eroded_mask(field: GridField, delta: float) -> np.ndarray:
    margin = int(math.floor(delta / field.grid.h + 1e-9))
    valid = field.valid.copy()
    if margin:
        valid[:, :margin] = False
        valid[:, -margin:] = False
    return valid


def _morph(field: GridField, delta: float, take_max: bool) -> GridField:
    _check_radius(field, delta)
    fill = -np.inf if take_max else np.inf
    op = np.maximum if take_max else np.minimum
    out = field.values.copy()
    for di, dj, _ in _ball_offsets(delta / field.grid.h):
        out = op(out, _shifted(field.values, di, dj, fill))
    return GridField(out, field.grid, _eroded_mask(field, delta))


def sup_convolve(field: GridField, delta: float) -> GridField:
    """u^delta: nodewise max over the closed ball of radius delta."""
    return _morph(field, delta, take_max=True)


def inf_convolve(field: GridField, delta: float) -> GridField:
    """u_delta: nodewise min over the closed ball of radius delta."""
    return _morph(field, delta, take_max=False)


def graph_extension(values: np.ndarray) -> np.ndarray:
    """
    Continue each column past its last positive node by the line through the
    last two positive nodes, capped at zero. Columns with fewer than two
    positive nodes are left unchanged.
    """
    positive = values > 0
    n_rows = values.shape[1]
    last = n_rows - 1 - np.argmax(positive[:, ::-1], axis=1)
    usable = positive.any(axis=1) & (last >= 1)
    cols = np.arange(values.shape[0])
    v_last = values[cols, last]
    v_prev = values[cols, np.maximum(last - 1, 0)]
    beyond = np.arange(n_rows)[None, :] - last[:, None]
    line = np.minimum(v_last[:, None] + beyond * (v_last - v_prev)[:, None], 0.0)
    extend = usable[:, None] & (beyond > 0)
    return np.where(extend, line, values)


def _circle_max(values: np.ndarray, radius_nodes: np.ndarray, samples: int) -> np.ndarray:
    """Max of the bilinear interpolant of `values` over `samples` points on each node's circle."""
    n_tan, n_rows = values.shape
    pad = int(math.ceil(float(radius_nodes.max()))) + 1
    padded = np.concatenate([values[-pad:], values, values[:pad]], axis=0)
    ii, jj = np.meshgrid(np.arange(n_tan, dtype=float), np.arange(n_rows, dtype=float), indexing="ij")
    best = np.full(values.shape, -np.inf)
    for angle in 2.0 * math.pi * np.arange(samples) / samples:
        coords = np.stack([ii + pad + radius_nodes * math.cos(angle), jj + radius_nodes * math.sin(angle)])
        best = np.maximum(best, map_coordinates(padded, coords, order=1, mode="nearest"))
    return best


def sup_convolve_variable(field: GridField, radius: np.ndarray, circle_samples: int = CIRCLE_SAMPLES) -> GridField:
    """
    Variable-radius sup-convolution: out(x) = max of u over nodes within
    distance radius(x) of x. Radii below one grid spacing round up to h.

    With circle_samples > 0 the max also runs over bilinear samples of the
    graph extension of u on the circle of radius radius(x), which removes the
    node quantization of the radius for fields that are piecewise linear
    across their free boundary.
    """
    grid = field.grid
    radius = np.maximum(np.asarray(radius, dtype=float), grid.h)
    if radius.shape != grid.shape:
        raise ValueError(f"radius must have shape {grid.shape}, got {radius.shape}")
    out = field.values.copy()
    for di, dj, dist in _ball_offsets(float(radius.max()) / grid.h):
        reach = radius >= dist * grid.h - 1e-12
        candidate = _shifted(field.values, di, dj, -np.inf)
        out = np.where(reach, np.maximum(out, candidate), out)
    if circle_samples:
        out = np.maximum(out, _circle_max(graph_extension(field.values), radius / grid.h, circle_samples))
    return GridField(out, grid, _eroded_mask(field, float(radius.max())))
