"""
Functions on the circle of directions and their cone envelopes.

A DirectionFunction samples f on theta_i = 2*pi*i/n. The inf-convolution with
the cone n_lip * |e' - e| is the largest n_lip-Lipschitz minorant of f; the
sup-convolution is the smallest majorant. Both are computed exactly on the
grid by a lower-envelope sweep.

On n samples the index distance k = |i - j| already encodes the wrapped angle:
the chord 2 sin(pi k / n) and the arc (2 pi / n) min(k, n - k) are both
concave in k on [0, n], so each pass is a concave-cost envelope in which an
older candidate, once it beats a newer one, keeps beating it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 3600
SNAP_TOL = 1e-9
DIRECTION_COLUMNS = ["theta", "value"]


class DistanceMetric(Enum):
    CHORD = "chord"
    ARC = "arc"

    @classmethod
    def parse(cls, value) -> "DistanceMetric":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value))
        except ValueError:
            available = ", ".join(m.value for m in cls)
            raise ValueError(f"Unknown metric: {value}. Available: {available}") from None


@dataclass(frozen=True)
class DirectionFunction:
    """Scalar function on a uniform angular grid of the circle."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 3:
            raise ValueError(f"DirectionFunction needs a 1-D array of at least 3 samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("DirectionFunction values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def thetas(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n) / self.n

    def __call__(self, theta) -> np.ndarray:
        """Periodic linear interpolation."""
        return np.interp(np.mod(theta, 2.0 * math.pi), self.thetas, self.values, period=2.0 * math.pi)

    def index_of(self, theta: float) -> int:
        return int(round((theta % (2.0 * math.pi)) * self.n / (2.0 * math.pi))) % self.n

    def with_values(self, values: np.ndarray) -> "DirectionFunction":
        return DirectionFunction(np.asarray(values, dtype=float))


def kernel_table(n: int, metric=DistanceMetric.CHORD) -> np.ndarray:
    """Distance between samples i and i + k for k = 0..n-1."""
    k = np.arange(n)
    if DistanceMetric.parse(metric) is DistanceMetric.CHORD:
        return 2.0 * np.sin(math.pi * k / n)
    return (2.0 * math.pi / n) * np.minimum(k, n - k)


def _forward_envelope(f: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """out[i] = min over j <= i of f[j] + cost[i - j], cost concave."""
    n = f.size
    out = np.empty(n)
    # stack of (owner, start); the top owns the earliest future positions
    owners: List[int] = []
    starts: List[int] = []

    def wins(new: int, old: int, p: int) -> bool:
        return f[new] + cost[p - new] <= f[old] + cost[p - old]

    for i in range(n):
        while len(owners) > 1 and starts[-2] <= i:
            owners.pop()
            starts.pop()
        if owners:
            starts[-1] = max(starts[-1], i)
        # the new candidate wins on a prefix [i, c) of the future positions
        while owners:
            owner, start = owners[-1], starts[-1]
            end = starts[-2] if len(owners) > 1 else n
            if wins(i, owner, end - 1):
                owners.pop()
                starts.pop()
                continue
            lo, hi = start, end - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if wins(i, owner, mid):
                    lo = mid + 1
                else:
                    hi = mid
            if lo > i:
                starts[-1] = lo
                owners.append(i)
                starts.append(i)
            break
        else:
            owners.append(i)
            starts.append(i)
        best = owners[-1]
        out[i] = f[best] + cost[i - best]
    return out


def _inf_convolve_values(values: np.ndarray, n_lip: float, metric) -> np.ndarray:
    cost = n_lip * kernel_table(values.size, metric)
    left = _forward_envelope(values, cost)
    right = _forward_envelope(values[::-1].copy(), cost)[::-1]
    return np.minimum(left, right)


def _check_lip(n_lip: float) -> float:
    if not n_lip > 0 or not math.isfinite(n_lip):
        raise ValueError(f"n_lip must be positive and finite, got {n_lip}")
    return float(n_lip)


def inf_convolve_dir(f: DirectionFunction, n_lip: float, metric=DistanceMetric.CHORD) -> DirectionFunction:
    """min over e' of f(e') + n_lip * |e' - e|."""
    return f.with_values(_inf_convolve_values(f.values, _check_lip(n_lip), metric))


def sup_convolve_dir(f: DirectionFunction, n_lip: float, metric=DistanceMetric.CHORD) -> DirectionFunction:
    """max over e' of f(e') - n_lip * |e' - e|."""
    return f.with_values(-_inf_convolve_values(-f.values, _check_lip(n_lip), metric))


def inf_convolve_dir_brute(f: DirectionFunction, n_lip: float, metric=DistanceMetric.CHORD) -> DirectionFunction:
    """Direct O(n^2) minimum; reference for the sweep."""
    n_lip = _check_lip(n_lip)
    cost = n_lip * kernel_table(f.n, metric)
    idx = np.arange(f.n)
    dist = cost[np.abs(idx[:, None] - idx[None, :])]
    return f.with_values(np.min(f.values[None, :] + dist, axis=1))


def sup_convolve_dir_brute(f: DirectionFunction, n_lip: float, metric=DistanceMetric.CHORD) -> DirectionFunction:
    negated = inf_convolve_dir_brute(f.with_values(-f.values), n_lip, metric)
    return f.with_values(-negated.values)


def lipschitz_defect(f: DirectionFunction, n_lip: float, metric=DistanceMetric.CHORD) -> float:
    """Largest excess of |f_{i+1} - f_i| over n_lip times the adjacent-sample distance."""
    step = kernel_table(f.n, metric)[1]
    jumps = np.abs(np.roll(f.values, -1) - f.values)
    return float(np.max(jumps - n_lip * step))


def _snap(f: DirectionFunction, rational_angles: Iterable[float]) -> List[int]:
    indices = []
    spacing = 2.0 * math.pi / f.n
    for angle in rational_angles:
        idx = f.index_of(angle)
        miss = abs(((angle - idx * spacing) + math.pi) % (2.0 * math.pi) - math.pi)
        if miss > SNAP_TOL:
            logger.warning("Rational angle %.9f is off the grid by %.3g; snapped to sample %d", angle, miss, idx)
        indices.append(idx)
    return indices


def _check_same_grid(a: DirectionFunction, b: DirectionFunction) -> None:
    if a.n != b.n:
        raise ValueError(f"Direction functions live on different grids: {a.n} vs {b.n}")


def build_Qm(
    q_star: DirectionFunction,
    q_cont: DirectionFunction,
    rational_angles: Sequence[float],
    m: float,
    metric=DistanceMetric.CHORD,
) -> DirectionFunction:
    """
    Non-monotone approximation of the upper endpoint: the m-envelope from
    below of the continuous part, with the exact upper endpoint restored at
    the rational angles.
    """
    _check_same_grid(q_star, q_cont)
    out = inf_convolve_dir(q_cont, m, metric).values.copy()
    idx = _snap(q_star, rational_angles)
    out[idx] = q_star.values[idx]
    return q_star.with_values(out)


def build_Qm_lower(
    q_lower: DirectionFunction,
    q_lower_cont: DirectionFunction,
    rational_angles: Sequence[float],
    m: float,
    metric=DistanceMetric.CHORD,
) -> DirectionFunction:
    """Mirror of build_Qm for the lower endpoint, using the envelope from above."""
    _check_same_grid(q_lower, q_lower_cont)
    out = sup_convolve_dir(q_lower_cont, m, metric).values.copy()
    idx = _snap(q_lower, rational_angles)
    out[idx] = q_lower.values[idx]
    return q_lower.with_values(out)


def monotone_lower(q_lower: DirectionFunction, n_lip: float, metric=DistanceMetric.CHORD) -> DirectionFunction:
    return inf_convolve_dir(q_lower, n_lip, metric)


def monotone_upper(q_upper: DirectionFunction, n_lip: float, metric=DistanceMetric.CHORD) -> DirectionFunction:
    return sup_convolve_dir(q_upper, n_lip, metric)


def double_regularize(
    q_star: DirectionFunction,
    q_cont: DirectionFunction,
    rational_angles: Sequence[float],
    m: float,
    n_lip: float,
    side: str = "upper",
    metric=DistanceMetric.CHORD,
) -> DirectionFunction:
    """
    Apply the monotone n-envelope to the non-monotone m-approximation.

    Args:
        side: "lower" gives inf-conv_n of the lower m-approximation,
            "upper" gives sup-conv_n of the upper one.
    """
    if side == "upper":
        return sup_convolve_dir(build_Qm(q_star, q_cont, rational_angles, m, metric), n_lip, metric)
    if side == "lower":
        return inf_convolve_dir(build_Qm_lower(q_star, q_cont, rational_angles, m, metric), n_lip, metric)
    raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")


def from_samples(thetas: Sequence[float], values: Sequence[float], n: int = DEFAULT_SAMPLES) -> DirectionFunction:
    """Resample scattered direction data onto the uniform grid by periodic linear interpolation."""
    thetas = np.mod(np.asarray(thetas, dtype=float), 2.0 * math.pi)
    values = np.asarray(values, dtype=float)
    keep = np.isfinite(values)
    if keep.sum() < 2:
        raise ValueError("At least two finite samples are needed to build a direction function")
    order = np.argsort(thetas[keep])
    grid = 2.0 * math.pi * np.arange(n) / n
    return DirectionFunction(np.interp(grid, thetas[keep][order], values[keep][order], period=2.0 * math.pi))


def direction_function_frame(f: DirectionFunction) -> pd.DataFrame:
    """Table with columns theta,value."""
    return pd.DataFrame({"theta": f.thetas, "value": f.values}, columns=DIRECTION_COLUMNS)


def read_direction_frame(frame: pd.DataFrame, column: str = "value", n: Optional[int] = None) -> DirectionFunction:
    """
    DirectionFunction from a theta-indexed table, either a theta,value file
    or a sweep table (column q_lower or q_upper).
    """
    if "theta" not in frame.columns or column not in frame.columns:
        raise ValueError(f"Table needs columns theta and {column}, got {list(frame.columns)}")
    return from_samples(frame["theta"].to_numpy(), frame[column].to_numpy(), n or DEFAULT_SAMPLES)
