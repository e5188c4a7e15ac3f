"""
Directions on the unit circle, rational or not.

A rational direction carries its irreducible lattice vector xi; the tangential
period of a slab aligned with it is |xi| and the perpendicular lattice vector
is xi_perp = (xi_2, -xi_1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

UNIT_TOL = 1e-14


@dataclass(frozen=True)
class Direction:
    """A unit vector with an optional irreducible lattice representative."""

    unit: Tuple[float, float]
    rational: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        norm = math.hypot(*self.unit)
        if abs(norm - 1.0) > UNIT_TOL * 10:
            raise ValueError(f"Direction must be a unit vector, got |unit| = {norm!r}")
        if self.rational is not None:
            a, b = self.rational
            if (a, b) == (0, 0) or math.gcd(abs(a), abs(b)) != 1:
                raise ValueError(f"Lattice vector must be irreducible and nonzero, got {self.rational}")
            length = math.hypot(a, b)
            if max(abs(a / length - self.unit[0]), abs(b / length - self.unit[1])) > UNIT_TOL * 10:
                raise ValueError(f"unit {self.unit} does not match xi {self.rational}")

    @classmethod
    def from_lattice(cls, xi: Tuple[int, int]) -> "Direction":
        """Direction of an integer vector, reduced to its irreducible representative."""
        a, b = int(xi[0]), int(xi[1])
        g = math.gcd(abs(a), abs(b))
        if g == 0:
            raise ValueError("Lattice vector must be nonzero")
        a, b = a // g, b // g
        length = math.hypot(a, b)
        return cls(unit=(a / length, b / length), rational=(a, b))

    @classmethod
    def from_angle(cls, theta: float) -> "Direction":
        """Direction at angle theta; rational only when it is an axis direction."""
        theta = theta % (2.0 * math.pi)
        for xi in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            if abs(math.atan2(xi[1], xi[0]) % (2.0 * math.pi) - theta) < 1e-15:
                return cls.from_lattice(xi)
        return cls(unit=(math.cos(theta), math.sin(theta)))

    @property
    def perp(self) -> Tuple[float, float]:
        return (self.unit[1], -self.unit[0])

    @property
    def angle(self) -> float:
        """Angle in [0, 2*pi)."""
        return math.atan2(self.unit[1], self.unit[0]) % (2.0 * math.pi)

    @property
    def is_rational(self) -> bool:
        return self.rational is not None

    @property
    def lattice_norm(self) -> float:
        """|xi| for rational directions."""
        if self.rational is None:
            raise ValueError("lattice_norm is only defined for rational directions")
        return math.hypot(*self.rational)

    @property
    def lattice_norm_sq(self) -> int:
        if self.rational is None:
            raise ValueError("lattice_norm_sq is only defined for rational directions")
        return self.rational[0] ** 2 + self.rational[1] ** 2

    def label(self) -> str:
        if self.rational is not None:
            return f"({self.rational[0]},{self.rational[1]})"
        return f"theta={self.angle:.6f}"

    def to_dict(self) -> dict:
        return {
            "theta": self.angle,
            "xi1": self.rational[0] if self.rational else None,
            "xi2": self.rational[1] if self.rational else None,
        }


def rational_directions(xi_max: int) -> List[Direction]:
    """
    All irreducible lattice directions with |xi|_inf <= xi_max, sorted by angle.

    Args:
        xi_max: Bound on the sup-norm of the lattice vector (>= 1).

    Returns:
        Directions sorted by angle in [0, 2*pi).
    """
    if xi_max < 1:
        raise ValueError(f"xi_max must be >= 1, got {xi_max}")
    found = []
    for a in range(-xi_max, xi_max + 1):
        for b in range(-xi_max, xi_max + 1):
            if (a, b) != (0, 0) and math.gcd(abs(a), abs(b)) == 1:
                found.append(Direction.from_lattice((a, b)))
    return sorted(found, key=lambda d: d.angle)
