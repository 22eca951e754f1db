"""64-bit fixed-point fractions of the unit interval.

A coordinate is an integer u in [0, 2^64) standing for u / 2^64. Integer-matrix
maps and rotations act on these exactly: reducing mod 2^64 is reducing mod 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

FRACTION_BITS = 64
ONE = 1 << FRACTION_BITS
MASK = ONE - 1

Matrix2 = Tuple[Tuple[int, int], Tuple[int, int]]


def to_fixed(value: float | int | str | Fraction) -> int:
    """Round a real number down to the fixed-point grid, mod 1."""
    return math.floor(Fraction(value) * ONE) & MASK


def to_fraction(u: int) -> Fraction:
    return Fraction(u, ONE)


def to_float(u: int) -> float:
    # top 53 bits are exact in a double
    return (u >> 11) * 2.0**-53


def golden_angle() -> int:
    """Fixed-point floor of (sqrt(5) - 1) / 2."""
    return (math.isqrt(5 << (2 * FRACTION_BITS)) - ONE) >> 1


def phase_to_radians(phase: np.ndarray | int) -> np.ndarray | float:
    if isinstance(phase, (int, np.integer)):
        return 2.0 * math.pi * to_float(int(phase))
    return 2.0 * np.pi * ((phase >> np.uint64(11)).astype(np.float64) * 2.0**-53)


def mat_mul(a: Matrix2, b: Matrix2) -> Matrix2:
    return (
        (
            (a[0][0] * b[0][0] + a[0][1] * b[1][0]) & MASK,
            (a[0][0] * b[0][1] + a[0][1] * b[1][1]) & MASK,
        ),
        (
            (a[1][0] * b[0][0] + a[1][1] * b[1][0]) & MASK,
            (a[1][0] * b[0][1] + a[1][1] * b[1][1]) & MASK,
        ),
    )


def mat_pow(a: Matrix2, k: int) -> Matrix2:
    result: Matrix2 = ((1, 0), (0, 1))
    base = ((a[0][0] & MASK, a[0][1] & MASK), (a[1][0] & MASK, a[1][1] & MASK))
    while k:
        if k & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        k >>= 1
    return result


def mat_apply(a: Matrix2, coords: Tuple[int, int]) -> Tuple[int, int]:
    x, y = coords
    return (
        (a[0][0] * x + a[0][1] * y) & MASK,
        (a[1][0] * x + a[1][1] * y) & MASK,
    )


@dataclass(frozen=True)
class TorusPoint:
    coords: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coords) not in (1, 2):
            raise ValueError("torus points have dimension 1 or 2")
        for c in self.coords:
            if not 0 <= c < ONE:
                raise ValueError(f"fixed-point coordinate {c} outside [0, 2^64)")

    @classmethod
    def from_values(cls, values: Sequence[float | int | str | Fraction]) -> "TorusPoint":
        return cls(tuple(to_fixed(v) for v in values))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def as_fractions(self) -> Tuple[Fraction, ...]:
        return tuple(to_fraction(c) for c in self.coords)

    def as_floats(self) -> Tuple[float, ...]:
        return tuple(to_float(c) for c in self.coords)
