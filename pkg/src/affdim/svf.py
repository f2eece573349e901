"""Diagonal 2x2 matrix algebra and the singular value function.

A diagonal matrix ``diag(a, b)`` is stored by its two signed entries.  Signs
are kept so that orientation-reversing maps (negative ``b``) compose
correctly; every singular-value quantity works on absolute values.

The piecewise definitions assign the boundaries ``r = 1`` and ``r = 2`` to
the lower branch.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Branch(enum.Enum):
    """Which piece of the piecewise singular value function is active."""

    R01 = "R01"  # 0 < r <= 1
    R12 = "R12"  # 1 < r <= 2
    R2PLUS = "R2plus"  # r > 2


def branch_of(r: float) -> Branch:
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    if r <= 1:
        return Branch.R01
    if r <= 2:
        return Branch.R12
    return Branch.R2PLUS


@dataclass(frozen=True)
class Diagonal2:
    """The matrix ``diag(a, b)``."""

    a: float
    b: float

    def __matmul__(self, other: Diagonal2) -> Diagonal2:
        return compose(self, other)

    @property
    def det(self) -> float:
        return self.a * self.b


@dataclass(frozen=True)
class SingularPair:
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if not (self.alpha1 >= self.alpha2 >= 0):
            raise ValueError(f"need alpha1 >= alpha2 >= 0, got {self}")


IDENTITY = Diagonal2(1.0, 1.0)


def singular_values(m: Diagonal2) -> SingularPair:
    x, y = abs(m.a), abs(m.b)
    return SingularPair(max(x, y), min(x, y))


def compose(m1: Diagonal2, m2: Diagonal2) -> Diagonal2:
    """Matrix product ``m1 @ m2`` (entrywise for diagonal matrices)."""
    return Diagonal2(m1.a * m2.a, m1.b * m2.b)


def _check_r(r):
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")


def svf_values(a, b, r: float):
    """Vectorised singular value function of ``diag(a, b)``.

    ``a`` and ``b`` may be scalars or arrays of the same shape.
    """
    _check_r(r)
    x = np.abs(np.asarray(a, dtype=float))
    y = np.abs(np.asarray(b, dtype=float))
    hi = np.maximum(x, y)
    lo = np.minimum(x, y)
    if r <= 1:
        return hi**r
    if r <= 2:
        return hi * lo ** (r - 1)
    return (hi * lo) ** (r / 2)


def svf(m: Diagonal2, r: float) -> float:
    """Singular value function phi^r of a diagonal matrix.

    ``alpha1**r`` for ``r <= 1``, ``alpha1 * alpha2**(r-1)`` for ``1 < r <= 2``
    and ``|det|**(r/2)`` beyond.
    """
    return float(svf_values(m.a, m.b, r))


def power_transform(m: Diagonal2, r: float) -> Diagonal2:
    """The non-negative diagonal matrix ``L^(r)`` with ``svf(L, r) = ||L^(r)||``.

    The transform is multiplicative: ``(LK)^(r) = L^(r) K^(r)``, which is what
    lets the pressure collapse an infinite word sum into row sums.
    """
    _check_r(r)
    x, y = abs(m.a), abs(m.b)
    if r <= 1:
        return Diagonal2(x**r, y**r)
    if r <= 2:
        return Diagonal2(x * y ** (r - 1), y * x ** (r - 1))
    g = (x * y) ** (r / 2)
    return Diagonal2(g, g)


@dataclass(frozen=True)
class DiagonalMap2:
    """The affine map ``z -> diag(a, b) z + (tx, ty)``."""

    linear: Diagonal2
    translation: tuple = (0.0, 0.0)

    def __call__(self, point):
        w, x = point
        return (self.linear.a * w + self.translation[0], self.linear.b * x + self.translation[1])

    def then(self, inner: DiagonalMap2) -> DiagonalMap2:
        """The composition ``self o inner``."""
        tx, ty = inner.translation
        return DiagonalMap2(self.linear @ inner.linear, self((tx, ty)))
