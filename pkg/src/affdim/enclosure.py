"""Certified real brackets and rigorous summation of positive series.

Every series in this package has positive, eventually decreasing terms.  A
series is evaluated as ``explicit partial sum + tail`` where the tail is
bracketed analytically: pure power tails ``sum_{n>=N} (n+h)^(-s)`` through an
Euler-Maclaurin expansion whose remainder is bounded by (and has the sign
of) the first omitted term.  Divergent tails produce ``[inf, inf]``.

Floating-point error is absorbed by widening outward; the slack is a few
ulps per term plus ``log2(n)`` ulps for pairwise summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

EPS = float(np.finfo(float).eps)
INF = math.inf

# explicit-term counts used by successive precision levels
LEVELS = (0, 1, 2, 3)


def explicit_terms(level: int) -> int:
    return 1 << (10 + 3 * level)


def _down(x: float) -> float:
    return math.nextafter(x, -INF) if math.isfinite(x) else x


def _up(x: float) -> float:
    return math.nextafter(x, INF) if math.isfinite(x) else x


def _mul(x: float, y: float) -> float:
    # 0 * inf is 0 here: a zero bound on a non-negative factor annihilates
    if x == 0 or y == 0:
        return 0.0
    return x * y


@dataclass(frozen=True)
class Enclosure:
    """A closed bracket ``[lo, hi]`` certified to contain a real quantity."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"invalid enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: float) -> Enclosure:
        return cls(x, x)

    @classmethod
    def around(cls, x: float, rel: float) -> Enclosure:
        """``x`` widened by a relative slack (``x >= 0``)."""
        if x == INF:
            return cls(INF, INF)
        d = abs(x) * rel
        return cls(_down(x - d), _up(x + d))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        if math.isinf(self.hi):
            return self.hi if math.isinf(self.lo) else self.lo
        return 0.5 * (self.lo + self.hi)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other) -> Enclosure:
        if not isinstance(other, Enclosure):
            other = Enclosure.point(float(other))
        return Enclosure(_down(self.lo + other.lo), _up(self.hi + other.hi))

    __radd__ = __add__

    def __mul__(self, other) -> Enclosure:
        """Product of non-negative brackets (or by a non-negative scalar)."""
        if not isinstance(other, Enclosure):
            other = Enclosure.point(float(other))
        if self.lo < 0 or other.lo < 0:
            raise ValueError("interval product implemented for non-negative brackets only")
        return Enclosure(_down(_mul(self.lo, other.lo)), _up(_mul(self.hi, other.hi)))

    __rmul__ = __mul__

    def __pow__(self, p: float) -> Enclosure:
        """Non-negative bracket raised to a non-negative power."""
        if self.lo < 0 or p < 0:
            raise ValueError("power implemented for non-negative brackets and exponents")
        if p == 0:
            return Enclosure.point(1.0)
        lo = self.lo**p
        hi = self.hi**p
        return Enclosure(max(0.0, _down(lo * (1 - 4 * EPS))), _up(hi * (1 + 4 * EPS)))

    def maximum(self, other: Enclosure) -> Enclosure:
        return Enclosure(max(self.lo, other.lo), max(self.hi, other.hi))

    def __repr__(self):
        return f"Enclosure({self.lo!r}, {self.hi!r})"


DIVERGENT = Enclosure(INF, INF)


def sum_enclosure(terms, extra_rel: float = 0.0) -> Enclosure:
    """Enclose the sum of non-negative floating terms.

    ``extra_rel`` is the caller's bound on the relative error of each term.
    """
    arr = np.asarray(terms, dtype=float)
    n = arr.size
    if n == 0:
        return Enclosure.point(0.0)
    s = math.fsum(arr) if n <= 4096 else float(np.sum(arr))
    rel = (4 + math.ceil(math.log2(n + 1))) * EPS + extra_rel
    return Enclosure.around(s, rel)


# Bernoulli numbers B_2, B_4, ..., B_14
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)
_EM_TERMS = 6
_EM_MIN_X = 16.0


def _rising(s: float, m: int) -> float:
    out = 1.0
    for i in range(m):
        out *= s + i
    return out


def power_tail(s: float, start: int, shift: float = 0.0) -> Enclosure:
    """Enclose ``sum_{n >= start} (n + shift)^(-s)``.

    Diverges (returns ``[inf, inf]``) for ``s <= 1``.  Requires
    ``start + shift > 0``.
    """
    if start + shift <= 0:
        raise ValueError("power_tail needs start + shift > 0")
    if s <= 1:
        return DIVERGENT
    head = Enclosure.point(0.0)
    n = start
    if n + shift < _EM_MIN_X:
        m = math.ceil(_EM_MIN_X - shift)
        idx = np.arange(n, m, dtype=float) + shift
        head = sum_enclosure(idx ** (-s), extra_rel=2 * EPS * (1 + s))
        n = m
    x = n + shift
    main = x ** (1 - s) / (s - 1) + 0.5 * x ** (-s)
    corr = 0.0
    mag = abs(main)
    for j in range(1, _EM_TERMS + 1):
        term = _BERNOULLI[j - 1] / math.factorial(2 * j) * _rising(s, 2 * j - 1) * x ** (-s - 2 * j + 1)
        corr += term
        mag += abs(term)
    nxt = (
        _BERNOULLI[_EM_TERMS] / math.factorial(2 * _EM_TERMS + 2)
        * _rising(s, 2 * _EM_TERMS + 1)
        * x ** (-s - 2 * _EM_TERMS - 1)
    )
    total = main + corr
    slack = 32 * EPS * mag
    lo = total + min(0.0, nxt) - slack
    hi = total + max(0.0, nxt) + slack
    return head + Enclosure(_down(max(lo, 0.0)), _up(hi))


class SeriesRule(Protocol):
    """A positive series that can enclose itself at a given precision level."""

    def enclose(self, level: int = 0) -> Enclosure: ...


@dataclass(frozen=True)
class ZetaSeries:
    """``sum_{n >= start} n^(-s)``; with ``start = 2`` this is ``zeta(s) - 1``."""

    s: float
    start: int = 1

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("terms n^(-s) are not decreasing for s <= 0")
        if self.start < 1:
            raise ValueError("start must be >= 1")

    def enclose(self, level: int = 0) -> Enclosure:
        if self.s <= 1:
            return DIVERGENT
        n = explicit_terms(level)
        idx = np.arange(self.start, self.start + n, dtype=float)
        head = sum_enclosure(idx ** (-self.s), extra_rel=2 * EPS * (1 + self.s))
        return head + power_tail(self.s, self.start + n)


def series_sum(rule: SeriesRule, level: int = 0) -> Enclosure:
    """Certified enclosure of a positive series: explicit head plus tail bound."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    return rule.enclose(level)
