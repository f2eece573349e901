"""Signed Lüroth digit pairs, structured digit sets and their series.

A digit set ``J`` is a subset of ``{0,1} x N_{>=2}`` described separately
for each sign by one of three shapes:

* ``Explicit``  a finite set of digits;
* ``Cofinite``  ``{d >= start}`` minus finitely many exclusions;
* ``Power``     ``{n**k + c : n >= 2}``.

These are the only shapes for which the tails of
``sum_d (d(d-1))^(-e)`` have closed-form certified brackets.

Text grammar (used by the CLI)::

    0:3;1:3            explicit pairs
    *:2,4,6            both signs
    0:3..inf!5,7       cofinite range with exclusions
    1:n^7+1            power family
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

import numpy as np

from .enclosure import (
    DIVERGENT,
    EPS,
    Enclosure,
    explicit_terms,
    power_tail,
    sum_enclosure,
)


@dataclass(frozen=True, order=True)
class DigitPair:
    s: int
    d: int

    def __post_init__(self):
        if self.s not in (0, 1):
            raise ValueError(f"sign digit must be 0 or 1, got {self.s}")
        if self.d < 2:
            raise ValueError(f"Lüroth digit must be >= 2, got {self.d}")

    @property
    def contraction(self) -> float:
        return 1.0 / (self.d * (self.d - 1))

    def __str__(self):
        return f"{self.s}:{self.d}"


def _quad_terms(d: np.ndarray, e: float) -> np.ndarray:
    return (d * (d - 1.0)) ** (-e)


def _term_rel(e: float, n: int) -> float:
    return (6 + 2 * abs(e)) * EPS


# --------------------------------------------------------------------------
# digit classes


@dataclass(frozen=True)
class Explicit:
    digits: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "digits", frozenset(int(d) for d in self.digits))
        if any(d < 2 for d in self.digits):
            raise ValueError("digits must be >= 2")

    is_finite = True

    @property
    def is_empty(self) -> bool:
        return not self.digits

    def __contains__(self, d) -> bool:
        return d in self.digits

    def __len__(self):
        return len(self.digits)

    @property
    def min_digit(self) -> int:
        return min(self.digits)

    def members_upto(self, bound: int) -> list[int]:
        return sorted(d for d in self.digits if d <= bound)

    def truncated(self, bound: int) -> Explicit:
        return Explicit(frozenset(self.members_upto(bound)))

    def series(self, e: float, level: int = 0) -> Enclosure:
        if not self.digits:
            return Enclosure.point(0.0)
        d = np.array(sorted(self.digits), dtype=float)
        return sum_enclosure(_quad_terms(d, e), extra_rel=_term_rel(e, d.size))

    def point_box_dim(self) -> float:
        return 0.0

    def union(self, other: DigitClass) -> DigitClass:
        if isinstance(other, Explicit):
            return Explicit(self.digits | other.digits)
        return other.union(self)

    def text(self) -> str:
        return ",".join(str(d) for d in sorted(self.digits))


@dataclass(frozen=True)
class Cofinite:
    start: int
    exclusions: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        start = int(self.start)
        if start < 2:
            raise ValueError("digits must be >= 2")
        excl = {int(x) for x in self.exclusions if x >= start}
        while start in excl:
            excl.discard(start)
            start += 1
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "exclusions", frozenset(excl))

    is_finite = False
    is_empty = False

    def __contains__(self, d) -> bool:
        return d >= self.start and d not in self.exclusions

    def __len__(self):
        raise TypeError("infinite digit class")

    @property
    def min_digit(self) -> int:
        return self.start

    def members_upto(self, bound: int) -> list[int]:
        return [d for d in range(self.start, bound + 1) if d not in self.exclusions]

    def truncated(self, bound: int) -> Explicit:
        return Explicit(frozenset(self.members_upto(bound)))

    def series(self, e: float, level: int = 0) -> Enclosure:
        if 2 * e <= 1:
            return DIVERGENT
        top = max(self.start + explicit_terms(level), max(self.exclusions, default=0) + 1)
        d = np.arange(self.start, top, dtype=float)
        if self.exclusions:
            d = d[~np.isin(d, np.array(sorted(self.exclusions), dtype=float))]
        head = sum_enclosure(_quad_terms(d, e), extra_rel=_term_rel(e, d.size))
        # d(d-1) = m^2 - 1/4 with m = d - 1/2, and
        # 1 + e*u <= (1-u)^(-e) <= 1 + e*u*(1-u)^(-e-1) for u = 1/(4 m^2)
        m0 = top - 0.5
        u0 = 1.0 / (4 * m0 * m0)
        z0 = power_tail(2 * e, top, -0.5)
        z1 = power_tail(2 * e + 2, top, -0.5)
        c_hi = (1 - u0) ** (-e - 1) * (1 + 8 * EPS)
        lo = z0.lo + (e / 4) * z1.lo
        hi = z0.hi + (e / 4) * c_hi * z1.hi
        tail = Enclosure(lo * (1 - 4 * EPS), hi * (1 + 4 * EPS))
        return head + tail

    def point_box_dim(self) -> float:
        return 0.5

    def union(self, other: DigitClass) -> DigitClass:
        if isinstance(other, Explicit):
            if not other.digits:
                return self
            start = min(self.start, other.min_digit)
            excl = set(self.exclusions) | set(range(start, self.start))
            excl -= set(other.digits)
            return Cofinite(start, frozenset(excl))
        if isinstance(other, Cofinite):
            start = min(self.start, other.start)
            excl = {d for d in range(start, max(max(self.exclusions, default=0), max(other.exclusions, default=0), self.start, other.start) + 1)
                    if d not in self and d not in other}
            return Cofinite(start, frozenset(excl))
        raise ValueError("union of a cofinite range and a power family is not representable")

    def text(self) -> str:
        out = f"{self.start}..inf"
        if self.exclusions:
            out += "!" + ",".join(str(x) for x in sorted(self.exclusions))
        return out


@dataclass(frozen=True)
class Power:
    """Digits ``n**k + c`` for ``n >= 2`` with ``k >= 2`` and ``c`` in {0, 1}."""

    k: int
    c: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ValueError("power family needs an integer exponent k >= 2 (use a range for k = 1)")
        if self.c not in (0, 1):
            raise ValueError("power family offset c must be 0 or 1")

    is_finite = False
    is_empty = False

    def __contains__(self, d) -> bool:
        m = d - self.c
        if m < 4:
            return False
        n = round(m ** (1.0 / self.k))
        return any(x >= 2 and x**self.k == m for x in (n - 1, n, n + 1))

    def __len__(self):
        raise TypeError("infinite digit class")

    @property
    def min_digit(self) -> int:
        return 2**self.k + self.c

    def members_upto(self, bound: int) -> list[int]:
        out = []
        n = 2
        while n**self.k + self.c <= bound:
            out.append(n**self.k + self.c)
            n += 1
        return out

    def truncated(self, bound: int) -> Explicit:
        return Explicit(frozenset(self.members_upto(bound)))

    def series(self, e: float, level: int = 0) -> Enclosure:
        k, c = self.k, self.c
        if 2 * k * e <= 1:
            return DIVERGENT
        top = 2 + explicit_terms(level)
        n = np.arange(2, top, dtype=float)
        logd = k * np.log(n) + np.log1p(c / n**k)
        # log(d(d-1)) = 2 log d + log1p(-1/d)
        arg = e * (2 * logd + np.log1p(-np.exp(-logd)))
        head = sum_enclosure(np.exp(-arg), extra_rel=(8 + 4 * float(arg.max())) * EPS)
        # with m = n^k + c - 1/2 and v = (c - 1/2) n^-k:
        #   (d(d-1))^-e = n^(-2ke) (1+v)^(-2e) (1 - 1/(4m^2))^(-e)
        #   1 - 2e v <= (1+v)^(-2e) <= 1 - 2e v + e(2e+1) v^2 (1-|v|max)^(-2e-2)
        h = c - 0.5
        N = float(top)
        vmax = 0.5 * N ** (-k)
        mN = N**k + c - 0.5
        u0 = 1.0 / (4 * mN * mN)
        g_hi = (1 + e * u0 * (1 - u0) ** (-e - 1)) * (1 + 8 * EPS)
        c2 = e * (2 * e + 1) * (1 - vmax) ** (-2 * e - 2) * 0.25
        z0 = power_tail(2 * k * e, top)
        z1 = power_tail(2 * k * e + k, top)
        z2 = power_tail(2 * k * e + 2 * k, top)
        lin = 2 * e * h
        if lin >= 0:
            lo = z0.lo - lin * z1.hi
            hi = z0.hi - lin * z1.lo + c2 * z2.hi
        else:
            lo = z0.lo - lin * z1.lo
            hi = z0.hi - lin * z1.hi + c2 * z2.hi
        tail = Enclosure(max(0.0, lo * (1 - 8 * EPS)), hi * g_hi * (1 + 8 * EPS))
        return head + tail

    def point_box_dim(self) -> float:
        return 1.0 / (self.k + 1)

    def union(self, other: DigitClass) -> DigitClass:
        if isinstance(other, Explicit) and other.digits <= set(other.digits) and all(d in self for d in other.digits):
            return self
        if other == self:
            return self
        raise ValueError("union with a power family is only representable when it adds nothing")

    def text(self) -> str:
        return f"n^{self.k}" + (f"+{self.c}" if self.c else "")


DigitClass = Union[Explicit, Cofinite, Power]
EMPTY = Explicit()


def digit_class(obj) -> DigitClass:
    """Coerce an iterable of ints (or a class) to a digit class."""
    if isinstance(obj, (Explicit, Cofinite, Power)):
        return obj
    return Explicit(frozenset(obj))


# --------------------------------------------------------------------------
# digit sets


@dataclass(frozen=True)
class DigitSetSpec:
    """A digit set ``J``: one digit class per sign."""

    zero: DigitClass = EMPTY
    one: DigitClass = EMPTY

    def __post_init__(self):
        object.__setattr__(self, "zero", digit_class(self.zero))
        object.__setattr__(self, "one", digit_class(self.one))
        if self.zero.is_empty and self.one.is_empty:
            raise ValueError("digit set must be non-empty")

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> DigitSetSpec:
        zero, one = set(), set()
        for p in pairs:
            p = p if isinstance(p, DigitPair) else DigitPair(*p)
            (zero if p.s == 0 else one).add(p.d)
        return cls(Explicit(frozenset(zero)), Explicit(frozenset(one)))

    @classmethod
    def both(cls, digits) -> DigitSetSpec:
        """``{0,1} x I``."""
        c = digit_class(digits)
        return cls(c, c)

    @classmethod
    def single(cls, s: int, digits) -> DigitSetSpec:
        """``{s} x I``."""
        c = digit_class(digits)
        return cls(c, EMPTY) if s == 0 else cls(EMPTY, c)

    def cls(self, s: int) -> DigitClass:
        return self.zero if s == 0 else self.one

    @property
    def classes(self) -> tuple:
        return (self.zero, self.one)

    @property
    def signs(self) -> tuple:
        return tuple(s for s in (0, 1) if not self.cls(s).is_empty)

    @property
    def is_finite(self) -> bool:
        return self.zero.is_finite and self.one.is_finite

    @property
    def min_digit(self) -> int:
        return min(self.cls(s).min_digit for s in self.signs)

    def __contains__(self, pair) -> bool:
        s, d = pair
        return d in self.cls(s)

    def pairs(self) -> list[DigitPair]:
        if not self.is_finite:
            raise ValueError("infinite digit set has no finite pair list")
        return [DigitPair(s, d) for s in (0, 1) for d in sorted(self.cls(s).digits)]

    def __iter__(self) -> Iterator[DigitPair]:
        return iter(self.pairs())

    def __len__(self):
        return len(self.pairs())

    def truncated(self, bound: int) -> DigitSetSpec:
        return DigitSetSpec(self.zero.truncated(bound), self.one.truncated(bound))

    def union(self, other: DigitSetSpec) -> DigitSetSpec:
        return DigitSetSpec(self.zero.union(other.zero), self.one.union(other.one))

    def with_pair(self, s: int, d: int) -> DigitSetSpec:
        return self.union(DigitSetSpec.single(s, {d}))

    def series(self, e: float, weights=(1.0, 1.0), level: int = 0) -> Enclosure:
        """Enclose ``sum_{(s,d) in J} w_s (d(d-1))^(-e)``."""
        total = Enclosure.point(0.0)
        for s in self.signs:
            total = total + self.cls(s).series(e, level) * weights[s]
        return total

    def text(self) -> str:
        return format_digit_set(self)

    def __str__(self):
        return self.text()


@dataclass(frozen=True)
class LurothSeries:
    """Series rule ``sum_{(s,d) in J} w_s (d(d-1))^(-exponent)``."""

    digits: DigitSetSpec
    exponent: float
    weights: tuple = (1.0, 1.0)

    def __post_init__(self):
        if not self.digits.is_finite and not self.exponent > 0:
            raise ValueError("terms (d(d-1))^(-e) have no decreasing tail for e <= 0")

    def enclose(self, level: int = 0) -> Enclosure:
        return self.digits.series(self.exponent, self.weights, level)


# --------------------------------------------------------------------------
# grammar

_RANGE = re.compile(r"^(\d+)\.\.(inf|\d+)?(?:!([\d,]+))?$")
_POWER = re.compile(r"^n\^(\d+)(?:\+(\d+))?$")
_LIST = re.compile(r"^\d+(?:,\d+)*$")


def parse_digit_class(text: str) -> DigitClass:
    """Parse ``3..inf!5,7``, ``2..10``, ``n^3+1`` or ``2,4,6``."""
    t = text.strip().replace(" ", "")
    if m := _RANGE.match(t):
        lo, hi, ex = m.groups()
        excl = frozenset(int(x) for x in ex.split(",")) if ex else frozenset()
        if hi is None or hi == "inf":
            return Cofinite(int(lo), excl)
        return Explicit(frozenset(range(int(lo), int(hi) + 1)) - excl)
    if m := _POWER.match(t):
        k = int(m.group(1))
        c = int(m.group(2) or 0)
        if k == 1:
            return Cofinite(2 + c)
        return Power(k, c)
    if _LIST.match(t):
        return Explicit(frozenset(int(x) for x in t.split(",")))
    raise ValueError(f"cannot parse digit class {text!r}")


def parse_digit_set(text: str) -> DigitSetSpec:
    """Parse the ``s:body;s:body`` grammar into a digit set."""
    zero: DigitClass = EMPTY
    one: DigitClass = EMPTY
    parts = [p for p in text.replace(" ", "").split(";") if p]
    if not parts:
        raise ValueError("empty digit set")
    for part in parts:
        if ":" not in part:
            raise ValueError(f"digit token {part!r} needs a sign prefix like '0:'")
        sign, body = part.split(":", 1)
        cls = parse_digit_class(body)
        if sign in ("0", "*"):
            zero = zero.union(cls)
        if sign in ("1", "*"):
            one = one.union(cls)
        if sign not in ("0", "1", "*"):
            raise ValueError(f"sign must be 0, 1 or *, got {sign!r}")
    return DigitSetSpec(zero, one)


def format_digit_set(J: DigitSetSpec) -> str:
    if J.zero == J.one:
        return f"*:{J.zero.text()}"
    return ";".join(f"{s}:{J.cls(s).text()}" for s in J.signs)


def parse_digit_sequence(text: str) -> list[DigitPair]:
    """Ordered pairs ``s:d;s:d;...``."""
    out = []
    for part in (p for p in text.replace(" ", "").split(";") if p):
        try:
            s, d = part.split(":")
            out.append(DigitPair(int(s), int(d)))
        except ValueError as exc:
            raise ValueError(f"bad digit pair {part!r}") from exc
    return out


def unit_mass(J: DigitSetSpec, level: int = 0) -> Enclosure:
    """``sum_{(s,d) in J} 1/(d(d-1))``, exact for finite sets up to rounding."""
    if J.is_finite:
        from fractions import Fraction

        exact = sum((Fraction(1, p.d * (p.d - 1)) for p in J.pairs()), Fraction(0))
        f = float(exact)
        lo = f if Fraction(f) <= exact else math.nextafter(f, -math.inf)
        hi = f if Fraction(f) >= exact else math.nextafter(f, math.inf)
        return Enclosure(lo, hi)
    return J.series(1.0, level=level)
