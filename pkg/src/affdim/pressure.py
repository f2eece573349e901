"""Pressure of diagonal alphabets, affinity dimension and related roots.

The pressure of a countable family of diagonal matrices is

    P(r) = max(row sums of sum_i L_i^(r))       for r <= 2,
    P(r) = sum_i |det L_i|^(r/2)                for r > 2,

and the affinity dimension is ``inf{r > 0 : P(r) <= 1}``.  Every root in
this package is found by :func:`certified_root`, a bisection driven by
certified enclosures of a strictly decreasing function.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .digits import DigitSetSpec
from .enclosure import EPS, LEVELS, Enclosure, sum_enclosure
from .errors import BudgetExceeded, ToleranceNotReached
from .svf import Branch, Diagonal2, branch_of, svf_values

DEFAULT_TOL = 1e-9
R_FLOOR = 1e-9
WORD_BUDGET = 10**7


class Method(enum.Enum):
    AffinityBisection = "AffinityBisection"
    HutchinsonFinite = "HutchinsonFinite"
    InfinitePressure = "InfinitePressure"
    ModifiedAffinity = "ModifiedAffinity"
    NonAutonomous = "NonAutonomous"
    Fiber = "Fiber"
    TwoDFormula = "TwoDFormula"
    DigitPoints = "DigitPoints"


@dataclass(frozen=True)
class DimensionResult:
    """A dimension value with its certified bracket and provenance."""

    value: float
    bracket: Enclosure
    method: Method
    active_branch: Optional[Branch] = None
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "flags", frozenset(self.flags))
        if not self.bracket.lo <= self.value <= self.bracket.hi:
            raise ValueError("value outside its bracket")

    def has(self, flag: str) -> bool:
        return flag in self.flags

    def shifted(self, offset: float, method: Method, flags=()) -> DimensionResult:
        b = self.bracket + offset
        v = min(max(self.value + offset, b.lo), b.hi)
        return DimensionResult(v, b, method, _branch(v), self.flags | set(flags))

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "lo": self.bracket.lo,
            "hi": self.bracket.hi,
            "method": self.method.value,
            "active_branch": self.active_branch.value if self.active_branch else None,
            "flags": sorted(self.flags),
        }


def _branch(v: float) -> Optional[Branch]:
    return branch_of(v) if v > 0 else None


# --------------------------------------------------------------------------
# alphabets


@dataclass(frozen=True)
class AlphabetSpec:
    """Either an explicit finite list of diagonal matrices or a Lüroth family.

    Use :meth:`explicit` or :meth:`luroth` to build one.
    """

    maps: tuple = ()
    p: Optional[float] = None
    digits: Optional[DigitSetSpec] = None

    def __post_init__(self):
        if self.digits is None:
            maps = tuple(m if isinstance(m, Diagonal2) else Diagonal2(*m) for m in self.maps)
            if not maps:
                raise ValueError("alphabet must be non-empty")
            for m in maps:
                if not (0 < abs(m.a) < 1 and 0 < abs(m.b) < 1):
                    raise ValueError(f"map {m} is not a non-degenerate contraction")
            object.__setattr__(self, "maps", maps)
        else:
            if self.maps:
                raise ValueError("give either maps or a Lüroth digit set, not both")
            if not (self.p is not None and 0 < self.p < 1):
                raise ValueError("Lüroth parameter p must lie in (0, 1)")

    @classmethod
    def explicit(cls, maps: Iterable) -> AlphabetSpec:
        return cls(maps=tuple(maps))

    @classmethod
    def luroth(cls, p: float, digits: DigitSetSpec) -> AlphabetSpec:
        return cls(p=float(p), digits=digits)

    @property
    def is_luroth(self) -> bool:
        return self.digits is not None

    @property
    def is_finite(self) -> bool:
        return not self.is_luroth or self.digits.is_finite

    @property
    def weights(self) -> tuple:
        """Horizontal contraction ``p^(1-s) (1-p)^s`` for each sign."""
        return (self.p, 1.0 - self.p)

    @property
    def sup_contraction(self) -> float:
        if self.is_luroth:
            top = max(self.p, 1 - self.p)
            return max(top, 1.0 / (self.digits.min_digit * (self.digits.min_digit - 1)))
        return max(max(abs(m.a), abs(m.b)) for m in self.maps)

    def to_explicit(self) -> AlphabetSpec:
        if not self.is_luroth:
            return self
        if not self.digits.is_finite:
            raise ValueError("infinite Lüroth family has no explicit form")
        w = self.weights
        return AlphabetSpec.explicit(
            Diagonal2(w[q.s], (-1.0) ** q.s / (q.d * (q.d - 1))) for q in self.digits.pairs()
        )

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        ex = self.to_explicit()
        return (np.array([m.a for m in ex.maps]), np.array([m.b for m in ex.maps]))

    def with_maps(self, extra: Iterable) -> AlphabetSpec:
        return AlphabetSpec.explicit(list(self.maps) + list(extra))


# --------------------------------------------------------------------------
# pressure


def _explicit_pressure(alphabet: AlphabetSpec, r: float) -> Enclosure:
    a, b = alphabet.entries()
    x, y = np.abs(a), np.abs(b)
    rel = 4 * EPS
    if r <= 1:
        rows = (x**r, y**r)
    elif r <= 2:
        rows = (x * y ** (r - 1), y * x ** (r - 1))
    else:
        g = (x * y) ** (r / 2)
        rows = (g,)
    out = [sum_enclosure(t, extra_rel=rel) for t in rows]
    return out[0] if len(out) == 1 else out[0].maximum(out[1])


def _luroth_pressure(alphabet: AlphabetSpec, r: float, level: int) -> Enclosure:
    # horizontal entries a_s, vertical entries 1/(d(d-1)); the row sums factor
    # into weighted digit-series of the vertical entry
    J = alphabet.digits
    w = alphabet.weights
    if r <= 1:
        first = J.series(0.0, tuple(x**r for x in w), level)
        second = J.series(r, (1.0, 1.0), level)
    elif r <= 2:
        first = J.series(r - 1, w, level)
        second = J.series(1.0, tuple(x ** (r - 1) for x in w), level)
    else:
        return J.series(r / 2, tuple(x ** (r / 2) for x in w), level)
    return first.maximum(second)


def pressure(alphabet: AlphabetSpec, r: float, level: int = 0) -> Enclosure:
    """Certified enclosure of the pressure at ``r``.

    Divergent sums are reported as ``[inf, inf]``; this is a legal value.
    """
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    if alphabet.is_luroth:
        return _luroth_pressure(alphabet, r, level)
    return _explicit_pressure(alphabet, r)


# --------------------------------------------------------------------------
# certified bisection


EnclosedFn = Callable[[float, int], Enclosure]


def _decide(fn: EnclosedFn, r: float) -> int:
    """+1 if ``fn(r) > 1``, -1 if ``fn(r) <= 1``, 0 if undecided at every level."""
    for level in LEVELS:
        e = fn(r, level)
        if e.lo > 1:
            return 1
        if e.hi <= 1:
            return -1
    return 0


def certified_root(
    fn: EnclosedFn,
    tol: float = DEFAULT_TOL,
    lo: float = R_FLOOR,
    hi: float = 4.0,
    floor_value: float = 0.0,
    hi_known: bool = False,
    grow: bool = True,
) -> tuple[float, Enclosure, set]:
    """Locate ``inf{r >= lo : fn(r) <= 1}`` for a strictly decreasing ``fn``.

    Returns ``(value, bracket, flags)``.  If ``fn <= 1`` already holds within
    ``tol`` of ``floor_value``, the infimum is reported as ``floor_value``
    with the flag ``"degenerate"``.  With ``hi_known`` the caller asserts
    ``fn(hi) <= 1`` analytically; otherwise ``hi`` is doubled until it is
    certified (when ``grow`` is set).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    flags: set = set()
    if _decide(fn, lo) == -1:
        if lo - floor_value <= tol:
            return floor_value, Enclosure(floor_value, lo), {"degenerate"}
        probe = floor_value + 0.5 * tol
        if _decide(fn, probe) == -1:
            return floor_value, Enclosure(floor_value, probe), {"degenerate"}
        # the root lies in (probe, lo]
        lo, hi, hi_known = probe, lo, True
    if not hi_known:
        while _decide(fn, hi) != -1:
            if not grow or hi > 2.0**20:
                raise ToleranceNotReached(f"could not certify fn <= 1 at r = {hi}")
            lo, hi = hi, 2 * hi
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        side = _decide(fn, mid)
        if side == 1:
            a = mid
        elif side == -1:
            b = mid
        else:
            # the root sits within rounding distance of mid; bracket it tightly
            left, right = mid - tol / 4, mid + tol / 4
            if _decide(fn, left) == 1 and _decide(fn, right) == -1:
                a, b = left, right
                flags.add("near_boundary")
                break
            raise ToleranceNotReached(
                f"enclosures too wide to decide near r = {mid}",
                partial=(0.5 * (a + b), Enclosure(a, b)),
            )
    return 0.5 * (a + b), Enclosure(a, b), flags


def _result(value, bracket, method, flags=()) -> DimensionResult:
    return DimensionResult(value, bracket, method, _branch(value), frozenset(flags))


# --------------------------------------------------------------------------
# dimensions


def affinity_dimension(alphabet: AlphabetSpec, tol: float = DEFAULT_TOL) -> DimensionResult:
    """``inf{r > 0 : P(r) <= 1}`` with a bracket of width at most ``tol``."""
    method = Method.InfinitePressure if not alphabet.is_finite else Method.AffinityBisection
    value, bracket, flags = certified_root(lambda r, lv: pressure(alphabet, r, lv), tol)
    return _result(value, bracket, method, flags)


def word_sum_oracle(alphabet: AlphabetSpec, r: float, m: int, budget: int = WORD_BUDGET) -> float:
    """Sum of ``svf(L_u, r)`` over all ``|I|^m`` words ``u`` by enumeration."""
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    if m < 1:
        raise ValueError("word length must be >= 1")
    a, b = alphabet.entries()
    n = a.size
    if n**m > budget:
        raise BudgetExceeded(f"{n}^{m} words exceed the budget of {budget}")
    x, y = np.abs(a), np.abs(b)
    wa, wb = x.copy(), y.copy()
    for _ in range(m - 1):
        wa = np.multiply.outer(wa, x).ravel()
        wb = np.multiply.outer(wb, y).ravel()
    return float(np.sum(svf_values(wa, wb, r)))


def modified_pressure(alphabet: AlphabetSpec, t: float, r1: float, r2: float) -> Enclosure:
    a, b = alphabet.entries()
    x, y = np.abs(a), np.abs(b)
    first = sum_enclosure(x**r1 * y ** (t - r1), extra_rel=6 * EPS)
    second = sum_enclosure(y**r2 * x ** (t - r2), extra_rel=6 * EPS)
    return first.maximum(second)


def modified_affinity_dimension(
    alphabet: AlphabetSpec, r1: float, r2: float, tol: float = DEFAULT_TOL
) -> DimensionResult:
    """Root ``t`` of ``max(sum |a|^r1 |b|^(t-r1), sum |b|^r2 |a|^(t-r2)) = 1``.

    ``r1`` and ``r2`` are the box dimensions of the two coordinate
    projections, supplied by the caller.
    """
    if not (0 <= r1 <= 1 and 0 <= r2 <= 1):
        raise ValueError("projection dimensions r1, r2 must lie in [0, 1]")
    if not alphabet.is_finite:
        raise ValueError("modified affinity dimension needs a finite alphabet")
    value, bracket, flags = certified_root(
        lambda t, lv: modified_pressure(alphabet, t, r1, r2), tol, lo=0.0
    )
    return _result(value, bracket, Method.ModifiedAffinity, flags)


def hutchinson_root(contractions: Sequence[float], tol: float = DEFAULT_TOL) -> DimensionResult:
    """Similarity root of ``sum c_i^r = 1`` for explicit ratios ``c_i``."""
    c = np.asarray(contractions, dtype=float)
    if c.size == 0 or np.any((c <= 0) | (c >= 1)):
        raise ValueError("contraction ratios must lie in (0, 1)")
    logc = np.log(c)

    def fn(r, level):
        return sum_enclosure(np.exp(r * logc), extra_rel=(4 + r * float(-logc.min())) * EPS)

    value, bracket, flags = certified_root(fn, tol)
    return _result(value, bracket, Method.HutchinsonFinite, flags)
