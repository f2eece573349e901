"""Signed Lüroth maps, the expansion codec and dimension formulas.

For a digit pair ``(s, d)`` the interval map is

    phi_{s,d}(x) = (-1)^s x / (d(d-1)) + 1/(d-s),

which sends ``[0, 1]`` onto ``[1/d, 1/(d-1)]``.  The planar maps are the
skew products ``A^p_{s,d}(w, x) = (f_s(w), phi_{s,d}(x))`` with
``f_0(w) = p w`` and ``f_1(w) = (1-p) w + p``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .digits import (
    Cofinite,
    DigitPair,
    DigitSetSpec,
    Explicit,
    Power,
    unit_mass,
)
from .enclosure import EPS, Enclosure
from .errors import ConsistencyError
from .pressure import (
    DEFAULT_TOL,
    AlphabetSpec,
    DimensionResult,
    Method,
    _result,
    certified_root,
)

Number = Union[float, Fraction]


def _pair(q) -> DigitPair:
    return q if isinstance(q, DigitPair) else DigitPair(*q)


# --------------------------------------------------------------------------
# maps


def phi_map(pair, x: Number) -> Number:
    """``phi_{s,d}(x)``; exact when ``x`` is a ``Fraction``."""
    q = _pair(pair)
    if not 0 <= x <= 1:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if isinstance(x, Fraction):
        return (-1) ** q.s * x / (q.d * (q.d - 1)) + Fraction(1, q.d - q.s)
    return (-1.0) ** q.s * x / (q.d * (q.d - 1)) + 1.0 / (q.d - q.s)


def sign_map(s: int, p: Number, w: Number) -> Number:
    """``f_0(w) = p w`` and ``f_1(w) = (1-p) w + p``."""
    return p * w if s == 0 else (1 - p) * w + p


def affine_map_2d(p: float, pair, point) -> tuple:
    """Apply ``A^p_{s,d}`` to a point of the unit square."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    w, x = point
    if not (0 <= w <= 1 and 0 <= x <= 1):
        raise ValueError(f"point {point} is outside the unit square")
    q = _pair(pair)
    return (sign_map(q.s, p, w), phi_map(q, x))


def linear_part(p: float, pair) -> tuple[float, float]:
    """Diagonal of ``L^p_{s,d}``."""
    q = _pair(pair)
    return (p if q.s == 0 else 1 - p, (-1.0) ** q.s / (q.d * (q.d - 1)))


def translation(p: float, pair) -> tuple[float, float]:
    """Translation vector ``v^p_{s,d} = (s p, 1/(d-s))``."""
    q = _pair(pair)
    return (q.s * p, 1.0 / (q.d - q.s))


# --------------------------------------------------------------------------
# expansion codec


def evaluate_expansion(digits: Sequence, n: Optional[int] = None, exact: bool = False) -> Number:
    """Partial sum of a signed Lüroth expansion over its first ``n`` digits.

    Term ``m`` is ``(-1)^(s_1+...+s_{m-1}) (d_m - 1 + s_m) / prod_{i<=m} d_i(d_i-1)``.
    The sum is formed in exact rational arithmetic and rounded once unless
    ``exact`` is set.
    """
    pairs = [_pair(q) for q in digits]
    if n is None:
        n = len(pairs)
    if n < 1:
        raise ValueError("need at least one digit")
    if n > len(pairs):
        raise ValueError(f"only {len(pairs)} digits available, asked for {n}")
    total = Fraction(0)
    denom = 1
    sign = 1
    for q in pairs[:n]:
        denom *= q.d * (q.d - 1)
        total += Fraction(sign * (q.d - 1 + q.s), denom)
        if q.s:
            sign = -sign
    return total if exact else float(total)


class StrategyKind(enum.Enum):
    AlwaysLuroth = "AlwaysLuroth"
    AlwaysAlternating = "AlwaysAlternating"
    Bernoulli = "Bernoulli"
    Prescribed = "Prescribed"


@dataclass(frozen=True)
class ExpansionStrategy:
    """How the sign digit is chosen at each step of :func:`expand`."""

    kind: StrategyKind
    p: Optional[float] = None
    seed: int = 0
    signs: tuple = ()

    def __post_init__(self):
        if self.kind is StrategyKind.Bernoulli and not (self.p is not None and 0 < self.p < 1):
            raise ValueError("Bernoulli strategy needs p in (0, 1)")
        if self.kind is StrategyKind.Prescribed:
            signs = tuple(int(s) for s in self.signs)
            if any(s not in (0, 1) for s in signs):
                raise ValueError("prescribed signs must be 0 or 1")
            object.__setattr__(self, "signs", signs)

    @classmethod
    def luroth(cls) -> ExpansionStrategy:
        return cls(StrategyKind.AlwaysLuroth)

    @classmethod
    def alternating(cls) -> ExpansionStrategy:
        return cls(StrategyKind.AlwaysAlternating)

    @classmethod
    def bernoulli(cls, p: float, seed: int = 0) -> ExpansionStrategy:
        return cls(StrategyKind.Bernoulli, p=p, seed=seed)

    @classmethod
    def prescribed(cls, signs: Iterable[int]) -> ExpansionStrategy:
        return cls(StrategyKind.Prescribed, signs=tuple(signs))

    def sign_sequence(self, n: int) -> list[int]:
        if self.kind is StrategyKind.AlwaysLuroth:
            return [0] * n
        if self.kind is StrategyKind.AlwaysAlternating:
            return [1] * n
        if self.kind is StrategyKind.Bernoulli:
            # a fresh generator per call keeps every expansion reproducible
            rng = np.random.default_rng(self.seed)
            return [0 if u < self.p else 1 for u in rng.random(n)]
        if len(self.signs) < n:
            raise ValueError(f"prescribed sign sequence has {len(self.signs)} entries, need {n}")
        return list(self.signs[:n])


def _digit_of(x: Fraction) -> int:
    # x in (1/d, 1/(d-1)]; an exact reciprocal 1/m gets d = m + 1
    return math.floor(1 / x) + 1


def expand(x: Number, strategy: ExpansionStrategy, n: int) -> list[DigitPair]:
    """First ``n`` digit pairs of a signed Lüroth expansion of ``x``.

    Each step picks ``d`` with the remainder in ``(1/d, 1/(d-1)]``, takes the
    sign from ``strategy`` and pulls the remainder back through the inverse
    of ``phi_{s,d}``.  Arithmetic is exact (floats are read as dyadic
    rationals).  A sign of 1 at a remainder equal to ``1/(d-1)`` would
    leave remainder 0, which has no expansion; sign 0 is used there instead.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rem = Fraction(x)
    if not 0 < rem <= 1:
        raise ValueError(f"x must lie in (0, 1], got {x}")
    out = []
    for s in strategy.sign_sequence(n):
        d = _digit_of(rem)
        if s == 1 and rem == Fraction(1, d - 1):
            s = 0
        scale = d * (d - 1)
        rem = (rem - Fraction(1, d)) * scale if s == 0 else (Fraction(1, d - 1) - rem) * scale
        out.append(DigitPair(s, d))
        if rem == 0:
            # only reachable when x is an exact left endpoint, which the
            # right-closed convention excludes
            raise AssertionError("expansion reached remainder 0")
    return out


def contraction_product(digits: Sequence) -> Fraction:
    out = Fraction(1)
    for q in digits:
        q = _pair(q)
        out /= q.d * (q.d - 1)
    return out


# --------------------------------------------------------------------------
# one-dimensional dimensions

ONE = Enclosure.point(1.0)


def _exact(v: float, method: Method, flags=()) -> DimensionResult:
    return _result(v, Enclosure.point(v), method, flags)


def _series_fn(J: DigitSetSpec, weights=(1.0, 1.0)):
    return lambda r, level: J.series(r, weights, level)


def _has_both_twos(J: DigitSetSpec) -> bool:
    return (0, 2) in J and (1, 2) in J


def dim_F_finite(J: DigitSetSpec, tol: float = DEFAULT_TOL) -> DimensionResult:
    """Dimension of the restricted digit set for a finite ``J``.

    Returns 1 when both ``(0,2)`` and ``(1,2)`` are present, otherwise the
    root of ``sum (1/(d(d-1)))^r = 1``.  The root equals the Hausdorff and
    box dimension under the open set condition; the flags record whether
    that condition is certified (``osc_certified``), unknown
    (``requires_osc``) or provably violated (``osc_violated``).
    """
    if not J.is_finite:
        raise ValueError("dim_F_finite needs a finite digit set")
    if _has_both_twos(J):
        return _exact(1.0, Method.HutchinsonFinite, {"exact", "osc_certified"})
    flags = set()
    if osc_violation_check(J):
        flags |= {"requires_osc", "osc_violated"}
    elif J.min_digit >= 3 or _example_shape(J):
        flags.add("osc_certified")
    else:
        flags.add("requires_osc")
    if len(J) == 1:
        # a single contraction: the limit set is one point
        return _result(0.0, Enclosure(0.0, 0.0), Method.HutchinsonFinite, flags | {"degenerate"})
    value, bracket, f = certified_root(_series_fn(J), tol)
    return _result(value, bracket, Method.HutchinsonFinite, flags | f)


def _example_shape(J: DigitSetSpec) -> bool:
    # {(0,2), (0,d), (1,d)} with d >= 3 has a certified feasible open set
    if not J.is_finite or len(J) != 3 or (0, 2) not in J:
        return False
    rest = [q for q in J.pairs() if q != DigitPair(0, 2)]
    return rest[0].d == rest[1].d >= 3 and {q.s for q in rest} == {0, 1}


def box_dim_digit_points(J: DigitSetSpec) -> DimensionResult:
    """Upper box dimension of ``{1/(d-s) : (s,d) in J}`` from closed forms.

    Finite sets give 0, cofinite ranges 1/2 and ``{n^k + c}`` gives
    ``1/(k+1)``.
    """
    value = max(J.cls(s).point_box_dim() for s in J.signs)
    return _exact(value, Method.DigitPoints, {"exact"})


def digit_points(J: DigitSetSpec, bound: int) -> np.ndarray:
    """Points ``1/(d-s)`` for digits ``d <= bound``, sorted decreasingly."""
    pts = [1.0 / (d - s) for s in J.signs for d in J.cls(s).members_upto(bound)]
    return np.unique(np.array(pts))[::-1]


def count_digit_points(J: DigitSetSpec, delta: float) -> int:
    """Mesh count ``N_delta`` of the digit points.

    Points are enumerated from the top until the gap to the next point is at
    most ``delta``; from that point ``x_tail`` down to 0 every mesh cell is
    occupied, which contributes ``floor(x_tail/delta) + 1`` cells.  Exact
    for finite sets and whenever gaps beyond ``x_tail`` stay below ``delta``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if J.is_finite:
        bound = max(max(J.cls(s).digits) for s in J.signs)
    else:
        bound = 2
        for s in J.signs:
            c = J.cls(s)
            if isinstance(c, Cofinite):
                edge = max([c.start, *c.exclusions])
                bound = max(bound, edge + math.isqrt(int(1 / delta)) + 2)
            elif isinstance(c, Power):
                # 1/n^k - 1/(n+1)^k <= delta once n^(k+1) >= k/delta
                n = math.ceil((c.k / delta) ** (1.0 / (c.k + 1))) + 2
                bound = max(bound, n**c.k + c.c)
            else:
                bound = max(bound, max(c.digits))
    pts = digit_points(J, bound)
    if J.is_finite:
        return int(np.unique(np.floor(pts / delta)).size)
    close = np.flatnonzero(-np.diff(pts) <= delta)
    if close.size == 0:
        raise ValueError("enumeration bound too small for this delta")
    x_tail = pts[close[0]]
    top_cell = math.floor(x_tail / delta)
    head = np.unique(np.floor(pts[: close[0]] / delta))
    return int(np.count_nonzero(head > top_cell) + top_cell + 1)


def estimate_box_dim_digit_points(J: DigitSetSpec, deltas: Sequence[float]) -> float:
    """Slope of ``log N_delta`` against ``-log delta`` (uncertified)."""
    n = np.array([count_digit_points(J, d) for d in deltas], dtype=float)
    x = -np.log(np.asarray(deltas, dtype=float))
    return float(np.polyfit(x, np.log(n), 1)[0])


def dim_F_infinite(J: DigitSetSpec, tol: float = DEFAULT_TOL) -> tuple[DimensionResult, DimensionResult]:
    """Hausdorff and packing (= upper box) dimension for infinite ``J``.

    ``J`` must avoid the digit 2.  Hausdorff is ``inf{r : sum (1/(d(d-1)))^r <= 1}``
    computed with certified tails; packing is the larger of that value and
    the box dimension of the digit points.
    """
    if J.is_finite:
        raise ValueError("dim_F_infinite needs an infinite digit set")
    if J.min_digit < 3:
        raise ValueError("digit 2 is excluded: J must lie in {0,1} x N_{>=3}")
    value, bracket, flags = certified_root(_series_fn(J), tol)
    haus = _result(value, bracket, Method.InfinitePressure, flags)
    points = box_dim_digit_points(J)
    if points.value > bracket.hi:
        box = _result(points.value, points.bracket, Method.DigitPoints, {"digit_points"})
    elif points.value < bracket.lo:
        box = haus
    else:
        # the two candidates overlap: the max lies in [value_lo, hi]
        b = Enclosure(max(bracket.lo, points.value), bracket.hi)
        box = _result(min(max(value, b.lo), b.hi), b, Method.InfinitePressure, flags)
    return haus, box


def dim_1d(J: DigitSetSpec, tol: float = DEFAULT_TOL) -> tuple[DimensionResult, DimensionResult]:
    """Hausdorff and box/packing dimension of the restricted digit set.

    Dispatches on the shape of ``J``.  Infinite sets that use the digit 2
    are solved by the same certified series root; their box dimension is
    the larger of that root and the digit-point dimension.
    """
    if J.is_finite:
        r = dim_F_finite(J, tol)
        return r, r
    if _has_both_twos(J):
        r = _exact(1.0, Method.InfinitePressure, {"exact"})
        return r, r
    if J.min_digit >= 3:
        return dim_F_infinite(J, tol)
    value, bracket, flags = certified_root(_series_fn(J), tol)
    haus = _result(value, bracket, Method.InfinitePressure, flags | {"requires_osc"})
    pts = box_dim_digit_points(J).value
    if pts > bracket.hi:
        box = _result(pts, Enclosure.point(pts), Method.DigitPoints, {"requires_osc"})
    else:
        box = haus
    return haus, box


# --------------------------------------------------------------------------
# non-autonomous schedules


@dataclass(frozen=True)
class Schedule:
    """Eventually periodic sequence ``J_1, J_2, ...`` of finite digit sets.

    The first ``len(preperiod)`` sets are used once, after which ``period``
    repeats forever.
    """

    period: tuple
    preperiod: tuple = ()

    def __post_init__(self):
        period = tuple(self.period)
        pre = tuple(self.preperiod)
        if not period:
            raise ValueError("schedule needs a non-empty period")
        for J in period + pre:
            if not isinstance(J, DigitSetSpec) or not J.is_finite:
                raise ValueError("every scheduled digit set must be a finite DigitSetSpec")
            if J.min_digit < 3:
                raise ValueError("scheduled digit sets must lie in {0,1} x N_{>=3}")
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "preperiod", pre)

    @classmethod
    def constant(cls, J: DigitSetSpec) -> Schedule:
        return cls((J,))

    def __getitem__(self, k: int) -> DigitSetSpec:
        """``J_k`` for ``k >= 1``."""
        if k < 1:
            raise IndexError("schedules are indexed from 1")
        if k <= len(self.preperiod):
            return self.preperiod[k - 1]
        return self.period[(k - 1 - len(self.preperiod)) % len(self.period)]


def dim_nonautonomous(schedule: Schedule, tol: float = DEFAULT_TOL) -> DimensionResult:
    """Hausdorff dimension for an eventually periodic schedule.

    The Cesàro mean of ``log S_{J_k}(r)`` converges to the average over one
    period, so the root solves ``prod_{k in period} S_{J_k}(r) = 1``.
    """
    if not isinstance(schedule, Schedule):
        raise ValueError("only eventually periodic schedules are supported")
    P = len(schedule.period)

    def fn(r, level):
        prod = ONE
        for J in schedule.period:
            prod = prod * J.series(r, level=level)
        return prod ** (1.0 / P)

    value, bracket, flags = certified_root(fn, tol)
    return _result(value, bracket, Method.NonAutonomous, flags)


# --------------------------------------------------------------------------
# fibers and the planar formulas


def _class_series(cls, e: float, level: int) -> Enclosure:
    return cls.series(e, level)


def _fiber_root(I0, I1, p: float, tol: float):
    def fn(t, level):
        return (_class_series(I0, t, level) ** p) * (_class_series(I1, t, level) ** (1 - p))

    return certified_root(fn, tol, hi=1.0, hi_known=True)


def _as_class(I):
    if isinstance(I, (Explicit, Cofinite, Power)):
        return I
    return Explicit(frozenset(I))


def fiber_dimension(I0, I1, p: float, tol: float = DEFAULT_TOL) -> DimensionResult:
    """Root ``t`` of ``S_{I0}(t)^p S_{I1}(t)^(1-p) = 1``.

    Here ``S_I(t) = sum_{d in I} (1/(d(d-1)))^t``.  When both sides stay
    below 1 for every ``t > 0`` (single-digit fibers) the result is 0 with
    the ``degenerate`` flag.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    I0, I1 = _as_class(I0), _as_class(I1)
    if I0.is_empty or I1.is_empty:
        raise ValueError("both digit sets must be non-empty")
    value, bracket, flags = _fiber_root(I0, I1, p, tol)
    return _result(value, bracket, Method.Fiber, flags)


def dim_2d(J: DigitSetSpec, p: float, tol: float = DEFAULT_TOL) -> DimensionResult:
    """Hausdorff dimension bound for the planar set from the fiber equation.

    Returns ``1 + t`` with ``t`` the fiber root.  With equal digit sets for
    both signs the value is exact (flag ``exact``) and equals the affinity
    dimension; for finite equal sets box and packing dimension agree too
    (flag ``box_equals_packing``).  Otherwise it is a lower bound.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if J.zero.is_empty or J.one.is_empty:
        raise ValueError("both signs need non-empty digit sets")
    value, bracket, flags = _fiber_root(J.zero, J.one, p, tol)
    if J.zero == J.one:
        flags = flags | {"exact"}
        if J.is_finite:
            flags.add("box_equals_packing")
    else:
        flags = flags | {"lower_bound"}
    return _result(1.0 + value, bracket + 1.0, Method.TwoDFormula, flags)


def affinity_sums(J: DigitSetSpec, p: float, r: float, level: int = 0) -> tuple[Enclosure, Enclosure]:
    """The two sums whose maximum defines the affinity dimension on (1, 2].

    ``v1 = sum a_s (1/(d(d-1)))^(r-1)`` and ``v2 = sum a_s^(r-1) / (d(d-1))``
    with ``a_0 = p`` and ``a_1 = 1 - p``.
    """
    w = (p, 1.0 - p)
    v1 = J.series(r - 1, w, level)
    v2 = J.series(1.0, (w[0] ** (r - 1), w[1] ** (r - 1)), level)
    return v1, v2


def simplification_conditions(J: DigitSetSpec, p: float) -> set:
    out = set()
    if unit_mass(J).hi <= 1:
        out.add("a")
    if J.zero == J.one:
        out.add("b")
    if p == 0.5:
        out.add("c")
    return out


def luroth_affinity_dimension(J: DigitSetSpec, p: float, tol: float = DEFAULT_TOL) -> DimensionResult:
    """Affinity dimension of ``{L^p_{s,d} : (s,d) in J}`` for two-signed ``J``.

    Solves ``inf{r in (1,2] : max(v1, v2) <= 1}`` (see :func:`affinity_sums`).
    When one of the simplifying conditions holds the single-sum root of
    ``v1`` is computed as well and must agree to ``tol``; the flags
    ``simplified_a``/``_b``/``_c`` record which conditions applied.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if J.zero.is_empty or J.one.is_empty:
        raise ValueError("both sign digits must occur in J")

    def full(r, level):
        v1, v2 = affinity_sums(J, p, r, level)
        return v1.maximum(v2)

    # at r = 2 both sums are at most the total unit mass, which is <= 1
    value, bracket, flags = certified_root(full, tol, lo=1.0, hi=2.0, floor_value=1.0, hi_known=True)
    conds = simplification_conditions(J, p)
    if conds:
        sv, sb, _ = certified_root(
            lambda r, level: affinity_sums(J, p, r, level)[0],
            tol, lo=1.0, hi=2.0, floor_value=1.0, hi_known=True,
        )
        if abs(sv - value) > tol:
            raise ConsistencyError(f"simplified affinity root {sv} disagrees with {value}")
        flags = flags | {f"simplified_{c}" for c in conds}
    return _result(value, bracket, Method.TwoDFormula, flags)


# --------------------------------------------------------------------------
# open set condition diagnostics


@dataclass(frozen=True)
class OscReport:
    d: int
    k: int
    left: Fraction      # phi_{0,2}^k(1/(d-1))
    gap_lo: Fraction    # 1 - 1/(d-1)
    gap_hi: Fraction    # 1 - 1/d
    right: Fraction     # phi_{0,2}^(k+1)(1/d)
    quadratic: int      # d^2 - 2d - 1
    passed: bool

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "k": self.k,
            "left": str(self.left),
            "gap_lo": str(self.gap_lo),
            "gap_hi": str(self.gap_hi),
            "right": str(self.right),
            "quadratic": self.quadratic,
            "passed": self.passed,
        }


def _iterate_phi02(x: Fraction, k: int) -> Fraction:
    for _ in range(k):
        x = phi_map(DigitPair(0, 2), x)
    return x


def osc_example_check(d: int) -> OscReport:
    """Check the interval chain behind the feasible open set for ``{(0,2),(0,d),(1,d)}``.

    With ``k = ceil(log2(d-1)) - 1`` it verifies, in exact rationals,
    ``phi^k(1/(d-1)) <= 1 - 1/(d-1) < 1 - 1/d <= phi^(k+1)(1/d)`` for
    ``phi = phi_{0,2}``, plus ``d^2 - 2d - 1 > 0``.
    """
    if int(d) != d or d < 3:
        raise ValueError("the feasible-set construction needs an integer d >= 3")
    d = int(d)
    k = (d - 2).bit_length() - 1  # ceil(log2(d-1)) - 1
    left = _iterate_phi02(Fraction(1, d - 1), k)
    gap_lo = 1 - Fraction(1, d - 1)
    gap_hi = 1 - Fraction(1, d)
    right = _iterate_phi02(Fraction(1, d), k + 1)
    quad = d * d - 2 * d - 1
    passed = left <= gap_lo < gap_hi <= right and quad > 0
    return OscReport(d, k, left, gap_lo, gap_hi, right, quad, passed)


def osc_violation_check(J: DigitSetSpec) -> bool:
    """True when ``sum 1/(d(d-1)) > 1`` is certified, so the OSC must fail."""
    return unit_mass(J).lo > 1
