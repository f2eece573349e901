"""Constructive realisation of prescribed dimensions by digit sets.

For a target ``r`` the greedy walks through ``d = 2, 3, ...`` and keeps a
digit when the Moran sum at the target,

    S_J(r) = sum_{d in J} (1/(d(d-1)))^r,

stays at most 1.  Since ``S_J`` is decreasing, ``S_J(r) <= 1`` is the same
as ``dim F_J <= r``, so one evaluation replaces a bisection per candidate.
The walk stops once convexity guarantees ``r - dim F_J <= tol/2``:

    r - dim F_J <= (1 - S_J(r)) / |S_J'(r)|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .digits import Cofinite, DigitSetSpec, Explicit
from .errors import ToleranceNotReached
from .luroth import dim_1d, dim_2d
from .pressure import DimensionResult, Method, _result
from .enclosure import Enclosure

DEFAULT_MAX_DIGIT = 10**5


@dataclass(frozen=True)
class SpectrumRequest:
    target: float
    sign: int = 0
    p: float = 0.5
    tol: float = 1e-6
    max_digit: int = DEFAULT_MAX_DIGIT
    planar: bool = False

    def __post_init__(self):
        top = 2.0 if self.planar else 1.0
        if not 0 <= self.target <= top:
            raise ValueError(f"target must lie in [0, {top:g}], got {self.target}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.sign not in (0, 1):
            raise ValueError("sign must be 0 or 1")
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if self.max_digit < 3:
            raise ValueError("max_digit must be at least 3")


@dataclass(frozen=True)
class GreedyState:
    digits: tuple          # accepted finite digits, increasing
    tail_start: int = 0    # start of a cofinite completion, 0 if none
    sums: tuple = ()       # S_J(target) after each acceptance

    def digit_class(self):
        if self.tail_start:
            excl = frozenset(range(self.tail_start)) - set(self.digits)
            return Cofinite(min(self.digits, default=self.tail_start), excl)
        return Explicit(frozenset(self.digits))


def greedy_digits(target: float, tol: float, max_digit: int = DEFAULT_MAX_DIGIT) -> GreedyState:
    """Greedy choice of digits ``I`` with ``dim F_{{s} x I}`` within ``tol`` below ``target``."""
    d = np.arange(2, max_digit + 1, dtype=float)
    logq = np.log(d) + np.log(d - 1)
    terms = np.exp(-target * logq)
    # avail[i] = sum of terms strictly after index i
    suffix = np.concatenate((np.cumsum(terms[::-1])[::-1][1:], [0.0]))
    t_last = terms[-1]
    s_val = 0.0
    slope = 0.0       # |S_J'(target)|
    chosen: list[int] = []
    sums: list[float] = []
    tail_start = 0

    def eta(extra_slope=0.0):
        return 0.5 * tol * (slope + extra_slope)

    neg = -terms  # ascending, for searchsorted

    def closable(rest, i, tol_s):
        # can terms after index i bring the remainder below tol_s?
        if rest <= tol_s:
            return True
        if i + 1 >= terms.size or rest > suffix[i]:
            return False
        k = int(np.ceil(rest / terms[i + 1]))
        if k * t_last > rest:
            return False
        if k > 1:
            return True
        # one more term must land within tol_s of the remainder
        j = max(int(np.searchsorted(neg, -rest, side="left")), i + 1)
        return j < terms.size and rest - terms[j] <= tol_s

    for i, t in enumerate(terms):
        deficit = 1.0 - s_val
        if deficit <= eta():
            break
        digit = i + 2
        avail = suffix[i]
        if target > 0.5 and deficit >= t + avail:
            # the finite range cannot close the gap; try all digits >= digit
            tail = Cofinite(digit).series(target)
            if tail.hi <= deficit + eta(float(np.sum(terms[i:] * logq[i:]))):
                tail_start = digit
                sums.append(s_val + tail.mid)
                break
        if t > deficit:
            continue
        take_ok = closable(deficit - t, i, eta(t * logq[i]))
        skip_ok = deficit <= avail
        if take_ok or not skip_ok:
            s_val += t
            slope += t * logq[i]
            chosen.append(digit)
            sums.append(s_val)
    return GreedyState(tuple(chosen), tail_start, tuple(sums))


def realize_1d(req: SpectrumRequest) -> tuple[DigitSetSpec, DimensionResult]:
    """Digit set ``{s} x I`` whose restricted digit set has dimension ``target``.

    The returned dimension is recomputed from the digit set with the
    certified solver, independently of the greedy arithmetic.  Raises
    ``ToleranceNotReached`` (with the best set found) if it misses by more
    than ``tol``.
    """
    s = req.sign
    if req.target <= req.tol:
        J = DigitSetSpec.single(s, {2})
        return J, _result(0.0, Enclosure(0.0, 0.0), Method.HutchinsonFinite, {"degenerate"})
    state = greedy_digits(req.target, req.tol, req.max_digit)
    cls = state.digit_class()
    if cls.is_empty:
        raise ToleranceNotReached("greedy accepted no digits", partial=None)
    J = DigitSetSpec.single(s, cls)
    achieved = dim_1d(J, tol=min(req.tol, 1e-9) / 4)[0]
    if abs(achieved.value - req.target) > req.tol:
        raise ToleranceNotReached(
            f"reached {achieved.value} for target {req.target}; raise max_digit",
            partial=(J, achieved),
        )
    return J, achieved


def realize_2d(req: SpectrumRequest) -> tuple[DigitSetSpec, DimensionResult]:
    """Digit set whose planar limit set has Hausdorff dimension ``target``.

    Targets up to 1 use a single sign, where the planar set is a vertical
    copy of the one-dimensional set.  Larger targets use ``{0,1} x I`` with
    ``I`` realising ``target - 1`` in one dimension.
    """
    y = req.target
    if y <= 1:
        sub = SpectrumRequest(y, req.sign, req.p, req.tol, req.max_digit)
        return realize_1d(sub)
    sub = SpectrumRequest(y - 1, req.sign, req.p, req.tol, req.max_digit)
    J1, _ = realize_1d(sub)
    I = J1.cls(req.sign)
    J = DigitSetSpec.both(I)
    achieved = dim_2d(J, req.p, tol=min(req.tol, 1e-9) / 4)
    if abs(achieved.value - y) > req.tol:
        raise ToleranceNotReached(f"reached {achieved.value} for target {y}", partial=(J, achieved))
    return J, achieved
