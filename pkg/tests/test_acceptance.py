"""Acceptance criteria 1-12, each at its stated tolerance and runtime limit.

Every test prints one ``criterion N: PASS|FAIL`` line (visible without
``-s``) and then asserts the outcome.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from affdim.digits import Cofinite, DigitSetSpec, Explicit, Power, parse_digit_set
from affdim.empirics import (
    DEFAULT_LADDER,
    FIGURE_SETS,
    affine_cover,
    box_count,
    cantor_product_maps,
    interval_cover,
    render,
)
from affdim.enclosure import ZetaSeries, series_sum
from affdim.luroth import (
    ExpansionStrategy,
    Schedule,
    dim_1d,
    dim_2d,
    dim_F_finite,
    dim_F_infinite,
    dim_nonautonomous,
    evaluate_expansion,
    expand,
    luroth_affinity_dimension,
    osc_example_check,
    osc_violation_check,
)
from affdim.pressure import AlphabetSpec, affinity_dimension, modified_affinity_dimension, pressure, word_sum_oracle
from affdim.spectrum import SpectrumRequest, realize_1d, realize_2d

LOG2_LOG6 = 0.386852807234541586870  # mpmath


@pytest.fixture
def report(capsys):
    def emit(number, limit, fn):
        start = time.perf_counter()
        ok, detail = fn()
        elapsed = time.perf_counter() - start
        passed = ok and elapsed < limit
        with capsys.disabled():
            status = "PASS" if passed else "FAIL"
            print(f"\ncriterion {number}: {status} ({elapsed:.2f} s, limit {limit} s) {detail}")
        assert ok, detail
        assert elapsed < limit, f"took {elapsed:.2f} s"

    return emit


def test_criterion_01_cantor_product(report):
    def run():
        alphabet = AlphabetSpec.explicit([(1 / 4, 1 / 16)] * 4)
        dim = affinity_dimension(alphabet, tol=1e-9)
        series = box_count(affine_cover(cantor_product_maps(), 6), DEFAULT_LADDER)
        ok = abs(dim.value - 1.0) <= 1e-9 and 0.70 <= series.slope <= 0.80
        return ok, f"affinity={dim.value:.12f} slope={series.slope!r}"

    report(1, 10, run)


def test_criterion_02_telescoping(report):
    def run():
        tele = series_sum(_Telescope())
        full = DigitSetSpec.both(Cofinite(2))
        p2 = pressure(AlphabetSpec.luroth(0.5, full), 2.0)
        d2 = dim_2d(full, 0.5, tol=1e-9).value
        d1 = [dim_1d(DigitSetSpec.single(s, Cofinite(2)), tol=1e-9)[0].value for s in (0, 1)]
        ok = (tele.contains(1.0) and tele.width <= 1e-10 and p2.contains(1.0)
              and abs(d2 - 2) <= 1e-6 and all(abs(v - 1) <= 1e-6 for v in d1))
        return ok, f"sum={tele} width={tele.width:.2e} dim2d={d2:.10f} dim1d={d1}"

    report(2, 5, run)


class _Telescope:
    """sum_{d>=2} 1/(d(d-1)) as a series rule."""

    def enclose(self, level=0):
        return Cofinite(2).series(1.0, level)


def test_criterion_03_zeta(report):
    def run():
        a = series_sum(ZetaSeries(12 / 7, 2))
        b = series_sum(ZetaSeries(7 / 4 - 1 / 50, 2))
        return a.lo > 1 and b.hi < 1, f"zeta(12/7)-1 in {a}, zeta(7/4-1/50)-1 in {b}"

    report(3, 5, run)


def test_criterion_04_power_families(report):
    def run():
        ok = True
        parts = []
        for k in range(2, 7):
            h, b = dim_F_infinite(DigitSetSpec.single(0, Power(k, 0)))
            ok &= h.value >= 1 / (k + 1) - 1e-9 and b.value == h.value
            parts.append(f"k={k}:{h.value:.6f}")
        for k in (7, 8):
            h, b = dim_F_infinite(DigitSetSpec.single(1, Power(k, 1)))
            ok &= h.value <= 1 / (k + 1) - 1 / (100 * k) + 1e-9 and b.value == 1 / (k + 1)
            parts.append(f"k={k}:{h.value:.6f}/{b.value:.6f}")
        return ok, " ".join(parts)

    report(4, 30, run)


def test_criterion_05_formula_consistency(report):
    def run():
        rng = np.random.default_rng(20240501)
        worst = 0.0
        equal_sets = 0
        for trial in range(200):
            I0 = frozenset(int(d) for d in rng.choice(np.arange(3, 41), size=rng.integers(1, 6), replace=False))
            I1 = I0 if trial % 4 == 0 else frozenset(
                int(d) for d in rng.choice(np.arange(3, 41), size=rng.integers(1, 6), replace=False)
            )
            J = DigitSetSpec(Explicit(I0), Explicit(I1))
            p = float(rng.uniform(1e-3, 1 - 1e-3))
            aff = luroth_affinity_dimension(J, p, tol=1e-9).value
            mod = modified_affinity_dimension(
                AlphabetSpec.luroth(p, J), 1.0, dim_F_finite(J, tol=1e-9).value, tol=1e-9
            ).value
            vals = [aff, mod]
            if I0 == I1:
                equal_sets += 1
                vals.append(dim_2d(J, p, tol=1e-9).value)
            worst = max(worst, max(vals) - min(vals))
        return worst <= 1e-7, f"max pairwise gap {worst:.2e} over 200 sets ({equal_sets} with I0=I1)"

    report(5, 120, run)


def test_criterion_06_sandwich(report):
    def run():
        rng = np.random.default_rng(7)
        checked = 0
        worst_lo = worst_hi = math.inf
        for _ in range(100):
            n = int(rng.integers(1, 4))
            entries = rng.uniform(0.02, 0.98, size=(n, 2)) * rng.choice([-1, 1], size=(n, 2))
            alphabet = AlphabetSpec.explicit([tuple(row) for row in entries])
            for r in (0.3, 0.7, 1.2, 1.8, 2.5):
                P = pressure(alphabet, r)
                for m in range(1, 13):
                    w = word_sum_oracle(alphabet, r, m)
                    worst_lo = min(worst_lo, w / P.lo**m)
                    worst_hi = min(worst_hi, 2 * P.hi**m / w)
                    checked += 1
        ok = worst_lo >= 1 - 1e-12 and worst_hi >= 1 - 1e-12
        return ok, f"{checked} checks, min W/P^m={worst_lo:.15f}, min 2P^m/W={worst_hi:.15f}"

    report(6, 60, run)


def test_criterion_07_spectrum(report):
    def run():
        tol = 1e-3
        results = []
        for t in (0.1, 0.25, 0.5, 0.75, 0.9):
            J, got = realize_1d(SpectrumRequest(t, tol=tol))
            back = dim_1d(J, tol=1e-10)[0].value
            results.append((t, got.value, back))
        for t in (0.5, 1.0, 1.5, 1.9):
            J, got = realize_2d(SpectrumRequest(t, p=0.5, tol=tol, planar=True))
            back = dim_2d(J, 0.5, tol=1e-10).value if len(J.signs) == 2 else dim_1d(J, tol=1e-10)[0].value
            results.append((t, got.value, back))
        ok = all(abs(g - t) <= tol and abs(b - t) <= tol for t, g, b in results)
        return ok, " ".join(f"{t}->{g:.5f}" for t, g, _ in results)

    report(7, 120, run)


def test_criterion_08_nonautonomous(report):
    def run():
        J = parse_digit_set("0:3;1:3")
        const = dim_nonautonomous(Schedule.constant(J), tol=1e-10).value
        direct = dim_F_finite(J, tol=1e-10).value
        per2 = dim_nonautonomous(Schedule((parse_digit_set("0:3"), J)), tol=1e-10).value
        target = math.log(2) / (2 * math.log(6))
        ok = abs(const - direct) <= 1e-9 and abs(per2 - target) <= 1e-9
        return ok, f"constant gap {abs(const - direct):.1e}, period-2 {per2:.12f} vs {target:.12f}"

    report(8, 5, run)


def test_criterion_09_osc(report):
    def run():
        reports = [osc_example_check(d) for d in range(3, 51)]
        exact = all(isinstance(r.left, Fraction) and isinstance(r.right, Fraction) for r in reports)
        supersets = [parse_digit_set("0:2,3,4,5;1:3,4"), parse_digit_set("1:2,5;0:3,4;1:3,4")]
        fired = [osc_violation_check(J) for J in supersets]
        ok = all(r.passed for r in reports) and exact and all(fired)
        return ok, f"d=3..50 passed={sum(r.passed for r in reports)}/48 violations={fired}"

    report(9, 5, run)


def test_criterion_10_empirical_1d(report):
    def run():
        series = box_count(interval_cover(parse_digit_set("0:3;1:3"), 10), DEFAULT_LADDER)
        oracle = dim_F_finite(parse_digit_set("0:3;1:3")).value
        gap = abs(series.slope - oracle)
        return gap <= 0.05 and abs(oracle - LOG2_LOG6) < 1e-9, f"slope={series.slope:.5f} gap={gap:.4f}"

    report(10, 30, run)


def test_criterion_11_codec(report):
    def run():
        rng = np.random.default_rng(11)
        xs = 1.0 - rng.random(1000)  # in (0, 1]
        worst = Fraction(0)
        for i, x in enumerate(xs):
            strategies = (
                ExpansionStrategy.luroth(),
                ExpansionStrategy.alternating(),
                ExpansionStrategy.bernoulli(0.5, seed=i),
                ExpansionStrategy.prescribed(rng.integers(0, 2, size=40).tolist()),
            )
            xf = Fraction(float(x))
            for strat in strategies:
                err = abs(evaluate_expansion(expand(xf, strat, 40), exact=True) - xf)
                worst = max(worst, err)
        return worst <= Fraction(1, 2**40), f"max error {float(worst):.3e} <= 2^-40 = {2.0**-40:.3e}"

    report(11, 10, run)


def test_criterion_12_figures(report):
    def run():
        res = 512
        images = {k: render(parse_digit_set(v), 0.5, resolution=res) for k, v in FIGURE_SETS.items()}
        rows = np.flatnonzero(images["a"].any(axis=1))
        lowest_y = 1 - (rows.max() + 1) / res
        ok = lowest_y >= 0.5 - 1 / res and all(img.any() for img in images.values())
        return ok, f"figure a lowest occupied y={lowest_y:.6f}"

    report(12, 30, run)
