import random
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

import oracles
from torusflow.brackets import (
    ConservationTag,
    IntegralCoeffs,
    combination_identity,
    conservation_residuals,
    kolokoltsov_complete,
    kolokoltsov_top,
    l_coeffs,
    lemma1_pqr,
    poisson_residual,
    potential_triple,
)
from torusflow.fields import MixedRepresentationError, QuotientField
from torusflow.flowbuild import AssembledPotential, QuadraticForm, Role, build_n3, build_n4
from torusflow.trigser import TrigSeries, cc, random_series

P1, P2 = sp.symbols("p1 p2")


def sym_l_coeffs(a, Lambda):
    """Coefficients of 2 Lambda^2 {H, F} by direct symbolic expansion in the momenta."""
    n = len(a) - 1
    L = oracles.to_sympy(Lambda)
    F = sum(oracles.to_sympy(ai) * P1 ** (n - i) * P2**i for i, ai in enumerate(a))
    H = (P1**2 + P2**2) / (2 * L)
    X, Y = oracles.X, oracles.Y
    bracket = sp.diff(H, P1) * sp.diff(F, X) + sp.diff(H, P2) * sp.diff(F, Y)
    bracket -= sp.diff(H, X) * sp.diff(F, P1) + sp.diff(H, Y) * sp.diff(F, P2)
    poly = sp.Poly(sp.expand(sp.simplify(2 * L**2 * bracket)), P1, P2)
    return [poly.coeff_monomial(P1 ** (n + 1 - i) * P2**i) for i in range(n + 2)]


def random_fields(rng, count, degree=2, terms=3):
    return [random_series(rng, degree, terms) for _ in range(count)]


def consistent(rng, n, c1=None, c2=None, degree=2):
    c1 = Fraction(rng.randint(-3, 3), rng.randint(1, 3)) if c1 is None else c1
    c2 = Fraction(rng.randint(-3, 3), rng.randint(1, 3)) if c2 is None else c2
    lower = random_fields(rng, n - 1, degree)
    Lambda = random_series(rng, degree, 3) + 4
    return IntegralCoeffs(n, kolokoltsov_complete(n, lower, c1, c2), Lambda, c1, c2)


class TestKolokoltsov:
    def test_n4(self):
        a0, a1, a2 = cc(1, 0), cc(0, 1), cc(1, 1)
        top1, top2 = kolokoltsov_top(4, [a0, a1, a2], 3, 5)
        assert top1 == a1 + 3
        assert top2 == a2 - a0 + 5

    def test_n3(self):
        a0, a1 = cc(1, 0), cc(0, 1)
        top1, top2 = kolokoltsov_top(3, [a0, a1], 3, 5)
        assert top1 == a0 + 3
        assert top2 == a1 + 5

    def test_n6(self):
        a = [cc(k, 0) for k in range(1, 6)]
        top1, top2 = kolokoltsov_top(6, a, 0, 0)
        assert top1 == a[3] - a[1]
        assert top2 == a[4] - a[2] + a[0]

    def test_wrong_count(self):
        with pytest.raises(ValueError):
            kolokoltsov_top(4, [cc(1, 0)])

    def test_violation_detected(self):
        with pytest.raises(ValueError):
            IntegralCoeffs(3, [cc(1, 0), cc(0, 1), cc(1, 1), cc(2, 0)], TrigSeries.const(1))


class TestLCoeffs:
    def test_constant_fields(self):
        c = IntegralCoeffs(3, [1, 2, 3, 4], TrigSeries.const(2), check_kolokoltsov=False)
        assert all(l.is_zero() for l in l_coeffs(c))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_against_symbolic_bracket(self, n):
        rng = random.Random(100 + n)
        a = random_fields(rng, n + 1, 1, 2)
        Lambda = random_series(rng, 1, 2) + 3
        c = IntegralCoeffs(n, a, Lambda, check_kolokoltsov=False)
        for got, want in zip(l_coeffs(c), sym_l_coeffs(a, Lambda)):
            assert oracles.same_function(got, want)

    def test_top_coefficient_frozen(self):
        # l_{n+1} = 2 Lambda a0_x + n Lambda_x a0 + Lambda_y a1
        a = [cc(1, 0), cc(0, 1), TrigSeries.zero()]
        L = cc(1, 1) + 3
        c = IntegralCoeffs(2, a, L, check_kolokoltsov=False)
        top = l_coeffs(c)[0]
        assert top == L * a[0].d(1, 0) * 2 + L.d(1, 0) * a[0] * 2 + L.d(0, 1) * a[1]

    def test_quotient_fields(self):
        base = cc(1, 0) + 3
        a = [QuotientField(cc(0, 1), base, 1), QuotientField(cc(1, 1), base, 2), TrigSeries.const(1)]
        c = IntegralCoeffs(2, a, base, check_kolokoltsov=False)
        B = oracles.to_sympy(base)
        exprs = [oracles.to_sympy(cc(0, 1)) / B, oracles.to_sympy(cc(1, 1)) / B**2, sp.Integer(1)]
        F = sum(e * P1 ** (2 - i) * P2**i for i, e in enumerate(exprs))
        H = (P1**2 + P2**2) / (2 * B)
        X, Y = oracles.X, oracles.Y
        br = sp.diff(H, P1) * sp.diff(F, X) + sp.diff(H, P2) * sp.diff(F, Y)
        br -= sp.diff(H, X) * sp.diff(F, P1) + sp.diff(H, Y) * sp.diff(F, P2)
        poly = sp.Poly(sp.expand(2 * B**2 * br), P1, P2)
        pts = [(0.3, 1.1), (2.0, -0.7), (4.4, 5.9)]
        for i, got in enumerate(l_coeffs(c)):
            want = poly.coeff_monomial(P1 ** (3 - i) * P2**i)
            for x, y in pts:
                assert abs(float(got.evaluate(x, y)) - float(want.subs({X: x, Y: y}))) < 1e-12

    def test_mixed_bases(self):
        a = [QuotientField(cc(0, 1), cc(1, 0) + 3, 1), QuotientField(cc(0, 1), cc(1, 0) + 4, 1), 0]
        with pytest.raises(MixedRepresentationError):
            IntegralCoeffs(2, a, TrigSeries.const(1), check_kolokoltsov=False)


class TestConservationLaws:
    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8])
    def test_combination_identity(self, n):
        rng = random.Random(n)
        for _ in range(5):
            r1, r2 = combination_identity(consistent(rng, n))
            assert r1.is_zero() and r2.is_zero()

    def test_needs_kolokoltsov(self):
        rng = random.Random(7)
        a = random_fields(rng, 5)
        c = IntegralCoeffs(4, a, random_series(rng, 2, 3) + 4, check_kolokoltsov=False)
        assert not all(r.is_zero() for r in combination_identity(c))

    def test_needs_n3(self):
        with pytest.raises(ValueError):
            lemma1_pqr(IntegralCoeffs(2, [1, 2, 3], TrigSeries.const(1), check_kolokoltsov=False))

    def test_law_formulas_n4(self):
        rng = random.Random(11)
        c = consistent(rng, 4, c1=Fraction(2, 3))
        a, L = c.a, c.Lambda
        _, laws = lemma1_pqr(c)
        X1, Y1 = laws.law1
        assert X1 == (a[0] * 4 - a[2] * 2) * L
        assert Y1 == (a[1] * -2 - 3 * c.c1) * L
        X2, Y2 = laws.law2
        assert X2 == (a[1] * 2 - c.c1) * L
        assert Y2 == (a[0] * 4 - a[2] * 2 - 4 * c.c2) * L

    def test_triple_formulas_n3(self):
        rng = random.Random(12)
        c = consistent(rng, 3)
        a, L = c.a, c.Lambda
        t, _ = lemma1_pqr(c)
        assert t.P == a[1] * 2 * L
        assert t.Q == a[0] * 2 * L
        assert t.R == (a[1] * -2 - 3 * c.c2) * L
        assert t.tag is ConservationTag.LEMMA1

    @pytest.mark.parametrize("n,factor", [(3, -2), (4, 2)])
    def test_relation_to_potential_normalization(self, n, factor):
        rng = random.Random(20 + n)
        c = consistent(rng, n, c1=Fraction(1, 3), c2=Fraction(2))
        t, _ = lemma1_pqr(c)
        s = potential_triple(c)
        assert s.tag is ConservationTag.SEC3
        for name in "PQR":
            assert getattr(t, name) == getattr(s, name) * factor

    def test_sec3_only_low_degree(self):
        rng = random.Random(1)
        with pytest.raises(ValueError):
            potential_triple(consistent(rng, 5))


class TestOnShell:
    def test_cubic_constant_case(self):
        h = AssembledPotential(TrigSeries.zero(), QuadraticForm(Fraction(1, 4), 0, Fraction(1, 4)), Role.H3)
        c = IntegralCoeffs.from_flow(build_n3(h, 1))
        assert all(l.is_zero() for l in l_coeffs(c))
        for r in conservation_residuals(potential_triple(c)):
            assert r.is_zero()

    def test_cubic_x_only(self):
        h = AssembledPotential(cc(1, 0), QuadraticForm(2, 0, 1), Role.H3)
        c = IntegralCoeffs.from_flow(build_n3(h, Fraction(3, 2)))
        assert all(l.is_zero() for l in l_coeffs(c))
        for triple in (lemma1_pqr(c)[0], potential_triple(c)):
            assert all(r.is_zero() for r in conservation_residuals(triple))

    def test_quartic_liouville(self):
        f = AssembledPotential(cc(1, 0) + cc(0, 1), QuadraticForm.for_epsilon(Fraction(1, 20)))
        c = IntegralCoeffs.from_flow(build_n4(f, 2, C=3))
        assert all(l.is_zero() for l in l_coeffs(c))
        for triple in (lemma1_pqr(c)[0], potential_triple(c)):
            assert all(r.is_zero() for r in conservation_residuals(triple))
        report = poisson_residual(c, 32)
        assert report.exact and report.aggregate == 0.0
        assert report.laws == {"law1": 0.0, "law2": 0.0}

    def test_off_shell_report(self):
        f = AssembledPotential(cc(1, 0), QuadraticForm(1, Fraction(1, 2), 1))
        c = IntegralCoeffs.from_flow(build_n4(f, 1, require_closed=False))
        report = poisson_residual(c, 32)
        assert not report.exact and report.aggregate > 0
        assert report.to_doc()["aggregate"] == report.aggregate
