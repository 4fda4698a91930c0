"""Coefficients of 2 Lambda^2 {H, F} and the two conservation laws they imply.

For H = (p1^2 + p2^2) / (2 Lambda) and F = sum_i a_i p1^(n-i) p2^i, the
coefficient of p1^(n+1-i) p2^i in 2 Lambda^2 {H, F} is

    2 Lambda a_i,x + (n-i) Lambda_x a_i + (n-i+2) Lambda_x a_{i-2}
    + 2 Lambda a_{i-1},y + (i-1) Lambda_y a_{i-1} + (i+1) Lambda_y a_{i+1},

which is called l_{n+1-i}. Momenta are never represented.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fields import QuotientField, common_base, is_zero_field, sample
from .trigser import TrigSeries, as_rational, default_grid


class ConservationTag(enum.Enum):
    LEMMA1 = "LEMMA1"
    SEC3 = "SEC3"


def kolokoltsov_top(n: int, lower: Sequence, c1=0, c2=0) -> tuple:
    """(a_{n-1}, a_n) from a_0..a_{n-2}:
    a_{n-1} = c1 + a_{n-3} - a_{n-5} + ...,  a_n = c2 + a_{n-2} - a_{n-4} + ..."""
    if len(lower) != n - 1:
        raise ValueError(f"need a_0..a_{n - 2} ({n - 1} fields), got {len(lower)}")
    top1 = as_rational(c1)
    top2 = as_rational(c2)
    for j in range(1, n):
        i = n - 1 - 2 * j
        if i < 0:
            break
        top1 = lower[i] * (-1) ** (j + 1) + top1
    for j in range(1, n + 1):
        i = n - 2 * j
        if i < 0:
            break
        top2 = lower[i] * (-1) ** (j + 1) + top2
    return top1, top2


def kolokoltsov_complete(n: int, lower: Sequence, c1=0, c2=0) -> list:
    return list(lower) + list(kolokoltsov_top(n, lower, c1, c2))


def _same(u, v) -> bool:
    if isinstance(u, QuotientField):
        return u.equals(v)
    if isinstance(v, QuotientField):
        return v.equals(u)
    return is_zero_field(u - v)


@dataclass
class IntegralCoeffs:
    n: int
    a: list
    Lambda: object
    c1: Fraction = Fraction(0)
    c2: Fraction = Fraction(0)
    check_kolokoltsov: bool = True

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("degree n must be >= 2")
        if len(self.a) != self.n + 1:
            raise ValueError(f"need {self.n + 1} coefficients a_0..a_n, got {len(self.a)}")
        self.c1 = as_rational(self.c1)
        self.c2 = as_rational(self.c2)
        common_base([*self.a, self.Lambda])
        if self.check_kolokoltsov:
            top1, top2 = kolokoltsov_top(self.n, self.a[: self.n - 1], self.c1, self.c2)
            if not (_same(self.a[self.n - 1], top1) and _same(self.a[self.n], top2)):
                raise ValueError("coefficients violate the Kolokoltsov relations")

    @classmethod
    def from_flow(cls, flow) -> "IntegralCoeffs":
        return cls(flow.n, list(flow.a), flow.Lambda, flow.c1, flow.c2)

    def coeff(self, i: int):
        return self.a[i] if 0 <= i <= self.n else 0


def _lift_all(fields):
    base = common_base(fields)
    if base is None:
        return list(fields)
    return [QuotientField.lift(f, base) for f in fields]


def _dx(f):
    return f.diff("x") if not isinstance(f, (int, Fraction)) else 0


def _dy(f):
    return f.diff("y") if not isinstance(f, (int, Fraction)) else 0


def l_coeffs(c: IntegralCoeffs) -> list:
    """[l_{n+1}, l_n, ..., l_0] as exact fields."""
    n = c.n
    lifted = _lift_all([*c.a, c.Lambda])
    a, L = lifted[:-1], lifted[-1]
    Lx, Ly = _dx(L), _dy(L)
    ax = [_dx(f) for f in a]
    ay = [_dy(f) for f in a]
    zero = L * 0

    def A(i):
        return a[i] if 0 <= i <= n else None

    out = []
    for i in range(n + 2):
        terms = []
        if A(i) is not None:
            terms += [L * ax[i] * 2, Lx * A(i) * (n - i)]
        if A(i - 2) is not None:
            terms.append(Lx * A(i - 2) * (n - i + 2))
        if A(i - 1) is not None:
            terms += [L * ay[i - 1] * 2, Ly * A(i - 1) * (i - 1)]
        if A(i + 1) is not None:
            terms.append(Ly * A(i + 1) * (i + 1))
        total = zero
        for t in terms:
            total = total + t
        out.append(total)
    return out


@dataclass
class ResidualReport:
    n: int
    grid: int
    l_max: list[float]
    laws: dict = field(default_factory=dict)
    exact: bool = False
    provenance: dict = field(default_factory=dict)

    @property
    def aggregate(self) -> float:
        return max(self.l_max, default=0.0)

    def to_doc(self) -> dict:
        return {
            "n": self.n,
            "grid": self.grid,
            "l_max": self.l_max,
            "aggregate": self.aggregate,
            "laws": self.laws,
            "exact": self.exact,
            "provenance": self.provenance,
        }


def poisson_residual(c: IntegralCoeffs, N: int | None = None) -> ResidualReport:
    """Sup norms of l_{n+1}..l_0 over an N x N grid."""
    ls = l_coeffs(c)
    if N is None:
        N = default_grid(max(_degree(f) for f in ls))
    l_max = [float(np.abs(sample(f, N)).max()) for f in ls]
    laws = {}
    if c.n >= 3:
        r1, r2 = conservation_residuals(lemma1_pqr(c)[0])
        laws = {
            "law1": float(np.abs(sample(r1, N)).max()),
            "law2": float(np.abs(sample(r2, N)).max()),
        }
    return ResidualReport(
        n=c.n, grid=N, l_max=l_max, laws=laws, exact=all(is_zero_field(f) for f in ls)
    )


def _degree(f) -> int:
    if isinstance(f, QuotientField):
        return max(f.num.degree, f.base.degree)
    if isinstance(f, TrigSeries):
        return f.degree
    return 0


# ---------------------------------------------------------------------------
# conservation laws


@dataclass
class ConservationTriple:
    """P_x + Q_y = 0 and Q_x + R_y = 0."""

    P: object
    Q: object
    R: object
    tag: ConservationTag


@dataclass
class ConservationLaws:
    """Density/flux pairs (X, Y) with X_x + Y_y equal to half the l-combination."""

    law1: tuple
    law2: tuple


def _alt_sum(c: IntegralCoeffs, terms) -> object:
    """sum of weight * a_index * Lambda over (weight, index) pairs, plus constants."""
    out = 0
    for w, i in terms:
        out = c.a[i] * w + out
    return out


def lemma1_pqr(c: IntegralCoeffs) -> tuple[ConservationTriple, ConservationLaws]:
    """Both conservation laws (with c1, c2 terms) and the c1-free (P, Q, R) triple."""
    n = c.n
    if n < 3:
        raise ValueError("the two conservation laws need n >= 3")
    L = c.Lambda
    c1, c2 = c.c1, c.c2
    if n % 2 == 0:
        k = n // 2
        evens = [((-1) ** j * (n - 2 * j), 2 * j) for j in range(k)]
        odds = [((-1) ** j * (n - 2 * j), 2 * j - 1) for j in range(1, k)]
        odds_flip = [(-w, i) for w, i in odds]
        law1 = (
            _alt_sum(c, evens) * L,
            (_alt_sum(c, odds) + (-1) ** (k + 1) * (n - 1) * c1) * L,
        )
        law2 = (
            (_alt_sum(c, odds_flip) + (-1) ** (k + 1) * c1) * L,
            (_alt_sum(c, evens) + (-1) ** (k + 1) * n * c2) * L,
        )
        P = _alt_sum(c, evens) * L
        Q = _alt_sum(c, odds) * L
        R = (_alt_sum(c, [(-w, i) for w, i in evens]) + (-1) ** k * n * c2) * L
    else:
        k = (n - 1) // 2
        evens = [((-1) ** j * (n - 1 - 2 * j), 2 * j) for j in range(k)]
        odds = [((-1) ** j * (n - 1 - 2 * j), 2 * j + 1) for j in range(k)]
        law1 = (
            (_alt_sum(c, evens) + (-1) ** k * c1) * L,
            (_alt_sum(c, [(-w, i) for w, i in odds]) + (-1) ** k * n * c2) * L,
        )
        law2 = (
            _alt_sum(c, odds) * L,
            (_alt_sum(c, evens) + (-1) ** (k + 1) * (n - 1) * c1) * L,
        )
        P = _alt_sum(c, odds) * L
        Q = _alt_sum(c, evens) * L
        R = (_alt_sum(c, [(-w, i) for w, i in odds]) + (-1) ** k * n * c2) * L
    triple = ConservationTriple(P, Q, R, ConservationTag.LEMMA1)
    return triple, ConservationLaws(law1, law2)


def potential_triple(c: IntegralCoeffs) -> ConservationTriple:
    """The n=3 and n=4 normalizations used to introduce the potential."""
    a, L, c2 = c.a, c.Lambda, c.c2
    if c.n == 3:
        return ConservationTriple(
            a[1] * -1 * L, a[0] * -1 * L, (a[1] + Fraction(3, 2) * c2) * L, ConservationTag.SEC3
        )
    if c.n == 4:
        return ConservationTriple(
            (a[0] * 2 - a[2]) * L, a[1] * -1 * L, (a[2] - a[0] * 2 + 2 * c2) * L, ConservationTag.SEC3
        )
    raise ValueError("the potential normalization exists only for n = 3, 4")


def conservation_residuals(t: ConservationTriple) -> tuple:
    return _dx(t.P) + _dy(t.Q), _dx(t.Q) + _dy(t.R)


def combination_identity(c: IntegralCoeffs) -> tuple:
    """Left minus right of both l-combination identities; zero off-shell."""
    n = c.n
    ls = l_coeffs(c)

    def l(j):  # l_j
        return ls[n + 1 - j]

    _, laws = lemma1_pqr(c)
    if n % 2 == 0:
        k = n // 2
        comb1 = [((-1) ** j * (n - 2 * j), n + 1 - 2 * j) for j in range(k)]
        comb2 = [((-1) ** j * (n - 2 * j), n - 2 * j) for j in range(k)]
    else:
        k = (n - 1) // 2
        comb1 = [((-1) ** j * (n + 1 - 2 * j), n + 1 - 2 * j) for j in range(k + 1)]
        comb2 = [((-1) ** j * (n - 1 - 2 * j), n - 2 * j) for j in range(k)]
    out = []
    for comb, (X, Y) in ((comb1, laws.law1), (comb2, laws.law2)):
        lhs = 0
        for w, j in comb:
            lhs = l(j) * w + lhs
        out.append(lhs - (_dx(X) + _dy(Y)) * 2)
    return tuple(out)
