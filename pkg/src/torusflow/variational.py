"""Variational structure of the quartic-integral equation.

The density

    1/2 [ 4 lam_xy (a22 lam_yy - a11 lam_xx) + 2 a12 (lam_yy^2 - lam_xx^2)
          + lam_xy (lam_yy^2 - lam_xx^2) ]

is cubic in lam. Its first variation on the torus is the pairing with the
divergence-form residual computed by :func:`el_residual`. Everything is
exact: actions are reported as torus averages (the integral over one
period cell is ``(2 pi)^2`` times the value returned).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .flowbuild import QuadraticForm, e4_residual
from .trigser import TrigSeries, as_rational, mean, mul


class MismatchWithE4(AssertionError):
    """Divergence form and expanded form of the equation disagree."""


@dataclass(frozen=True)
class LagrangianSpec:
    quad: QuadraticForm
    simple_eps: Fraction | None = None

    def __post_init__(self):
        if self.simple_eps is not None:
            eps = as_rational(self.simple_eps)
            if eps <= 0:
                raise ValueError("epsilon must be positive")
            if self.quad != QuadraticForm.for_epsilon(eps):
                raise ValueError("simple_eps requires a11 = a22 = 1/(4 eps), a12 = 0")
            object.__setattr__(self, "simple_eps", eps)

    @classmethod
    def simple(cls, eps) -> "LagrangianSpec":
        return cls(QuadraticForm.for_epsilon(eps), as_rational(eps))


def density(lam: TrigSeries, spec: LagrangianSpec) -> TrigSeries:
    q = spec.quad
    lxx, lxy, lyy = lam.d(2, 0), lam.d(1, 1), lam.d(0, 2)
    sq_diff = mul(lyy, lyy) - mul(lxx, lxx)
    return (
        mul(lxy, lyy * (4 * q.a22) - lxx * (4 * q.a11))
        + sq_diff * (2 * q.a12)
        + mul(lxy, sq_diff)
    ) * Fraction(1, 2)


def reduced_density(lam: TrigSeries, eps) -> TrigSeries:
    """1/2 lam_xy (lam_yy - lam_xx) (1/eps + Laplacian lam)."""
    eps = as_rational(eps)
    lxx, lxy, lyy = lam.d(2, 0), lam.d(1, 1), lam.d(0, 2)
    return mul(mul(lxy, lyy - lxx), lxx + lyy + 1 / eps) * Fraction(1, 2)


def action(lam: TrigSeries, spec: LagrangianSpec) -> Fraction:
    """Torus average of the density; multiply by (2 pi)^2 for the integral."""
    value = mean(density(lam, spec))
    if spec.simple_eps is not None:
        reduced = mean(reduced_density(lam, spec.simple_eps))
        if reduced != value:
            raise AssertionError(f"reduced functional {reduced} != full functional {value}")
    return value


def el_residual(lam: TrigSeries, spec: LagrangianSpec) -> TrigSeries:
    """Divergence-form Euler-Lagrange expression, checked against the expanded form."""
    q = spec.quad
    lxx, lxy, lyy = lam.d(2, 0), lam.d(1, 1), lam.d(0, 2)
    out = (
        lam.d(1, 3) * (4 * q.a22)
        - lam.d(3, 1) * (4 * q.a11)
        + (lam.d(0, 4) - lam.d(4, 0)) * (2 * q.a12)
        + mul(lxy, lyy).d(0, 2)
        - mul(lxy, lxx).d(2, 0)
        + (mul(lyy, lyy) - mul(lxx, lxx)).d(1, 1) * Fraction(1, 2)
    )
    expanded = e4_residual(lam, q)
    if out != expanded:
        raise MismatchWithE4("divergence form differs from expanded equation")
    return out


def _cubic_through(ts: list[int], values: list[Fraction]) -> list[Fraction]:
    """Exact coefficients c0..c3 of the cubic through four points."""
    rows = [[Fraction(t) ** p for p in range(4)] + [v] for t, v in zip(ts, values)]
    for col in range(4):
        piv = next(r for r in range(col, 4) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [x * inv for x in rows[col]]
        for r in range(4):
            if r != col and rows[r][col]:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return [rows[i][4] for i in range(4)]


def fourth_difference(lam: TrigSeries, phi: TrigSeries, spec: LagrangianSpec) -> Fraction:
    """Fourth finite difference of t -> action(lam + t phi) on t = -2..2 (zero for a cubic)."""
    vals = [action(lam + phi * t, spec) for t in range(-2, 3)]
    return vals[0] - 4 * vals[1] + 6 * vals[2] - 4 * vals[3] + vals[4]


@dataclass(frozen=True)
class Certificate:
    action: Fraction
    linear_coeff: Fraction
    pairing: Fraction
    factor: Fraction | None

    @property
    def equal(self) -> bool:
        return self.linear_coeff == self.pairing

    def to_doc(self) -> dict:
        return {
            "action": str(self.action),
            "linear_coeff": str(self.linear_coeff),
            "pairing": str(self.pairing),
            "equal": self.equal,
            "factor": None if self.factor is None else str(self.factor),
        }


def gateaux_certificate(lam: TrigSeries, phi: TrigSeries, spec: LagrangianSpec) -> Certificate:
    """Linear coefficient of t -> action(lam + t phi) against mean(el_residual(lam) * phi).

    Both are torus averages; the common (2 pi)^2 factor is dropped.
    """
    ts = [0, 1, -1, 2]
    values = [action(lam + phi * t, spec) for t in ts]
    coeffs = _cubic_through(ts, values)
    pairing = mean(mul(el_residual(lam, spec), phi))
    factor = coeffs[1] / pairing if pairing else None
    return Certificate(values[0], coeffs[1], pairing, factor)
