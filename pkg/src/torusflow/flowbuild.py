"""Reconstruct the conformal factor and the polynomial integral from a potential.

The potential is ``lam + a11 x^2 + 2 a12 x y + a22 y^2`` with ``lam``
periodic. Only its second and higher derivatives enter, so every quantity
here is built from trigonometric polynomials; the integral coefficients are
exact rational functions of the Laplacian ``D`` of the potential (see
:class:`~torusflow.fields.QuotientField`).

c1 is fixed to zero throughout.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .fields import QuotientField, sample
from .recursion import SeriesSolution, epsilon_residual
from .trigser import (
    COS,
    SIN,
    TrigSeries,
    as_rational,
    default_grid,
    eval_grid,
    exp_mode_coeff,
    mul,
    series_from_doc,
    series_to_doc,
)

log = logging.getLogger(__name__)


class NonPositiveDensity(ValueError):
    """The Laplacian of the potential is not positive on the grid."""


class NonClosedForm(ArithmeticError):
    """V dx + W dy is not closed; the periodic part does not solve the equation."""


class PeriodObstruction(ArithmeticError):
    """The closed form V dx + W dy has a nonzero period."""


@dataclass(frozen=True)
class QuadraticForm:
    a11: Fraction
    a12: Fraction
    a22: Fraction

    def __post_init__(self):
        for name in ("a11", "a12", "a22"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))

    @classmethod
    def for_epsilon(cls, eps) -> "QuadraticForm":
        """a11 = a22 = 1/(4 eps), a12 = 0."""
        eps = as_rational(eps)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        return cls(1 / (4 * eps), Fraction(0), 1 / (4 * eps))

    @property
    def trace(self) -> Fraction:
        return self.a11 + self.a22

    def to_doc(self) -> dict:
        return {"a11": str(self.a11), "a12": str(self.a12), "a22": str(self.a22)}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "QuadraticForm":
        return cls(doc.get("a11", 0), doc.get("a12", 0), doc.get("a22", 0))


class Role(enum.Enum):
    H3 = "H3"
    F4 = "F4"


@dataclass(frozen=True)
class AssembledPotential:
    periodic_part: TrigSeries
    quad: QuadraticForm
    role: Role = Role.F4

    def d(self, nx: int, ny: int) -> TrigSeries:
        """Derivative of the full potential (order >= 2 required for periodicity)."""
        if nx + ny < 2:
            raise ValueError("first derivatives of the potential are not periodic")
        out = self.periodic_part.d(nx, ny)
        if nx + ny == 2:
            const = {(2, 0): 2 * self.quad.a11, (1, 1): 2 * self.quad.a12, (0, 2): 2 * self.quad.a22}
            out = out + const[(nx, ny)]
        return out

    @property
    def laplacian(self) -> TrigSeries:
        return self.d(2, 0) + self.d(0, 2)

    def to_doc(self) -> dict:
        return {
            "lambda": series_to_doc(self.periodic_part),
            "quad": self.quad.to_doc(),
            "role": self.role.value,
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "AssembledPotential":
        return cls(
            series_from_doc(doc["lambda"]),
            QuadraticForm.from_doc(doc.get("quad", {})),
            Role(doc.get("role", "F4")),
        )


@dataclass
class FlowData:
    """Conformal factor and integral coefficients a_0..a_n (c1 = 0)."""

    n: int
    c2: Fraction
    Lambda: TrigSeries
    a: list
    potential: AssembledPotential
    C: Fraction = Fraction(0)
    epsilon: Fraction | None = None
    c1: Fraction = Fraction(0)
    V: TrigSeries | None = None
    W: TrigSeries | None = None
    Phi: TrigSeries | None = None
    audit: dict = field(default_factory=dict)

    @property
    def linear_part_estimate(self) -> tuple[float, float]:
        return (float(self.audit.get("V00", 0)), float(self.audit.get("W00", 0)))

    def to_doc(self) -> dict:
        doc = {
            "n": self.n,
            "c2": str(self.c2),
            "epsilon": None if self.epsilon is None else str(self.epsilon),
            "C": str(self.C),
            "potential": self.potential.to_doc(),
            "Lambda": series_to_doc(self.Lambda),
            "a": [_field_doc(f) for f in self.a],
            "audit": self.audit,
        }
        for name in ("V", "W", "Phi"):
            val = getattr(self, name)
            if val is not None:
                doc[name] = series_to_doc(val)
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping) -> "FlowData":
        pot = AssembledPotential.from_doc(doc["potential"])
        base = pot.laplacian
        return cls(
            n=int(doc["n"]),
            c2=as_rational(doc["c2"]),
            Lambda=series_from_doc(doc["Lambda"]),
            a=[_field_from_doc(f, base) for f in doc["a"]],
            potential=pot,
            C=as_rational(doc.get("C", "0")),
            epsilon=None if doc.get("epsilon") is None else as_rational(doc["epsilon"]),
            V=series_from_doc(doc["V"]) if "V" in doc else None,
            W=series_from_doc(doc["W"]) if "W" in doc else None,
            Phi=series_from_doc(doc["Phi"]) if "Phi" in doc else None,
            audit=dict(doc.get("audit", {})),
        )


def _field_doc(f) -> dict:
    if isinstance(f, QuotientField):
        return {"kind": "quotient", "num": series_to_doc(f.num), "power": f.power}
    return {"kind": "series", "series": series_to_doc(f)}


def _field_from_doc(doc: Mapping, base: TrigSeries):
    if doc["kind"] == "quotient":
        return QuotientField(series_from_doc(doc["num"]), base, int(doc["power"]))
    if doc["kind"] == "series":
        return series_from_doc(doc["series"])
    raise ValueError(f"unknown field kind {doc['kind']!r}")


# ---------------------------------------------------------------------------
# residual expressions


def eq4_residual(h: AssembledPotential) -> TrigSeries:
    """2 h_xx h_xxy + h_yy (h_xxy - h_yyy) + h_xy (h_xxx + h_xyy), exactly."""
    hxx, hxy, hyy = h.d(2, 0), h.d(1, 1), h.d(0, 2)
    hxxy, hyyy, hxxx, hxyy = h.d(2, 1), h.d(0, 3), h.d(3, 0), h.d(1, 2)
    return mul(hxx, hxxy) * 2 + mul(hyy, hxxy - hyyy) + mul(hxy, hxxx + hxyy)


def e4_residual(lam: TrigSeries, quad: QuadraticForm) -> TrigSeries:
    """Left side of the quartic-integral equation for the periodic part ``lam``."""
    nonlinear = (
        mul(lam.d(1, 1), lam.d(0, 4) - lam.d(4, 0))
        + (mul(lam.d(0, 3), lam.d(1, 2)) - mul(lam.d(2, 1), lam.d(3, 0))) * 3
        + (mul(lam.d(0, 2), lam.d(1, 3)) - mul(lam.d(2, 0), lam.d(3, 1))) * 2
    )
    linear = (
        lam.d(1, 3) * (4 * quad.a22)
        - lam.d(3, 1) * (4 * quad.a11)
        + (lam.d(0, 4) - lam.d(4, 0)) * (2 * quad.a12)
    )
    return nonlinear + linear


# ---------------------------------------------------------------------------
# builders


def _check_positive(D: TrigSeries, N: int, what: str) -> float:
    # exact sufficient bound first, grid minimum as the reported margin
    grid_min = float(eval_grid(D, N).min())
    const = D.coeff(COS, COS, 0, 0)
    tail = sum(abs(c) for k, c in D.items() if k != (COS, COS, 0, 0))
    if const - tail > 0:
        return grid_min
    if grid_min <= 0:
        raise NonPositiveDensity(f"{what} has minimum {grid_min:.6g} <= 0 on the {N}x{N} grid")
    return grid_min


def build_n3(
    h: AssembledPotential, c2, N: int | None = None, check_positive: bool = True
) -> FlowData:
    """Cubic integral: a0 = 3 c2 h_xy / (2 Dh), a1 = -3 c2 h_yy / (2 Dh), Lambda = 2 Dh / (3 c2).

    ``check_positive=False`` skips the metric positivity test; the exact
    coefficient identities still hold wherever Dh does not vanish.
    """
    c2 = as_rational(c2)
    if c2 <= 0:
        raise ValueError("c2 must be positive")
    D = h.laplacian
    if D.is_zero():
        raise NonPositiveDensity("Laplacian of h vanishes identically")
    N = N or default_grid(D.degree)
    margin = _check_positive(D, N, "Laplacian of h") if check_positive else None
    k = 3 * c2 / 2
    a0 = QuotientField(h.d(1, 1) * k, D, 1)
    a1 = QuotientField(h.d(0, 2) * -k, D, 1)
    a2 = a0  # c1 + a0
    a3 = a1 + c2
    Lambda = D * (1 / k)
    E3 = eq4_residual(h)
    audit = {"positivity_margin": margin, "eq4_residual_terms": len(E3), "on_shell": E3.is_zero()}
    return FlowData(n=3, c2=c2, Lambda=Lambda, a=[a0, a1, a2, a3], potential=h, audit=audit)


def integrate_form(V: TrigSeries, W: TrigSeries) -> TrigSeries:
    """Periodic mean-zero Phi with Phi_x = V on modes m != 0 and Phi_y = W on m = 0."""
    out = {}
    for (px, py, m, n), c in V.items():
        if m == 0:
            continue
        # int cos(mx) = sin(mx)/m, int sin(mx) = -cos(mx)/m
        if px == COS:
            out[(SIN, py, m, n)] = c / m
        else:
            out[(COS, py, m, n)] = -c / m
    for (px, py, m, n), c in W.items():
        if m != 0 or n == 0:
            continue
        if py == COS:
            out[(px, SIN, m, n)] = out.get((px, SIN, m, n), 0) + c / n
        else:
            out[(px, COS, m, n)] = out.get((px, COS, m, n), 0) - c / n
    return TrigSeries(out)


def closure_defect(f: AssembledPotential, c2) -> TrigSeries:
    """V_y - W_x for the form built from ``f``."""
    V, W = _one_form(f, as_rational(c2))
    return V.d(0, 1) - W.d(1, 0)


def _one_form(f: AssembledPotential, c2: Fraction) -> tuple[TrigSeries, TrigSeries]:
    D = f.laplacian
    fxy = f.d(1, 1)
    V = mul(fxy, D.d(0, 1)) * -c2
    W = (mul(f.d(0, 2), f.d(0, 2)) - mul(f.d(2, 0), f.d(2, 0))).d(0, 1) * c2 - mul(
        fxy, D.d(1, 0)
    ) * c2
    return V, W


def build_n4(
    f: AssembledPotential,
    c2,
    C=0,
    N: int | None = None,
    require_closed: bool = True,
) -> FlowData:
    """Quartic integral from the potential ``f``.

    Lambda = Df / (2 c2), a1 = 2 c2 f_xy / Df, a0 = (Phi + C) / Df^2 with
    d Phi = V dx + W dy, a2 = -2 c2 f_yy / Df + 2 a0, a3 = a1,
    a4 = c2 + a2 - a0.

    ``require_closed=False`` accepts a non-closed form (a truncated series
    solution) and records the defect in the audit instead of raising.
    """
    c2 = as_rational(c2)
    C = as_rational(C)
    if c2 <= 0:
        raise ValueError("c2 must be positive")
    D = f.laplacian
    N = N or default_grid(D.degree)
    margin = _check_positive(D, N, "Laplacian of f")
    V, W = _one_form(f, c2)
    V00 = exp_mode_coeff(V, 0, 0)[0]
    W00 = exp_mode_coeff(W, 0, 0)[0]
    if V00 or W00:
        raise PeriodObstruction(f"periods of V dx + W dy: ({V00}, {W00})")
    defect = V.d(0, 1) - W.d(1, 0)
    if defect and require_closed:
        raise NonClosedForm(f"V_y - W_x has {len(defect)} nonzero terms")
    Phi = integrate_form(V, W)
    a0 = QuotientField(Phi + C, D, 2)
    a1 = QuotientField(f.d(1, 1) * (2 * c2), D, 1)
    a2 = QuotientField(f.d(0, 2) * (-2 * c2), D, 1) + a0 * 2
    a3 = a1
    a4 = a2 - a0 + c2
    Lambda = D * (1 / (2 * c2))
    defect_max = float(np.abs(eval_grid(defect, N)).max()) if defect else 0.0
    audit = {
        "V00": str(V00),
        "W00": str(W00),
        "closed": defect.is_zero(),
        "closedness_defect_max": defect_max,
        "positivity_margin": margin,
    }
    return FlowData(
        n=4, c2=c2, Lambda=Lambda, a=[a0, a1, a2, a3, a4], potential=f, C=C, V=V, W=W, Phi=Phi,
        audit=audit,
    )


def build_from_solution(
    solution: SeriesSolution, eps, c2=1, C=0, N: int | None = None
) -> FlowData:
    """n=4 build from a truncated series at a fixed rational epsilon.

    The form is required to close exactly only when the series is an exact
    solution (all epsilon-residual coefficients vanish); otherwise the
    order-by-order residual is checked exactly and the closure defect is
    recorded.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    coeffs = epsilon_residual(solution.layers)
    K = solution.order
    if any(not e.is_zero() for e in coeffs[: K + 1]):
        raise NonClosedForm("series does not solve the recursion through its own order")
    exact = all(e.is_zero() for e in coeffs)
    lam = solution.truncated(eps)
    f = AssembledPotential(lam, QuadraticForm.for_epsilon(eps), Role.F4)
    flow = build_n4(f, c2, C=C, N=N, require_closed=exact)
    flow.epsilon = eps
    flow.audit["series_order"] = K
    flow.audit["exact_solution"] = exact
    return flow


def flow_grids(flow: FlowData, N: int) -> dict[str, np.ndarray]:
    """Grid samples of Lambda and every a_i, for CSV export."""
    out = {"Lambda": eval_grid(flow.Lambda, N)}
    for i, f in enumerate(flow.a):
        out[f"a{i}"] = sample(f, N)
    return out
