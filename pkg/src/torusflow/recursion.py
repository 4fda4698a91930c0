"""Formal epsilon-series solutions of the quartic-integral equation.

With a12 = 0 and a11 = a22 = 1/(4 eps) the fourth-order equation reads

    lam_xxxy - lam_xyyy = eps * <lam, lam>,

and substituting lam = sum_k eps^k lam_k gives the recursion

    M lam_k = sum_{s+q=k-1} <lam_s, lam_q>,    M = d_x^3 d_y - d_x d_y^3.

Sign convention: the engine always uses the form above (tag ``"E5"``). The
variant with ``lam_xyyy - lam_xxxy`` on the left is the same series with
eps replaced by -eps, i.e. ``layers[k] * (-1)**k``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .trigser import (
    COS,
    SIN,
    TrigSeries,
    add,
    as_rational,
    cc,
    exp_mode_coeff,
    is_d4_symmetric,
    mul,
    resonant_part,
    series_from_doc,
    series_to_doc,
)

log = logging.getLogger(__name__)

CONVENTION = "E5"


class ResonanceObstruction(ArithmeticError):
    """The right-hand side has Fourier mass on the kernel of M."""

    def __init__(self, modes, order: int | None = None):
        self.modes = list(modes)
        self.order = order
        shown = ", ".join(f"{m}: {re}{'+' if im >= 0 else ''}{im}i" for m, (re, im) in self.modes[:6])
        where = f" at order {order}" if order is not None else ""
        super().__init__(f"resonant right-hand side{where}: {shown}")

    def to_doc(self) -> dict:
        return {
            "error": "ResonanceObstruction",
            "order": self.order,
            "modes": [
                {"m": m, "n": n, "re": str(re), "im": str(im)} for (m, n), (re, im) in self.modes
            ],
        }


class NotSinSin(ValueError):
    """Right-hand side is outside the sin(mx)sin(ny) parity class."""


# ---------------------------------------------------------------------------
# operators


def bracket(p: TrigSeries, q: TrigSeries) -> TrigSeries:
    """<p, q> = p_xy (q_yyyy - q_xxxx) + 3 (p_yyy q_xyy - p_xxx q_xxy)
    + 2 (p_yy q_xyyy - p_xx q_xxxy)."""
    terms = (
        mul(p.d(1, 1), q.d(0, 4) - q.d(4, 0)),
        mul(p.d(0, 3), q.d(1, 2)) * 3,
        mul(p.d(3, 0), q.d(2, 1)) * -3,
        mul(p.d(0, 2), q.d(1, 3)) * 2,
        mul(p.d(2, 0), q.d(3, 1)) * -2,
    )
    out = TrigSeries.zero()
    for t in terms:
        out = add(out, t)
    return out


def bracket_divergence(p: TrigSeries, q: TrigSeries) -> TrigSeries:
    """Divergence form A + B + C of the bracket.

    Agrees with :func:`bracket` only after symmetrizing over (p, q).
    """
    pxy = p.d(1, 1)
    a = mul(pxy, q.d(0, 2)).d(0, 2)
    b = -mul(pxy, q.d(2, 0)).d(2, 0)
    c = (mul(p.d(0, 2), q.d(0, 2)) - mul(p.d(2, 0), q.d(2, 0))).d(1, 1) * Fraction(1, 2)
    return a + b + c


def apply_M(a: TrigSeries) -> TrigSeries:
    """d_x^3 d_y a - d_x d_y^3 a."""
    return a.d(3, 1) - a.d(1, 3)


def symbol(m: int, n: int) -> int:
    """Multiplier of M on cos(mx)cos(ny) -> sin(mx)sin(ny)."""
    return m * n * (n * n - m * m)


def solve_M(rhs: TrigSeries, free: TrigSeries | None = None) -> TrigSeries:
    """Invert M on a sin-sin right-hand side with no resonant modes.

    Returns the cos-cos solution supported off the resonant lines, plus
    ``free`` (which must lie in the kernel of M).
    """
    if not rhs.is_parity(SIN, SIN):
        bad = sorted(k for k in rhs.terms if (k[0], k[1]) != (SIN, SIN))
        raise NotSinSin(f"right-hand side has non sin-sin terms {bad[:6]}")
    resonant = resonant_part(rhs)
    if resonant:
        raise ResonanceObstruction(resonant)
    out = {}
    for (_, _, m, n), s in rhs.items():
        out[(COS, COS, m, n)] = s / symbol(m, n)
    lam = TrigSeries(out)
    if free is not None and not free.is_zero():
        if not apply_M(free).is_zero():
            raise ValueError("free term is not in the kernel of M")
        lam = lam + free
    return lam


# ---------------------------------------------------------------------------
# seeds


def _rational_map(raw: Mapping) -> dict[int, Fraction]:
    out = {}
    for k, v in raw.items():
        k = int(k)
        if k < 0:
            raise ValueError(f"frequency index must be >= 0, got {k}")
        c = as_rational(v)
        if c:
            out[k] = c
    return out


@dataclass(frozen=True)
class SeedSpec:
    """alpha_n (cos nx + cos ny) + beta_n (cos n(x-y) + cos n(x+y))."""

    alpha: dict[int, Fraction] = field(default_factory=dict)
    beta: dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        alpha = _rational_map(self.alpha)
        beta = _rational_map(self.beta)
        for name, mp in (("alpha", alpha), ("beta", beta)):
            if 0 in mp:
                log.warning("dropping constant mode %s_0 = %s from seed (pure kernel)", name, mp[0])
                del mp[0]
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def series(self) -> TrigSeries:
        out = TrigSeries.zero()
        for n, a in self.alpha.items():
            out = out + cc(n, 0, a) + cc(0, n, a)
        for n, b in self.beta.items():
            # cos n(x-y) + cos n(x+y) = 2 cos nx cos ny
            out = out + cc(n, n, 2 * b)
        return out

    def to_doc(self) -> dict:
        return {
            "alpha": {str(k): str(v) for k, v in sorted(self.alpha.items())},
            "beta": {str(k): str(v) for k, v in sorted(self.beta.items())},
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "SeedSpec":
        if not isinstance(doc, Mapping):
            raise ValueError("seed document must be an object")
        unknown = set(doc) - {"alpha", "beta"}
        if unknown:
            raise ValueError(f"unknown seed fields {sorted(unknown)}")
        for key in ("alpha", "beta"):
            if not isinstance(doc.get(key, {}), Mapping):
                raise ValueError(f"seed field {key!r} must be an object")
            for v in doc.get(key, {}).values():
                if not isinstance(v, (str, int)) or isinstance(v, bool):
                    raise ValueError(f"seed coefficients must be rational strings, got {v!r}")
        return cls(dict(doc.get("alpha", {})), dict(doc.get("beta", {})))


@dataclass(frozen=True)
class FreeTermSpec:
    """Kernel additions per order k >= 1, each of seed shape."""

    orders: dict[int, SeedSpec] = field(default_factory=dict)

    def series(self, k: int) -> TrigSeries | None:
        spec = self.orders.get(k)
        return spec.series() if spec is not None else None

    def to_doc(self) -> dict:
        return {str(k): v.to_doc() for k, v in sorted(self.orders.items())}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "FreeTermSpec":
        orders = {}
        for k, v in doc.items():
            k = int(k)
            if k < 1:
                raise ValueError("free terms start at order 1")
            orders[k] = SeedSpec.from_doc(v)
        return cls(orders)


# ---------------------------------------------------------------------------
# the iteration


@dataclass
class SeriesSolution:
    order: int
    layers: list[TrigSeries]
    rhs: list[TrigSeries]
    resonance_audit: list[dict]
    sign_convention: str = CONVENTION

    def truncated(self, eps) -> TrigSeries:
        """sum_k eps^k lam_k with exact rational eps."""
        eps = as_rational(eps)
        out = TrigSeries.zero()
        for k, lam in enumerate(self.layers):
            out = out + lam * eps**k
        return out

    def with_flipped_epsilon(self) -> list[TrigSeries]:
        return [lam * (-1) ** k for k, lam in enumerate(self.layers)]

    def to_doc(self) -> dict:
        return {
            "order": self.order,
            "convention": self.sign_convention,
            "layers": [series_to_doc(s) for s in self.layers],
            "rhs": [series_to_doc(s) for s in self.rhs],
            "audit": self.resonance_audit,
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "SeriesSolution":
        if doc.get("convention") != CONVENTION:
            raise ValueError(f"unsupported convention {doc.get('convention')!r}")
        layers = [series_from_doc(s) for s in doc["layers"]]
        order = int(doc["order"])
        if len(layers) != order + 1:
            raise ValueError("layer count does not match order")
        return cls(
            order=order,
            layers=layers,
            rhs=[series_from_doc(s) for s in doc.get("rhs", [])],
            resonance_audit=list(doc.get("audit", [])),
        )


def order_rhs(layers: list[TrigSeries], k: int) -> TrigSeries:
    """sum_{s+q=k-1} <lam_s, lam_q> over the available layers."""
    out = TrigSeries.zero()
    for s in range(k):
        q = k - 1 - s
        if s < len(layers) and q < len(layers):
            out = out + bracket(layers[s], layers[q])
    return out


def _resonant_lines_audit(rhs: TrigSeries) -> list:
    """Re-check every resonant-line mode up to the rhs degree through exp_mode_coeff."""
    deg = rhs.degree
    found = []
    for t in range(-deg, deg + 1):
        for mode in {(t, 0), (0, t), (t, t), (t, -t)}:
            if mode == (0, 0):
                continue
            re, im = exp_mode_coeff(rhs, *mode)
            if re or im:
                found.append((mode, (re, im)))
    return sorted(found)


def run(
    seed: SeedSpec | TrigSeries,
    K: int,
    free: FreeTermSpec | None = None,
    crosscheck: bool = True,
) -> SeriesSolution:
    """Build lam_0..lam_K, auditing the resonant lines at every order.

    A raw TrigSeries seed skips the symmetry requirement; that is how the
    obstruction is exhibited for non-symmetric seeds.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    if isinstance(seed, SeedSpec):
        lam0 = seed.series()
        if not is_d4_symmetric(lam0):
            raise AssertionError("seed series is not D4 symmetric")
    else:
        lam0 = seed
        if lam0.coeff(COS, COS, 0, 0):
            log.warning("dropping constant mode from seed (pure kernel)")
            lam0 = lam0 - lam0.coeff(COS, COS, 0, 0)
    free = free or FreeTermSpec()
    layers = [lam0]
    rhs_list: list[TrigSeries] = []
    audit: list[dict] = []
    for k in range(1, K + 1):
        rhs = order_rhs(layers, k)
        if crosscheck:
            div = TrigSeries.zero()
            for s in range(k):
                div = div + bracket_divergence(layers[s], layers[k - 1 - s])
            if div != rhs:
                raise AssertionError(f"divergence form disagrees with bracket form at order {k}")
        found = _resonant_lines_audit(rhs) if rhs.is_parity(SIN, SIN) else resonant_part(rhs)
        entry = {
            "order": k,
            "rhs_terms": len(rhs),
            "rhs_degree": rhs.degree,
            "resonant": [
                {"m": m, "n": n, "re": str(re), "im": str(im)} for (m, n), (re, im) in found
            ],
            "divergence_crosscheck": crosscheck,
        }
        audit.append(entry)
        extra = free.series(k)
        if extra is not None and not is_d4_symmetric(extra):
            raise ValueError(f"free term at order {k} is not D4 symmetric")
        try:
            lam_k = solve_M(rhs, extra)
        except ResonanceObstruction as exc:
            raise ResonanceObstruction(exc.modes, order=k) from None
        log.debug("order %d: %d rhs terms, %d solution terms", k, len(rhs), len(lam_k))
        layers.append(lam_k)
        rhs_list.append(rhs)
    return SeriesSolution(order=K, layers=layers, rhs=rhs_list, resonance_audit=audit)


def epsilon_residual(layers: list[TrigSeries]) -> list[TrigSeries]:
    """Coefficients E_j of  M(lam) - eps <lam, lam>  for lam = sum eps^k lam_k.

    Returned for j = 0 .. 2K+1; a valid K-th order solution has
    E_0 = ... = E_K = 0 exactly.
    """
    K = len(layers) - 1
    coeffs = []
    for j in range(2 * K + 2):
        e = apply_M(layers[j]) if j <= K else TrigSeries.zero()
        e = e - order_rhs(layers, j)
        coeffs.append(e)
    return coeffs
