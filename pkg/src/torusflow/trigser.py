"""Exact trigonometric polynomials on the torus R^2 / (2 pi Z)^2.

A series is a finite sum of tensor-product basis terms

    c * phi_x(m x) * phi_y(n y),    phi in {cos, sin},  m, n >= 0,

with rational coefficients. All arithmetic is exact; floating point only
enters through :func:`eval_grid` and :meth:`TrigSeries.evaluate`.
"""

from __future__ import annotations

import enum
import math
import warnings
from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC
from typing import Iterable, Iterator, Mapping

import numpy as np

Rational = Fraction


class Parity(enum.IntEnum):
    COS = 0
    SIN = 1

    @property
    def label(self) -> str:
        return "cos" if self is Parity.COS else "sin"

    @classmethod
    def parse(cls, text: str) -> "Parity":
        try:
            return {"cos": cls.COS, "sin": cls.SIN}[text]
        except KeyError:
            raise ValueError(f"unknown parity {text!r}") from None


COS, SIN = Parity.COS, Parity.SIN

# key = (parity_x, parity_y, m, n)
Key = tuple[int, int, int, int]


class GridTooSmallWarning(UserWarning):
    pass


def as_rational(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: a float coefficient would silently break the
    exactness guarantees of every downstream check.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, _RationalABC)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def _check_key(key: Key) -> Key:
    px, py, m, n = key
    if px not in (0, 1) or py not in (0, 1):
        raise ValueError(f"bad parity in {key}")
    if not (isinstance(m, int) and isinstance(n, int)) or m < 0 or n < 0:
        raise ValueError(f"frequencies must be non-negative integers: {key}")
    if (px == SIN and m == 0) or (py == SIN and n == 0):
        raise ValueError(f"sin(0) term is not representable: {key}")
    return (int(px), int(py), m, n)


class TrigSeries:
    """Immutable exact trigonometric polynomial in canonical form."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Key, object] | Iterable[tuple[Key, object]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Key, Fraction] = {}
        for key, c in items:
            key = _check_key(tuple(key))
            acc[key] = acc.get(key, Fraction(0)) + as_rational(c)
        self._terms = {k: v for k, v in acc.items() if v != 0}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[Key, Fraction]) -> "TrigSeries":
        # trusted constructor: keys valid, values nonzero Fractions
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls) -> "TrigSeries":
        return cls._raw({})

    @classmethod
    def const(cls, c) -> "TrigSeries":
        return cls({(COS, COS, 0, 0): c})

    @classmethod
    def basis(cls, px, py, m: int, n: int, c=1) -> "TrigSeries":
        return cls({(int(px), int(py), m, n): c})

    # -- mapping-like access ----------------------------------------------
    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Key, Fraction]]:
        return iter(sorted(self._terms.items()))

    def coeff(self, px, py, m: int, n: int) -> Fraction:
        return self._terms.get((int(px), int(py), m, n), Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((max(k[2], k[3]) for k in self._terms), default=0)

    def parity_classes(self) -> set[tuple[int, int]]:
        return {(k[0], k[1]) for k in self._terms}

    def is_parity(self, px, py) -> bool:
        return all(k[0] == px and k[1] == py for k in self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, TrigSeries):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == TrigSeries.const(other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return "TrigSeries(0)"
        return f"TrigSeries({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (px, py, m, n), c in self.items():
            factors = []
            for p, k, var in ((px, m, "x"), (py, n, "y")):
                if k == 0:
                    continue
                arg = var if k == 1 else f"{k}{var}"
                factors.append(f"{Parity(p).label}({arg})")
            body = "*".join(factors)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __neg__(self) -> "TrigSeries":
        return TrigSeries._raw({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(self, -other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(other, -self)

    def __mul__(self, other):
        if isinstance(other, TrigSeries):
            return mul(self, other)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return scale(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return scale(self, Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int) -> "TrigSeries":
        if k < 0:
            raise ValueError("negative powers are not series")
        out = TrigSeries.const(1)
        for _ in range(k):
            out = mul(out, self)
        return out

    # -- calculus -------------------------------------------------------------
    def diff(self, axis: str, order: int = 1) -> "TrigSeries":
        return diff(self, axis, order)

    def d(self, nx: int = 0, ny: int = 0) -> "TrigSeries":
        """Mixed derivative d^nx/dx^nx d^ny/dy^ny."""
        out = self
        if nx:
            out = diff(out, "x", nx)
        if ny:
            out = diff(out, "y", ny)
        return out

    def mean(self) -> Fraction:
        return mean(self)

    def swap_xy(self) -> "TrigSeries":
        return TrigSeries._raw({(py, px, n, m): c for (px, py, m, n), c in self._terms.items()})

    # -- floating evaluation --------------------------------------------------
    def evaluate(self, x, y) -> np.ndarray:
        """Evaluate at (broadcastable) points in double precision."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for (px, py, m, n), c in self._terms.items():
            fx = np.cos(m * x) if px == COS else np.sin(m * x)
            fy = np.cos(n * y) if py == COS else np.sin(n * y)
            out = out + float(c) * fx * fy
        return out

    def __call__(self, x, y):
        return self.evaluate(x, y)

    def to_doc(self) -> dict:
        return series_to_doc(self)


def _coerce(other):
    if isinstance(other, TrigSeries):
        return other
    if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
        return TrigSeries.const(other)
    return NotImplemented


def cc(m: int, n: int, c=1) -> TrigSeries:
    """c * cos(m x) cos(n y)"""
    return TrigSeries.basis(COS, COS, m, n, c)


def ss(m: int, n: int, c=1) -> TrigSeries:
    """c * sin(m x) sin(n y)"""
    return TrigSeries.basis(SIN, SIN, m, n, c)


def sc(m: int, n: int, c=1) -> TrigSeries:
    """c * sin(m x) cos(n y)"""
    return TrigSeries.basis(SIN, COS, m, n, c)


def cs(m: int, n: int, c=1) -> TrigSeries:
    """c * cos(m x) sin(n y)"""
    return TrigSeries.basis(COS, SIN, m, n, c)


# ---------------------------------------------------------------------------
# ring operations


def add(a: TrigSeries, b: TrigSeries) -> TrigSeries:
    out = dict(a._terms)
    for k, v in b._terms.items():
        s = out.get(k)
        if s is None:
            out[k] = v
        else:
            s += v
            if s:
                out[k] = s
            else:
                del out[k]
    return TrigSeries._raw(out)


def scale(a: TrigSeries, c) -> TrigSeries:
    c = as_rational(c)
    if c == 0:
        return TrigSeries.zero()
    return TrigSeries._raw({k: v * c for k, v in a._terms.items()})


def linear_combination(pairs: Iterable[tuple[object, TrigSeries]]) -> TrigSeries:
    out = TrigSeries.zero()
    for c, s in pairs:
        out = add(out, scale(s, c))
    return out


@lru_cache(maxsize=None)
def _axis_product(p1: int, a: int, p2: int, b: int) -> tuple[tuple[int, int, int], ...]:
    """phi_p1(a t) * phi_p2(b t) = 1/2 * sum(sign * phi_p(k t))."""
    if p1 == COS and p2 == COS:
        return ((COS, abs(a - b), 1), (COS, a + b, 1))
    if p1 == SIN and p2 == SIN:
        return ((COS, abs(a - b), 1), (COS, a + b, -1))
    # sin(a)cos(b) = 1/2 [sin(a+b) + sin(a-b)]
    if p1 == SIN:
        s, d = a + b, a - b
    else:
        s, d = a + b, b - a
    out = [(SIN, s, 1)]
    if d:
        out.append((SIN, abs(d), 1 if d > 0 else -1))
    return tuple(out)


def _integer_form(a: TrigSeries) -> tuple[list[tuple[Key, int]], int]:
    den = 1
    for v in a._terms.values():
        den = den * v.denominator // math.gcd(den, v.denominator)
    return [(k, v.numerator * (den // v.denominator)) for k, v in a._terms.items()], den


def mul(a: TrigSeries, b: TrigSeries) -> TrigSeries:
    """Exact product via per-axis product-to-sum identities."""
    if not a._terms or not b._terms:
        return TrigSeries.zero()
    ia, da = _integer_form(a)
    ib, db = _integer_form(b)
    acc: dict[Key, int] = {}
    get = acc.get
    for (px1, py1, m1, n1), c1 in ia:
        for (px2, py2, m2, n2), c2 in ib:
            c = c1 * c2
            xs = _axis_product(px1, m1, px2, m2)
            ys = _axis_product(py1, n1, py2, n2)
            for qx, kx, sx in xs:
                for qy, ky, sy in ys:
                    key = (qx, qy, kx, ky)
                    acc[key] = get(key, 0) + (c if sx == sy else -c)
    den = 4 * da * db
    return TrigSeries._raw({k: Fraction(v, den) for k, v in acc.items() if v})


def diff(a: TrigSeries, axis: str, order: int = 1) -> TrigSeries:
    """Exact derivative of the given order along ``axis`` ('x' or 'y')."""
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    if order < 0:
        raise ValueError("order must be non-negative")
    if order == 0:
        return a
    out: dict[Key, Fraction] = {}
    ax = 0 if axis == "x" else 1
    for key, c in a._terms.items():
        k = key[2 + ax]
        if k == 0:
            continue
        p = key[ax]
        # d/dt cos = -k sin, d/dt sin = k cos; cycle of length 4
        sign = 1
        for _ in range(order):
            if p == COS:
                sign, p = -sign, SIN
            else:
                p = COS
        new = list(key)
        new[ax] = p
        out[tuple(new)] = c * sign * k**order
    return TrigSeries._raw(out)


def mean(a: TrigSeries) -> Fraction:
    """Torus average; the integral over [0, 2pi)^2 is (2 pi)^2 times this."""
    return a._terms.get((COS, COS, 0, 0), Fraction(0))


# ---------------------------------------------------------------------------
# exponential view and symmetry


def _axis_exp(p: int, k: int, m: int) -> tuple[Fraction, Fraction]:
    """Coefficient of e^{i m t} in phi_p(k t), as (re, im)."""
    if p == COS:
        if k == 0:
            return (Fraction(1), Fraction(0)) if m == 0 else (Fraction(0), Fraction(0))
        return (Fraction(1, 2), Fraction(0)) if abs(m) == k else (Fraction(0), Fraction(0))
    # sin(kt) = (e^{ikt} - e^{-ikt}) / 2i
    if m == k:
        return (Fraction(0), Fraction(-1, 2))
    if m == -k:
        return (Fraction(0), Fraction(1, 2))
    return (Fraction(0), Fraction(0))


def exp_mode_coeff(a: TrigSeries, m: int, n: int) -> tuple[Fraction, Fraction]:
    """(re, im) of the coefficient of e^{i(m x + n y)}."""
    re = im = Fraction(0)
    M, N = abs(m), abs(n)
    for px in (COS, SIN):
        for py in (COS, SIN):
            c = a._terms.get((px, py, M, N))
            if not c:
                continue
            xr, xi = _axis_exp(px, M, m)
            yr, yi = _axis_exp(py, N, n)
            re += c * (xr * yr - xi * yi)
            im += c * (xr * yi + xi * yr)
    return re, im


def exp_modes(a: TrigSeries) -> dict[tuple[int, int], tuple[Fraction, Fraction]]:
    """All nonzero exponential-mode coefficients of ``a``."""
    modes = set()
    for (_, _, m, n) in a._terms:
        for sm in {m, -m}:
            for sn in {n, -n}:
                modes.add((sm, sn))
    out = {}
    for mode in sorted(modes):
        c = exp_mode_coeff(a, *mode)
        if c[0] or c[1]:
            out[mode] = c
    return out


def is_resonant_mode(m: int, n: int) -> bool:
    return m * n * (m * m - n * n) == 0


def resonant_part(a: TrigSeries) -> list[tuple[tuple[int, int], tuple[Fraction, Fraction]]]:
    """Nonzero exponential modes on the lines m=0, n=0, m=n, m=-n.

    The constant mode is left out; it lies in the kernel of every operator
    used here and is treated as a free normalization.
    """
    return [
        (mode, c)
        for mode, c in exp_modes(a).items()
        if mode != (0, 0) and is_resonant_mode(*mode)
    ]


def is_d4_symmetric(a: TrigSeries) -> bool:
    """Invariant under x -> -x, y -> -y and x <-> y."""
    for (px, py, m, n), c in a._terms.items():
        if px != COS or py != COS:
            return False
        if a._terms.get((COS, COS, n, m)) != c:
            return False
    return True


def project_d4(a: TrigSeries) -> TrigSeries:
    """Average over the 8-element group generated by both reflections and the swap."""
    out: dict[Key, Fraction] = {}
    for (px, py, m, n), c in a._terms.items():
        if px != COS or py != COS:
            continue
        half = c / 2
        for key in ((COS, COS, m, n), (COS, COS, n, m)):
            out[key] = out.get(key, Fraction(0)) + half
    return TrigSeries._raw({k: v for k, v in out.items() if v})


# ---------------------------------------------------------------------------
# grids


def default_grid(degree: int) -> int:
    return max(64, 4 * degree + 4)


def grid_points(N: int) -> np.ndarray:
    return 2 * np.pi * np.arange(N) / N


def eval_grid(a: TrigSeries, N: int | None = None) -> np.ndarray:
    """Sample ``a`` at (2 pi j / N, 2 pi k / N); entry [j, k] holds x_j, y_k.

    Direct summation over the tensor basis, no FFT.
    """
    deg = a.degree
    if N is None:
        N = default_grid(deg)
    if N < 2 * deg + 1:
        warnings.warn(
            f"grid N={N} under-resolves a degree-{deg} series", GridTooSmallWarning, stacklevel=2
        )
    t = grid_points(N)
    k = np.arange(deg + 1)
    tables = (np.cos(np.outer(t, k)), np.sin(np.outer(t, k)))
    coeffs = np.zeros((2, 2, deg + 1, deg + 1))
    for (px, py, m, n), c in a._terms.items():
        coeffs[px, py, m, n] = float(c)
    out = np.zeros((N, N))
    for px in (COS, SIN):
        for py in (COS, SIN):
            C = coeffs[px, py]
            if C.any():
                out += tables[px] @ C @ tables[py].T
    return out


# ---------------------------------------------------------------------------
# document format


def series_to_doc(a: TrigSeries) -> dict:
    return {
        "basis": "trig2d",
        "period": "2pi",
        "terms": [
            {
                "px": Parity(px).label,
                "py": Parity(py).label,
                "m": m,
                "n": n,
                "num": str(c.numerator),
                "den": str(c.denominator),
            }
            for (px, py, m, n), c in a.items()
        ],
    }


def series_from_doc(doc: Mapping) -> TrigSeries:
    if doc.get("basis") != "trig2d" or doc.get("period") != "2pi":
        raise ValueError("series document must have basis 'trig2d' and period '2pi'")
    terms: dict[Key, Fraction] = {}
    for t in doc.get("terms", []):
        px, py = Parity.parse(t["px"]), Parity.parse(t["py"])
        m, n = t["m"], t["n"]
        if not isinstance(m, int) or not isinstance(n, int) or isinstance(m, bool):
            raise ValueError(f"frequencies must be integers: {t}")
        num, den = int(str(t["num"])), int(str(t["den"]))
        if den <= 0:
            raise ValueError(f"denominator must be positive: {t}")
        key = _check_key((px, py, m, n))
        if key in terms:
            raise ValueError(f"duplicate term {key}")
        c = Fraction(num, den)
        if c == 0:
            raise ValueError(f"stored terms must be nonzero: {t}")
        terms[key] = c
    return TrigSeries._raw(terms)


def random_series(rng, degree: int, n_terms: int = 6, max_num: int = 5, max_den: int = 4,
                  parities=((COS, COS), (COS, SIN), (SIN, COS), (SIN, SIN))) -> TrigSeries:
    """Random series for fuzzing, drawn from a ``random.Random`` instance."""
    terms = {}
    for _ in range(n_terms):
        px, py = rng.choice(parities)
        m = rng.randint(1 if px == SIN else 0, max(degree, 1))
        n = rng.randint(1 if py == SIN else 0, max(degree, 1))
        terms[(px, py, m, n)] = Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))
    return TrigSeries(terms)
