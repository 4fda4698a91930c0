"""Exact rational fields ``num / base**power`` over a fixed series denominator.

The integral coefficients of the n=3 and n=4 constructions are rational
functions of a single positive trigonometric polynomial (the Laplacian of
the potential). Keeping them in this form lets the Poisson-bracket
coefficients be formed exactly; only the final sampling divides in floats.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .trigser import TrigSeries, eval_grid, mul


class MixedRepresentationError(TypeError):
    """Fields with incompatible representations were combined."""


class QuotientField:
    __slots__ = ("num", "base", "power")

    def __init__(self, num: TrigSeries, base: TrigSeries, power: int = 0):
        if power < 0:
            raise ValueError("power must be non-negative")
        if base.is_zero():
            raise ValueError("denominator base is identically zero")
        self.num = num
        self.base = base
        self.power = power

    @classmethod
    def lift(cls, value, base: TrigSeries) -> "QuotientField":
        if isinstance(value, QuotientField):
            if value.base != base:
                raise MixedRepresentationError("quotient fields over different denominators")
            return value
        if isinstance(value, TrigSeries):
            return cls(value, base, 0)
        if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            return cls(TrigSeries.const(value), base, 0)
        raise MixedRepresentationError(f"cannot lift {type(value).__name__} to a quotient field")

    def _raise_to(self, power: int) -> TrigSeries:
        num = self.num
        for _ in range(power - self.power):
            num = mul(num, self.base)
        return num

    def _other(self, other):
        if isinstance(other, (QuotientField, TrigSeries, int, Fraction)) and not isinstance(
            other, bool
        ):
            return QuotientField.lift(other, self.base)
        return NotImplemented

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        p = max(self.power, other.power)
        return QuotientField(self._raise_to(p) + other._raise_to(p), self.base, p)

    __radd__ = __add__

    def __neg__(self):
        return QuotientField(-self.num, self.base, self.power)

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuotientField(self.num * other, self.base, self.power)
        other = self._other(other)
        if other is NotImplemented:
            return other
        return QuotientField(mul(self.num, other.num), self.base, self.power + other.power)

    __rmul__ = __mul__

    def diff(self, axis: str, order: int = 1) -> "QuotientField":
        out = self
        for _ in range(order):
            out = out._diff1(axis)
        return out

    def _diff1(self, axis: str) -> "QuotientField":
        if self.power == 0:
            return QuotientField(self.num.diff(axis), self.base, 0)
        # (N / B^p)' = (N' B - p N B') / B^{p+1}
        num = mul(self.num.diff(axis), self.base) - mul(self.num, self.base.diff(axis)) * self.power
        return QuotientField(num, self.base, self.power + 1)

    def d(self, nx: int = 0, ny: int = 0) -> "QuotientField":
        out = self
        if nx:
            out = out.diff("x", nx)
        if ny:
            out = out.diff("y", ny)
        return out

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def equals(self, other) -> bool:
        other = QuotientField.lift(other, self.base)
        p = max(self.power, other.power)
        return self._raise_to(p) == other._raise_to(p)

    def evaluate(self, x, y) -> np.ndarray:
        return self.num.evaluate(x, y) / self.base.evaluate(x, y) ** self.power

    def grid(self, N: int) -> np.ndarray:
        return eval_grid(self.num, N) / eval_grid(self.base, N) ** self.power

    def __repr__(self) -> str:
        return f"QuotientField(num=<{len(self.num)} terms>, power={self.power})"

    def to_doc(self) -> dict:
        return {"num": self.num.to_doc(), "base": self.base.to_doc(), "power": self.power}


def sample(field, N: int) -> np.ndarray:
    """Grid samples of a TrigSeries, QuotientField or constant."""
    if isinstance(field, QuotientField):
        return field.grid(N)
    if isinstance(field, TrigSeries):
        return eval_grid(field, N)
    if isinstance(field, (int, Fraction)):
        return np.full((N, N), float(field))
    raise MixedRepresentationError(f"cannot sample {type(field).__name__}")


def is_zero_field(field) -> bool:
    if isinstance(field, (QuotientField, TrigSeries)):
        return field.is_zero()
    return field == 0


def common_base(fields) -> TrigSeries | None:
    """Shared denominator of a collection of exact fields, or None if all are series."""
    base = None
    for f in fields:
        if isinstance(f, QuotientField):
            if base is None:
                base = f.base
            elif f.base != base:
                raise MixedRepresentationError("quotient fields over different denominators")
        elif not isinstance(f, (TrigSeries, int, Fraction)) or isinstance(f, bool):
            raise MixedRepresentationError(
                f"unsupported field type {type(f).__name__}; use TrigSeries or QuotientField"
            )
    return base
