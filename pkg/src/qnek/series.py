"""Truncated one-variable power series with a complex prefactor exponent.

A :class:`TruncatedSeries` stands for ``x**e * sum_{n=0}^{order} c_n x**n``.
Non-integer powers only ever live in ``e``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qspecial import QBase
from .report import VerificationReport, relative_residual

__all__ = ["TruncatedSeries", "IncompatibleSeries", "qshift", "combine", "compare"]

_INT_TOL = 1e-9


class IncompatibleSeries(ValueError):
    pass


@dataclass(frozen=True)
class TruncatedSeries:
    prefactor_exponent: complex
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise ValueError("a series needs at least one coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "prefactor_exponent", complex(self.prefactor_exponent))

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def constant(cls, c, order: int = 0, exponent=0.0) -> "TruncatedSeries":
        coeffs = np.zeros(order + 1, dtype=complex)
        coeffs[0] = c
        return cls(exponent, coeffs)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError(f"cannot extend order {self.order} to {order}")
        return TruncatedSeries(self.prefactor_exponent, self.coeffs[: order + 1])

    def shift_exponent(self, d: int) -> "TruncatedSeries":
        """Rewrite with prefactor ``e - d`` (``d >= 0``), padding ``d`` zeros."""
        if d < 0:
            raise ValueError("d must be nonnegative")
        return TruncatedSeries(self.prefactor_exponent - d, np.concatenate([np.zeros(d, complex), self.coeffs]))

    def __call__(self, x, log_x=None) -> complex:
        """Evaluate at ``x``; ``log_x`` fixes the branch of ``x**e``."""
        lx = np.log(complex(x)) if log_x is None else complex(log_x)
        x = np.exp(lx)
        return complex(np.exp(self.prefactor_exponent * lx) * np.polyval(self.coeffs[::-1], x))

    def __add__(self, other):
        return combine(self, other, "add")

    def __sub__(self, other):
        return combine(self, other, "sub")

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return combine(self, other, "mul")
        return combine(self, None, "scalar_mul", other)

    __rmul__ = __mul__

    def __neg__(self):
        return TruncatedSeries(self.prefactor_exponent, -self.coeffs)


def _integer_gap(a: TruncatedSeries, b: TruncatedSeries) -> int:
    d = b.prefactor_exponent - a.prefactor_exponent
    k = round(d.real)
    if abs(d - k) > _INT_TOL:
        raise IncompatibleSeries(f"prefactor exponents differ by non-integer {d}")
    return k


def qshift(s: TruncatedSeries, base: QBase, power: int = 1) -> TruncatedSeries:
    """``f(x) -> f(q x)``: multiplies ``c_n`` by ``q**(e + n)``.

    ``power=-1`` treats the series variable as ``1/x`` (so ``x -> q x`` sends
    it to ``q**-1`` times itself).
    """
    e = s.prefactor_exponent
    n = np.arange(s.order + 1)
    qn = np.array([base.ipow(power * int(k)) for k in n])
    lead = base.power(power * e) if e != 0 else 1.0
    return TruncatedSeries(e, s.coeffs * qn * lead)


def combine(a: TruncatedSeries, b: TruncatedSeries | None, op: str, c=None) -> TruncatedSeries:
    if op == "scalar_mul":
        return TruncatedSeries(a.prefactor_exponent, a.coeffs * complex(c))
    if op == "mul":
        order = min(a.order, b.order)
        coeffs = np.convolve(a.coeffs, b.coeffs)[: order + 1]
        return TruncatedSeries(a.prefactor_exponent + b.prefactor_exponent, coeffs)
    if op not in ("add", "sub"):
        raise ValueError(f"unknown op {op!r}")
    d = _integer_gap(a, b)
    if d < 0:
        a, b, d, sign_swap = b, a, -d, True
    else:
        sign_swap = False
    # b = x^{e_a} * x^d * (...)
    order = min(a.order, b.order + d)
    bc = np.concatenate([np.zeros(d, complex), b.coeffs])[: order + 1]
    ac = a.coeffs[: order + 1]
    if op == "add":
        coeffs = ac + bc
    else:
        coeffs = (bc - ac) if sign_swap else (ac - bc)
    return TruncatedSeries(a.prefactor_exponent, coeffs)


def compare(a: TruncatedSeries, b: TruncatedSeries, tol: float, identity: str = "series", floor: float = 1.0) -> VerificationReport:
    """Coefficient-wise comparison.

    Residual is ``max_n |a_n - b_n| / max(floor, max|a_n|, max|b_n|)``.
    """
    if a.order != b.order:
        raise IncompatibleSeries(f"order mismatch {a.order} vs {b.order}")
    d = _integer_gap(a, b)
    if d != 0:
        raise IncompatibleSeries("prefactor exponents must agree for comparison")
    res = relative_residual(a.coeffs, b.coeffs, floor=floor)
    return VerificationReport(identity, res, tol, {"order": a.order})
