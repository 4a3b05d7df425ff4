"""Scalar q-special functions.

q-Pochhammer symbols, the q-number, q-Gamma, q-Barnes G and the theta
functions.  Infinite products are truncated according to a
:class:`ProductTruncation`; Gamma and Barnes values are accumulated in
log-space and exponentiated once.

All complex powers ``q**u`` use the principal branch of ``log q``, fixed
once per :class:`QBase`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from numbers import Integral

__all__ = [
    "QBase",
    "ProductTruncation",
    "ResonanceError",
    "DEFAULT_TRUNCATION",
    "RESONANCE_TOL",
    "q_pochhammer",
    "q_double_pochhammer",
    "q_number",
    "q_gamma",
    "q_barnes",
    "theta",
    "theta_q",
]

RESONANCE_TOL = 1e-8
TWO_PI = 2.0 * math.pi


class ResonanceError(ArithmeticError):
    """An argument sits on (or too close to) a pole or zero of a denominator."""


@dataclass(frozen=True)
class ProductTruncation:
    max_factors: int = 256
    tail_bound: float = 1e-18

    def __post_init__(self):
        if self.max_factors < 1:
            raise ValueError("max_factors must be >= 1")
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be >= 0")


DEFAULT_TRUNCATION = ProductTruncation()


@dataclass(frozen=True)
class QBase:
    """The base ``q`` with ``0 < |q| < 1``."""

    q: complex

    def __post_init__(self):
        q = complex(self.q)
        if not (cmath.isfinite(q) and 0.0 < abs(q) < 1.0):
            raise ValueError(f"need 0 < |q| < 1, got q={self.q!r}")
        object.__setattr__(self, "q", q)

    @cached_property
    def log(self) -> complex:
        return cmath.log(self.q)

    def power(self, u) -> complex:
        """``q**u``; exact repeated multiplication for integer ``u``."""
        if isinstance(u, Integral):
            return self.ipow(int(u))
        return cmath.exp(complex(u) * self.log)

    def ipow(self, k: int) -> complex:
        if k == 0:
            return 1.0 + 0.0j
        r = self.q ** abs(k)
        return r if k > 0 else 1.0 / r

    @cached_property
    def log_qq_inf(self) -> complex:
        # log (q;q)_inf as a sum of principal factor logs; fixed per base
        return _log_poch_inf(self.q, self, DEFAULT_TRUNCATION)

    @cached_property
    def log_qqq_inf(self) -> complex:
        return _log_double_poch(self.q, self, DEFAULT_TRUNCATION)

    @cached_property
    def log_one_minus_q(self) -> complex:
        return cmath.log(1.0 - self.q)


def _check_finite(a):
    if not cmath.isfinite(complex(a)):
        raise ValueError(f"non-finite argument {a!r}")


def _n_factors(a: complex, base: QBase, trunc: ProductTruncation) -> int:
    """Number of factors (1 - a q^j), j < n, needed before |a q^j| < tail_bound."""
    aa = abs(a)
    if aa == 0.0:
        return 0
    if trunc.tail_bound == 0.0:
        return trunc.max_factors
    lq = math.log(abs(base.q))
    n = math.ceil((math.log(trunc.tail_bound) - math.log(aa)) / lq) + 1
    return max(1, min(trunc.max_factors, n))


def q_pochhammer(a, n, base: QBase, trunc: ProductTruncation = DEFAULT_TRUNCATION) -> complex:
    """``(a; q)_n`` for a nonnegative integer ``n`` or ``n = math.inf``."""
    a = complex(a)
    _check_finite(a)
    if n == math.inf:
        n = _n_factors(a, base, trunc)
    elif n < 0:
        raise ValueError("n must be nonnegative")
    out = 1.0 + 0.0j
    x = a
    for _ in range(int(n)):
        out *= 1.0 - x
        x *= base.q
    return out


def _log_poch_inf(a: complex, base: QBase, trunc: ProductTruncation) -> complex:
    s = 0.0j
    x = a
    for _ in range(_n_factors(a, base, trunc)):
        s += cmath.log(1.0 - x)
        x *= base.q
    return s


def _log_double_poch(a: complex, base: QBase, trunc: ProductTruncation) -> complex:
    s = 0.0j
    x = a
    for m in range(_n_factors(a, base, trunc)):
        s += (m + 1) * cmath.log(1.0 - x)
        x *= base.q
    return s


def q_double_pochhammer(a, base: QBase, trunc: ProductTruncation = DEFAULT_TRUNCATION) -> complex:
    """``(a; q, q)_inf``: the factor ``1 - a q^m`` appears ``m + 1`` times."""
    a = complex(a)
    _check_finite(a)
    out = 1.0 + 0.0j
    x = a
    for m in range(_n_factors(a, base, trunc)):
        out *= (1.0 - x) ** (m + 1)
        x *= base.q
    return out


def q_number(u, base: QBase) -> complex:
    """``[u] = (1 - q^u) / (1 - q)``."""
    return (1.0 - base.power(u)) / (1.0 - base.q)


def _nonpositive_integer_hit(u: complex, base: QBase) -> int | None:
    """Return m >= 0 if q^u lies within tolerance of q^{-m}, else None."""
    # q^u = q^{-m}  <=>  u = -m + 2 pi i k / log q
    lq = base.log
    m = round(-(u * lq).real / lq.real)
    if m < 0:
        return None
    k = round(((u + m) * lq).imag / TWO_PI)
    if abs(u + m - TWO_PI * k * 1j / lq) < RESONANCE_TOL:
        return m
    return None


def q_gamma(u, base: QBase, trunc: ProductTruncation = DEFAULT_TRUNCATION) -> complex:
    """``Gamma_q(u) = (q;q)_inf / (q^u;q)_inf * (1-q)^(1-u)``."""
    u = complex(u)
    _check_finite(u)
    m = _nonpositive_integer_hit(u, base)
    if m is not None:
        raise ResonanceError(f"Gamma_q pole at u={u!r} (q^u = q^-{m})")
    lg = base.log_qq_inf - _log_poch_inf(base.power(u), base, trunc) + (1.0 - u) * base.log_one_minus_q
    return cmath.exp(lg)


def log_q_barnes(u, base: QBase, trunc: ProductTruncation = DEFAULT_TRUNCATION) -> complex:
    u = complex(u)
    _check_finite(u)
    m = _nonpositive_integer_hit(u, base)
    if m is not None:
        raise ResonanceError(f"G_q vanishes at u={u!r} (q^u = q^-{m})")
    return (
        _log_double_poch(base.power(u), base, trunc)
        - base.log_qqq_inf
        + (u - 1.0) * base.log_qq_inf
        - 0.5 * (u - 1.0) * (u - 2.0) * base.log_one_minus_q
    )


def q_barnes(u, base: QBase, trunc: ProductTruncation = DEFAULT_TRUNCATION) -> complex:
    """q-Barnes ``G_q(u)``, normalized so that ``G_q(1) = 1``.

    Raises :class:`ResonanceError` at the zeros ``u = 0, -1, -2, ...``; callers
    dividing by ``G_q`` need that, and callers expecting a structural zero
    handle it explicitly.
    """
    return cmath.exp(log_q_barnes(u, base, trunc))


def theta_q(x, base: QBase, trunc: ProductTruncation = DEFAULT_TRUNCATION) -> complex:
    """``Theta_q(x) = (x, q/x, q; q)_inf``."""
    x = complex(x)
    if x == 0:
        raise ValueError("Theta_q(x) undefined at x = 0")
    return (
        q_pochhammer(x, math.inf, base, trunc)
        * q_pochhammer(base.q / x, math.inf, base, trunc)
        * cmath.exp(base.log_qq_inf)
    )


def theta(u, base: QBase, trunc: ProductTruncation = DEFAULT_TRUNCATION) -> complex:
    """``vartheta(u) = q^(u(u-1)/2) Theta_q(q^u)``.

    Arguments with ``|Re u| > 2`` are first brought back with
    ``vartheta(u + 1) = -vartheta(u)`` to keep the products short.
    """
    if isinstance(u, Integral):
        return 0.0j
    u = complex(u)
    _check_finite(u)
    sign = 1.0
    if abs(u.real) > 2.0:
        n = math.floor(u.real)
        u -= n
        if n % 2:
            sign = -1.0
    x = cmath.exp(u * base.log)
    return sign * cmath.exp(0.5 * u * (u - 1.0) * base.log) * theta_q(x, base, trunc)
