"""Fundamental solutions, tau functions and Lax matrices built from blocks.

Tau functions are Fourier transforms of q-conformal blocks over the root
lattice ``R = {n in Z^N : sum n = 0}``; fundamental solutions are the same
transforms of degenerate blocks.  All fractional powers of ``x`` and ``t_i``
are taken through stored logarithms, so q-shifts are exact shifts of those
logarithms by ``log q``.
"""
from __future__ import annotations

import cmath
import itertools
import math
import time
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from ._pool import map_ordered
from .blocks import BlockParams, Cutoffs, connection_matrix, delta, hvec, log_block_prefactor, log_normalization
from .nekrasov import chain_sum
from .qspecial import QBase, ResonanceError, log_q_barnes, q_gamma, q_number, q_pochhammer, theta
from .report import VerificationReport, relative_residual

__all__ = [
    "TauZeroError",
    "AnnulusError",
    "LaxParams",
    "LatticeWindow",
    "TauFamily",
    "RationalA",
    "validate",
    "tau_terms",
    "tau",
    "tau_block_form",
    "tau_i_01_closed_form",
    "tau_family",
    "shifted_params",
    "d_matrix",
    "admissible_k",
    "fundamental_solution",
    "normalizations",
    "y_series",
    "det_y_closed_form",
    "connection_relation_matrix",
    "y1_from_tau",
    "g_from_tau",
    "det_g_inverse_closed_form",
    "extract_Y1_G",
    "det_tau_sides",
    "b_i0_pair",
    "verify_det_tau",
    "schlesinger",
    "schlesinger_sides",
    "dual_forms",
    "verify_schlesinger",
    "det_a_closed_form",
    "det_b_closed_form",
    "a0_closed_form",
    "fit_rational_a",
    "lax_matrices",
    "lax_samples",
    "overlap_modulus",
    "verify_connection_relation",
    "verify_det_y",
    "verify_asymptotics",
    "verify_extraction",
    "verify_tau_forms",
]

TRACE_TOL = 1e-12


class TauZeroError(ArithmeticError):
    """The lattice sum cancels to (numerically) zero."""


class AnnulusError(ValueError):
    """A requested point lies outside every usable convergence annulus."""


def _vec(v, N=None) -> np.ndarray:
    a = np.asarray(v, dtype=complex).ravel()
    if N is not None and a.size != N:
        raise ValueError(f"expected a vector of length {N}, got {a.size}")
    return a


@dataclass(frozen=True)
class LaxParams:
    """Parameters of the rank-``N`` system with ``m + 1`` moving points.

    ``thetas`` is ``theta_1 .. theta_{m+1}``, ``sigmas`` is
    ``sigma_1 .. sigma_m``, ``s`` is the ``m x N`` weight matrix and
    ``log_t`` holds ``log t_1 .. log t_{m+1}``.
    """

    N: int
    q: complex
    theta_inf: np.ndarray
    theta_0: np.ndarray
    thetas: tuple
    sigmas: tuple
    s: np.ndarray
    log_t: tuple

    def __post_init__(self):
        N = self.N
        if N < 2:
            raise ValueError("rank N must be at least 2")
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("q", complex(self.q))
        set_("theta_inf", _vec(self.theta_inf, N))
        set_("theta_0", _vec(self.theta_0, N))
        set_("thetas", tuple(complex(t) for t in self.thetas))
        set_("sigmas", tuple(_vec(s, N) for s in self.sigmas))
        set_("log_t", tuple(complex(v) for v in self.log_t))
        s = np.asarray(self.s, dtype=complex).reshape(len(self.sigmas), N)
        set_("s", s)
        m = len(self.sigmas)
        if m < 1 or len(self.thetas) != m + 1 or len(self.log_t) != m + 1:
            raise ValueError("need m >= 1 sigmas, m+1 thetas and m+1 points")

    @classmethod
    def create(cls, N, q, theta_inf, theta_0, thetas, sigmas, s, t) -> "LaxParams":
        return cls(N, q, theta_inf, theta_0, thetas, sigmas, s, tuple(cmath.log(complex(v)) for v in t))

    @property
    def m(self) -> int:
        return len(self.sigmas)

    @cached_property
    def base(self) -> QBase:
        return QBase(self.q)

    @property
    def t(self) -> tuple:
        return tuple(cmath.exp(v) for v in self.log_t)

    def theta_sum(self, a: int, b: int) -> complex:
        """``theta_a + ... + theta_b`` (1-based, empty when ``b < a``)."""
        return sum(self.thetas[a - 1: b], 0j)

    def log_t_tilde(self) -> list[complex]:
        """``log t~_i = N (theta_{i+1} + ... + theta_{m+1}) log q + log t_i``."""
        m1 = self.m + 1
        return [self.N * self.theta_sum(i + 1, m1) * self.base.log + self.log_t[i - 1] for i in range(1, m1 + 1)]

    def shift_t(self, i: int, k: int = 1) -> "LaxParams":
        """``t_i -> q**k t_i``."""
        lt = list(self.log_t)
        lt[i - 1] += k * self.base.log
        return replace(self, log_t=tuple(lt))

    def with_(self, **kw) -> "LaxParams":
        return replace(self, **kw)

    def sigma_ext(self, p: int) -> np.ndarray:
        """``sigma_p`` with ``sigma_0 = theta_inf`` and ``sigma_{m+1} = theta_0``."""
        if p == 0:
            return self.theta_inf
        if p == self.m + 1:
            return self.theta_0
        return self.sigmas[p - 1]


def validate(p: LaxParams) -> None:
    """Raise ``ValueError`` naming every violated hypothesis."""
    problems = []
    for name, v in [("theta_inf", p.theta_inf), ("theta_0", p.theta_0)] + [
        (f"sigma_{k + 1}", s) for k, s in enumerate(p.sigmas)
    ]:
        if abs(np.sum(v)) > TRACE_TOL:
            problems.append(f"{name} is not traceless (sum = {np.sum(v):.3g})")
    mods = [abs(cmath.exp(v)) for v in p.log_t]
    for i in range(len(mods) - 1):
        if not mods[i] > mods[i + 1]:
            problems.append(f"|t_{i + 1}| > |t_{i + 2}| fails")
    if np.any(p.s == 0):
        problems.append("weights s_ij must be nonzero")
    qa = abs(p.q)
    for i, th in enumerate(p.thetas, start=1):
        a = abs(p.base.power(-p.N * th))
        if not 1 < a < 1 / qa:
            problems.append(f"1 < |q^(-N theta_{i})| < 1/|q| fails (|q^(-N theta_{i})| = {a:.4g})")
    for i in range(1, p.m + 1):
        for k in range(i, p.m + 1):
            lhs = abs(p.base.power(-p.N * p.theta_sum(i, k + 1)) * cmath.exp(p.log_t[k]))
            if not lhs < mods[i - 1]:
                problems.append(f"|q^(-N(theta_{i}+..+theta_{k + 1})) t_{k + 1}| < |t_{i}| fails")
    if problems:
        raise ValueError("; ".join(problems))


@dataclass(frozen=True)
class LatticeWindow:
    """Points of ``R^m`` with every component bounded by ``radius``."""

    radius: int = 2

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    def root_points(self, N: int) -> list[tuple[int, ...]]:
        r = self.radius
        pts = [v + (-sum(v),) for v in itertools.product(range(-r, r + 1), repeat=N - 1) if abs(sum(v)) <= r]
        return sorted(pts, key=lambda v: (sum(map(abs, v)), v))

    def points(self, N: int, m: int) -> list[tuple[tuple[int, ...], ...]]:
        """Deterministic order: by total l1 norm, then lexicographic."""
        base = self.root_points(N)
        pts = list(itertools.product(base, repeat=m))
        return sorted(pts, key=lambda n: (sum(abs(c) for v in n for c in v), n))


def _s_power(p: LaxParams, n) -> complex:
    """``s^n = prod_{k,j} s_{k,j} ** n_k^{(j)}`` with exact integer powers."""
    out = 1.0 + 0.0j
    for k, nk in enumerate(n):
        for j, e in enumerate(nk):
            if e:
                out *= complex(p.s[k, j]) ** int(e)
    return out


def _s_k_power(p: LaxParams, k: int, v) -> complex:
    """``s_k^v`` for an integer vector ``v``; ``s_0 = 1``."""
    if k == 0:
        return 1.0 + 0.0j
    return _s_power(p, [(0,) * p.N] * (k - 1) + [tuple(int(round(float(np.real(c)))) for c in v)])


def _sum_terms(terms: list[complex], what: str) -> complex:
    total = complex(sum(terms))
    biggest = max((abs(x) for x in terms), default=0.0)
    if biggest == 0.0 or abs(total) < 1e-12 * biggest:
        raise TauZeroError(f"{what} vanishes to working precision (|sum| = {abs(total):.3g}, largest term {biggest:.3g})")
    return total


def _shifted_sigmas(p: LaxParams, n) -> list[np.ndarray]:
    """``sigma_0 .. sigma_{m+1}`` with ``sigma_k + n_k`` inside."""
    out = [p.theta_inf]
    out += [p.sigmas[k] + np.asarray(n[k], dtype=complex) for k in range(p.m)]
    out.append(p.theta_0)
    return out


def _log_c(p: LaxParams, sig: list[np.ndarray]) -> complex:
    base, N = p.base, p.N
    out = 0.0j
    for k in range(1, p.m + 2):
        a, b = sig[k - 1], sig[k]
        for u in range(N):
            for v in range(N):
                out += log_q_barnes(1 + a[u] - p.thetas[k - 1] - b[v], base)
    for k in range(1, p.m + 1):
        a = sig[k]
        for u in range(N):
            for v in range(N):
                if u != v:
                    out -= log_q_barnes(1 + a[u] - a[v], base)
    return out


def _z_sum(p: LaxParams, sig: list[np.ndarray], cutoff: int) -> complex:
    """Instanton part with expansion variables ``t_{k+1}/t_k``."""
    m1 = p.m + 1
    thetas = [p.thetas[m1 - 1 - k] for k in range(m1)]  # inner to outer
    sigmas = list(reversed(sig))
    ratios = [cmath.exp(p.log_t[m1 - 1 - k] - p.log_t[m1 - 2 - k]) for k in range(p.m)]
    return chain_sum(p.N, thetas, sigmas, ratios, cutoff, p.base)


def _dh(N, th) -> complex:
    return N * th * th * (N - 1) / 2.0


def tau_terms(p: LaxParams, w: LatticeWindow, c: Cutoffs | int, *, parallel: bool = True) -> list[complex]:
    """Lattice summands of the tau function in window order."""
    cutoff = c if isinstance(c, int) else c.max_instanton
    N = p.N

    def term(n):
        sig = _shifted_sigmas(p, n)
        log_pow = 0.0j
        for k in range(1, p.m + 2):
            log_pow += (delta(sig[k - 1]) - _dh(N, p.thetas[k - 1]) - delta(sig[k])) * p.log_t[k - 1]
        try:
            return _s_power(p, n) * cmath.exp(log_pow + _log_c(p, sig)) * _z_sum(p, sig, cutoff)
        except ResonanceError as e:
            raise ResonanceError(f"at lattice point {n}: {e}") from None

    pts = w.points(N, p.m)
    return map_ordered(term, pts) if parallel else [term(n) for n in pts]


def tau(p: LaxParams, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6) -> complex:
    """Tau function as the lattice sum of ``C[theta|sigma+n] Z[theta|sigma+n, t]``."""
    return _sum_terms(tau_terms(p, w, c), "tau")


def _log_tau_prefactor(p: LaxParams) -> complex:
    N, base = p.N, p.base
    m1 = p.m + 1
    e = -N * delta(p.theta_inf) * p.theta_sum(1, m1)
    for k in range(1, p.m + 1):
        e += N * _dh(N, p.thetas[k - 1]) * p.theta_sum(k + 1, m1)
    out = e * base.log
    for a in range(N):
        for b in range(a + 1, N):
            out += log_q_barnes(1 + p.theta_inf[a] - p.theta_inf[b], base)
            out += log_q_barnes(1 - p.theta_0[a] + p.theta_0[b], base)
    return out


def tau_block_form(p: LaxParams, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6) -> complex:
    """Same tau function assembled from conformal blocks at ``t~``."""
    cutoff = c if isinstance(c, int) else c.max_instanton
    ltt = p.log_t_tilde()
    pre = cmath.exp(_log_tau_prefactor(p))

    def term(n):
        sig = _shifted_sigmas(p, n)
        bp = BlockParams.from_display(list(p.thetas), sig, log_points=ltt)
        return _s_power(p, n) * cmath.exp(log_block_prefactor(bp, p.base)) * chain_sum(
            p.N, bp.thetas, bp.sigmas, bp.ratios(p.base), cutoff, p.base
        )

    return pre * _sum_terms(map_ordered(term, w.points(p.N, p.m)), "tau")


# ---------------------------------------------------------------------------
# tau_i^{(k,k+1)} normalizations


def tau_i_01_closed_form(p: LaxParams, i: int, tau_value: complex) -> complex:
    """``tau_i^{(0,1)}`` expressed through the tau function."""
    h = hvec(i, p.N)
    log_n = log_normalization(1.0 / p.N, p.theta_inf - h, p.theta_inf, p.base, degenerate_index=i)
    # includes q^{-N theta_inf^(i) sum theta}, the x~ versus x normalization
    e = delta(p.theta_inf - h) - p.N * p.theta_sum(1, p.m + 1) * p.theta_inf[i - 1]
    return tau_value * cmath.exp(-_log_tau_prefactor(p) + e * p.base.log + log_n)


def _log_tau_step(p: LaxParams, k: int) -> complex:
    """``log`` of the factor taking ``tau_i^{(k-1,k)}`` to ``tau_i^{(k,k+1)}``."""
    N = p.N
    th = p.thetas[k - 1]
    e = N * th * th / 2 + th / 2 + N * th * p.theta_sum(1, k - 1)
    return e * p.base.log - th * p.log_t[k - 1]


def _tau_i_all(p: LaxParams, k: int, tau01: np.ndarray) -> np.ndarray:
    """``tau_i^{(k,k+1)}`` from ``tau_i^{(0,1)}`` by the recursion in ``k``."""
    step = sum((_log_tau_step(p, ell) for ell in range(1, k + 1)), 0j)
    return tau01 * cmath.exp(step)


# ---------------------------------------------------------------------------
# fundamental solutions


def _y_display(p: LaxParams, k: int, i: int, j: int, n, log_x: complex):
    """Display data of the ``(i, j)`` block of ``Y^{(k,k+1)}`` at lattice point ``n``."""
    N, m = p.N, p.m
    hi, hj, hN = hvec(i, N), hvec(j, N), hvec(N, N)
    ltt = p.log_t_tilde()
    lxt = N * p.theta_sum(1, m + 1) * p.base.log + log_x
    sig = [p.sigmas[ell] + np.asarray(n[ell], dtype=complex) for ell in range(m)]
    th = list(p.thetas)
    if k == 0:
        return [1.0 / N] + th, [p.theta_inf - hi, p.theta_inf - hi + hj] + sig + [p.theta_0], [lxt] + ltt
    if k == m + 1:
        return (th + [1.0 / N], [p.theta_inf - hi] + [s - hN for s in sig] + [p.theta_0 - hj, p.theta_0],
                ltt + [lxt])
    return (
        th[:k] + [1.0 / N] + th[k:],
        [p.theta_inf - hi] + [s - hN for s in sig[:k]] + [sig[k - 1] + hj - hN] + sig[k:] + [p.theta_0],
        ltt[:k] + [lxt] + ltt[k:],
    )


def _annulus_ok(p: LaxParams, k: int, log_x: complex) -> bool:
    th, sg, lp = _y_display(p, k, 1, 1, [(0,) * p.N] * p.m, log_x)
    bp = BlockParams.from_display(th, sg, log_points=lp)
    return all(abs(r) < 1.0 for r in bp.ratios(p.base))


def admissible_k(p: LaxParams, x: complex) -> list[int]:
    """Indices ``k`` whose expansion of ``Y^{(k,k+1)}`` converges at ``x``."""
    lx = cmath.log(complex(x))
    return [k for k in range(p.m + 2) if _annulus_ok(p, k, lx)]


def fundamental_solution(k: int, x, p: LaxParams, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6,
                         *, log_x: complex | None = None, tau01: np.ndarray | None = None) -> np.ndarray:
    """``Y^{(k,k+1)}(x, t)`` as an ``N x N`` matrix.

    ``tau01`` (the normalizations ``tau_i^{(0,1)}``) is computed from the
    expansion at infinity when not supplied.
    """
    N, m = p.N, p.m
    if not 0 <= k <= m + 1:
        raise ValueError(f"k must lie in 0..{m + 1}")
    cutoff = c if isinstance(c, int) else c.max_instanton
    lx = cmath.log(complex(x)) if log_x is None else complex(log_x)
    if not _annulus_ok(p, k, lx):
        raise AnnulusError(f"x = {cmath.exp(lx):.4g} lies outside the convergence annulus of Y^({k},{k + 1})")
    if tau01 is None:
        tau01 = normalizations(p, w, c)
    taus = _tau_i_all(p, k, tau01)
    pts = w.points(N, m)
    x_pow = -p.theta_sum(1, k) * lx

    def entry(ij):
        i, j = ij
        terms = []
        for n in pts:
            th, sg, lp = _y_display(p, k, i, j, n, lx)
            bp = BlockParams.from_display(th, sg, log_points=lp)
            val = cmath.exp(log_block_prefactor(bp, p.base) + x_pow)
            val *= _s_power(p, n) * chain_sum(N, bp.thetas, bp.sigmas, bp.ratios(p.base), cutoff, p.base)
            if 1 <= k <= m:
                val *= _s_k_power(p, k, hvec(j, N) - hvec(N, N))
            terms.append(val)
        return complex(sum(terms)) / taus[i - 1]

    idx = [(i, j) for i in range(1, N + 1) for j in range(1, N + 1)]
    return np.array(map_ordered(entry, idx), dtype=complex).reshape(N, N)


def _raw_coefficients(p: LaxParams, end: str, w: LatticeWindow, cutoff: int) -> np.ndarray:
    """Unnormalized expansion coefficients of ``Y^{(0,1)}`` or ``Y^{(m+1,m+2)}``.

    ``end='infinity'``: ``u[k, i, j]`` with
    ``tau_i Y_ij x^{theta_inf_j} = sum_k u[k,i,j] x^{delta_ij - 1 - k}``.
    ``end='zero'``: ``v[k, i, j]`` with
    ``tau_i^{(m+1,m+2)} Y_ij x^{theta_0_j + sum theta} = sum_k v[k,i,j] x^k``.
    """
    N, m, base = p.N, p.m, p.base
    tot = p.theta_sum(1, m + 1)
    pts = w.points(N, m)
    if end == "infinity":
        k_disp, grade = 0, "last"
        # the graded ratio is t_1 / x
        step = p.log_t[0]
    elif end == "zero":
        k_disp, grade = m + 1, "first"
        step = (1 + N * tot) * base.log - p.log_t[m]
    else:
        raise ValueError("end must be 'infinity' or 'zero'")

    def entry(ij):
        i, j = ij
        e = -p.theta_inf[j - 1] + (1 if i == j else 0) - 1 if end == "infinity" else -p.theta_0[j - 1]
        acc = np.zeros(cutoff + 1, dtype=complex)
        for n in pts:
            th, sg, lp = _y_display(p, k_disp, i, j, n, -N * tot * base.log)  # x~ = 1
            bp = BlockParams.from_display(th, sg, log_points=lp)
            arr = chain_sum(N, bp.thetas, bp.sigmas, bp.ratios(base), cutoff, base, grade=grade)
            lim = min(arr.size, cutoff + 1)
            acc[:lim] += _s_power(p, n) * cmath.exp(log_block_prefactor(bp, base)) * arr[:lim]
        acc *= cmath.exp(N * tot * e * base.log)
        return acc * np.exp(np.arange(cutoff + 1) * step)

    idx = [(i, j) for i in range(1, N + 1) for j in range(1, N + 1)]
    vals = map_ordered(entry, idx)
    out = np.empty((cutoff + 1, N, N), dtype=complex)
    for (i, j), v in zip(idx, vals):
        out[:, i - 1, j - 1] = v
    return out


def normalizations(p: LaxParams, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6) -> np.ndarray:
    """``tau_i^{(0,1)}``: the leading diagonal coefficients at infinity."""
    cutoff = c if isinstance(c, int) else c.max_instanton
    u = _raw_coefficients(p, "infinity", w, cutoff)
    return np.array([u[0, i, i] for i in range(p.N)])


def y_series(p: LaxParams, end: str, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6) -> np.ndarray:
    """Coefficient matrices of ``Y-hat``.

    ``end='infinity'``: ``out[k]`` multiplies ``x^{-k}`` in ``Y-hat^{(0,1)}``;
    ``end='zero'``: ``out[k]`` multiplies ``x^k`` in ``Y-hat^{(m+1,m+2)}``.
    """
    cutoff = c if isinstance(c, int) else c.max_instanton
    N = p.N
    u = _raw_coefficients(p, "infinity", w, cutoff)
    tau01 = np.array([u[0, i, i] for i in range(N)])
    if end == "infinity":
        out = np.zeros_like(u)
        for i in range(N):
            for j in range(N):
                if i == j:
                    out[:, i, j] = u[:, i, j]
                else:
                    out[1:, i, j] = u[:-1, i, j]
        return out / tau01[None, :, None]
    v = _raw_coefficients(p, "zero", w, cutoff)
    return v / _tau_i_all(p, p.m + 1, tau01)[None, :, None]


def det_y_closed_form(p: LaxParams, x, *, log_x: complex | None = None) -> complex:
    """Closed form of ``det Y^{(0,1)}(x, t)`` as a ratio of infinite q-Pochhammers."""
    lx = cmath.log(complex(x)) if log_x is None else complex(log_x)
    out = 1.0 + 0.0j
    for k in range(p.m + 1):
        lt = p.log_t[k] - lx
        num = cmath.exp(lt - p.N * p.theta_sum(1, k + 1) * p.base.log)
        den = cmath.exp(lt - p.N * p.theta_sum(1, k) * p.base.log)
        out *= q_pochhammer(num, math.inf, p.base) / q_pochhammer(den, math.inf, p.base)
    return out


def connection_relation_matrix(p: LaxParams, k: int, x, *, log_x: complex | None = None) -> np.ndarray:
    """``C_k(x)`` with ``Y^{(k,k+1)} = Y^{(k+1,k+2)} C_k``, ``k = 0..m``.

    ``C_k = B[theta_{k+1}, 1/N; sigma_k - h_N, sigma_{k+1}] diag(s_k^{h_j - h_N})``
    with ``sigma_0 = theta_inf`` and ``sigma_{m+1} = theta_0``.
    """
    N = p.N
    if not 0 <= k <= p.m:
        raise ValueError(f"k must lie in 0..{p.m}")
    lx = cmath.log(complex(x)) if log_x is None else complex(log_x)
    u = (p.log_t[k] - lx) / p.base.log - N * p.theta_sum(1, k + 1)
    B = connection_matrix(p.thetas[k], p.sigma_ext(k) - hvec(N, N), p.sigma_ext(k + 1), u, p.base)
    d = [_s_k_power(p, k, hvec(j, N) - hvec(N, N)) for j in range(1, N + 1)]
    return B * np.asarray(d)[None, :]


# ---------------------------------------------------------------------------
# tau family and the coefficient data Y_1, G


@dataclass(frozen=True)
class TauFamily:
    """``tau``, ``tau_ij`` and ``tau~_ij`` under one window/cutoff pair, with ``D_ij``."""

    tau: complex
    tau_ij: np.ndarray
    tau_tilde_ij: np.ndarray
    D: np.ndarray
    settings: tuple = field(default=())


def shifted_params(p: LaxParams, kind: str, i: int, j: int) -> LaxParams:
    """Parameters of ``tau_ij`` (``kind='ij'``) or ``tau~_ij`` (``kind='tilde'``)."""
    N = p.N
    hi, hj, hN = hvec(i, N), hvec(j, N), hvec(N, N)
    if kind == "ij":
        return p.with_(theta_inf=p.theta_inf - hi + hj)
    if kind == "tilde":
        return p.with_(theta_inf=p.theta_inf - hi, theta_0=p.theta_0 - hj, sigmas=tuple(s - hN for s in p.sigmas))
    raise ValueError("kind must be 'ij' or 'tilde'")


def d_matrix(p: LaxParams) -> np.ndarray:
    """The constants ``D_ij``; the diagonal uses the same expression with ``i = j``."""
    N, m, base = p.N, p.m, p.base
    ti, t0 = p.theta_inf, p.theta_0
    qn = lambda u: q_number(u, base)  # noqa: E731
    common = 1.0 + 0.0j
    for k in range(N):
        for kk in range(k + 1, N):
            common /= qn(ti[kk] - ti[k]) * qn(t0[k] - t0[kk])
    common *= np.prod(p.s) * np.prod(p.s[:, N - 1] ** (-N))
    sign = (-1) ** ((m + 1) * (N - 1) + 1)
    lin = sum((k + 1) * (ti[k] - t0[k]) for k in range(N))
    D = np.zeros((N, N), dtype=complex)
    for i in range(N):
        for j in range(N):
            e = N * (N - 1) * p.theta_sum(1, m + 1) / 2 + ti[i] - ti[j] + lin
            v = sign * base.power(e) * qn(1 - ti[i] + ti[j]) * common
            for k in range(N):
                if k != j:
                    v *= qn(ti[j] - ti[k])
            D[i, j] = v
    return D


def tau_family(p: LaxParams, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6) -> TauFamily:
    """``tau``, all ``tau_ij`` and ``tau~_ij``; the shifted sums run on the worker pool."""
    N = p.N
    jobs = [p] + [shifted_params(p, "ij", i, j) for i in range(1, N + 1) for j in range(1, N + 1) if i != j]
    jobs += [shifted_params(p, "tilde", i, j) for i in range(1, N + 1) for j in range(1, N + 1)]
    vals = map_ordered(lambda q: _sum_terms(tau_terms(q, w, c, parallel=False), "tau"), jobs)
    t = vals[0]
    tij = np.full((N, N), t, dtype=complex)
    pos = 1
    for i in range(N):
        for j in range(N):
            if i != j:
                tij[i, j] = vals[pos]
                pos += 1
    tt = np.array(vals[pos:], dtype=complex).reshape(N, N)
    return TauFamily(t, tij, tt, d_matrix(p), (w.radius, c if isinstance(c, int) else c.max_instanton))


def _gamma_prod_inf(p: LaxParams, i: int) -> complex:
    """``prod_{k != i} Gamma_q(theta_inf^(i) - theta_inf^(k))``."""
    ti = p.theta_inf
    return np.prod([q_gamma(ti[i] - ti[k], p.base) for k in range(p.N) if k != i])


def y1_from_tau(p: LaxParams, fam: TauFamily) -> np.ndarray:
    """Off-diagonal ``Y_1`` from tau ratios (diagonal left as NaN)."""
    N, base, ti = p.N, p.base, p.theta_inf
    out = np.full((N, N), np.nan, dtype=complex)
    for i in range(N):
        gi = _gamma_prod_inf(p, i)
        for j in range(N):
            if i == j:
                continue
            den = q_number(1 - ti[i] + ti[j], base) * np.prod([q_gamma(1 + ti[j] - ti[k], base) for k in range(N)])
            out[i, j] = gi / den * fam.tau_ij[i, j] / fam.tau
    return out


def g_from_tau(p: LaxParams, fam: TauFamily) -> np.ndarray:
    """``G`` from tau ratios."""
    N, base, ti, t0 = p.N, p.base, p.theta_inf, p.theta_0
    tot = p.theta_sum(1, p.m + 1)
    log_t_pow = sum(th * lt for th, lt in zip(p.thetas, p.log_t))
    out = np.empty((N, N), dtype=complex)
    for i in range(N):
        gi = _gamma_prod_inf(p, i)
        for j in range(N):
            C = (delta(t0) - delta(ti) - t0[j] + ti[i] - N / 2 * tot * tot + (N / 2 - 1 - N * t0[j]) * tot)
            den = np.prod([q_gamma(1 + t0[k] - t0[j], base) for k in range(N)])
            out[i, j] = cmath.exp(C * base.log + log_t_pow) * gi / den * fam.tau_tilde_ij[i, j] / fam.tau
    return out


def det_g_inverse_closed_form(p: LaxParams) -> complex:
    """Closed form of ``1 / det G``."""
    N, m, base = p.N, p.m, p.base
    tot = N * p.theta_sum(1, m + 1)
    out = (-1) ** ((m + 1) * (N - 1)) * base.power(tot * (tot + 1) / 2)
    for a in range(N):
        for b in range(a + 1, N):
            out *= theta(p.theta_inf[a] - p.theta_inf[b], base) / theta(p.theta_0[a] - p.theta_0[b], base)
    hsum = sum((hvec(a, N) - hvec(N, N) for a in range(1, N)), np.zeros(N, dtype=complex))
    for k in range(m + 1):
        out *= _s_k_power(p, k, hsum) * cmath.exp(-N * p.thetas[k] * p.log_t[k])
    return out


def extract_Y1_G(p: LaxParams, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6, *, path: str = "series"):
    """``(Y_1, G)`` from the expansions of ``Y`` (``path='series'``) or from tau ratios (``path='tau'``).

    The tau path fills only the off-diagonal part of ``Y_1``; its diagonal
    is taken from the series path.
    """
    if path == "series":
        return y_series(p, "infinity", w, c)[1], y_series(p, "zero", w, c)[0]
    if path == "tau":
        fam = tau_family(p, w, c)
        y1 = y1_from_tau(p, fam)
        diag = np.diag(y_series(p, "infinity", w, c)[1])
        y1[np.diag_indices(p.N)] = diag
        return y1, g_from_tau(p, fam)
    raise ValueError("path must be 'series' or 'tau'")


# ---------------------------------------------------------------------------
# determinantal identities


def _settings(p: LaxParams, w: LatticeWindow, c, **extra) -> dict:
    out = {"N": p.N, "m": p.m, "radius": w.radius, "cutoff": c if isinstance(c, int) else c.max_instanton}
    out.update(extra)
    return out


def _row_replaced(mat: np.ndarray, row: int, new_row) -> np.ndarray:
    out = np.array(mat, dtype=complex)
    out[row] = new_row
    return out


def det_tau_sides(p: LaxParams, which_p: int, i: int, j: int, fam: TauFamily, fam_shift: TauFamily):
    """Both sides of the determinantal identity for ``T_{q,t_p}``; ``i != j`` are 1-based."""
    N = p.N
    if i == j:
        raise ValueError("the determinantal identity needs i != j")
    lhs = fam_shift.tau_ij[i - 1, j - 1] / fam_shift.tau - fam.tau_ij[i - 1, j - 1] / fam.tau
    M = _row_replaced(fam.tau_tilde_ij, j - 1, fam_shift.tau_tilde_ij[i - 1])
    e = -N * p.theta_sum(1, which_p) + p.thetas[which_p - 1]
    pre = cmath.exp(e * p.base.log + p.log_t[which_p - 1]) * fam.D[i - 1, j - 1]
    rhs = pre / (fam_shift.tau * fam.tau ** (N - 1)) * np.linalg.det(M)
    return lhs, rhs


def b_i0_pair(p: LaxParams, which_p: int, w: LatticeWindow, c) -> tuple[np.ndarray, np.ndarray]:
    """``B_{p,0}`` from the expansion at infinity and from the one at zero."""
    ps = p.shift_t(which_p)
    a = cmath.exp(-p.N * p.theta_sum(1, which_p) * p.base.log + p.log_t[which_p - 1])
    y1, g = extract_Y1_G(p, w, c)
    y1s, gs = extract_Y1_G(ps, w, c)
    from_inf = -a * np.eye(p.N) + y1s - y1
    from_zero = -a * gs @ np.linalg.inv(g)
    return from_inf, from_zero


def verify_det_tau(p: LaxParams, which_p: int, i: int, j: int, w: LatticeWindow = LatticeWindow(),
                   c: Cutoffs | int = 5, tol: float = 1e-4) -> list[VerificationReport]:
    """The tau determinantal identity for ``(p, i, j)`` and the two forms of ``B_{p,0}``."""
    t0 = time.perf_counter()
    st = _settings(p, w, c, shift_index=which_p, i=i, j=j)
    fam = tau_family(p, w, c)
    fam_shift = tau_family(p.shift_t(which_p), w, c)
    lhs, rhs = det_tau_sides(p, which_p, i, j, fam, fam_shift)
    r1 = VerificationReport(f"tau.determinantal.p{which_p}", relative_residual(lhs, rhs), tol, st,
                            details={"lhs": [lhs.real, lhs.imag], "rhs": [rhs.real, rhs.imag]})
    r1.wall_time = time.perf_counter() - t0
    t0 = time.perf_counter()
    a, b = b_i0_pair(p, which_p, w, c)
    r2 = VerificationReport(f"lax.B_i0_two_forms.p{which_p}", relative_residual(a, b), tol, _settings(p, w, c, shift_index=which_p))
    r2.wall_time = time.perf_counter() - t0
    return [r1, r2]


# ---------------------------------------------------------------------------
# Schlesinger transformations


def schlesinger(p: LaxParams, kind: str, i: int | None = None) -> LaxParams:
    """``r_i`` (``kind='r'``, ``1 <= i <= m+1``) or ``p`` (``kind='p'``) applied to the parameters."""
    N, m = p.N, p.m
    h1 = hvec(1, N)
    if kind == "p":
        return p.with_(theta_inf=p.theta_inf - h1, theta_0=p.theta_0 - h1, sigmas=tuple(s - h1 for s in p.sigmas))
    if kind != "r":
        raise ValueError("kind must be 'r' or 'p'")
    if i is None or not 1 <= i <= m + 1:
        raise ValueError(f"r_i needs 1 <= i <= {m + 1}")
    sig = tuple(s - h1 if j < i else s for j, s in enumerate(p.sigmas, start=1))
    th = tuple(t + (1.0 / N if j == i else 0.0) for j, t in enumerate(p.thetas, start=1))
    lt = tuple(v + (p.base.log if j > i else 0.0) for j, v in enumerate(p.log_t, start=1))
    return p.with_(theta_inf=p.theta_inf - h1, sigmas=sig, thetas=th, log_t=lt)


def _hadamard_scale(M: np.ndarray) -> float:
    return float(np.prod([np.linalg.norm(row) for row in M]))


def schlesinger_sides(p: LaxParams, kind: str, case: int, a: int, b: int, fam: TauFamily, fam_s: TauFamily,
                      i: int | None = None):
    """``(lhs, rhs, scale)`` of one determinantal Schlesinger identity.

    ``fam`` belongs to ``p`` and ``fam_s`` to the transformed parameters.
    ``scale`` bounds ``|lhs|`` by Hadamard's inequality and is used to judge
    identities whose right side vanishes.
    """
    N, base = p.N, p.base
    ti, t0 = p.theta_inf, p.theta_0
    qn = lambda u: q_number(u, base)  # noqa: E731
    if case == 1:
        if not (2 <= a <= N and 2 <= b <= N):
            raise ValueError("case 1 needs 2 <= a, b <= N")
        src, row = a, b
    elif case == 2:
        if not 2 <= b <= N:
            raise ValueError("case 2 needs 2 <= b <= N")
        a, src, row = 1, 1, b
    elif case == 3:
        if not 2 <= a <= N:
            raise ValueError("case 3 needs 2 <= a <= N")
        b, src, row = 1, a, 1
    else:
        raise ValueError("case must be 1, 2 or 3")
    if kind == "r":
        new_row = [base.power(-t0[k]) * fam_s.tau_tilde_ij[src - 1, k] for k in range(N)]
        e = ti[0] - p.theta_sum(1, i) - (1 if case == 2 else 0)
        pre = cmath.exp(p.log_t[i - 1] / N) * base.power(e)
    elif kind == "p":
        new_row = [qn(t0[0] - t0[k]) * fam_s.tau_tilde_ij[src - 1, k] for k in range(N)]
        e = ti[0] - t0[0] - p.theta_sum(1, p.m + 1) - (1 if case == 2 else 0)
        pre = base.power(e)
    else:
        raise ValueError("kind must be 'r' or 'p'")
    M = _row_replaced(fam.tau_tilde_ij, row - 1, new_row)
    # the D-constant enters these identities without its sign (-1)^{(m+1)(N-1)+1}
    sign_d = (-1) ** ((p.m + 1) * (N - 1) + 1)
    pre *= sign_d * fam.D[a - 1, b - 1] / (fam_s.tau * fam.tau ** (N - 1))
    lhs = pre * np.linalg.det(M)
    scale = abs(pre) * _hadamard_scale(M)
    sgn = -1 if kind == "r" else 1
    if case == 1:
        if a != b:
            return lhs, 0j, scale
        rhs = sgn * np.prod([q_gamma(1 + ti[b - 1] - ti[j], base) for j in range(N)])
        rhs /= np.prod([q_gamma(ti[a - 1] - ti[j], base) for j in range(N) if j != a - 1])
        rhs *= qn(1 - ti[a - 1] + ti[b - 1]) / qn(ti[a - 1] - ti[0])
    elif case == 2:
        rhs = sgn * -1 * fam.tau_ij[0, b - 1] / fam.tau * np.prod([qn(ti[0] - ti[j] - 1) for j in range(1, N)])
    else:
        rhs = sgn * fam_s.tau_ij[a - 1, 0] / fam_s.tau * qn(1 - ti[a - 1] + ti[0])
        rhs *= np.prod([qn(ti[0] - ti[j]) for j in range(1, N) if j != a - 1])
    return lhs, rhs, max(scale, abs(rhs))


def dual_forms(p: LaxParams, kind: str, i: int | None, w: LatticeWindow, c) -> tuple[np.ndarray, np.ndarray]:
    """``R_{i,0}`` (``kind='r'``) or ``P_{i,0}`` (``kind='p'``) from ``Y_1`` and from ``G``."""
    N = p.N
    E0 = np.zeros((N, N), dtype=complex)
    E0[0, 0] = 1.0
    I = np.eye(N, dtype=complex)
    y1, g = extract_Y1_G(p, w, c)
    y1s, gs = extract_Y1_G(schlesinger(p, kind, i), w, c)
    from_inf = y1s @ E0 + I - E0 - E0 @ y1
    if kind == "r":
        from_zero = -gs @ np.linalg.inv(g)
    else:
        # the leading column of p(G) drops out at x = 0
        from_zero = gs @ (I - E0) @ np.linalg.inv(g)
    return from_inf, from_zero


def verify_schlesinger(p: LaxParams, kind: str, case: int, indices: tuple = (2, 2), w: LatticeWindow = LatticeWindow(),
                       c: Cutoffs | int = 5, tol: float = 1e-3, *, i: int | None = None,
                       fam: TauFamily | None = None, fam_s: TauFamily | None = None) -> VerificationReport:
    """One determinantal identity from ``r_i`` or ``p``; ``case=0`` checks the dual ``R``/``P`` forms."""
    t0 = time.perf_counter()
    name = f"schlesinger.{kind}" + (f"{i}" if kind == "r" else "")
    st = _settings(p, w, c, kind=kind, case=case, indices=list(indices))
    if kind == "r":
        st["i"] = i
    if case == 0:
        a, b = dual_forms(p, kind, i, w, c)
        rep = VerificationReport(f"{name}.dual_forms", relative_residual(a, b), tol, st)
    else:
        fam = fam or tau_family(p, w, c)
        fam_s = fam_s or tau_family(schlesinger(p, kind, i), w, c)
        lhs, rhs, scale = schlesinger_sides(p, kind, case, indices[0], indices[1], fam, fam_s, i)
        rep = VerificationReport(f"{name}.case{case}", float(abs(lhs - rhs) / scale), tol, st,
                                 details={"lhs": [lhs.real, lhs.imag], "rhs": [complex(rhs).real, complex(rhs).imag]})
    rep.wall_time = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# Lax matrices


def _ratio_bound(p: LaxParams, k: int, log_x: complex) -> float:
    th, sg, lp = _y_display(p, k, 1, 1, [(0,) * p.N] * p.m, log_x)
    return max(abs(v) for v in BlockParams.from_display(th, sg, log_points=lp).ratios(p.base))


def _best_k(*pairs) -> int | None:
    """Annulus index whose expansion converges fastest at every ``(p, log_x)`` pair.

    Quotients such as ``Y(qx) Y(x)^{-1}`` are only meaningful with one ``k``
    for both factors, hence the joint choice.
    """
    best, best_r = None, 1.0
    for k in range(pairs[0][0].m + 2):
        r = max(_ratio_bound(p, k, lx) for p, lx in pairs)
        if r < best_r:
            best, best_r = k, r
    return best


def _y_at(p: LaxParams, log_x: complex, w, c, tau01, k: int | None) -> np.ndarray:
    if k is None:
        raise AnnulusError(f"x = {cmath.exp(log_x):.4g} lies in no common convergence annulus")
    Y = fundamental_solution(k, None, p, w, c, log_x=log_x, tau01=tau01)
    if np.linalg.cond(Y) > 1e12:
        raise AnnulusError(f"Y is numerically singular at x = {cmath.exp(log_x):.4g}")
    return Y


def _quotient(p1: LaxParams, lx1: complex, t1, p0: LaxParams, lx0: complex, t0, w, c) -> np.ndarray:
    """``Y_{p1}(x1) Y_{p0}(x0)^{-1}`` with both factors from the same annulus."""
    k = _best_k((p1, lx1), (p0, lx0))
    return _y_at(p1, lx1, w, c, t1, k) @ np.linalg.inv(_y_at(p0, lx0, w, c, t0, k))


def det_a_closed_form(p: LaxParams, x) -> complex:
    out = 1.0 + 0.0j
    for k in range(1, p.m + 2):
        a = cmath.exp((-1 - p.N * p.theta_sum(1, k)) * p.base.log + p.log_t[k - 1])
        b = cmath.exp((-1 - p.N * p.theta_sum(1, k - 1)) * p.base.log + p.log_t[k - 1])
        out *= (x - a) / (x - b)
    return out


def det_b_closed_form(p: LaxParams, i: int, x) -> complex:
    a = cmath.exp(-p.N * p.theta_sum(1, i - 1) * p.base.log + p.log_t[i - 1])
    b = cmath.exp(-p.N * p.theta_sum(1, i) * p.base.log + p.log_t[i - 1])
    return (x - a) / (x - b)


def _a_poles(p: LaxParams) -> list[complex]:
    return [cmath.exp((-1 - p.N * p.theta_sum(1, k - 1)) * p.base.log + p.log_t[k - 1]) for k in range(1, p.m + 2)]


def a0_closed_form(p: LaxParams, G: np.ndarray) -> np.ndarray:
    """Constant numerator coefficient of ``A`` in terms of ``G``."""
    m, base = p.m, p.base
    pre = (-1) ** (m + 1) * base.power(-m - 1 - p.theta_sum(1, m + 1))
    for k in range(m + 1):
        pre *= cmath.exp(-p.N * p.theta_sum(1, k) * base.log + p.log_t[k])
    return pre * G @ np.diag([base.power(-v) for v in p.theta_0]) @ np.linalg.inv(G)


@dataclass
class RationalA:
    """``A(x) = (sum_k coeffs[k] x^k) / prod_k (x - poles[k])``."""

    coeffs: np.ndarray
    poles: list

    def __call__(self, x) -> np.ndarray:
        num = sum(c * x ** k for k, c in enumerate(self.coeffs))
        return num / np.prod([x - a for a in self.poles])


def fit_rational_a(p: LaxParams, w: LatticeWindow, c, *, radii, points: int | None = None,
                   tau01: np.ndarray | None = None) -> RationalA:
    """Least-squares fit of the numerator of ``A = Y(qx) Y(x)^{-1}`` on circles.

    Rows are weighted by ``1 / |prod (x - a_k)|`` so every sample counts at
    the scale of ``A`` itself; a small and a large circle pin down the
    constant and leading coefficients respectively.
    """
    m, lq = p.m, p.base.log
    tau01 = normalizations(p, w, c) if tau01 is None else tau01
    n_pts = points or 2 * (m + 2)
    poles = _a_poles(p)
    rows, rhs = [], []
    for radius in radii:
        for r in range(n_pts):
            lx = math.log(radius) + 2j * math.pi * (r + 0.5) / n_pts - 1j * math.pi
            x = cmath.exp(lx)
            A = _quotient(p, lx + lq, tau01, p, lx, tau01, w, c)
            den = np.prod([x - a for a in poles])
            rows.append([x ** k / den for k in range(m + 2)])
            rhs.append(A.ravel())
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return RationalA(sol.reshape(m + 2, p.N, p.N), poles)


def _quotient_pairs(p: LaxParams, log_x: complex) -> list:
    lq = p.base.log
    return [((p, log_x + lq), (p, log_x))] + [((p.shift_t(i), log_x), (p, log_x)) for i in range(1, p.m + 2)]


def _worst_ratio(p: LaxParams, log_x: complex) -> float:
    """Slowest convergence over the quotients defining ``A`` and every ``B_i`` at ``x``."""
    worst = 0.0
    for pair in _quotient_pairs(p, log_x):
        worst = max(worst, min(max(_ratio_bound(pp, k, lx) for pp, lx in pair) for k in range(p.m + 2)))
    return worst


def lax_samples(p: LaxParams, n: int = 5, *, grid: int = 240, spacing: float = 1.5) -> list[complex]:
    """``n`` sample points where ``A`` and all ``B_i`` are well resolved.

    Radii come from a log grid spanning the moving points, ranked by
    :func:`_worst_ratio`, kept at least a factor ``spacing`` apart and away
    from the zeros and poles of the determinant closed forms.
    """
    mods = [abs(v) for v in p.t]
    qa = abs(p.q)
    lo, hi = math.log(min(mods) * qa ** 4), math.log(max(mods) / qa ** 4)
    special = [abs(a) for a in _a_poles(p)]
    for k in range(1, p.m + 2):
        special.append(abs(cmath.exp((-1 - p.N * p.theta_sum(1, k)) * p.base.log + p.log_t[k - 1])))
        special.append(abs(cmath.exp(-p.N * p.theta_sum(1, k - 1) * p.base.log + p.log_t[k - 1])))
        special.append(abs(cmath.exp(-p.N * p.theta_sum(1, k) * p.base.log + p.log_t[k - 1])))
    cands = []
    for g in range(grid):
        lr = lo + (hi - lo) * g / (grid - 1)
        if min(abs(lr - math.log(v)) for v in special) < math.log(spacing):
            continue
        cands.append((_worst_ratio(p, lr + 0.4j), lr))
    cands.sort()
    chosen: list[float] = []
    for _, lr in cands:
        if all(abs(lr - c) >= math.log(spacing) for c in chosen):
            chosen.append(lr)
        if len(chosen) == n:
            break
    return [cmath.exp(lr + 1j * (0.4 + 2 * math.pi * a / n)) for a, lr in enumerate(chosen)]


def lax_matrices(p: LaxParams, xs=None, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6, *, tol: float = 1e-4,
                 fit_radii: tuple | None = None):
    """``A`` and ``B_i`` at the samples ``xs`` together with their checks.

    ``A = Y(qx) Y(x)^{-1}`` and ``B_i = Y|_{t_i -> q t_i} Y^{-1}`` come from
    :func:`fundamental_solution` and are compared with the closed forms of
    their determinants.  The numerator of ``A`` is then fitted on a small and
    a large circle (which yields ``A_0`` and the leading coefficient), ``B_i`` is rebuilt
    from ``B_{i,0}`` via the expansion at infinity, and the compatibility
    condition is evaluated for these rational matrices.
    Without ``xs`` the samples come from :func:`lax_samples`.
    Returns ``(A, B, reports)`` with ``A[s] = A(xs[s])`` and ``B[i-1][s] = B_i(xs[s])``.
    """
    t_start = time.perf_counter()
    N, m, lq = p.N, p.m, p.base.log
    xs = [complex(x) for x in (lax_samples(p) if xs is None else xs)]
    lxs = [cmath.log(x) for x in xs]
    tau01 = normalizations(p, w, c)
    shifted = [p.shift_t(i) for i in range(1, m + 2)]
    tau01_s = [normalizations(ps, w, c) for ps in shifted]

    A = [_quotient(p, lx + lq, tau01, p, lx, tau01, w, c) for lx in lxs]
    B = [[_quotient(ps, lx, t01, p, lx, tau01, w, c) for lx in lxs]
         for ps, t01 in zip(shifted, tau01_s)]

    st = _settings(p, w, c, samples=len(xs))
    reps = []

    def add(name, res):
        reps.append(VerificationReport(name, res, tol, dict(st)))

    add("lax.det_A", max(relative_residual(np.linalg.det(a), det_a_closed_form(p, x)) for a, x in zip(A, xs)))
    add("lax.det_B", max(relative_residual(np.linalg.det(B[i][s]), det_b_closed_form(p, i + 1, xs[s]))
                         for i in range(m + 1) for s in range(len(xs))))

    def radii(pp):
        if fit_radii is not None:
            return fit_radii
        return abs(lax_samples(pp, 1)[0]), 10.0 * abs(pp.t[0]) / abs(pp.q)

    rat = fit_rational_a(p, w, c, radii=radii(p), tau01=tau01)
    rat_s = [fit_rational_a(ps, w, c, radii=radii(ps), tau01=t01) for ps, t01 in zip(shifted, tau01_s)]
    add("lax.A_leading", relative_residual(rat.coeffs[-1], np.diag([p.base.power(-v) for v in p.theta_inf])))
    y1, g = extract_Y1_G(p, w, c)
    add("lax.A0_closed_form", relative_residual(rat.coeffs[0], a0_closed_form(p, g)))
    add("lax.A_rational_fit", max(relative_residual(rat(x), a) for x, a in zip(xs, A)))

    comp = 0.0
    for i in range(1, m + 2):
        y1s = extract_Y1_G(shifted[i - 1], w, c)[0]
        pole = cmath.exp(-N * p.theta_sum(1, i) * lq + p.log_t[i - 1])
        b0 = -pole * np.eye(N) + y1s - y1

        def b_rat(x):
            return (x * np.eye(N) + b0) / (x - pole)

        for x in xs:
            comp = max(comp, relative_residual(rat_s[i - 1](x) @ b_rat(x), b_rat(p.q * x) @ rat(x)))
    add("lax.compatibility", comp)
    for r in reps:
        r.wall_time = time.perf_counter() - t_start
    return A, B, reps


# ---------------------------------------------------------------------------
# checks on the fundamental solutions


def overlap_modulus(p: LaxParams, k: int) -> float:
    """``|x|`` where ``Y^{(k,k+1)}`` and ``Y^{(k+1,k+2)}`` converge equally fast."""
    e = -p.N * p.theta_sum(1, k) - (1 + p.N * p.thetas[k]) / 2
    return abs(cmath.exp(p.log_t[k] + e * p.base.log))


def verify_connection_relation(p: LaxParams, k: int, xs=None, w: LatticeWindow = LatticeWindow(),
                               c: Cutoffs | int = 6, tol: float = 1e-4, *, phases: int = 3) -> VerificationReport:
    """``Y^{(k,k+1)} = Y^{(k+1,k+2)} C_k`` at points where both expansions converge."""
    t0 = time.perf_counter()
    st = _settings(p, w, c, k=k)
    if xs is None:
        r = overlap_modulus(p, k)
        xs = [r * cmath.exp(1j * (0.4 + 2 * math.pi * a / phases)) for a in range(phases)]
    lxs = [cmath.log(complex(x)) for x in xs]
    if not all(_annulus_ok(p, k, lx) and _annulus_ok(p, k + 1, lx) for lx in lxs):
        return VerificationReport.skip(f"lax.connection_relation.k{k}", "no overlap annulus", tol, st)
    tau01 = normalizations(p, w, c)
    res = 0.0
    for lx in lxs:
        Yk = fundamental_solution(k, None, p, w, c, log_x=lx, tau01=tau01)
        Yk1 = fundamental_solution(k + 1, None, p, w, c, log_x=lx, tau01=tau01)
        res = max(res, relative_residual(Yk, Yk1 @ connection_relation_matrix(p, k, None, log_x=lx)))
    rep = VerificationReport(f"lax.connection_relation.k{k}", res, tol, st)
    rep.wall_time = time.perf_counter() - t0
    return rep


def verify_det_y(p: LaxParams, xs, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 8,
                 tol: float = 1e-6) -> list[VerificationReport]:
    """``det Y^{(0,1)}`` against its closed form, and the spread of their ratio."""
    t0 = time.perf_counter()
    tau01 = normalizations(p, w, c)
    ratios = []
    for x in xs:
        Y = fundamental_solution(0, x, p, w, c, tau01=tau01)
        ratios.append(np.linalg.det(Y) / det_y_closed_form(p, x))
    ratios = np.array(ratios)
    st = _settings(p, w, c, samples=len(xs))
    spread = float(np.max(np.abs(ratios - ratios.mean())) / abs(ratios.mean()))
    reps = [VerificationReport("lax.det_Y.x_independence", spread, tol, st),
            VerificationReport("lax.det_Y.closed_form", float(np.max(np.abs(ratios - 1))), tol, dict(st))]
    for r in reps:
        r.wall_time = time.perf_counter() - t0
    return reps


def verify_asymptotics(p: LaxParams, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6,
                       scale: float = 1e3) -> VerificationReport:
    """``Y^{(0,1)} x^{theta_inf} -> I`` at ``|x| = scale |t_1|`` (tolerance ``4 |t_1| / |x|``)."""
    x = scale * abs(p.t[0]) * cmath.exp(0.3j)
    Y = fundamental_solution(0, x, p, w, c)
    Yh = Y @ np.diag(np.exp(p.theta_inf * cmath.log(x)))
    return VerificationReport("lax.Y_infinity_asymptotics", float(np.max(np.abs(Yh - np.eye(p.N)))), 4.0 / scale,
                              _settings(p, w, c, scale=scale))


def verify_extraction(p: LaxParams, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6,
                      tol: float = 1e-4, det_tol: float = 1e-6) -> list[VerificationReport]:
    """``Y_1`` and ``G`` by series extraction versus tau ratios, and ``det G`` against its closed form."""
    t0 = time.perf_counter()
    st = _settings(p, w, c)
    y1s, gs = extract_Y1_G(p, w, c, path="series")
    y1t, gt = extract_Y1_G(p, w, c, path="tau")
    off = ~np.eye(p.N, dtype=bool)
    reps = [
        VerificationReport("lax.Y1_two_paths", relative_residual(y1s[off], y1t[off]), tol, dict(st)),
        VerificationReport("lax.G_two_paths", relative_residual(gs, gt), tol, dict(st)),
        VerificationReport("lax.det_G_closed_form",
                           float(abs(np.linalg.det(gs) * det_g_inverse_closed_form(p) - 1)), det_tol, dict(st)),
    ]
    for r in reps:
        r.wall_time = time.perf_counter() - t0
    return reps


def verify_tau_forms(p: LaxParams, w: LatticeWindow = LatticeWindow(), c: Cutoffs | int = 6,
                     tol: float = 1e-10) -> list[VerificationReport]:
    """Lattice sum of ``C Z`` versus the block form, and ``tau_i^{(0,1)}`` versus its closed form."""
    t0 = time.perf_counter()
    st = _settings(p, w, c)
    tv = tau(p, w, c)
    r1 = VerificationReport("tau.block_form", relative_residual(tv, tau_block_form(p, w, c)), tol, st)
    closed = [tau_i_01_closed_form(p, i, tv) for i in range(1, p.N + 1)]
    r2 = VerificationReport("tau.normalization", relative_residual(normalizations(p, w, c), closed), tol, st)
    for r in (r1, r2):
        r.wall_time = time.perf_counter() - t0
    return [r1, r2]
