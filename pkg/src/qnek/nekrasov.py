"""Vectorized instanton sums over chains of partition tuples.

The instanton part of an (M+2)-point block is a sum over tuples
``lam_1 .. lam_{M-1}`` whose summand factorizes along the chain, so it is
evaluated as a sequence of matrix-vector products.  Nekrasov factors are
tabulated for all pairs of partitions up to the cutoff.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from numbers import Integral
from typing import Sequence

import numpy as np

from .partitions import enumerate_tuples, nekrasov_exponents, partitions_upto, size
from .qspecial import RESONANCE_TOL, QBase, ResonanceError

__all__ = ["snap", "Tables", "tables", "chain_sum"]

SNAP_TOL = 1e-10


def snap(e):
    """Return an ``int`` when ``e`` is within ``SNAP_TOL`` of an integer."""
    e = complex(e)
    k = round(e.real)
    if abs(e - k) < SNAP_TOL:
        return int(k)
    return e


@dataclass(frozen=True)
class Tables:
    N: int
    cutoff: int
    parts: tuple            # all partitions of size <= pmax
    exps: np.ndarray        # (P, P, L) int exponents, padded
    mask: np.ndarray        # (P, P, L) bool
    tuples: tuple           # N-tuples with total size <= cutoff
    idx: np.ndarray         # (T, N) partition indices of each tuple
    sizes: np.ndarray       # (T,) total sizes


@lru_cache(maxsize=None)
def _pair_exponents(pmax: int):
    parts = partitions_upto(pmax)
    P = len(parts)
    L = 2 * pmax if pmax else 1
    exps = np.zeros((P, P, L), dtype=np.int64)
    mask = np.zeros((P, P, L), dtype=bool)
    for a, la in enumerate(parts):
        for b, mb in enumerate(parts):
            f, s = nekrasov_exponents(la, mb)
            e = f + s
            exps[a, b, : len(e)] = e
            mask[a, b, : len(e)] = True
    exps.setflags(write=False)
    mask.setflags(write=False)
    return parts, exps, mask


@lru_cache(maxsize=None)
def tables(N: int, cutoff: int, pmax: int | None = None) -> Tables:
    pmax = cutoff if pmax is None else max(pmax, cutoff)
    parts, exps, mask = _pair_exponents(pmax)
    index = {lam: i for i, lam in enumerate(parts)}
    tup = enumerate_tuples(N, cutoff)
    idx = np.array([[index[lam] for lam in t] for t in tup], dtype=np.int64).reshape(len(tup), N)
    sizes = np.array([size(t) if N > 1 else sum(t[0]) for t in tup], dtype=np.int64)
    return Tables(N, cutoff, parts, exps, mask, tup, idx, sizes)


def _qpow_table(base: QBase, lo: int, hi: int) -> np.ndarray:
    return np.array([base.ipow(k) for k in range(lo, hi + 1)], dtype=complex)


def factor_table(tab: Tables, e, base: QBase) -> np.ndarray:
    """``N_{a,b}(q**e)`` for all partition pairs ``(a, b)`` in ``tab.parts``."""
    e = snap(e)
    L = tab.exps.shape[2]
    span = L + 2
    if isinstance(e, Integral):
        lo, hi = -span + min(0, e), span + max(0, e)
        qp = _qpow_table(base, lo, hi)
        vals = 1.0 - qp[tab.exps + e - lo]
    else:
        qp = _qpow_table(base, -span, span)
        vals = 1.0 - qp[tab.exps + span] * base.power(e)
    vals = np.where(tab.mask, vals, 1.0)
    return np.prod(vals, axis=2)


def _boundary_index(tab: Tables, t) -> list[int]:
    index = {lam: i for i, lam in enumerate(tab.parts)}
    return [index[lam] for lam in t]


def edge_matrix(tab: Tables, rows_idx: np.ndarray, cols_idx: np.ndarray, exps_kk, base: QBase) -> np.ndarray:
    """``prod_{k,k'} N_{row_k, col_k'}(q**e[k][k'])`` as a (len(rows), len(cols)) array."""
    N = tab.N
    out = np.ones((rows_idx.shape[0], cols_idx.shape[0]), dtype=complex)
    for k in range(N):
        for kk in range(N):
            F = factor_table(tab, exps_kk[k][kk], base)
            out *= F[np.ix_(rows_idx[:, k], cols_idx[:, kk])]
    return out


def vertex_vector(tab: Tables, idx: np.ndarray, sigma: Sequence[complex], base: QBase) -> np.ndarray:
    N = tab.N
    out = np.ones(idx.shape[0], dtype=complex)
    for k in range(N):
        for kk in range(N):
            F = factor_table(tab, sigma[k] - sigma[kk], base)
            out *= F[idx[:, k], idx[:, kk]]
    return out


def chain_sum(
    N: int,
    thetas: Sequence[complex],
    sigmas: Sequence[Sequence[complex]],
    ratios: Sequence[complex],
    cutoff: int,
    base: QBase,
    *,
    inner=None,
    outer=None,
    fix_first=None,
    fix_last=None,
    grade: str | None = None,
):
    """Sum over ``lam_1 .. lam_{M-1}`` of the chain summand.

    ``thetas[p-1] = theta_p`` (p = 1..M), ``sigmas[p] = sigma_p`` (p = 0..M),
    ``ratios[p-1]`` is the expansion variable attached to ``|lam_p|``.
    ``inner``/``outer`` replace the empty boundary tuples ``lam_0``/``lam_M``;
    ``fix_first``/``fix_last`` pin ``lam_1``/``lam_{M-1}`` to one tuple.
    With ``grade='first'`` or ``'last'`` the result is an array indexed by
    ``|lam_1|`` (resp. ``|lam_{M-1}|``) without that position's ratio power.
    """
    M = len(thetas)
    if len(sigmas) != M + 1 or len(ratios) != M - 1:
        raise ValueError("need M thetas, M+1 sigmas and M-1 ratios")
    empty = ((),) * N
    inner = empty if inner is None else tuple(inner)
    outer = empty if outer is None else tuple(outer)
    pmax = max([cutoff] + [size(t) for t in (inner, outer, fix_first or empty, fix_last or empty)])
    tab = tables(N, cutoff, pmax)
    in_idx = np.array([_boundary_index(tab, inner)])
    out_idx = np.array([_boundary_index(tab, outer)])

    def exps(p):
        return [[snap(sigmas[p][k] - thetas[p - 1] - sigmas[p - 1][kk]) for kk in range(N)] for k in range(N)]

    if M == 1:
        val = edge_matrix(tab, out_idx, in_idx, exps(1), base)[0, 0]
        return np.array([val]) if grade else val

    def layer(p):
        if p == 1 and fix_first is not None:
            return np.array([_boundary_index(tab, fix_first)])
        if p == M - 1 and fix_last is not None:
            return np.array([_boundary_index(tab, fix_last)])
        return tab.idx

    def sizes_of(idx):
        return np.array([sum(sum(tab.parts[i]) for i in row) for row in idx], dtype=np.int64)

    graded_p = {"first": 1, "last": M - 1, None: None}[grade]
    prev_idx = in_idx
    # v[a, g]: partial sums ending at tuple a, split by grade g
    v = np.ones((1, 1), dtype=complex)
    for p in range(1, M):
        cur = layer(p)
        sz = tab.sizes if cur is tab.idx else sizes_of(cur)
        w = edge_matrix(tab, cur, prev_idx, exps(p), base) @ v
        den = vertex_vector(tab, cur, sigmas[p], base)
        if np.any(np.abs(den) < RESONANCE_TOL):
            bad = int(np.argmin(np.abs(den)))
            raise ResonanceError(f"internal Nekrasov denominator vanishes at layer p={p}, tuple index {bad}")
        w /= den[:, None]
        if p == graded_p:
            G = int(sz.max()) + 1
            g = np.zeros((w.shape[0], G), dtype=complex)
            g[np.arange(w.shape[0]), sz] = w[:, 0]
            w = g
        else:
            w *= np.power(complex(ratios[p - 1]), sz)[:, None]
        v = w
        prev_idx = cur
    res = (edge_matrix(tab, out_idx, prev_idx, exps(M), base) @ v)[0]
    return res if grade else complex(res[0])
