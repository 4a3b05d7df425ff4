"""Young-diagram combinatorics and the Nekrasov factor.

Partitions are plain tuples of weakly decreasing positive integers; the
empty tuple is the empty diagram.  Cells are ``(i, j)`` with 1-based row
``i`` and column ``j``.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product
from numbers import Integral
from typing import Iterator, Sequence

from .qspecial import QBase

__all__ = [
    "Partition",
    "PartitionTuple",
    "make_partition",
    "size",
    "conjugate",
    "arm_leg",
    "cells",
    "partitions_of",
    "partitions_upto",
    "enumerate_tuples",
    "bar",
    "r_n",
    "add_ones",
    "transform",
    "nekrasov_factor",
    "nekrasov_exponents",
]

Partition = tuple
PartitionTuple = tuple


def make_partition(parts: Sequence[int]) -> Partition:
    """Validate ``parts`` and strip trailing zeros."""
    parts = tuple(int(p) for p in parts)
    while parts and parts[-1] == 0:
        parts = parts[:-1]
    if any(p <= 0 for p in parts):
        raise ValueError(f"parts must be positive: {parts}")
    if any(a < b for a, b in zip(parts, parts[1:])):
        raise ValueError(f"parts must be weakly decreasing: {parts}")
    return parts


def size(lam) -> int:
    """``|lam|`` for a partition or a tuple of partitions."""
    if lam and isinstance(lam[0], tuple):
        return sum(sum(p) for p in lam)
    return sum(lam)


@lru_cache(maxsize=None)
def conjugate(lam: Partition) -> Partition:
    if not lam:
        return ()
    return tuple(sum(1 for p in lam if p >= j) for j in range(1, lam[0] + 1))


def _part(lam: Partition, i: int) -> int:
    return lam[i - 1] if 1 <= i <= len(lam) else 0


def arm_leg(lam: Partition, cell: tuple[int, int]) -> tuple[int, int]:
    """Arm and leg length of ``cell`` in ``lam``; cells outside ``lam`` allowed."""
    i, j = cell
    return _part(lam, i) - j, _part(conjugate(lam), j) - i


def cells(lam: Partition) -> Iterator[tuple[int, int]]:
    for i, row in enumerate(lam, start=1):
        for j in range(1, row + 1):
            yield i, j


@lru_cache(maxsize=None)
def partitions_of(n: int) -> tuple[Partition, ...]:
    """Partitions of ``n`` in reverse lexicographic order, ``(n)`` first."""
    if n == 0:
        return ((),)
    out = []

    def rec(rest, cap, acc):
        if rest == 0:
            out.append(tuple(acc))
            return
        for p in range(min(rest, cap), 0, -1):
            acc.append(p)
            rec(rest - p, p, acc)
            acc.pop()

    rec(n, n, [])
    return tuple(out)


@lru_cache(maxsize=None)
def partitions_upto(n: int) -> tuple[Partition, ...]:
    return tuple(lam for k in range(n + 1) for lam in partitions_of(k))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def enumerate_tuples(N: int, max_total: int) -> tuple[PartitionTuple, ...]:
    """All ``N``-tuples of partitions with total size at most ``max_total``.

    Graded by total size; within a grade ordered by the composition of sizes
    (largest first component first) and then componentwise in the order of
    :func:`partitions_of`.  This order is fixed: summations follow it.
    """
    if N < 1:
        raise ValueError("N must be positive")
    out = []
    for total in range(max_total + 1):
        for comp in _compositions(total, N):
            out.extend(product(*(partitions_of(k) for k in comp)))
    return tuple(out)


def bar(lam: Partition) -> Partition:
    """Subtract one from every part and drop the zeros."""
    return tuple(p - 1 for p in lam if p > 1)


def r_n(lam: Partition, n: int) -> Partition:
    """``(lam_1 + 1, ..., lam_n + 1, lam_{n+2}, ...)``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    head = tuple(_part(lam, i) + 1 for i in range(1, n + 1))
    tail = tuple(lam[n + 1:])
    return head + tail


def add_ones(lam: Partition, m: int) -> Partition:
    """``lam + 1^m``; requires ``m >= len(lam)``."""
    if m < len(lam):
        raise ValueError(f"add_ones needs m >= len(lam) = {len(lam)}, got m={m}")
    return tuple(_part(lam, i) + 1 for i in range(1, m + 1))


def transform(lam: Partition, kind: str, n: int | None = None) -> Partition:
    if kind == "bar":
        return bar(lam)
    if kind == "r_n":
        return r_n(lam, n)
    if kind == "add_ones":
        return add_ones(lam, n)
    raise ValueError(f"unknown transform {kind!r}")


@lru_cache(maxsize=None)
def nekrasov_exponents(lam: Partition, mu: Partition) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Integer q-exponents of the Nekrasov factor.

    ``N_{lam,mu}(u) = prod_{e in first} (1 - q^e u) * prod_{e in second} (1 - q^e u)``.
    """
    lc, mc = conjugate(lam), conjugate(mu)
    first = tuple(
        -(_part(lc, j) - i) - (_part(mu, i) - j) - 1 for i, j in cells(lam)
    )
    second = tuple(
        (_part(mc, j) - i) + (_part(lam, i) - j) + 1 for i, j in cells(mu)
    )
    return first, second


def nekrasov_factor(lam: Partition, mu: Partition, u, base: QBase, *, exponent=None) -> complex:
    """``N_{lam,mu}(u)``.

    Pass ``exponent=k`` instead of ``u`` to mean ``u = q**k``.  With an
    integer ``k`` every factor exponent is an integer and the structural zeros
    come out as exact 0.
    """
    first, second = nekrasov_exponents(lam, mu)
    exps = first + second
    out = 1.0 + 0.0j
    if exponent is not None and isinstance(exponent, Integral):
        k = int(exponent)
        for e in exps:
            if e + k == 0:
                return 0.0j
            out *= 1.0 - base.ipow(e + k)
        return out
    if exponent is not None:
        u = base.power(exponent)
    u = complex(u)
    for e in exps:
        out *= 1.0 - base.ipow(e) * u
    return out
