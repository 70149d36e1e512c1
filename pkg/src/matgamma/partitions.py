"""Integer partitions and the generalized Pochhammer symbol.

Partitions are plain tuples of positive integers in weakly decreasing order.
The empty tuple is the unique partition of zero.
"""
from __future__ import annotations

import math
import numbers
from functools import lru_cache
from typing import Iterator, Sequence

Partition = tuple[int, ...]


def is_partition(kappa: Sequence[int]) -> bool:
    """Return True if ``kappa`` is a weakly decreasing tuple of positive ints."""
    prev = math.inf
    for part in kappa:
        if not isinstance(part, numbers.Integral) or part < 1 or part > prev:
            return False
        prev = part
    return True


def as_partition(kappa: Sequence[int]) -> Partition:
    """Coerce a sequence to a partition, dropping trailing zeros.

    Raises
    ------
    ValueError
        If the entries are negative, non-integral or not weakly decreasing.
    """
    parts = []
    for p in kappa:
        ip = int(p)
        if ip != p:
            raise ValueError(f"non-integer part {p!r}")
        parts.append(ip)
    while parts and parts[-1] == 0:
        parts.pop()
    out = tuple(parts)
    if not is_partition(out):
        raise ValueError(f"{tuple(kappa)!r} is not a partition")
    return out


def _iter_partitions(m: int, max_parts: int, max_part: int) -> Iterator[Partition]:
    if m == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(m, max_part), 0, -1):
        # the remaining parts can absorb at most (max_parts - 1) * first
        if first * max_parts < m:
            break
        for rest in _iter_partitions(m - first, max_parts - 1, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _partitions_cached(m: int, max_parts: int) -> tuple[Partition, ...]:
    return tuple(_iter_partitions(m, max_parts, m))


def partitions_of(m: int, max_parts: int | None = None) -> list[Partition]:
    """All partitions of ``m`` with at most ``max_parts`` parts.

    Parameters
    ----------
    m : int
        Weight, ``m >= 0``.
    max_parts : int, optional
        Upper bound on the number of parts. Defaults to ``m`` (no bound).

    Returns
    -------
    list of tuple
        Partitions in reverse-lexicographic order, e.g. ``(3), (2, 1), (1, 1, 1)``.
    """
    m = int(m)
    if m < 0:
        raise ValueError("m must be non-negative")
    if max_parts is None:
        max_parts = max(m, 1)
    max_parts = int(max_parts)
    if max_parts < 1:
        raise ValueError("max_parts must be at least 1")
    return list(_partitions_cached(m, min(max_parts, max(m, 1))))


def partitions_upto(max_weight: int, max_parts: int | None = None) -> list[Partition]:
    """Partitions of every weight ``0..max_weight``, grouped by weight."""
    out: list[Partition] = []
    for m in range(max_weight + 1):
        out.extend(partitions_of(m, max_parts))
    return out


def conjugate(kappa: Partition) -> Partition:
    """Conjugate (transposed) partition."""
    if not kappa:
        return ()
    return tuple(sum(1 for p in kappa if p > j) for j in range(kappa[0]))


def dominates(kappa: Partition, lam: Partition) -> bool:
    """True if ``kappa >= lam`` in dominance order (same weight assumed)."""
    s_k = s_l = 0
    for i in range(max(len(kappa), len(lam))):
        s_k += kappa[i] if i < len(kappa) else 0
        s_l += lam[i] if i < len(lam) else 0
        if s_k < s_l:
            return False
    return True


def gen_pochhammer(a: float, kappa: Sequence[int]) -> float:
    """Generalized Pochhammer symbol in the zonal (alpha = 2) convention.

    ``(a)_kappa = prod_i prod_{j=1}^{kappa_i} (a - (i - 1)/2 + j - 1)``

    >>> gen_pochhammer(3.0, (2,))
    12.0
    >>> gen_pochhammer(3.0, (1, 1))
    7.5
    """
    value = 1.0
    for i, part in enumerate(kappa):
        base = a - 0.5 * i
        for j in range(part):
            value *= base + j
    return float(value)


def log_abs_pochhammer(a: float, kappa: Sequence[int]) -> tuple[float, int]:
    """``(log|(a)_kappa|, sign)``; sign is 0 when a factor vanishes."""
    log_abs = 0.0
    sign = 1
    for i, part in enumerate(kappa):
        base = a - 0.5 * i
        for j in range(part):
            f = base + j
            if f == 0.0:
                return -math.inf, 0
            if f < 0:
                sign = -sign
            log_abs += math.log(abs(f))
    return log_abs, sign
