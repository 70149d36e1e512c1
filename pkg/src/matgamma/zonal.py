"""Zonal polynomials in the C-normalization.

``C_kappa`` is expanded in monomial symmetric functions ``m_lambda`` with
exact rational coefficients. The coefficients come from the eigenfunction
recurrence of the Laplace-Beltrami type operator whose eigenfunctions are the
Jack polynomials at parameter 2, and are then rescaled so that

    sum_{|kappa| = m} C_kappa(X) = (tr X)^m.

For evaluation at high weight (hypergeometric series) use
:mod:`matgamma._jack`, which implements a floating-point recursion in the
number of variables and is cross-checked against this table in the tests.
"""
from __future__ import annotations

import csv
import io
import math
import threading
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import DimensionError, TableExhaustedError
from .linalg import MatrixLike, as_square, as_sym
from .partitions import Partition, as_partition, dominates, partitions_of

DEFAULT_MAX_WEIGHT = 20


def _rho(kappa: Partition) -> int:
    # sum_i kappa_i (kappa_i - i) with 1-based rows
    return sum(k * (k - i - 1) for i, k in enumerate(kappa))


def _raise_moves(lam: Partition) -> list[tuple[Partition, int]]:
    """Partitions reached from ``lam`` by moving ``t`` units up from row j to row i."""
    moves = []
    n = len(lam)
    for i in range(n):
        for j in range(i + 1, n):
            for t in range(1, lam[j] + 1):
                mu = list(lam)
                mu[i] += t
                mu[j] -= t
                mu = tuple(sorted((p for p in mu if p > 0), reverse=True))
                moves.append((mu, lam[i] - lam[j] + 2 * t))
    return moves


class ZonalTable:
    """Exact monomial coefficients of ``C_kappa`` up to ``max_weight``.

    Weights are built lazily on first use and then cached; the object is
    safe to share between threads.

    Parameters
    ----------
    max_weight : int
        Largest weight that may be requested.
    max_parts : int, optional
        Only partitions with at most this many parts are tabulated. This is
        enough for evaluation at spectra of length ``<= max_parts`` and keeps
        the tables small for low-dimensional matrices.
    """

    def __init__(self, max_weight: int = DEFAULT_MAX_WEIGHT, max_parts: int | None = None):
        if max_weight < 0:
            raise ValueError("max_weight must be non-negative")
        self.max_weight = int(max_weight)
        self.max_parts = None if max_parts is None else int(max_parts)
        self._blocks: dict[int, tuple[list[Partition], list[list[Fraction]]]] = {}
        self._float_blocks: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    def _parts(self, m: int) -> list[Partition]:
        cap = m if self.max_parts is None else min(self.max_parts, max(m, 1))
        return partitions_of(m, max(cap, 1))

    def _check_weight(self, m: int) -> None:
        if m > self.max_weight:
            raise TableExhaustedError(
                f"weight {m} exceeds the table's max_weight={self.max_weight}"
            )

    def block(self, m: int) -> tuple[list[Partition], list[list[Fraction]]]:
        """Partitions of weight ``m`` and the coefficient matrix ``c[kappa][lambda]``."""
        self._check_weight(m)
        with self._lock:
            if m not in self._blocks:
                self._blocks[m] = self._build(m)
            return self._blocks[m]

    def float_block(self, m: int) -> tuple[list[Partition], np.ndarray]:
        parts, coef = self.block(m)
        with self._lock:
            if m not in self._float_blocks:
                self._float_blocks[m] = np.array(
                    [[float(c) for c in row] for row in coef], dtype=float
                )
            return parts, self._float_blocks[m]

    def _build(self, m: int) -> tuple[list[Partition], list[list[Fraction]]]:
        parts = self._parts(m)
        index = {p: i for i, p in enumerate(parts)}
        moves = []
        for lam in parts:
            agg: dict[int, int] = {}
            for mu, f in _raise_moves(lam):
                agg[index[mu]] = agg.get(index[mu], 0) + f
            moves.append(sorted(agg.items()))
        rho = [_rho(p) for p in parts]
        size = len(parts)
        # unnormalized rows: coefficient of m_kappa equals 1
        raw = []
        for a, kappa in enumerate(parts):
            row = [Fraction(0)] * size
            row[a] = Fraction(1)
            for b in range(a + 1, size):
                if not dominates(kappa, parts[b]):
                    continue
                s = Fraction(0)
                for idx, f in moves[b]:
                    if row[idx]:
                        s += f * row[idx]
                if s:
                    row[b] = s / (rho[a] - rho[b])
            raw.append(row)
        # scale rows so that sum_kappa C_kappa = (tr X)^m, whose m_lambda
        # coefficient is the multinomial m! / prod(lambda_i!)
        mfact = math.factorial(m)
        scale = [Fraction(0)] * size
        for b, lam in enumerate(parts):
            target = Fraction(mfact, math.prod(math.factorial(p) for p in lam))
            acc = sum((scale[a] * raw[a][b] for a in range(b)), Fraction(0))
            scale[b] = target - acc
        coef = [[scale[a] * c for c in raw[a]] for a in range(size)]
        return parts, coef

    def coefficients(self, kappa: Sequence[int]) -> dict[Partition, Fraction]:
        """Nonzero monomial coefficients of ``C_kappa``."""
        kappa = as_partition(kappa)
        m = sum(kappa)
        if self.max_parts is not None and len(kappa) > self.max_parts:
            raise KeyError(f"{kappa} has more than max_parts={self.max_parts} parts")
        parts, coef = self.block(m)
        row = coef[parts.index(kappa)]
        return {lam: c for lam, c in zip(parts, row) if c}

    def evaluate(self, kappa: Sequence[int], eigs: np.ndarray) -> np.ndarray:
        """``C_kappa`` at a batch of spectra, ``eigs`` of shape ``(..., n)``."""
        kappa = as_partition(kappa)
        eigs = np.asarray(eigs, dtype=float)
        n = eigs.shape[-1]
        m = sum(kappa)
        self._check_weight(m)
        if len(kappa) > n:
            return np.zeros(eigs.shape[:-1])
        parts, fcoef = self.float_block(m)
        row = fcoef[parts.index(kappa)]
        out = np.zeros(eigs.shape[:-1])
        for lam, c in zip(parts, row):
            if c == 0.0 or len(lam) > n:
                continue
            out = out + c * monomial(lam, eigs)
        return out


@lru_cache(maxsize=None)
def _exponent_rows(lam: Partition, n: int) -> np.ndarray:
    """All distinct arrangements of ``lam`` padded with zeros to length ``n``."""
    counts: dict[int, int] = {}
    for p in tuple(lam) + (0,) * (n - len(lam)):
        counts[p] = counts.get(p, 0) + 1
    values = sorted(counts)
    rows: list[tuple[int, ...]] = []

    def rec(prefix: list[int]) -> None:
        if len(prefix) == n:
            rows.append(tuple(prefix))
            return
        for v in values:
            if counts[v]:
                counts[v] -= 1
                prefix.append(v)
                rec(prefix)
                prefix.pop()
                counts[v] += 1

    rec([])
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), n)
    arr.setflags(write=False)
    return arr


def monomial(lam: Sequence[int], eigs: np.ndarray) -> np.ndarray:
    """Monomial symmetric function ``m_lambda`` at spectra of shape ``(..., n)``."""
    lam = as_partition(lam)
    eigs = np.asarray(eigs, dtype=float)
    n = eigs.shape[-1]
    if len(lam) > n:
        return np.zeros(eigs.shape[:-1])
    exps = _exponent_rows(lam, n)
    powers = eigs[..., None, :] ** exps
    return powers.prod(axis=-1).sum(axis=-1)


_TABLES: dict[int | None, ZonalTable] = {}
_TABLES_LOCK = threading.Lock()


def default_table(max_parts: int | None = None) -> ZonalTable:
    """Shared table restricted to ``max_parts`` parts."""
    with _TABLES_LOCK:
        if max_parts not in _TABLES:
            _TABLES[max_parts] = ZonalTable(DEFAULT_MAX_WEIGHT, max_parts)
        return _TABLES[max_parts]


def zonal_C(kappa: Sequence[int], eigs, table: ZonalTable | None = None) -> float:
    """Zonal polynomial ``C_kappa`` at a spectrum.

    Parameters
    ----------
    kappa : sequence of int
        Partition.
    eigs : array_like, shape (n,)
        Eigenvalues of the matrix argument.
    table : ZonalTable, optional
        Coefficient table; defaults to a shared table for ``n`` parts.

    Raises
    ------
    TableExhaustedError
        If ``|kappa|`` exceeds the table's ``max_weight``.

    Examples
    --------
    >>> zonal_C((1,), [2.0, 3.0])
    5.0
    """
    eigs = np.atleast_1d(np.asarray(eigs, dtype=float))
    if eigs.ndim != 1 or eigs.size == 0:
        raise DimensionError("eigs must be a non-empty vector")
    kappa = as_partition(kappa)
    tab = table if table is not None else default_table(eigs.size)
    tab._check_weight(sum(kappa))
    if len(kappa) > eigs.size:
        return 0.0
    return float(tab.evaluate(kappa, eigs))


def zonal_two_arg(kappa: Sequence[int], X: MatrixLike, Y: MatrixLike,
                  table: ZonalTable | None = None) -> float:
    """``C_kappa(X) C_kappa(Y) / C_kappa(I_n)`` for symmetric ``X, Y`` of equal size."""
    xs, ys = as_sym(X), as_sym(Y)
    if xs.dim != ys.dim:
        raise DimensionError(f"dimension mismatch: {xs.dim} vs {ys.dim}")
    n = xs.dim
    kappa = as_partition(kappa)
    if len(kappa) > n:
        return 0.0
    cx = zonal_C(kappa, xs.eigvals, table)
    cy = zonal_C(kappa, ys.eigvals, table)
    ci = zonal_C(kappa, np.ones(n), table)
    return cx * cy / ci


def zonal_at_matrix(kappa: Sequence[int], X) -> float:
    """``C_kappa`` of a square matrix with real spectrum."""
    from .linalg import spectrum

    return zonal_C(kappa, spectrum(as_square(X)))


def iter_table_rows(max_weight: int, max_parts: int | None = None
                    ) -> Iterable[tuple[int, Partition, Partition, Fraction]]:
    tab = ZonalTable(max_weight, max_parts)
    for m in range(max_weight + 1):
        parts, coef = tab.block(m)
        for kappa, row in zip(parts, coef):
            for lam, c in zip(parts, row):
                if c:
                    yield m, kappa, lam, c


def format_partition(p: Partition) -> str:
    return "(" + ",".join(str(x) for x in p) + ")"


def write_table_csv(max_weight: int, out: TextIO | None = None,
                    max_parts: int | None = None) -> str | None:
    """Write coefficients as CSV with columns weight, kappa, monomial, coefficient.

    Coefficients are written as exact fractions (``p/q``). Returns the CSV
    text when ``out`` is None.
    """
    buf = io.StringIO() if out is None else out
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["weight", "kappa", "monomial", "coefficient"])
    for m, kappa, lam, c in iter_table_rows(max_weight, max_parts):
        writer.writerow([m, format_partition(kappa), format_partition(lam), str(c)])
    return buf.getvalue() if out is None else None
