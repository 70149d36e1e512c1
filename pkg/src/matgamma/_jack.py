"""Vectorized evaluation of zonal polynomials for truncated series.

Jack polynomials ``J_kappa`` (parameter ``alpha = 2``) satisfy the branching
rule over the number of variables

    J_kappa(x_1..x_i) = sum_mu J_mu(x_1..x_{i-1}) x_i^{|kappa/mu|} beta_{kappa mu}

where ``kappa/mu`` runs over horizontal strips and ``beta`` is a ratio of
upper and lower hook products. We track ``Q_kappa = J_kappa / j_kappa`` with
``j_kappa`` the product of all upper and lower hooks, which gives

    C_kappa(x) / |kappa|! = Q_kappa(alpha * x).

All (kappa, mu) pairs up to a weight bound are generated once, their log
weights computed in closed form with ``gammaln``, and the recursion becomes a
gather / multiply / segmented-sum over flat arrays.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .partitions import partitions_of

ALPHA = 2.0
# cap on the number of float entries in one (pairs x batch) work array
_WORK_ENTRIES = 4_000_000


def _seg_log(c, d, lo, hi):
    """``sum_{j=lo}^{hi} log(c + alpha (d - j))`` elementwise; 0 for empty ranges."""
    cnt = hi - lo + 1
    ok = cnt > 0
    a1 = np.where(ok, c / ALPHA + d - lo + 1, 1.0)
    a2 = np.where(ok, c / ALPHA + d - hi, 1.0)
    return np.where(ok, cnt * np.log(ALPHA) + gammaln(a1) - gammaln(a2), 0.0)


def _log_hook_product(parts: np.ndarray) -> np.ndarray:
    """``log j_kappa`` (product of upper and lower hooks) for rows of ``parts``."""
    P, L = parts.shape
    K = np.concatenate([parts, np.zeros((P, 1), dtype=parts.dtype)], axis=1).astype(float)
    out = np.zeros(P)
    for i in range(L):
        for r in range(i, L):
            c = float(r - i)
            lo = K[:, r + 1] + 1
            hi = K[:, r]
            out += _seg_log(c, K[:, i] + 1, lo, hi)
            out += _seg_log(c + 1, K[:, i], lo, hi)
    return out


def _log_beta(K: np.ndarray, U: np.ndarray) -> np.ndarray:
    """``log beta_{kappa mu}`` for paired rows of ``K`` (kappa) and ``U`` (mu)."""
    npairs, L = K.shape
    Ke = np.concatenate([K, np.zeros((npairs, 1))], axis=1)
    out = np.zeros(npairs)
    for i in range(L):
        for r in range(i, L):
            c = float(r - i)
            lo1 = Ke[:, r + 1] + 1
            hi1 = U[:, r]
            lo2 = U[:, r] + 1
            hi2 = K[:, r]
            # cells of kappa in columns where the column length is unchanged
            out += _seg_log(c, K[:, i] + 1, lo1, hi1)
            # cells of kappa in columns that gained a box
            out += _seg_log(c + 1, K[:, i], lo2, hi2)
            # the matching cells of mu
            out -= _seg_log(c, U[:, i] + 1, lo1, hi1)
            if r > i:
                out -= _seg_log(c, U[:, i], lo2, hi2)
    return out


@dataclass
class PairTable:
    """All partitions with ``|kappa| <= max_weight`` and at most ``max_parts`` parts,
    together with the horizontal-strip pairs of the branching rule."""

    max_weight: int
    max_parts: int
    full: bool
    parts: np.ndarray        # (P, L) int
    weight: np.ndarray       # (P,)
    length: np.ndarray       # (P,)
    kap: np.ndarray          # (npairs,) kappa index, non-decreasing
    mu: np.ndarray           # (npairs,) mu index
    deg: np.ndarray          # (npairs,) |kappa| - |mu|
    w: np.ndarray            # (npairs,) beta * j_mu / j_kappa
    _steps: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def size(self) -> int:
        return self.parts.shape[0]

    def step(self, kap_len: int, mu_len: int):
        """Pairs with ``len(kappa) <= kap_len`` and ``len(mu) <= mu_len``."""
        key = (kap_len, mu_len)
        with self._lock:
            hit = self._steps.get(key)
        if hit is not None:
            return hit
        sel = np.flatnonzero((self.length[self.kap] <= kap_len) & (self.length[self.mu] <= mu_len))
        k = self.kap[sel]
        starts = np.flatnonzero(np.r_[True, k[1:] != k[:-1]]) if sel.size else np.zeros(0, int)
        out = (k[starts], starts, self.mu[sel], self.deg[sel], self.w[sel])
        with self._lock:
            self._steps[key] = out
        return out


def _build(max_weight: int, max_parts: int, full: bool) -> PairTable:
    M, L = max_weight, max_parts
    plist = []
    for m in range(M + 1):
        plist.extend(partitions_of(m, L))
    P = len(plist)
    parts = np.zeros((P, L), dtype=np.int64)
    for a, p in enumerate(plist):
        parts[a, : len(p)] = p
    weight = parts.sum(axis=1)
    length = (parts > 0).sum(axis=1)
    radix = (M + 1) ** np.arange(L, dtype=np.int64)
    keys = parts @ radix
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]

    kap_chunks, mu_chunks = [], []
    for a, p in enumerate(plist):
        kp = list(p) + [0] * (L - len(p)) + [0]
        ranges = [np.arange(kp[r + 1], kp[r] + 1) for r in range(L)]
        if not full:
            # strips that fill row L are only needed when there are more
            # variables than parts, which the caller requests with full=True
            ranges[L - 1] = np.array([0]) if kp[L] == 0 else ranges[L - 1][:0]
        grids = np.meshgrid(*ranges, indexing="ij")
        mus = np.stack([g.ravel() for g in grids], axis=1)
        kap_chunks.append(np.full(mus.shape[0], a, dtype=np.int64))
        mu_chunks.append(mus)
    kap = np.concatenate(kap_chunks)
    mus = np.concatenate(mu_chunks).astype(np.int64)
    mu_idx = order[np.searchsorted(sorted_keys, mus @ radix)]
    deg = weight[kap] - weight[mu_idx]

    log_j = _log_hook_product(parts)
    log_w = _log_beta(parts[kap].astype(float), mus.astype(float))
    log_w += log_j[mu_idx] - log_j[kap]
    return PairTable(M, L, full, parts, weight, length, kap, mu_idx, deg, np.exp(log_w))


@lru_cache(maxsize=16)
def pair_table(max_weight: int, max_parts: int, full: bool = False) -> PairTable:
    return _build(int(max_weight), int(max_parts), bool(full))


def q_values(points: np.ndarray, table: PairTable) -> np.ndarray:
    """``Q_kappa`` at each row of ``points``.

    Parameters
    ----------
    points : ndarray, shape (B, n)
        Variables; partitions longer than ``n`` get ``Q = 0``.
    table : PairTable
        Must be built with ``full=True`` when ``n > table.max_parts``.

    Returns
    -------
    ndarray, shape (P, B)
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[None, :]
    B, n = points.shape
    L = table.max_parts
    if n > L and not table.full:
        raise ValueError("table lacks full strips for more variables than parts")
    P = table.size
    M = table.max_weight
    out = np.empty((P, B))
    # split the batch so that the (pairs x batch) work arrays stay bounded
    npairs = table.kap.size
    chunk = max(1, _WORK_ENTRIES // max(npairs, 1))
    for s in range(0, B, chunk):
        pts = points[s: s + chunk]
        b = pts.shape[0]
        Q = np.zeros((P, b))
        Q[0] = 1.0  # empty partition
        for i in range(1, n + 1):
            kap_len = min(i, L)
            mu_len = min(i - 1, L)
            uniq, starts, mu, deg, w = table.step(kap_len, mu_len)
            xpow = pts[:, i - 1][None, :] ** np.arange(M + 1)[:, None]
            vals = (w[:, None] * xpow[deg]) * Q[mu]
            Qn = np.zeros((P, b))
            if uniq.size:
                Qn[uniq] = np.add.reduceat(vals, starts, axis=0)
            Q = Qn
        out[:, s: s + b] = Q
    return out


def zonal_over_factorial(points: np.ndarray, max_weight: int, max_parts: int | None = None):
    """``C_kappa(x) / |kappa|!`` for all partitions in a pair table.

    Returns
    -------
    table : PairTable
    values : ndarray, shape (P, B)
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[1]
    L = n if max_parts is None else min(max_parts, n)
    table = pair_table(max_weight, L, n > L)
    return table, q_values(ALPHA * points, table)
