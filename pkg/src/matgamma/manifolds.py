"""Haar sampling on O(n) and Stiefel manifolds, polar decomposition and the
Gindikin set."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from .errors import DimensionError, DomainError

DEFAULT_BLOCK = 10_000


def _haar_block(rng: np.random.Generator, n: int, k: int, count: int) -> np.ndarray:
    # QR of a Gaussian n x k matrix; flipping column signs so that diag(R) > 0
    # makes Q exactly Haar distributed on the Stiefel manifold
    z = rng.standard_normal((count, n, k))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1)).copy()
    d[d == 0] = 1.0
    return q * d[:, None, :]


def block_rngs(seed, count: int, block_size: int = DEFAULT_BLOCK):
    """Independent generators for consecutive blocks covering ``count`` draws.

    Returns a list of ``(generator, size)`` pairs. The split depends only on
    ``count`` and ``block_size``, so results are reproducible regardless of
    how blocks are scheduled.
    """
    if block_size < 1:
        raise ValueError("block_size must be positive")
    sizes = [block_size] * (count // block_size)
    if count % block_size:
        sizes.append(count % block_size)
    if isinstance(seed, np.random.SeedSequence):
        # fresh copy: spawn() advances the caller's counter otherwise
        root = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key,
                                      pool_size=seed.pool_size)
    else:
        root = np.random.SeedSequence(seed)
    seqs = root.spawn(len(sizes))
    return [(np.random.default_rng(s), m) for s, m in zip(seqs, sizes)]


def _run_blocks(fn, blocks, workers: int):
    if workers <= 1 or len(blocks) <= 1:
        return [fn(rng, m) for rng, m in blocks]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda b: fn(*b), blocks))


def sample_stiefel(n: int, k: int, count: int, seed=None, *,
                   block_size: int = DEFAULT_BLOCK, workers: int = 1) -> np.ndarray:
    """Uniform (Haar) draws from the Stiefel manifold ``St(n, k)``.

    Parameters
    ----------
    n, k : int
        Matrix shape, ``n >= k >= 1``.
    count : int
        Number of draws.
    seed : int or SeedSequence, optional
        Root seed; draws are a deterministic function of
        ``(seed, count, block_size)``.

    Returns
    -------
    ndarray, shape (count, n, k)
        Matrices with orthonormal columns.
    """
    if k > n:
        raise DimensionError(f"need n >= k, got n={n}, k={k}")
    if k < 1:
        raise ValueError("k must be positive")
    blocks = block_rngs(seed, count, block_size)
    parts = _run_blocks(lambda rng, m: _haar_block(rng, n, k, m), blocks, workers)
    if not parts:
        return np.zeros((0, n, k))
    return np.concatenate(parts, axis=0)


def sample_orthogonal(n: int, count: int, seed=None, **kwargs) -> np.ndarray:
    """Haar-distributed orthogonal ``n x n`` matrices, shape ``(count, n, n)``."""
    return sample_stiefel(n, n, count, seed, **kwargs)


def haar_average(func: Callable[[np.ndarray], np.ndarray], n: int, k: int,
                 samples: int, seed, *, block_size: int = DEFAULT_BLOCK,
                 workers: int = 1) -> tuple[float, float]:
    """Monte Carlo mean and standard error of ``func(H1)`` for Haar ``H1`` in St(n, k).

    ``func`` receives a batch of shape ``(m, n, k)`` and must return ``m``
    values. Block statistics are merged in block order, so the estimate does
    not depend on ``workers``.
    """
    if samples < 2:
        raise ValueError("need at least two samples")

    def one(rng, m):
        h = _haar_block(rng, n, k, m)
        v = np.asarray(func(h), dtype=float)
        mean = v.mean()
        return m, mean, float(((v - mean) ** 2).sum())

    stats = _run_blocks(one, block_rngs(seed, samples, block_size), workers)
    # pairwise merge of (count, mean, M2)
    cnt, mean, m2 = 0, 0.0, 0.0
    for c, mu, s in stats:
        tot = cnt + c
        delta = mu - mean
        mean = mean + delta * c / tot
        m2 = m2 + s + delta * delta * cnt * c / tot
        cnt = tot
    var = m2 / (cnt - 1)
    return float(mean), float(np.sqrt(var / cnt))


def polar_decompose(Z: ArrayLike, rtol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Polar factorization ``Z = H R^{1/2}`` of a full-column-rank matrix.

    Returns
    -------
    H : ndarray, shape (n, k)
        ``Z (Z'Z)^{-1/2}``, orthonormal columns.
    Rhalf : ndarray, shape (k, k)
        ``(Z'Z)^{1/2}``, symmetric positive definite.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    n, k = Z.shape
    if n < k:
        raise DomainError("Z must have at least as many rows as columns")
    # SVD is better conditioned than forming Z'Z
    u, s, vt = np.linalg.svd(Z, full_matrices=False)
    if s[-1] <= rtol * s[0]:
        raise DomainError("Z is rank deficient")
    H = u @ vt
    Rhalf = (vt.T * s) @ vt
    return H, 0.5 * (Rhalf + Rhalf.T)


def gindikin_contains(k: int, a: float, atol: float = 1e-12) -> bool:
    """Membership in ``{0, 1/2, ..., (k-1)/2} U [(k-1)/2, inf)``.

    >>> gindikin_contains(3, 0.75)
    False
    """
    if k < 1:
        raise ValueError("k must be positive")
    top = 0.5 * (k - 1)
    if a >= top - atol:
        return True
    if a < -atol:
        return False
    twice = 2.0 * a
    return abs(twice - round(twice)) <= 2.0 * atol
