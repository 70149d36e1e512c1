"""Small dense linear-algebra helpers shared by the other modules."""
from __future__ import annotations

from functools import cached_property
from typing import Union

import numpy as np
from numpy.typing import ArrayLike

from .errors import DimensionError, DomainError

# Scale-free positive-definiteness threshold on the eigenvalue ratio.
PD_RTOL = 1e-10
SYM_RTOL = 1e-10


class SymMatrix:
    """Real symmetric matrix with a lazily cached eigendecomposition.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Input matrix. It is symmetrized as ``(a + a.T) / 2`` after checking
        that the asymmetry is below ``SYM_RTOL`` relative to the largest entry.
    """

    def __init__(self, a: ArrayLike, *, check: bool = True):
        arr = np.array(a, dtype=float, copy=True)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
        if check:
            scale = max(np.abs(arr).max(initial=0.0), 1.0)
            if np.abs(arr - arr.T).max(initial=0.0) > SYM_RTOL * scale:
                raise DomainError("matrix is not symmetric")
        arr = 0.5 * (arr + arr.T)
        arr.setflags(write=False)
        self.array = arr

    @property
    def dim(self) -> int:
        return self.array.shape[0]

    @cached_property
    def _eigh(self):
        return np.linalg.eigh(self.array)

    @property
    def eigvals(self) -> np.ndarray:
        """Eigenvalues in ascending order."""
        return self._eigh[0]

    @property
    def eigvecs(self) -> np.ndarray:
        return self._eigh[1]

    @cached_property
    def is_pd(self) -> bool:
        w = self.eigvals
        return bool(w[-1] > 0 and w[0] > PD_RTOL * w[-1])

    def __array__(self, dtype=None, copy=None):
        return self.array if dtype is None else self.array.astype(dtype)

    def __repr__(self) -> str:
        return f"SymMatrix({self.array.tolist()!r})"


MatrixLike = Union[SymMatrix, ArrayLike]


def as_sym(a: MatrixLike) -> SymMatrix:
    return a if isinstance(a, SymMatrix) else SymMatrix(a)


def as_square(a: MatrixLike) -> np.ndarray:
    """Float 2-D square array view of ``a`` (scalars become 1x1)."""
    arr = np.asarray(a.array if isinstance(a, SymMatrix) else a, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def etr(a: ArrayLike) -> float:
    """``exp(trace(a))``."""
    return float(np.exp(np.trace(np.asarray(a, dtype=float))))


def sym_part(a: ArrayLike) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def require_pd(a: MatrixLike, name: str = "matrix") -> SymMatrix:
    """Return ``a`` as a :class:`SymMatrix`, raising if it is not PD."""
    s = as_sym(a)
    if not s.is_pd:
        raise DomainError(f"{name} is not positive definite")
    return s


def logdet_pd(a: MatrixLike) -> float:
    """``log|a|`` for a symmetric positive definite matrix."""
    s = require_pd(a)
    return float(np.sum(np.log(s.eigvals)))


def sqrtm_psd(a: MatrixLike) -> np.ndarray:
    """Symmetric square root of a PSD matrix (negative rounding clipped)."""
    s = as_sym(a)
    w = np.clip(s.eigvals, 0.0, None)
    v = s.eigvecs
    return (v * np.sqrt(w)) @ v.T


def inv_sqrtm_pd(a: MatrixLike) -> np.ndarray:
    s = require_pd(a)
    v = s.eigvecs
    return (v / np.sqrt(s.eigvals)) @ v.T


def spectrum(a: ArrayLike, *, imag_rtol: float = 1e-9) -> np.ndarray:
    """Real eigenvalues of a square matrix that is symmetric or similar to one.

    Symmetric inputs use ``eigvalsh``. Otherwise the general eigenvalues are
    taken and a :class:`DomainError` is raised if any has a non-negligible
    imaginary part.
    """
    arr = as_square(a)
    scale = max(np.abs(arr).max(initial=0.0), 1e-300)
    if np.abs(arr - arr.T).max(initial=0.0) <= 1e-13 * scale:
        return np.linalg.eigvalsh(0.5 * (arr + arr.T))
    w = np.linalg.eigvals(arr)
    wscale = max(np.abs(w).max(initial=0.0), 1e-300)
    if np.abs(w.imag).max(initial=0.0) > imag_rtol * wscale:
        raise DomainError("matrix argument has a non-real spectrum")
    return np.sort(w.real)


def spectral_radius(a: ArrayLike) -> float:
    arr = as_square(a)
    return float(np.abs(np.linalg.eigvals(arr)).max(initial=0.0))


def orthonormal_columns(b: ArrayLike, atol: float = 1e-12) -> bool:
    b = np.asarray(b, dtype=float)
    return bool(np.abs(b.T @ b - np.eye(b.shape[1])).max(initial=0.0) <= atol)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar orthogonal matrix (QR with sign-corrected diagonal)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_spd(n: int, rng: np.random.Generator, *, cond: float = 10.0) -> np.ndarray:
    """Random SPD matrix with eigenvalues log-uniform in ``[1, cond]``."""
    q = random_orthogonal(n, rng)
    w = np.exp(rng.uniform(0.0, np.log(cond), size=n))
    return (q * w) @ q.T
