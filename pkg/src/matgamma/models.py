"""Matrix-normal model families with structured precision matrices.

Each family describes an ``n x k`` Gaussian matrix ``X`` through the
precision matrix ``Theta`` of ``vec(X')``, where ``vec(X')`` stacks the rows
of ``X`` (``X.ravel()`` in C order). Families are nested
T3 ⊂ T2 ⊂ T15 ⊂ T1:

* ``T1``: ``Theta = sum_{j,j'} A_{jj'} ⊗ b_j b_{j'}'`` with a symmetric grid of
  ``n x n`` blocks (``A_{jj'}' = A_{j'j}``) and an orthonormal frame ``b``.
* ``T15``: block-diagonal grid, ``Theta = sum_j A_jj ⊗ b_j b_j'``.
* ``T2``: ``Theta = sum_{i,j} gamma_ij a_i a_i' ⊗ b_j b_j'`` with two frames.
* ``T3``: ``Theta = Phi^{-1} ⊗ Psi^{-1}`` with an optional mean ``M``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import DimensionError, InvalidModelError
from .linalg import PD_RTOL, SymMatrix, orthonormal_columns, random_orthogonal, random_spd
from .manifolds import DEFAULT_BLOCK, _run_blocks, block_rngs

FAMILIES = ("T1", "T15", "T2", "T3")
_ALIASES = {"T1.5": "T15", "T1½": "T15", "T1_5": "T15"}
_LOG_2PI = math.log(2.0 * math.pi)


def _frame(b, k: int, name: str) -> np.ndarray:
    b = np.array(b, dtype=float)
    if b.shape != (k, k):
        raise DimensionError(f"{name} must be {k}x{k}, got {b.shape}")
    if not orthonormal_columns(b, 1e-12):
        raise InvalidModelError(f"columns of {name} are not orthonormal")
    b.setflags(write=False)
    return b


def _check_pd(theta: np.ndarray) -> SymMatrix:
    s = SymMatrix(theta, check=False)
    w = s.eigvals
    if not (w[-1] > 0 and w[0] > PD_RTOL * w[-1]):
        raise InvalidModelError(
            f"precision matrix is not positive definite (eigenvalue range [{w[0]:.3g}, {w[-1]:.3g}])"
        )
    return s


@dataclass(frozen=True)
class T1Spec:
    """General family. ``A[j, j']`` is the ``n x n`` block ``A_{jj'}``; column
    ``j`` of ``b`` is ``b_j``."""

    A: np.ndarray
    b: np.ndarray
    family: str = field(default="T1", init=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 4 or A.shape[0] != A.shape[1] or A.shape[2] != A.shape[3]:
            raise DimensionError("A must have shape (k, k, n, n)")
        k = A.shape[0]
        for i in range(k):
            for j in range(k):
                if np.abs(A[i, j].T - A[j, i]).max() > 1e-12 * max(1.0, np.abs(A).max()):
                    raise InvalidModelError(f"A[{i},{j}]' != A[{j},{i}]")
            if not np.all(np.diag(A[i, i]) > 0):
                raise InvalidModelError(f"A[{i},{i}] needs a positive diagonal")
            for j in range(k):
                if i != j and np.abs(np.diag(A[i, j])).max() > 1e-12:
                    raise InvalidModelError(f"A[{i},{j}] must have a zero diagonal")
        A = 0.5 * (A + A.transpose(1, 0, 3, 2))
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", _frame(self.b, k, "b"))
        _check_pd(_theta_t1(A, self.b))

    @property
    def n(self) -> int:
        return self.A.shape[2]

    @property
    def k(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class T15Spec:
    """Block-diagonal family; ``A[j]`` is ``A_jj``."""

    A: np.ndarray
    b: np.ndarray
    family: str = field(default="T15", init=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise DimensionError("A must have shape (k, n, n)")
        for j in range(A.shape[0]):
            if np.abs(A[j] - A[j].T).max() > 1e-12 * max(1.0, np.abs(A[j]).max()):
                raise InvalidModelError(f"A[{j}] is not symmetric")
            if not np.all(np.diag(A[j]) > 0):
                raise InvalidModelError(f"A[{j}] needs a positive diagonal")
        A = 0.5 * (A + A.transpose(0, 2, 1))
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", _frame(self.b, A.shape[0], "b"))
        for j in range(A.shape[0]):
            _check_pd(A[j])

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def k(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class T2Spec:
    """Doubly-framed family with positive weights ``gamma[i, j]``."""

    a: np.ndarray
    b: np.ndarray
    gamma: np.ndarray
    family: str = field(default="T2", init=False)

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        if g.ndim != 2:
            raise DimensionError("gamma must be an n x k array")
        if not np.all(g > 0):
            raise InvalidModelError("gamma entries must be positive")
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "a", _frame(self.a, g.shape[0], "a"))
        object.__setattr__(self, "b", _frame(self.b, g.shape[1], "b"))
        _check_pd(np.diag(g.ravel()))

    @property
    def n(self) -> int:
        return self.gamma.shape[0]

    @property
    def k(self) -> int:
        return self.gamma.shape[1]


@dataclass(frozen=True)
class T3Spec:
    """Kronecker-separable family ``X ~ M + Phi^{1/2} G Psi^{1/2}``."""

    Phi: np.ndarray
    Psi: np.ndarray
    M: np.ndarray | None = None
    family: str = field(default="T3", init=False)

    def __post_init__(self):
        phi = SymMatrix(self.Phi)
        psi = SymMatrix(self.Psi)
        if not phi.is_pd:
            raise InvalidModelError("Phi is not positive definite")
        if not psi.is_pd:
            raise InvalidModelError("Psi is not positive definite")
        object.__setattr__(self, "Phi", phi.array)
        object.__setattr__(self, "Psi", psi.array)
        if self.M is not None:
            m = np.array(self.M, dtype=float)
            if m.shape != (phi.dim, psi.dim):
                raise DimensionError(f"M must be {phi.dim}x{psi.dim}")
            m.setflags(write=False)
            object.__setattr__(self, "M", m)

    @property
    def n(self) -> int:
        return self.Phi.shape[0]

    @property
    def k(self) -> int:
        return self.Psi.shape[0]

    @property
    def mean(self) -> np.ndarray:
        return np.zeros((self.n, self.k)) if self.M is None else self.M


ModelSpec = Union[T1Spec, T15Spec, T2Spec, T3Spec]


def normalize_family(tag: str) -> str:
    tag = _ALIASES.get(tag, tag)
    if tag not in FAMILIES:
        raise ValueError(f"unknown family {tag!r}; expected one of {FAMILIES}")
    return tag


# -- precision matrices --------------------------------------------------

def _theta_t1(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    k, n = A.shape[0], A.shape[2]
    # sum_{j,j'} A_{jj'} ⊗ b_j b_j'^T
    theta = np.einsum("jlrs,cj,dl->rcsd", A, b, b).reshape(n * k, n * k)
    return 0.5 * (theta + theta.T)


def build_precision(spec: ModelSpec) -> SymMatrix:
    """Precision matrix of ``vec(X')`` (rows of ``X`` stacked), shape ``(nk, nk)``.

    Raises
    ------
    InvalidModelError
        If the assembled matrix is not positive definite.
    """
    fam = spec.family
    if fam == "T1":
        theta = _theta_t1(spec.A, spec.b)
    elif fam == "T15":
        A = np.zeros((spec.k, spec.k, spec.n, spec.n))
        A[np.arange(spec.k), np.arange(spec.k)] = spec.A
        theta = _theta_t1(A, spec.b)
    elif fam == "T2":
        n, k = spec.n, spec.k
        theta = np.einsum("ij,ri,si,cj,dj->rcsd", spec.gamma, spec.a, spec.a,
                          spec.b, spec.b).reshape(n * k, n * k)
        theta = 0.5 * (theta + theta.T)
    elif fam == "T3":
        theta = np.kron(np.linalg.inv(spec.Phi), np.linalg.inv(spec.Psi))
        theta = 0.5 * (theta + theta.T)
    else:
        raise ValueError(f"unknown family {fam!r}")
    return _check_pd(theta)


def log_det_precision(spec: ModelSpec) -> float:
    """``log|Theta|`` from the structured parameters (no ``nk x nk`` assembly)."""
    fam = spec.family
    if fam == "T1":
        k, n = spec.k, spec.n
        grid = spec.A.transpose(0, 2, 1, 3).reshape(k * n, k * n)
        sign, ld = np.linalg.slogdet(grid)
        if sign <= 0:
            raise InvalidModelError("block grid is not positive definite")
        return float(ld)
    if fam == "T15":
        return float(sum(np.linalg.slogdet(a)[1] for a in spec.A))
    if fam == "T2":
        return float(np.log(spec.gamma).sum())
    if fam == "T3":
        return float(-spec.k * np.linalg.slogdet(spec.Phi)[1]
                     - spec.n * np.linalg.slogdet(spec.Psi)[1])
    raise ValueError(f"unknown family {fam!r}")


def log_normalizer(spec: ModelSpec) -> float:
    """``log c = log|Theta|/2 - (nk/2) log(2 pi)``."""
    return 0.5 * log_det_precision(spec) - 0.5 * spec.n * spec.k * _LOG_2PI


def _shape_check(spec: ModelSpec, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[-2:] != (spec.n, spec.k):
        raise DimensionError(f"expected {spec.n}x{spec.k} matrices, got {X.shape}")
    return X


def quadratic_form(spec: ModelSpec, X: ArrayLike, mean: ArrayLike | None = None) -> np.ndarray:
    """``vec(R')' Theta vec(R')`` with ``R = X - mean``, from structured parameters.

    ``X`` may carry leading batch dimensions.
    """
    X = _shape_check(spec, X)
    if mean is None and spec.family == "T3" and spec.M is not None:
        mean = spec.M
    R = X if mean is None else X - np.asarray(mean, dtype=float)
    fam = spec.family
    if fam == "T1":
        Y = R @ spec.b                                    # columns y_j = R b_j
        return np.einsum("...rj,jlrs,...sl->...", Y, spec.A, Y)
    if fam == "T15":
        Y = R @ spec.b
        return np.einsum("...rj,jrs,...sj->...", Y, spec.A, Y)
    if fam == "T2":
        Z = np.swapaxes(spec.a, 0, 1) @ R @ spec.b
        return np.einsum("ij,...ij->...", spec.gamma, Z * Z)
    if fam == "T3":
        eye_n, eye_k = np.eye(spec.n), np.eye(spec.k)
        phi_inv = cho_solve(cho_factor(spec.Phi), eye_n)
        psi_inv = cho_solve(cho_factor(spec.Psi), eye_k)
        # tr(Phi^{-1} R Psi^{-1} R')
        return np.einsum("...ij,...ij->...", phi_inv @ R, R @ psi_inv)
    raise ValueError(f"unknown family {fam!r}")


def display_quadratic_form(spec: T1Spec, X: ArrayLike) -> float:
    """``sum_{j,j'} tr(A_{jj'} X B_{jj'} X')`` with ``B_{jj'} = b_j b_{j'}'``.

    Agrees with :func:`quadratic_form` when every ``A_{jj'}`` is symmetric;
    for non-symmetric off-diagonal blocks each cross term picks up a transpose.
    """
    X = _shape_check(spec, X)
    total = 0.0
    for j in range(spec.k):
        for l in range(spec.k):
            Bjl = np.outer(spec.b[:, j], spec.b[:, l])
            total += np.trace(spec.A[j, l] @ X @ Bjl @ X.T)
    return float(total)


def log_density(spec: ModelSpec, X: ArrayLike, mean: ArrayLike | None = None):
    """Log density of ``X`` (or a batch of matrices).

    Examples
    --------
    >>> log_density(T3Spec([[1.0]], [[1.0]]), [[0.0]])
    -0.918938...
    """
    q = quadratic_form(spec, X, mean)
    out = log_normalizer(spec) - 0.5 * q
    return float(out) if np.ndim(out) == 0 else out


def dense_log_density(spec: ModelSpec, X: ArrayLike, mean: ArrayLike | None = None) -> float:
    """Reference log density from the assembled precision matrix."""
    X = _shape_check(spec, X)
    if mean is None and spec.family == "T3" and spec.M is not None:
        mean = spec.M
    v = (X if mean is None else X - np.asarray(mean, dtype=float)).ravel()
    theta = build_precision(spec)
    _, ld = np.linalg.slogdet(theta.array)
    nk = v.size
    return float(0.5 * ld - 0.5 * nk * _LOG_2PI - 0.5 * v @ theta.array @ v)


# -- sampling ------------------------------------------------------------

def sample(spec: ModelSpec, count: int, seed=None, *, mean: ArrayLike | None = None,
           block_size: int = DEFAULT_BLOCK, workers: int = 1) -> np.ndarray:
    """Draws with ``vec(X') ~ N(vec(M'), Theta^{-1})``.

    Returns
    -------
    ndarray, shape (count, n, k)
        Deterministic given ``(seed, count, block_size)``.
    """
    n, k = spec.n, spec.k
    theta = build_precision(spec).array
    try:
        L = np.linalg.cholesky(theta)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by build_precision
        raise InvalidModelError("Cholesky factorization of Theta failed") from exc
    if mean is None:
        mean = spec.mean if spec.family == "T3" else np.zeros((n, k))
    mu = np.asarray(mean, dtype=float).reshape(n, k)

    def block(rng, m):
        z = rng.standard_normal((n * k, m))
        # Theta = L L'  =>  L^{-T} z has covariance Theta^{-1}
        v = solve_triangular(L, z, lower=True, trans="T")
        return v.T.reshape(m, n, k) + mu

    parts = _run_blocks(block, block_rngs(seed, count, block_size), workers)
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, n, k))


def sample_t3_direct(spec: T3Spec, count: int, seed=None, *,
                     block_size: int = DEFAULT_BLOCK) -> np.ndarray:
    """``X = Phi^{1/2} G Psi^{1/2} + M`` with i.i.d. standard normal ``G``."""
    from .linalg import sqrtm_psd

    ph = sqrtm_psd(spec.Phi)
    ps = sqrtm_psd(spec.Psi)
    mu = spec.mean

    def block(rng, m):
        g = rng.standard_normal((m, spec.n, spec.k))
        return ph @ g @ ps + mu

    parts = [block(rng, m) for rng, m in block_rngs(seed, count, block_size)]
    return np.concatenate(parts, axis=0)


# -- degrees of freedom and nesting -----------------------------------------

def degrees_of_freedom(family: str, n: int, k: int) -> int:
    """Parameter counts per family: T1 ``n(n-1)k^2/2 + nk``, T15 ``n(n+1)k/2``,
    T2 ``nk``, T3 ``n + k``.

    The T1 count equals the number of free entries in the block grid
    ``{A_jj'}``: ``k n(n+1)/2`` in the diagonal blocks plus
    ``C(k, 2) n(n-1)`` in the zero-diagonal off-diagonal blocks. The
    orthonormal frames are not counted.
    """
    fam = normalize_family(family)
    n, k = int(n), int(k)
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if fam == "T1":
        return n * (n - 1) * k * k // 2 + n * k
    if fam == "T15":
        return n * (n + 1) * k // 2
    if fam == "T2":
        return n * k
    return n + k


def free_parameter_count_t1(n: int, k: int) -> int:
    """Free entries of the T1 grid under symmetry and zero-diagonal constraints."""
    return k * n * (n + 1) // 2 + (k * (k - 1) // 2) * n * (n - 1)


def t3_to_t2(spec: T3Spec) -> T2Spec:
    """Eigen-frames of ``Phi^{-1}`` and ``Psi^{-1}`` with ``gamma_ij = alpha_i beta_j``."""
    if spec.M is not None and np.any(spec.M != 0):
        raise ValueError("only central T3 models have a T2 counterpart")
    alpha, a = np.linalg.eigh(np.linalg.inv(spec.Phi))
    beta, b = np.linalg.eigh(np.linalg.inv(spec.Psi))
    return T2Spec(a, b, np.outer(alpha, beta))


def t2_to_t15(spec: T2Spec) -> T15Spec:
    """``A_jj = sum_i gamma_ij a_i a_i'`` (always representable)."""
    A = np.einsum("ij,ri,si->jrs", spec.gamma, spec.a, spec.a)
    return T15Spec(A, spec.b)


def t15_to_t1(spec: T15Spec) -> T1Spec:
    A = np.zeros((spec.k, spec.k, spec.n, spec.n))
    A[np.arange(spec.k), np.arange(spec.k)] = spec.A
    return T1Spec(A, spec.b)


def to_family(spec: ModelSpec, family: str) -> ModelSpec:
    """Convert along the nesting chain T3 -> T2 -> T15 -> T1."""
    target = normalize_family(family)
    order = ["T3", "T2", "T15", "T1"]
    if order.index(target) < order.index(spec.family):
        raise ValueError(f"cannot convert {spec.family} to the smaller family {target}")
    steps = {"T3": t3_to_t2, "T2": t2_to_t15, "T15": t15_to_t1}
    while spec.family != target:
        spec = steps[spec.family](spec)
    return spec


def as_t1(spec: ModelSpec) -> T1Spec:
    return to_family(spec, "T1")


# -- random specs -------------------------------------------------------

def random_spec(family: str, n: int, k: int, rng: np.random.Generator, *,
                cond: float = 5.0, coupling: float = 0.5) -> ModelSpec:
    """Random valid model of the given family (for tests and experiments)."""
    fam = normalize_family(family)
    if fam == "T3":
        return T3Spec(random_spd(n, rng, cond=cond), random_spd(k, rng, cond=cond))
    b = random_orthogonal(k, rng)
    if fam == "T2":
        a = random_orthogonal(n, rng)
        return T2Spec(a, b, np.exp(rng.uniform(0, np.log(cond), size=(n, k))))
    diag = np.stack([random_spd(n, rng, cond=cond) for _ in range(k)])
    if fam == "T15":
        return T15Spec(diag, b)
    A = np.zeros((k, k, n, n))
    A[np.arange(k), np.arange(k)] = diag
    if k > 1 and n > 1:
        E = np.zeros_like(A)
        for i in range(k):
            for j in range(i + 1, k):
                blk = rng.standard_normal((n, n))
                np.fill_diagonal(blk, 0.0)
                E[i, j] = blk
                E[j, i] = blk.T
        grid_e = E.transpose(0, 2, 1, 3).reshape(k * n, k * n)
        lam_min = min(np.linalg.eigvalsh(d)[0] for d in diag)
        scale = coupling * lam_min / max(np.linalg.norm(grid_e, 2), 1e-300)
        A = A + scale * E
    return T1Spec(A, b)


# -- JSON model files ---------------------------------------------------------

def _schema() -> dict:
    text = resources.files("matgamma").joinpath("schemas/model.schema.json").read_text()
    return json.loads(text)


def model_to_dict(spec: ModelSpec, M: ArrayLike | None = None) -> dict:
    """JSON-ready dict; matrices are row-major nested lists, frames are lists
    of vectors."""
    d: dict = {"family": spec.family, "n": spec.n, "k": spec.k}
    if spec.family == "T1":
        d["A"] = spec.A.tolist()
        d["b"] = spec.b.T.tolist()
    elif spec.family == "T15":
        d["A"] = spec.A.tolist()
        d["b"] = spec.b.T.tolist()
    elif spec.family == "T2":
        d["a"] = spec.a.T.tolist()
        d["b"] = spec.b.T.tolist()
        d["gamma"] = spec.gamma.tolist()
    else:
        d["Phi"] = spec.Phi.tolist()
        d["Psi"] = spec.Psi.tolist()
        if spec.M is not None:
            d["M"] = spec.M.tolist()
    if M is not None:
        d["M"] = np.asarray(M, dtype=float).tolist()
    return d


def model_from_dict(d: dict, *, validate: bool = True) -> tuple[ModelSpec, np.ndarray | None]:
    """Inverse of :func:`model_to_dict`; returns ``(spec, M or None)``."""
    if validate:
        import jsonschema

        jsonschema.validate(d, _schema())
    fam = normalize_family(d["family"])
    M = None if d.get("M") is None else np.asarray(d["M"], dtype=float)
    if fam == "T1":
        spec = T1Spec(np.asarray(d["A"]), np.asarray(d["b"], dtype=float).T)
    elif fam == "T15":
        spec = T15Spec(np.asarray(d["A"]), np.asarray(d["b"], dtype=float).T)
    elif fam == "T2":
        spec = T2Spec(np.asarray(d["a"], dtype=float).T, np.asarray(d["b"], dtype=float).T,
                      np.asarray(d["gamma"]))
    else:
        spec = T3Spec(np.asarray(d["Phi"]), np.asarray(d["Psi"]), M)
    if (spec.n, spec.k) != (d["n"], d["k"]):
        raise DimensionError(f"declared shape {d['n']}x{d['k']} does not match parameters")
    if M is not None and M.shape != (spec.n, spec.k):
        raise DimensionError("M has the wrong shape")
    return spec, M


def save_model(spec: ModelSpec, path, M: ArrayLike | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(spec, M), fh, indent=1)
        fh.write("\n")


def load_model(path) -> tuple[ModelSpec, np.ndarray | None]:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
