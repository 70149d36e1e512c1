"""Densities, moment generating functions and latent-root densities of the
quadratic form ``S = (X + M)'(X + M)`` for matrix-normal ``X``.

Two conventions are supported wherever the closed forms admit more than one
reading:

``"corrected"`` (default)
    The form that reproduces the chi-square, Wishart and Gaussian-MGF
    oracles: ``u_ij = tr(A_ij) / n``, the MGF argument
    ``W = 2 U^{-1/2} B' C B U^{-1/2}`` with ``tr(CS) = sum_{i<=j} gamma_ij s_ij``,
    and non-central terms expressed in the frame of ``S``.
``"literal"``
    The literal closed forms: ``u_ij = tr(A_ij)``, ``W = U^{-1/2} B R B' U^{-1/2}``
    with ``2R = Gamma + I``, and non-central terms paired with ``T = B'SB``.

The closed forms are exact when every diagonal block is a multiple of the
identity (``A_jj = beta_j I_n``; off-diagonal blocks then vanish). For other
T1 models the central density integrates to :attr:`QFModel.mass` rather
than 1, which is exposed as a diagnostic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import gammaln, gammasgn

from .errors import DimensionError, DivergenceError, DomainError
from .linalg import (MatrixLike, as_square, inv_sqrtm_pd, require_pd, sqrtm_psd,
                     sym_part)
from .models import ModelSpec, T1Spec, as_t1, build_precision, log_det_precision
from .specfun import (HypergeomConfig, hypergeom_eigs, hypergeom_two,
                      hypergeom_two_batch, mv_gamma_ln)

CONVENTIONS = ("corrected", "literal")
_LOG2 = math.log(2.0)
_LOGPI = math.log(math.pi)

#: series settings used by the densities unless overridden
DEFAULT_SERIES = HypergeomConfig((), (), max_weight=60, rel_tol=1e-12)


def _check_convention(c: str) -> str:
    if c not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {c!r}")
    return c


def _finish(log_value: float, log: bool) -> float:
    return float(log_value) if log else float(math.exp(log_value)) if log_value < 709.7 else math.inf


@dataclass(frozen=True)
class QFModel:
    """Quadratic-form model: a T1 specification plus a shift ``M``.

    Parameters
    ----------
    spec : ModelSpec
        Any family; it is converted to T1.
    M : (n, k) array_like, optional
        Mean shift, default zero.
    convention : {"corrected", "literal"}
        See the module docstring.

    Attributes
    ----------
    U : ndarray (k, k)
        ``tr(A_ij) / n`` (corrected) or ``tr(A_ij)`` (literal).
    Omega : ndarray (k, k)
        Symmetric part of ``sum_ij B_ij M' A_ji M`` (``A_ij`` under the literal
        convention). In the corrected convention its trace is the
        non-centrality ``vec(M')' Theta vec(M')``.
    Delta : ndarray (k, k)
        ``G'G`` with ``G = sum_cd A_dc M B_cd`` (``A_cd`` under the literal
        convention).
    """

    spec: ModelSpec
    M: np.ndarray | None = None
    convention: str = "corrected"
    t1: T1Spec = field(init=False, repr=False)
    U: np.ndarray = field(init=False, repr=False)
    Omega: np.ndarray = field(init=False, repr=False)
    Delta: np.ndarray = field(init=False, repr=False)
    log_det_theta: float = field(init=False, repr=False)

    def __post_init__(self):
        _check_convention(self.convention)
        t1 = as_t1(self.spec)
        n, k = t1.n, t1.k
        M = np.zeros((n, k)) if self.M is None else np.array(self.M, dtype=float)
        if M.shape != (n, k):
            raise DimensionError(f"M must be {n}x{k}")
        M.setflags(write=False)
        traces = np.einsum("jlrr->jl", t1.A)
        U = traces / n if self.convention == "corrected" else traces
        U = sym_part(U)
        if not np.all(np.diag(U) > 0):
            raise DomainError("diagonal of U must be positive")
        B = t1.b
        # the literal display pairs A_ij with b_i b_j'; pairing with A_ji makes
        # tr(Omega) = vec(M')' Theta vec(M') and G the reshaped Theta vec(M')
        A = t1.A if self.convention == "literal" else t1.A.transpose(1, 0, 2, 3)
        # Omega = sum_ij b_i b_j' M' A_ij M
        omega = np.einsum("ci,dj,rd,ijrs,sf->cf", B, B, M, A, M)
        # G = sum_cd A_cd M b_c b_d'
        G = np.einsum("cdrs,sx,xc,yd->ry", A, M, B, B)
        delta = G.T @ G
        for name, val in (("t1", t1), ("M", M), ("U", U), ("Omega", sym_part(omega)),
                          ("Delta", sym_part(delta)), ("log_det_theta", log_det_precision(t1))):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.t1.n

    @property
    def k(self) -> int:
        return self.t1.k

    @property
    def B(self) -> np.ndarray:
        return self.t1.b

    @property
    def is_central(self) -> bool:
        return not np.any(self.M)

    @property
    def isotropic(self) -> bool:
        """True when every diagonal block is a multiple of the identity."""
        n = self.n
        for j in range(self.k):
            a = self.t1.A[j, j]
            if np.abs(a - np.trace(a) / n * np.eye(n)).max() > 1e-12 * np.abs(a).max():
                return False
        return True

    @property
    def mass(self) -> float:
        """Total mass ``|Theta|^{1/2} |U|^{-n/2}`` of the central density formula."""
        return math.exp(0.5 * self.log_det_theta - 0.5 * self.n * np.linalg.slogdet(self.U)[1])

    def frame_T(self, S: np.ndarray) -> np.ndarray:
        """``T = B' S B`` so that ``t_ij = b_i' S b_j``."""
        return self.B.T @ S @ self.B

    def with_convention(self, convention: str) -> "QFModel":
        return QFModel(self.spec, self.M, convention)


def _log_mv_gamma(k: int, a: float, experimental: bool) -> tuple[float, float]:
    """``(log|Gamma_k(a)|, sign)``; outside the domain only with ``experimental``."""
    if a > 0.5 * (k - 1):
        return mv_gamma_ln(k, a), 1.0
    if not experimental:
        raise DomainError(
            f"need n > k - 1 for an absolutely continuous law (Gamma_k({a}) with k={k})"
        )
    args = a - 0.5 * np.arange(k)
    sign = float(np.prod(gammasgn(args)))
    return 0.25 * k * (k - 1) * _LOGPI + float(gammaln(args).sum()), sign


def _require_pd_matrix(S, name="S") -> np.ndarray:
    s = as_square(S)
    require_pd(s, name)
    return sym_part(s)


def log_density_S(model: QFModel, S: MatrixLike, *, cfg: HypergeomConfig | None = None,
                  continuation_experimental: bool = False) -> float:
    """Log of :func:`density_S`."""
    k, n = model.k, model.n
    S = _require_pd_matrix(S)
    if S.shape != (k, k):
        raise DimensionError(f"S must be {k}x{k}")
    lg, sg = _log_mv_gamma(k, 0.5 * n, continuation_experimental)
    if sg < 0:
        raise DomainError("formula is negative here; use the value form")
    T = model.frame_T(S)
    _, logdet_T = np.linalg.slogdet(T)
    out = (0.5 * model.log_det_theta - 0.5 * n * k * _LOG2 - lg
           - 0.5 * float(np.trace(model.U @ T)) + 0.5 * (n - k - 1) * logdet_T)
    if not model.is_central:
        out += _noncentral_S(model, S, T, cfg)
    return out


def _noncentral_S(model: QFModel, S, T, cfg) -> float:
    cfg = cfg or DEFAULT_SERIES
    c01 = HypergeomConfig((), (0.5 * model.n,), cfg.max_weight, cfg.rel_tol)
    dh = sqrtm_psd(model.Delta)
    # Delta lives in the frame of S; the literal reading pairs it with T
    arg = S if model.convention == "corrected" else T
    eigs = np.linalg.eigvalsh(sym_part(dh @ arg @ dh)) / 4.0
    res = hypergeom_eigs(c01, eigs)
    return -0.5 * float(np.trace(model.Omega)) + res.log_abs


def density_S(model: QFModel, S: MatrixLike, *, cfg: HypergeomConfig | None = None,
              continuation_experimental: bool = False) -> float:
    """Density of ``S = (X + M)'(X + M)`` at a positive definite ``S``.

    Central part::

        |Theta|^{1/2} / (2^{nk/2} Gamma_k(n/2)) etr(-U T / 2) |T|^{(n-k-1)/2}

    with ``T = B'SB``; for ``M != 0`` it is multiplied by
    ``etr(-Omega/2) 0F1(n/2; Delta S / 4)`` (``Delta T / 4`` under the literal
    convention), the series taken at the spectrum of ``Delta^{1/2} S Delta^{1/2}``.

    Raises
    ------
    DomainError
        ``S`` not positive definite, or ``n <= k - 1`` without
        ``continuation_experimental``.
    """
    if continuation_experimental and 0.5 * model.n <= 0.5 * (model.k - 1):
        k, n = model.k, model.n
        S = _require_pd_matrix(S)
        lg, sg = _log_mv_gamma(k, 0.5 * n, True)
        T = model.frame_T(S)
        sT, ldT = np.linalg.slogdet(T)
        out = (0.5 * model.log_det_theta - 0.5 * n * k * _LOG2 - lg
               - 0.5 * float(np.trace(model.U @ T)) + 0.5 * (n - k - 1) * ldT)
        if not model.is_central:
            out += _noncentral_S(model, S, T, cfg)
        return sg * math.exp(out)
    return _finish(log_density_S(model, S, cfg=cfg), False)


def wishart_log_density(n: int, Phi: MatrixLike, Psi: MatrixLike, S: MatrixLike,
                        q: float = 2.0, *, cfg: HypergeomConfig | None = None,
                        center: bool = True) -> float:
    """Log of :func:`wishart_density`."""
    if not q > 0:
        raise DomainError("q must be positive")
    phi = _require_pd_matrix(_expand_phi(Phi, n), "Phi")
    psi = _require_pd_matrix(Psi, "Psi")
    S = _require_pd_matrix(S)
    nn, k = phi.shape[0], psi.shape[0]
    if nn != n:
        raise DimensionError(f"Phi must be {n}x{n}")
    if S.shape != (k, k):
        raise DimensionError(f"S must be {k}x{k}")
    lg = mv_gamma_ln(k, 0.5 * n)
    psi_inv = np.linalg.inv(psi)
    phi_inv = np.linalg.inv(phi)
    Y = psi_inv @ S / q
    X = np.eye(n) - 0.5 * q * phi_inv
    cfg = cfg or DEFAULT_SERIES
    f = hypergeom_two(cfg, sym_part(X), _similar_sym(psi_inv, S) / q, embed=True, center=center)
    if not f.converged:
        raise DivergenceError("0F0 series did not converge; raise max_weight")
    if f.sign <= 0:
        raise DivergenceError("0F0 series lost all precision (non-positive value)")
    return (-float(np.trace(Y)) + 0.5 * (n - k - 1) * np.linalg.slogdet(S)[1]
            - 0.5 * n * k * _LOG2 - lg - 0.5 * k * np.linalg.slogdet(phi)[1]
            - 0.5 * n * np.linalg.slogdet(psi)[1] + f.log_abs)


def _expand_phi(Phi, n: int) -> np.ndarray:
    """Scalars and 1x1 inputs stand for a multiple of ``I_n``."""
    arr = np.asarray(Phi.array if hasattr(Phi, "array") else Phi, dtype=float)
    if arr.size == 1 and n > 1:
        return float(arr.reshape(())) * np.eye(n)
    return arr


def _similar_sym(P: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Symmetric matrix with the spectrum of ``P S`` for PD ``P`` and ``S``."""
    sh = sqrtm_psd(S)
    return sym_part(sh @ P @ sh)


def wishart_density(n: int, Phi: MatrixLike, Psi: MatrixLike, S: MatrixLike,
                    q: float = 2.0, *, cfg: HypergeomConfig | None = None,
                    center: bool = True) -> float:
    """Density of ``S = X'X`` for ``X ~ T3(Phi, Psi)`` written with a free constant ``q > 0``::

        etr(-Psi^{-1} S / q) |S|^{(n-k-1)/2}
        / (2^{nk/2} Gamma_k(n/2) |Phi|^{k/2} |Psi|^{n/2})
        * 0F0(I_n - q Phi^{-1} / 2, Psi^{-1} S / q)

    The two-argument 0F0 pairs an ``n x n`` with a ``k x k`` argument. The
    value does not depend on ``q``.

    Parameters
    ----------
    center : bool
        Evaluate the series with the identity shift applied (see
        :func:`matgamma.specfun.hypergeom_two`). ``False`` sums the raw
        series, which makes the q-invariance a non-trivial check.
    """
    return _finish(wishart_log_density(n, Phi, Psi, S, q, cfg=cfg, center=center), False)


def wishart_classical_density(n: int, Psi: MatrixLike, S: MatrixLike) -> float:
    """Central Wishart ``W_k(n, Psi)`` density, closed form."""
    psi = _require_pd_matrix(Psi, "Psi")
    S = _require_pd_matrix(S)
    k = psi.shape[0]
    val = (-0.5 * np.trace(np.linalg.solve(psi, S)) + 0.5 * (n - k - 1) * np.linalg.slogdet(S)[1]
           - 0.5 * n * k * _LOG2 - mv_gamma_ln(k, 0.5 * n) - 0.5 * n * np.linalg.slogdet(psi)[1])
    return math.exp(val)


# -- moment generating functions ---------------------------------------------

def gamma_to_C(Gamma: ArrayLike) -> np.ndarray:
    """Symmetric ``C`` with ``tr(CS) = sum_{i<=j} gamma_ij s_ij``.

    Only the upper triangle of ``Gamma`` is read.
    """
    G = np.triu(as_square(Gamma))
    return 0.5 * (G + G.T)


def mgf(model: QFModel, Gamma: ArrayLike, *, log: bool = False) -> float:
    """Moment generating function ``E exp(sum_{i<=j} gamma_ij s_ij)``.

    Central value ``|Theta|^{1/2} |U|^{-n/2} |I - W|^{-n/2}``; non-central
    multiplier ``etr(-Omega/2) etr(Delta V / 2)``. Under the corrected
    convention ``W = 2 U^{-1/2} B'CB U^{-1/2}`` and
    ``V = B U^{-1/2} (I - W)^{-1} U^{-1/2} B'``; under the literal convention
    ``W = U^{-1/2} B R B' U^{-1/2}`` with ``2R = Gamma + I`` and
    ``V = U^{-1} (I - W)^{-1}``.

    Raises
    ------
    DivergenceError
        If ``I - W`` is not positive definite (spectral radius of ``W``
        at least 1 for PSD ``W``).
    """
    k, n = model.k, model.n
    Gamma = as_square(Gamma)
    if Gamma.shape != (k, k):
        raise DimensionError(f"Gamma must be {k}x{k}")
    U = model.U
    uih = inv_sqrtm_pd(U)
    B = model.B
    if model.convention == "corrected":
        W = 2.0 * uih @ B.T @ gamma_to_C(Gamma) @ B @ uih
    else:
        G = np.triu(Gamma)
        R = 0.5 * ((G + G.T - np.diag(np.diag(G))) + np.eye(k))
        W = uih @ B @ R @ B.T @ uih
    W = sym_part(W)
    IW = np.eye(k) - W
    w = np.linalg.eigvalsh(IW)
    if w.min() <= 0:
        raise DivergenceError("MGF does not exist: I - W is not positive definite")
    out = (0.5 * model.log_det_theta - 0.5 * n * np.linalg.slogdet(U)[1]
           - 0.5 * n * float(np.log(w).sum()))
    if not model.is_central:
        IWinv = np.linalg.inv(IW)
        if model.convention == "corrected":
            V = B @ uih @ IWinv @ uih @ B.T
        else:
            V = np.linalg.inv(U) @ IWinv
        out += -0.5 * float(np.trace(model.Omega)) + 0.5 * float(np.trace(model.Delta @ V))
    return _finish(out, log)


def gaussian_mgf_oracle(spec: ModelSpec, Gamma: ArrayLike, M: ArrayLike | None = None) -> float:
    """Exact ``E exp(tr(C S))`` from the ``nk``-dimensional Gaussian.

    Uses ``tr(CS) = w'(I_n ⊗ C) w`` with ``w = vec((X + M)')`` and
    ``E exp(w'Qw) = |I - 2 Theta^{-1} Q|^{-1/2} exp(mu'Theta(Theta - 2Q)^{-1}Theta mu / 2 - mu'Theta mu / 2)``.
    """
    theta = build_precision(spec).array
    n = spec.n
    Q = np.kron(np.eye(n), gamma_to_C(Gamma))
    P = theta - 2.0 * Q
    w = np.linalg.eigvalsh(sym_part(P))
    if w.min() <= 0:
        raise DivergenceError("Theta - 2Q is not positive definite")
    ld = 0.5 * np.linalg.slogdet(theta)[1] - 0.5 * float(np.log(w).sum())
    if M is not None:
        mu = np.asarray(M, dtype=float).ravel()
        tm = theta @ mu
        ld += 0.5 * tm @ np.linalg.solve(P, tm) - 0.5 * mu @ tm
    return math.exp(ld)


def mgf_wishart(n: int, Phi: MatrixLike, Psi: MatrixLike, Gamma: ArrayLike, q: float | None = None, *,
                convention: str = "corrected", cfg: HypergeomConfig | None = None) -> float:
    """MGF of ``S = X'X`` for ``X ~ T3(Phi, Psi)`` via a two-argument 1F0.

    Corrected form::

        (q/2)^{nk/2} |Phi|^{-k/2} |W|^{-n/2} 1F0(n/2; I_n - q Phi^{-1}/2, W^{-1})

    with ``W = I - q Psi^{1/2} C Psi^{1/2}``. The literal convention evaluates
    ``|Phi|^{-k/2} |W|^{-n/2} 1F0(n/2; q I - Phi^{-1}/2, W^{-1})`` with
    ``2R = Gamma + I`` in place of ``C``.

    The series converges at the geometric rate
    ``rho(I - q Phi^{-1}/2) rho(W^{-1})``. The default ``q`` minimizes the
    first factor; explicit values far from it can exhaust ``max_weight``.

    Raises
    ------
    DivergenceError
        Singular ``W``, a divergent series, or one that did not converge.
    """
    _check_convention(convention)
    phi = _require_pd_matrix(_expand_phi(Phi, n), "Phi")
    psi = _require_pd_matrix(Psi, "Psi")
    k = psi.shape[0]
    if phi.shape[0] != n:
        raise DimensionError(f"Phi must be {n}x{n}")
    Gamma = as_square(Gamma)
    if q is None:
        w = np.linalg.eigvalsh(np.linalg.inv(phi))
        q = 4.0 / (w.max() + w.min()) if convention == "corrected" else 1.0
    if not q > 0:
        raise DomainError("q must be positive")
    ph = sqrtm_psd(psi)
    if convention == "corrected":
        C = gamma_to_C(Gamma)
        X = np.eye(n) - 0.5 * q * np.linalg.inv(phi)
        const = 0.5 * n * k * math.log(q / 2.0)
    else:
        G = np.triu(Gamma)
        C = 0.5 * ((G + G.T - np.diag(np.diag(G))) + np.eye(k))
        X = q * np.eye(n) - 0.5 * np.linalg.inv(phi)
        const = 0.0
    W = sym_part(np.eye(k) - q * ph @ C @ ph)
    sw, ldw = np.linalg.slogdet(W)
    if sw == 0 or abs(np.linalg.cond(W)) > 1e14:
        raise DivergenceError("W is singular")
    Winv = np.linalg.inv(W)
    cfg = cfg or DEFAULT_SERIES
    c10 = HypergeomConfig((0.5 * n,), (), cfg.max_weight, cfg.rel_tol)
    f = hypergeom_two(c10, sym_part(X), sym_part(Winv), embed=True)
    if not f.converged:
        raise DivergenceError("1F0 series did not converge; raise max_weight or use q near 1")
    out = const - 0.5 * k * np.linalg.slogdet(phi)[1] - 0.5 * n * ldw + f.log_abs
    if sw < 0 and n % 2:
        raise DomainError("|W|^{-n/2} is not real")
    return f.sign * math.exp(out)


# -- latent roots -------------------------------------------------------

def _roots_ok(l: np.ndarray) -> bool:
    return bool(np.all(l > 0) and np.all(np.diff(l) < 0))


def _log_roots_const(n: int, k: int) -> float:
    return (0.5 * k * k * _LOGPI - 0.5 * n * k * _LOG2
            - mv_gamma_ln(k, 0.5 * n) - mv_gamma_ln(k, 0.5 * k))


def _log_vandermonde(l: np.ndarray) -> float:
    d = l[:, None] - l[None, :]
    iu = np.triu_indices(l.size, 1)
    return float(np.log(d[iu]).sum())


def roots_density(model: QFModel, l: ArrayLike, *, cfg: HypergeomConfig | None = None) -> float:
    """Joint density of the ordered latent roots ``l_1 > ... > l_k > 0`` of ``S``.

    ``pi^{k^2/2} |Theta|^{1/2} / (2^{nk/2} Gamma_k(n/2) Gamma_k(k/2))
    prod_{i<j}(l_i - l_j) prod l_i^{(n-k-1)/2} 0F0(-U/2, L)``; for ``M != 0``
    times ``etr(-Omega/2) 0F1(n/2; Delta/4, L)``. Zero outside the ordered cone.
    """
    l = np.atleast_1d(np.asarray(l, dtype=float))
    k, n = model.k, model.n
    if l.shape != (k,):
        raise DimensionError(f"expected {k} roots")
    if n <= k - 1:
        raise DomainError("need n > k - 1")
    if not _roots_ok(l):
        return 0.0
    cfg = cfg or DEFAULT_SERIES
    out = (_log_roots_const(n, k) + 0.5 * model.log_det_theta + _log_vandermonde(l)
           + 0.5 * (n - k - 1) * float(np.log(l).sum()))
    f = hypergeom_two(cfg, -0.5 * model.U, np.diag(l), center=True)
    if f.sign <= 0 or not f.converged:
        raise DivergenceError("0F0 series failed to converge")
    out += f.log_abs
    if not model.is_central:
        c01 = HypergeomConfig((), (0.5 * n,), cfg.max_weight, cfg.rel_tol)
        g = hypergeom_two(c01, 0.25 * model.Delta, np.diag(l))
        out += -0.5 * float(np.trace(model.Omega)) + g.log_abs
    return _finish(out, False)


def james_roots_log_density(n: int, Psi: MatrixLike, roots: ArrayLike,
                            cfg: HypergeomConfig | None = None) -> np.ndarray:
    """Vectorized log of :func:`james_roots_density` over rows of ``roots``.

    Rows outside the ordered cone get ``-inf``.
    """
    psi = _require_pd_matrix(Psi, "Psi")
    k = psi.shape[0]
    R = np.atleast_2d(np.asarray(roots, dtype=float))
    if R.shape[1] != k:
        raise DimensionError(f"expected {k} roots per row")
    if n <= k - 1:
        raise DomainError("need n > k - 1")
    cfg = cfg or DEFAULT_SERIES
    out = np.full(R.shape[0], -np.inf)
    ok = np.all(R > 0, axis=1) & np.all(np.diff(R, axis=1) < 0, axis=1)
    if not ok.any():
        return out
    Rk = R[ok]
    wpsi = np.linalg.eigvalsh(np.linalg.inv(psi))
    x = -0.5 * wpsi
    # 0F0(A + cI, B + dI) = 0F0(A, B) etr(dA + cB) e^{cdk}
    c = 0.5 * (x.max() + x.min())
    d = 0.5 * (Rk.max(axis=1) + Rk.min(axis=1))
    x0 = x - c
    y0 = Rk - d[:, None]
    shift = d * x0.sum() + c * y0.sum(axis=1) + c * d * k
    la, sg, conv = hypergeom_two_batch(cfg, x0, y0, n_unit=k)
    if np.any(sg <= 0) or not np.all(conv):
        raise DivergenceError("0F0 series failed to converge on part of the batch")
    iu = np.triu_indices(k, 1)
    vdm = np.log(Rk[:, iu[0]] - Rk[:, iu[1]]).sum(axis=1)
    base = _log_roots_const(n, k) - 0.5 * n * np.linalg.slogdet(psi)[1]
    out[ok] = base + vdm + 0.5 * (n - k - 1) * np.log(Rk).sum(axis=1) + la + shift
    return out


def james_roots_density(n: int, Psi: MatrixLike, l: ArrayLike,
                        cfg: HypergeomConfig | None = None) -> float:
    """Latent-root density of the central Wishart ``W_k(n, Psi)``::

        pi^{k^2/2} / (2^{nk/2} Gamma_k(n/2) Gamma_k(k/2) |Psi|^{n/2})
        prod l_i^{(n-k-1)/2} prod_{i<j}(l_i - l_j) 0F0(-Psi^{-1}/2, L)
    """
    l = np.atleast_1d(np.asarray(l, dtype=float))
    return float(np.exp(james_roots_log_density(n, Psi, l[None, :], cfg)[0]))


# -- k = 3 product-moment formula ----------------------------------------------

def wishart1928_density_k3(a: float, b: float, c: float, f: float, g: float, h: float,
                           B: MatrixLike, n: int, *, cross_f: float = 8.0,
                           scale: float = 1.0) -> float:
    """Three-variate product-moment density written with cofactor coefficients.

    With ``[[A, F, G], [F, B, H], [G, H, C]] = scale * B^{-1}`` (signed
    cofactors divided by ``|B|``) the value is::

        |coef|^{(n-1)/2} |stat|^{(n-5)/2} exp(-Aa - Bb - Cc - 2Hh - 2Gg - cross_f Ff)
        / (pi^{3/2} Gamma((n-1)/2) Gamma((n-2)/2) Gamma((n-3)/2))

    where ``stat = [[a, f, g], [f, b, h], [g, h, c]]``. The default
    ``cross_f = 8`` reproduces the historical display; the value that makes
    the exponent the trace ``tr(coef stat)`` is 2.
    """
    if n <= 4:
        raise DomainError("need n > 4")
    stat = np.array([[a, f, g], [f, b, h], [g, h, c]], dtype=float)
    w = np.linalg.eigvalsh(stat)
    if w.min() <= 0:
        raise DomainError("statistic matrix is not positive definite")
    Bm = _require_pd_matrix(B, "B")
    if Bm.shape != (3, 3):
        raise DimensionError("B must be 3x3")
    coef = scale * np.linalg.inv(Bm)
    A_, F_, G_ = coef[0, 0], coef[0, 1], coef[0, 2]
    B_, H_, C_ = coef[1, 1], coef[1, 2], coef[2, 2]
    expo = -(A_ * a + B_ * b + C_ * c + 2 * H_ * h + 2 * G_ * g + cross_f * F_ * f)
    log_const = -(1.5 * _LOGPI + gammaln(0.5 * (n - 1)) + gammaln(0.5 * (n - 2))
                  + gammaln(0.5 * (n - 3)))
    val = (log_const + 0.5 * (n - 1) * np.linalg.slogdet(coef)[1]
           + 0.5 * (n - 5) * float(np.log(w).sum()) + expo)
    return math.exp(val)
