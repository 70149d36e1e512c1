"""Multivariate gamma function and hypergeometric functions of matrix argument.

The series

    pFq(a; b; X)    = sum_kappa [(a)_kappa / (b)_kappa] C_kappa(X) / |kappa|!
    pFq(a; b; X, Y) = sum_kappa [(a)_kappa / (b)_kappa] C_kappa(X) C_kappa(Y)
                      / (|kappa|! C_kappa(I_n))

are summed weight by weight in log-magnitude/sign form, so that terms far
beyond the float range do not overflow before they cancel or decay.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from . import _jack
from .errors import DimensionError, DivergenceError, DomainError, PoleError
from .linalg import MatrixLike, as_square, spectrum
from .manifolds import DEFAULT_BLOCK, haar_average

_LOG_PI = math.log(math.pi)
_POLE_ATOL = 1e-12
_START_WEIGHT = 32


def mv_gamma_ln(k: int, a: float) -> float:
    """Log of the multivariate gamma function.

    ``log Gamma_k(a) = k(k-1)/4 log(pi) + sum_{i=1}^k log Gamma(a - (i-1)/2)``

    Raises
    ------
    DomainError
        If ``a <= (k - 1)/2``, where the defining integral diverges.
    """
    k = int(k)
    if k < 1:
        raise ValueError("k must be a positive integer")
    a = float(a)
    if not a > 0.5 * (k - 1):
        raise DomainError(
            f"multivariate gamma needs a > (k-1)/2 = {0.5 * (k - 1)}, got a={a}"
        )
    return float(0.25 * k * (k - 1) * _LOG_PI + gammaln(a - 0.5 * np.arange(k)).sum())


def mv_gamma(k: int, a: float) -> float:
    return math.exp(mv_gamma_ln(k, a))


@dataclass(frozen=True)
class HypergeomConfig:
    """Parameters and truncation controls of a pFq series.

    Parameters
    ----------
    upper, lower : sequence of float
        ``a_1..a_p`` and ``b_1..b_q``.
    max_weight : int
        Largest partition weight summed.
    rel_tol : float
        Truncation tolerance relative to the partial sum.
    """

    upper: tuple[float, ...] = ()
    lower: tuple[float, ...] = ()
    max_weight: int = 60
    rel_tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple(float(a) for a in self.upper))
        object.__setattr__(self, "lower", tuple(float(b) for b in self.lower))
        if int(self.max_weight) != self.max_weight or self.max_weight < 1:
            raise ValueError("max_weight must be an integer >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")

    @property
    def pq(self) -> tuple[int, int]:
        return len(self.upper), len(self.lower)

    def check(self, n: int) -> None:
        """Reject lower parameters on the pole lattice ``(i-1)/2 - t``, ``i <= n``."""
        for b in self.lower:
            for i in range(n):
                t = 0.5 * i - b
                if t > -_POLE_ATOL and abs(t - round(t)) <= _POLE_ATOL and round(t) < self.max_weight:
                    raise PoleError(
                        f"lower parameter {b} equals (i-1)/2 - t with i={i + 1}, t={round(t)}"
                    )


@dataclass
class SeriesResult:
    """Outcome of a truncated series evaluation.

    ``value`` may overflow to ``inf``; ``log_abs`` and ``sign`` always hold the
    full-range result.
    """

    value: float
    last_weight_contribution: float
    truncated_at: int
    converged: bool
    log_abs: float = 0.0
    sign: int = 1
    method: str = "series"

    def to_dict(self) -> dict:
        return asdict(self)


def _closed(log_abs: float, sign: int, method: str) -> SeriesResult:
    value = sign * math.exp(log_abs) if log_abs < 709.7 else sign * math.inf
    return SeriesResult(value, 0.0, 0, True, log_abs, sign, method)


def _log_poch_table(params: Sequence[float], parts: np.ndarray):
    """``sum_a log|(a)_kappa|`` and sign product over ``params`` for rows of ``parts``."""
    P, L = parts.shape
    top = int(parts[:, 0].max()) if P else 0
    log_abs = np.zeros(P)
    sign = np.ones(P)
    j = np.arange(top)
    for a in params:
        for i in range(L):
            f = a - 0.5 * i + j
            lf = np.concatenate([[0.0], np.cumsum(np.log(np.abs(np.where(f == 0, 1.0, f))))])
            neg = np.concatenate([[0], np.cumsum(f < 0)])
            zero = np.concatenate([[0], np.cumsum(f == 0)])
            c = parts[:, i]
            log_abs += lf[c]
            sign *= np.where(neg[c] % 2 == 1, -1.0, 1.0)
            sign = np.where(zero[c] > 0, 0.0, sign)
    return log_abs, sign


def _log_zonal(points: np.ndarray, max_weight: int, max_parts: int):
    """Table plus ``log|C_kappa(x)/|kappa|!|`` and signs, shape ``(P, B)``."""
    n = points.shape[1]
    table = _jack.pair_table(max_weight, max_parts, n > max_parts)
    vals = _jack.q_values(_jack.ALPHA * points, table)
    with np.errstate(divide="ignore"):
        return table, np.log(np.abs(vals)), np.sign(vals)


def _series_batch(cfg: HypergeomConfig, xe: np.ndarray, ye: np.ndarray | None,
                  n_unit: int | None = None):
    """Core summation over a batch of spectra.

    Parameters
    ----------
    xe : ndarray, shape (B, nx)
    ye : ndarray, shape (B, ny) or None
        Second argument spectra for the two-matrix series.
    n_unit : int, optional
        Dimension of the identity in ``C_kappa(I_n)``; defaults to
        ``max(nx, ny)``.

    Returns
    -------
    log_abs, sign, last, truncated_at, converged : ndarrays of shape (B,)
    """
    xe = np.atleast_2d(np.asarray(xe, dtype=float))
    B, nx = xe.shape
    two = ye is not None
    if two:
        ye = np.atleast_2d(np.asarray(ye, dtype=float))
        ny = ye.shape[1]
        L = min(nx, ny)
        n_unit = max(nx, ny) if n_unit is None else n_unit
    else:
        L = nx
    cfg.check(L)

    rx = np.abs(xe).max(axis=1)
    if two:
        ry = np.abs(ye).max(axis=1)
        rx = rx * ry
    log_abs = np.zeros(B)
    sign = np.ones(B)
    last = np.zeros(B)
    trunc = np.zeros(B, dtype=int)
    conv = np.ones(B, dtype=bool)

    todo = np.flatnonzero(rx > 0)
    M = min(cfg.max_weight, _START_WEIGHT)
    while todo.size:
        sx = np.abs(xe[todo]).max(axis=1)
        table, lzx, szx = _log_zonal(xe[todo] / sx[:, None], M, L)
        lt = lzx + table.weight[:, None] * np.log(sx)[None, :]
        st = szx
        if two:
            sy = np.abs(ye[todo]).max(axis=1)
            _, lzy, szy = _log_zonal(ye[todo] / sy[:, None], M, L)
            _, lzi, _ = _log_zonal(np.ones((1, n_unit)), M, L)
            lt = lt + lzy + table.weight[:, None] * np.log(sy)[None, :] - lzi
            st = st * szy
        pa, ps = _log_poch_table(cfg.upper, table.parts)
        pb, pbs = _log_poch_table(cfg.lower, table.parts)
        lt = lt + (pa - pb)[:, None]
        st = st * (ps * pbs)[:, None]
        with np.errstate(invalid="ignore"):
            lt = np.where(st == 0, -np.inf, lt)
        shift = lt.max(axis=0)
        terms = st * np.exp(lt - shift[None, :])
        ind = np.zeros((table.size, M + 1))
        ind[np.arange(table.size), table.weight] = 1.0
        contrib = ind.T @ terms            # (M+1, b)
        abs_contrib = ind.T @ np.abs(terms)
        partial = np.cumsum(contrib, axis=0)
        small = abs_contrib <= cfg.rel_tol * np.abs(partial)
        ok = small[1:] & small[:-1]        # ok[m-1] means weights m-1 and m small
        hit = ok.any(axis=0)
        stop = np.where(hit, ok.argmax(axis=0) + 1, M)
        final = M >= cfg.max_weight
        done = hit | final
        cols = np.arange(todo.size)
        s_val = partial[stop, cols]
        with np.errstate(divide="ignore"):
            la = np.log(np.abs(s_val)) + shift
        idx = todo[done]
        log_abs[idx] = la[done]
        sign[idx] = np.sign(s_val[done])
        last[idx] = (contrib[stop, cols] * np.exp(shift))[done]
        trunc[idx] = stop[done]
        conv[idx] = hit[done]
        todo = todo[~done]
        M = min(cfg.max_weight, 2 * M)
    return log_abs, sign, last, trunc, conv


def _result(i, out) -> SeriesResult:
    log_abs, sign, last, trunc, conv = (o[i] for o in out)
    val = float(sign * math.exp(log_abs)) if log_abs < 709.7 else float(sign * math.inf)
    return SeriesResult(val, float(last), int(trunc), bool(conv), float(log_abs), int(sign))


def _scalar_multiple_of_identity(a: np.ndarray, rtol: float = 1e-14):
    c = float(np.trace(a)) / a.shape[0]
    scale = max(np.abs(a).max(initial=0.0), 1e-300)
    if np.abs(a - c * np.eye(a.shape[0])).max(initial=0.0) <= rtol * scale:
        return c
    return None


def _closed_form_one(cfg: HypergeomConfig, eigs: np.ndarray):
    p, q = cfg.pq
    if p == 0 and q == 0:
        s = float(eigs.sum())
        return _closed(s, 1, "etr")
    if p == 1 and q == 0:
        if np.abs(eigs).max(initial=0.0) >= 1.0:
            raise DivergenceError("1F0 series diverges: spectral radius >= 1")
        d = 1.0 - eigs
        sgn = int(np.prod(np.sign(d)))
        return _closed(-cfg.upper[0] * float(np.log(np.abs(d)).sum()), sgn, "det-power")
    return None


def hypergeom_eigs(cfg: HypergeomConfig, eigs, *, use_closed_form: bool = True) -> SeriesResult:
    """One-argument pFq at a given (real) spectrum."""
    eigs = np.atleast_1d(np.asarray(eigs, dtype=float))
    if eigs.ndim != 1 or eigs.size == 0:
        raise DimensionError("eigs must be a non-empty vector")
    cfg.check(eigs.size)
    p, q = cfg.pq
    if p == 1 and q == 0 and np.abs(eigs).max(initial=0.0) >= 1.0:
        raise DivergenceError("1F0 series diverges: spectral radius >= 1")
    if use_closed_form:
        res = _closed_form_one(cfg, eigs)
        if res is not None:
            return res
    return _result(0, _series_batch(cfg, eigs[None, :], None))


def hypergeom_one(cfg: HypergeomConfig, X: MatrixLike, *, use_closed_form: bool = True) -> SeriesResult:
    """pFq of one matrix argument.

    Parameters
    ----------
    cfg : HypergeomConfig
    X : (n, n) array_like or SymMatrix
        Symmetric, or more generally similar to a symmetric matrix (real
        spectrum), e.g. a product of a PSD and a symmetric matrix.
    use_closed_form : bool
        Use ``etr(X)`` for 0F0 and ``|I - X|^{-a}`` for 1F0. Set False to
        force the truncated series.

    Raises
    ------
    DivergenceError
        1F0 with spectral radius ``>= 1``.
    PoleError
        A lower parameter hits the pole lattice for this dimension.

    Examples
    --------
    >>> hypergeom_one(HypergeomConfig([2.0], []), [[0.5]], use_closed_form=False).value
    4.0...
    """
    return hypergeom_eigs(cfg, spectrum(as_square(X)), use_closed_form=use_closed_form)


def hypergeom_two(cfg: HypergeomConfig, X: MatrixLike, Y: MatrixLike, *,
                  embed: bool = False, center: bool = False,
                  use_closed_form: bool = True) -> SeriesResult:
    """pFq of two matrix arguments.

    Parameters
    ----------
    X, Y : array_like or SymMatrix
        Square matrices with real spectra.
    embed : bool
        Allow ``dim(Y) != dim(X)``. The smaller argument is padded with
        zeros, i.e. placed as a leading block of the larger dimension, and
        ``C_kappa(I_n)`` uses the larger ``n``.
    center : bool
        For 0F0 only: shift each argument by a multiple of the identity,
        using ``0F0(A + cI, B) = etr(cB) 0F0(A, B)``, to shrink the series
        argument. The shift on the smaller argument is applied only when
        dimensions agree.
    use_closed_form : bool
        Reduce to one-argument closed forms when an argument is a multiple
        of the identity.

    Raises
    ------
    DimensionError
        Unequal dimensions without ``embed``.
    """
    xa, ya = as_square(X), as_square(Y)
    if xa.shape != ya.shape and not embed:
        raise DimensionError(f"dimension mismatch: {xa.shape[0]} vs {ya.shape[0]}")
    if xa.shape[0] < ya.shape[0]:
        xa, ya = ya, xa
    n, k = xa.shape[0], ya.shape[0]
    xe, ye = spectrum(xa), spectrum(ya)
    p, q = cfg.pq

    if use_closed_form:
        # pFq(cI_n, Y) = pFq(cY)
        c = _scalar_multiple_of_identity(xa)
        if c is not None:
            return hypergeom_eigs(cfg, c * ye)
        if n == k:
            c = _scalar_multiple_of_identity(ya)
            if c is not None:
                return hypergeom_eigs(cfg, c * xe)
    if p == 1 and q == 0 and np.abs(xe).max() * np.abs(ye).max() >= 1.0:
        raise DivergenceError("1F0 two-argument series: spectral radius product >= 1")

    log_shift = 0.0
    if center:
        if (p, q) != (0, 0):
            raise ValueError("center=True is only valid for 0F0")
        cx = 0.5 * (xe.max() + xe.min())
        cy = 0.5 * (ye.max() + ye.min()) if n == k else 0.0
        xe = xe - cx
        ye = ye - cy
        # 0F0(A0 + cx I, B0 + cy I) = 0F0(A0, B0) etr(cy A0 + cx B0) e^{cx cy n}
        log_shift = cy * xe.sum() + cx * ye.sum() + cx * cy * n
    out = _series_batch(cfg, xe[None, :], ye[None, :], n_unit=n)
    res = _result(0, out)
    if log_shift:
        res.log_abs += float(log_shift)
        res.last_weight_contribution *= math.exp(log_shift)
        res.value = res.sign * math.exp(res.log_abs) if res.log_abs < 709.7 else res.sign * math.inf
    return res


def hypergeom_two_batch(cfg: HypergeomConfig, x_eigs, y_eigs_batch, *, n_unit: int | None = None):
    """Two-argument series with a fixed first spectrum and many second spectra.

    Returns ``(log_abs, sign, converged)`` arrays; used for quadrature grids.
    """
    x = np.asarray(x_eigs, dtype=float)
    yb = np.atleast_2d(np.asarray(y_eigs_batch, dtype=float))
    xb = np.broadcast_to(x, (yb.shape[0], x.size))
    log_abs, sign, _, _, conv = _series_batch(cfg, xb, yb, n_unit=n_unit)
    return log_abs, sign, conv


def hypergeom_one_batch(cfg: HypergeomConfig, eigs_batch):
    """One-argument series for a batch of spectra; returns ``(log_abs, sign, converged)``."""
    eb = np.atleast_2d(np.asarray(eigs_batch, dtype=float))
    log_abs, sign, _, _, conv = _series_batch(cfg, eb, None)
    return log_abs, sign, conv


def haar_average_oracle(cfg: HypergeomConfig, X: MatrixLike, Y: MatrixLike,
                        samples: int, seed, *, block_size: int = DEFAULT_BLOCK,
                        workers: int = 1) -> tuple[float, float]:
    """Monte Carlo average of ``pFq(X H1 Y H1')`` over Haar ``H`` in O(n).

    ``H1`` holds the first ``k`` columns of ``H`` where ``Y`` is ``k x k``.

    Returns
    -------
    mean, std_error : float
    """
    xa, ya = as_square(X), as_square(Y)
    n, k = xa.shape[0], ya.shape[0]
    if k > n:
        raise DimensionError("Y must not be larger than X")
    if samples < 100:
        raise ValueError("samples must be at least 100")
    p, q = cfg.pq
    xs = 0.5 * (xa + xa.T)
    ys = 0.5 * (ya + ya.T)

    def inner(h):
        # H1' X H1, shape (m, k, k)
        return np.einsum("mik,ij,mjl->mkl", h, xs, h)

    if (p, q) == (0, 0):
        def func(h):
            return np.exp(np.einsum("mkl,lk->m", inner(h), ys))
    else:
        wy, vy = np.linalg.eigh(ys)
        if wy.min() >= 0:
            yh = (vy * np.sqrt(wy)) @ vy.T
        else:
            yh = None

        def func(h):
            g = inner(h)
            if yh is not None:
                eig = np.linalg.eigvalsh(yh @ g @ yh)
            else:
                ev = np.linalg.eigvals(g @ ys)
                if np.abs(ev.imag).max() > 1e-9 * max(np.abs(ev).max(), 1e-300):
                    raise DomainError("integrand argument has a non-real spectrum")
                eig = np.sort(ev.real, axis=1)
            if (p, q) == (1, 0):
                if np.abs(eig).max() >= 1.0:
                    raise DivergenceError("1F0 integrand diverges for some H")
                return np.exp(-cfg.upper[0] * np.log1p(-eig).sum(axis=1))
            la, sg, _ = hypergeom_one_batch(cfg, eig)
            return sg * np.exp(la)

    return haar_average(func, n, k, samples, seed, block_size=block_size, workers=workers)
