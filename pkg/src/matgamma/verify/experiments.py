"""Registered verification experiments.

Each experiment takes ``(params, seed)`` and returns an :class:`Outcome`.
Everything except ``timings`` is a deterministic function of its inputs.
"""
from __future__ import annotations

import math
import time

import numpy as np
from scipy import integrate, stats

from ..linalg import etr, random_orthogonal, random_spd
from ..manifolds import gindikin_contains, haar_average
from ..models import (FAMILIES, T1Spec, T3Spec, T15Spec, build_precision, dense_log_density,
                      log_density, random_spec, sample, sample_t3_direct, t15_to_t1)
from ..errors import DomainError
from ..quadform import (QFModel, density_S, gaussian_mgf_oracle, james_roots_density,
                        james_roots_log_density, mgf, roots_density, wishart1928_density_k3,
                        wishart_classical_density, wishart_density)
from ..specfun import (HypergeomConfig, haar_average_oracle, hypergeom_eigs, hypergeom_one,
                       hypergeom_two, mv_gamma_ln)
from .core import Check, Experiment, Outcome

REGISTRY: dict[str, Experiment] = {}


def register(exp_id: str, description: str):
    def deco(func):
        REGISTRY[exp_id] = Experiment(exp_id, description, func)
        return func
    return deco


def experiment_registry() -> list[tuple[str, str]]:
    return [(e.id, e.description) for e in REGISTRY.values()]


def _child_seed(seed: int, i: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed).spawn(i + 1)[i]


def _random_symmetric(n: int, radius: float, rng) -> np.ndarray:
    q = random_orthogonal(n, rng)
    w = rng.uniform(-radius, radius, n)
    return (q * w) @ q.T


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


def _worst(*vals) -> float:
    """``max`` that propagates NaN instead of dropping it."""
    arr = np.asarray(vals, dtype=float)
    return float("nan") if np.isnan(arr).any() else float(arr.max())


def _mc_z(values: np.ndarray, target: float) -> tuple[float, float, float]:
    m = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size))
    return m, se, abs(m - target) / se


# -- special functions --------------------------------------------------------

@register("etr-identity", "0F0 series against etr on random symmetric matrices")
def etr_identity(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    cfg = HypergeomConfig((), (), p["max_weight"], p["rel_tol"])
    mats = [_random_symmetric(p["n"], p["radius"], rng) for _ in range(p["count"])]
    t0 = time.perf_counter()
    res = [hypergeom_one(cfg, X, use_closed_form=False) for X in mats]
    runtime = time.perf_counter() - t0
    errs = [_rel(r.value, etr(X)) for r, X in zip(res, mats)]
    st = {"max_rel_error": _worst(*errs), "all_converged": all(r.converged for r in res),
          "max_truncated_at": max(r.truncated_at for r in res)}
    return Outcome(st, [Check("max_rel_error", "<=", p["tol"]), Check("all_converged", "==", True),
                        Check("timings.runtime_seconds", "<", p["time_limit"])],
                   timings={"runtime_seconds": runtime})


@register("detpow-identity", "1F0 series against the determinant power")
def detpow_identity(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    mats = [_random_symmetric(p["n"], p["radius"], rng) for _ in range(p["count"])]
    st = {}
    for a in p["a"]:
        cfg = HypergeomConfig((a,), (), p["max_weight"], p["rel_tol"])
        errs = [_rel(hypergeom_one(cfg, X, use_closed_form=False).value,
                     np.linalg.det(np.eye(p["n"]) - X) ** -a) for X in mats]
        st[f"max_rel_error_a{a}"] = _worst(*errs)
    st["max_rel_error"] = _worst(*st.values())
    return Outcome(st, [Check("max_rel_error", "<=", p["tol"])])


@register("gamma-recurrence", "multivariate gamma recurrence in k")
def gamma_recurrence(p: dict, seed: int) -> Outcome:
    worst = 0.0
    direct = 0.0
    for k in range(2, p["k_max"] + 1):
        for off in p["offsets"]:
            a = 0.5 * (k - 1) + off
            lhs = mv_gamma_ln(k, a)
            rhs = 0.5 * (k - 1) * math.log(math.pi) + math.lgamma(a) + mv_gamma_ln(k - 1, a - 0.5)
            worst = _worst(worst, abs(lhs - rhs))
            ref = 0.25 * k * (k - 1) * math.log(math.pi) + sum(math.lgamma(a - 0.5 * i) for i in range(k))
            direct = _worst(direct, abs(lhs - ref))
    return Outcome({"max_abs_error": worst, "max_abs_error_direct": direct},
                   [Check("max_abs_error", "<=", p["tol"]), Check("max_abs_error_direct", "<=", p["tol"])])


@register("gamma-integral-scalar", "scalar gamma integral by quadrature")
def gamma_integral_scalar(p: dict, seed: int) -> Outcome:
    c00 = HypergeomConfig((), ())
    worst_free = 0.0
    worst_series = 0.0
    for a in p["a"]:
        for z in p["z"]:
            target = math.exp(math.lgamma(a) - a * math.log(z))
            val = integrate.quad(lambda x: math.exp(-x * z) * x ** (a - 1), 0, np.inf,
                                 epsabs=0, epsrel=1e-11, limit=200)[0]
            worst_free = _worst(worst_free, _rel(val, target))
            # with a 0F0 factor inside the integral the right side becomes 1F0(a; y/z)
            y = p["y_ratio"] * z
            val = integrate.quad(lambda x: math.exp(-x * z + (a - 1) * math.log(x)
                                                    + hypergeom_eigs(c00, [x * y]).log_abs),
                                 0, np.inf, epsabs=0, epsrel=1e-11, limit=200)[0]
            rhs = hypergeom_eigs(HypergeomConfig((a,), (), 60, 1e-12), [y / z],
                                 use_closed_form=False).value
            worst_series = _worst(worst_series, _rel(val, target * rhs))
    st = {"max_rel_error": worst_free, "max_rel_error_with_0F0": worst_series}
    return Outcome(st, [Check("max_rel_error", "<=", p["tol"]),
                        Check("max_rel_error_with_0F0", "<=", p["tol"])])


@register("haar-two-arg", "two-argument 0F0 against its Haar average")
def haar_two_arg(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    cfg = HypergeomConfig((), (), 60, 1e-12)
    st = {}
    zs = []
    for i, (n, k) in enumerate(p["cases"]):
        X = random_spd(n, rng, cond=p["cond"]) * p["scale"]
        Y = random_spd(k, rng, cond=p["cond"]) * p["scale"]
        series = hypergeom_two(cfg, X, Y, embed=True).value
        mean, se = haar_average_oracle(cfg, X, Y, p["samples"], _child_seed(seed, i))
        z = abs(mean - series) / se
        tag = f"n{n}_k{k}"
        st.update({f"series_{tag}": series, f"mc_mean_{tag}": mean, f"mc_se_{tag}": se,
                   f"z_{tag}": z})
        zs.append(z)
    st["max_z"] = max(zs)
    return Outcome(st, [Check("max_z", "<=", p["sigma"])])


@register("james-0F1", "Haar average of etr(X H1') against 0F1(n/2; X'X/4)")
def james_0f1(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    n = p["n"]
    cfg = HypergeomConfig((), (0.5 * n,), 60, 1e-12)
    st = {}
    zs = []
    for i, k in enumerate(p["k_values"]):
        X = rng.normal(scale=p["scale"], size=(n, k))
        series = hypergeom_one(cfg, 0.25 * X.T @ X).value
        mean, se = haar_average(lambda h: np.exp(np.einsum("ij,mij->m", X, h)), n, k,
                                p["samples"], _child_seed(seed, i))
        z = abs(mean - series) / se
        st.update({f"series_k{k}": series, f"mc_mean_k{k}": mean, f"mc_se_k{k}": se, f"z_k{k}": z})
        zs.append(z)
    st["max_z"] = max(zs)
    return Outcome(st, [Check("max_z", "<=", p["sigma"])])


# -- models -------------------------------------------------------------------

@register("vec-kron", "trace form against the Kronecker quadratic form of vec(X')")
def vec_kron(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    e_sym = e_gen = e_lit = 0.0
    for _ in range(p["count"]):
        n, k = rng.integers(1, p["dim_max"] + 1, size=2)
        X = rng.standard_normal((n, k))
        v = X.ravel()
        A = rng.standard_normal((n, n))
        As = A + A.T
        B = rng.standard_normal((k, k))
        scale_s = np.abs(v) @ np.kron(np.abs(As), np.abs(B)) @ np.abs(v)
        scale_g = np.abs(v) @ np.kron(np.abs(A), np.abs(B)) @ np.abs(v)
        t_s = np.trace(As @ X @ B @ X.T)
        t_g = np.trace(A @ X @ B @ X.T)
        e_sym = _worst(e_sym, abs(t_s - v @ np.kron(As, B) @ v) / scale_s)
        e_gen = _worst(e_gen, abs(t_g - v @ np.kron(A, B.T) @ v) / scale_g)
        e_lit = _worst(e_lit, abs(t_g - v @ np.kron(A, B) @ v) / scale_g)
    st = {"max_rel_error_symmetric": e_sym, "max_rel_error_general_transposed": e_gen,
          "max_rel_error_general_literal": e_lit}
    findings = []
    if e_lit > p["tol"]:
        findings.append("tr(AXBX') equals vec(X')'(A kron B')vec(X') in general; "
                        "the untransposed Kronecker form needs A or B symmetric "
                        f"(max relative gap {e_lit:.3g} for non-symmetric pairs)")
    return Outcome(st, [Check("max_rel_error_symmetric", "<=", p["tol"]),
                        Check("max_rel_error_general_transposed", "<=", p["tol"])],
                   findings=findings)


@register("density-vs-mvn", "family log-densities against the dense normal oracle")
def density_vs_mvn(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    st = {}
    for fam in FAMILIES:
        worst = worst_scipy = 0.0
        for _ in range(p["count_per_family"]):
            n = int(rng.integers(1, p["n_max"] + 1))
            k = int(rng.integers(1, p["k_max"] + 1))
            spec = random_spec(fam, n, k, rng)
            mean = None
            if fam == "T3":
                spec = T3Spec(spec.Phi, spec.Psi, rng.standard_normal((n, k)))
                mean = spec.mean
            X = rng.standard_normal((n, k)) * 1.5
            ld = log_density(spec, X)
            worst = _worst(worst, abs(ld - dense_log_density(spec, X)))
            theta = build_precision(spec).array
            mu = np.zeros(n * k) if mean is None else mean.ravel()
            ref = stats.multivariate_normal.logpdf(X.ravel(), mu, np.linalg.inv(theta))
            worst_scipy = _worst(worst_scipy, abs(ld - ref))
        st[f"max_abs_error_{fam}"] = worst
        st[f"max_abs_error_scipy_{fam}"] = worst_scipy
    st["max_abs_error"] = max(v for key, v in st.items() if "scipy" not in key)
    st["max_abs_error_scipy"] = max(v for key, v in st.items() if "scipy_" in key)
    return Outcome(st, [Check("max_abs_error", "<=", p["tol"]),
                        Check("max_abs_error_scipy", "<=", p["tol"])])


def _moment_z(draws: np.ndarray, mean: np.ndarray, cov: np.ndarray):
    v = draws.reshape(draws.shape[0], -1)
    N = v.shape[0]
    z_mean = np.abs(v.mean(0) - mean) / (v.std(0, ddof=1) / math.sqrt(N))
    c = v - mean
    iu = np.triu_indices(v.shape[1])
    prods = c[:, iu[0]] * c[:, iu[1]]
    z_cov = np.abs(prods.mean(0) - cov[iu]) / (prods.std(0, ddof=1) / math.sqrt(N))
    return float(z_mean.max()), float(z_cov.max()), v.mean(0), prods


@register("sampler-moments", "sampler mean and covariance against M and Theta^{-1}")
def sampler_moments(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    n, k, N = p["n"], p["k"], p["count"]
    st = {}
    t3 = T3Spec(random_spd(n, rng, cond=3), random_spd(k, rng, cond=3), rng.standard_normal((n, k)))
    cov = np.linalg.inv(build_precision(t3).array)
    d1 = sample(t3, N, _child_seed(seed, 0))
    d2 = sample_t3_direct(t3, N, _child_seed(seed, 1))
    st["max_z_mean_T3"], st["max_z_cov_T3"], m1, p1 = _moment_z(d1, t3.mean.ravel(), cov)
    st["max_z_mean_T3_direct"], st["max_z_cov_T3_direct"], m2, p2 = _moment_z(d2, t3.mean.ravel(), cov)
    v1, v2 = d1.reshape(N, -1), d2.reshape(N, -1)
    se = np.sqrt((v1.var(0, ddof=1) + v2.var(0, ddof=1)) / N)
    st["max_z_two_sampler_mean"] = float((np.abs(m1 - m2) / se).max())
    se = np.sqrt((p1.var(0, ddof=1) + p2.var(0, ddof=1)) / N)
    st["max_z_two_sampler_cov"] = float((np.abs(p1.mean(0) - p2.mean(0)) / se).max())

    t1 = random_spec("T1", n, k, rng)
    cov1 = np.linalg.inv(build_precision(t1).array)
    d3 = sample(t1, N, _child_seed(seed, 2))
    st["max_z_mean_T1"], st["max_z_cov_T1"], _, _ = _moment_z(d3, np.zeros(n * k), cov1)
    a = sample(t1, 1000, _child_seed(seed, 3))
    b = sample(t1, 1000, _child_seed(seed, 3))
    st["bitwise_repeat"] = bool(np.array_equal(a, b))
    sig = p["sigma"]
    checks = [Check(name, "<=", sig) for name in st if name.startswith("max_z")]
    checks.append(Check("bitwise_repeat", "==", True))
    return Outcome(st, checks)


@register("pd-almost-surely", "S = X'X is PD iff n >= k")
def pd_almost_surely(p: dict, seed: int) -> Outcome:
    cases = p.get("cases") or [[p["n"], p["k"]]]
    st = {}
    total = 0
    dumps = {}
    for i, (n, k) in enumerate(cases):
        rng = np.random.default_rng(_child_seed(seed, 2 * i))
        spec = random_spec(p["family"], n, k, rng)
        X = sample(spec, p["count"], _child_seed(seed, 2 * i + 1))
        sv = np.linalg.svd(X, compute_uv=False)
        tol = sv[:, :1] * max(n, k) * np.finfo(float).eps
        rank = (sv > tol).sum(axis=1)
        S = np.einsum("mij,mil->mjl", X, X)
        ev = np.linalg.eigvalsh(S)
        ratio = ev[:, 0] / ev[:, -1]
        if n >= k:
            exc = int(((rank < k) | (ev[:, 0] <= 0)).sum())
        else:
            exc = int(((rank > n) | (ratio > p["singular_rtol"])).sum())
        tag = f"n{n}_k{k}"
        st.update({f"exceptions_{tag}": exc, f"max_rank_{tag}": int(rank.max()),
                   f"min_rank_{tag}": int(rank.min()), f"min_smallest_eigenvalue_{tag}": float(ev[:, 0].min()),
                   f"max_eigenvalue_ratio_{tag}": float(ratio.max())})
        total += exc
        dumps[f"eig_{tag}"] = ev
    st["exceptions"] = total
    return Outcome(st, [Check("exceptions", "==", 0)], dump=dumps)


# -- quadratic forms ----------------------------------------------------------

def _random_pd_with_spectrum(k: int, lo: float, hi: float, rng) -> np.ndarray:
    q = random_orthogonal(k, rng)
    return (q * rng.uniform(lo, hi, k)) @ q.T


@register("q-invariance", "Wishart-type density does not depend on q")
def q_invariance(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    cfg = HypergeomConfig((), (), p["max_weight"], 1e-13)
    spread = 0.0
    vals = []
    for i in range(p["count"]):
        n, k = p["dims"][i % len(p["dims"])]
        Phi = random_spd(n, rng, cond=p["cond"])
        Psi = random_spd(k, rng, cond=p["cond"])
        S = _random_pd_with_spectrum(k, *p["s_range"], rng)
        d = np.array([wishart_density(n, Phi, Psi, S, q, cfg=cfg, center=False) for q in p["q"]])
        spread = _worst(spread, float((d.max() - d.min()) / np.abs(d).mean()))
        vals.append(d)
    chi = 0.0
    for n in range(1, 7):
        for s in p["chi2_points"]:
            for q in p["q"]:
                chi = _worst(chi, _rel(wishart_density(n, np.eye(n), [[1.0]], [[s]], q, center=False),
                                    stats.chi2.pdf(s, n)))
    st = {"max_rel_spread": spread, "chi2_max_rel_error": chi}
    return Outcome(st, [Check("max_rel_spread", "<=", p["tol"]),
                        Check("chi2_max_rel_error", "<=", p["chi2_tol"])],
                   dump={"densities": np.array(vals)})


def _isotropic_t1(n: int, betas, rng) -> T1Spec:
    b = random_orthogonal(len(betas), rng)
    return t15_to_t1(T15Spec(np.stack([bj * np.eye(n) for bj in betas]), b))


@register("wishart-chisq", "chi-square and Wishart reductions of the density of S")
def wishart_chisq(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    chi = 0.0
    for n in range(1, p["n_max"] + 1):
        beta = float(rng.uniform(0.5, 2.0))
        m = QFModel(_isotropic_t1(n, [beta], rng))
        for s in p["chi2_points"]:
            ref = beta * stats.chi2.pdf(beta * s, n)
            chi = _worst(chi, _rel(density_S(m, [[s]]), ref))
            chi = _worst(chi, _rel(james_roots_density(n, [[1 / beta]], [s]), ref))
    cross = 0.0
    gap = 0.0
    for _ in range(p["count"]):
        k = int(rng.integers(1, 4))
        n = int(rng.integers(k, 7))
        Psi = random_spd(k, rng, cond=3)
        S = _random_pd_with_spectrum(k, 0.5, 3.0, rng) * n / 3
        ref = wishart_classical_density(n, Psi, S)
        a = density_S(QFModel(T3Spec(np.eye(n), Psi)), S)
        b = wishart_density(n, np.eye(n), Psi, S)
        cross = _worst(cross, _rel(a, ref), _rel(b, ref))
        Phi = random_spd(n, rng, cond=3)
        gap = _worst(gap, abs(math.log(density_S(QFModel(T3Spec(Phi, Psi)), S)
                                    / wishart_density(n, Phi, Psi, S))))
    st = {"chi2_max_rel_error": chi, "cross_path_max_rel_error_phi_identity": cross,
          "cross_path_max_log_gap_general_phi": gap}
    findings = []
    if gap > p["tol"]:
        findings.append("density_S and wishart_density agree only when Phi is a multiple of "
                        f"the identity; for general Phi the log gap reaches {gap:.3g}")
    return Outcome(st, [Check("chi2_max_rel_error", "<=", p["chi2_tol"]),
                        Check("cross_path_max_rel_error_phi_identity", "<=", p["tol"])],
                   findings=findings)


@register("mgf-mc", "MGF of S against Monte Carlo and the Gaussian oracle")
def mgf_mc(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    n, k, N = p["n"], p["k"], p["samples"]
    G = np.asarray(p["gamma"], dtype=float)
    C = 0.5 * (np.triu(G) + np.triu(G).T)
    spec = _isotropic_t1(n, p["betas"], rng)
    M = rng.standard_normal((n, k)) * p["shift_scale"]
    st = {}
    for tag, mean in (("central", None), ("noncentral", M)):
        model = QFModel(spec, mean)
        X = sample(spec, N, _child_seed(seed, 0 if mean is None else 1), mean=mean)
        S = np.einsum("mij,mil->mjl", X, X)
        vals = np.exp(np.einsum("mjl,lj->m", S, C))
        target = mgf(model, G)
        m, se, z = _mc_z(vals, target)
        st.update({f"mgf_{tag}": target, f"mc_mean_{tag}": m, f"mc_se_{tag}": se, f"z_{tag}": z,
                   f"oracle_rel_error_{tag}": _rel(target, gaussian_mgf_oracle(spec, G, mean))})

    # chi-square cross-check: k = 1, A = I_n
    dev = 0.0
    chi = 0.0
    for nn in range(2, 7):
        spec1 = _isotropic_t1(nn, [1.0], rng)
        corr = mgf(QFModel(spec1), [[0.0]])
        literal = mgf(QFModel(spec1, convention="literal"), [[0.0]])
        st[f"gamma0_factor_corrected_n{nn}"] = corr
        st[f"gamma0_factor_literal_n{nn}"] = literal
        dev = _worst(dev, abs(corr - 1.0))
        g = p["chi2_gamma"]
        chi = _worst(chi, _rel(mgf(QFModel(spec1), [[g]]), (1 - 2 * g) ** (-nn / 2)))
    st["gamma0_factor_max_deviation"] = dev
    st["chi2_mgf_max_rel_error"] = chi

    general = random_spec("T1", n, k, rng)
    gm = QFModel(general)
    st["general_t1_ratio_to_oracle"] = mgf(gm, G) / gaussian_mgf_oracle(general, G)
    st["general_t1_mass"] = gm.mass
    findings = [
        "literal MGF normalization gives E exp(0) = "
        + ", ".join(f"{st[f'gamma0_factor_literal_n{nn}']:.4g} (n={nn})" for nn in range(2, 7))
        + "; with u_ij = tr(A_ij)/n and W built from Gamma alone the factor is 1",
        f"closed forms are exact for isotropic blocks; a generic T1 model gives ratio "
        f"{st['general_t1_ratio_to_oracle']:.4g} to the exact MGF (mass {gm.mass:.4g})",
    ]
    sig, tol = p["sigma"], p["tol"]
    checks = [Check("z_central", "<=", sig), Check("z_noncentral", "<=", sig),
              Check("oracle_rel_error_central", "<=", tol), Check("oracle_rel_error_noncentral", "<=", tol),
              Check("gamma0_factor_max_deviation", "<=", tol), Check("chi2_mgf_max_rel_error", "<=", tol)]
    return Outcome(st, checks, findings=findings)


def _gl(a: float, b: float, m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


@register("roots-gof", "binned chi-square test of the Wishart latent-root density")
def roots_gof(p: dict, seed: int) -> Outcome:
    n = p["n"]
    Psi = np.diag(p["psi_diag"])
    k = Psi.shape[0]
    if k != 2:
        raise ValueError("roots-gof bins in two dimensions; psi_diag must have length 2")
    spec = T3Spec(np.eye(n), Psi)

    def roots(count, s):
        X = sample(spec, count, s)
        S = np.einsum("mij,mil->mjl", X, X)
        return np.linalg.eigvalsh(S)[:, ::-1]

    # bins are fixed from an independent pilot sample in (t, u) = (l1 + l2, l2 / l1)
    pilot = roots(p["pilot_samples"], _child_seed(seed, 0))
    nt, nu = p["bins_t"], p["bins_u"]
    t_edges = np.quantile(pilot.sum(1), np.linspace(0, 1, nt + 1))
    u_edges = np.quantile(pilot[:, 1] / pilot[:, 0], np.linspace(0, 1, nu + 1))
    t_edges[0], t_edges[-1] = 0.0, np.inf
    u_edges[0], u_edges[-1] = 0.0, 1.0

    m = p["nodes"]
    # the trace is cut at t_cap; the mass beyond it is below the total-probability check
    t_edges[-1] = max(p["t_cap"], t_edges[-2] + 1.0)
    probs = np.zeros((nt, nu))
    for i in range(nt):
        t, wt = _gl(t_edges[i], t_edges[i + 1], m)
        for j in range(nu):
            u, wu = _gl(u_edges[j], u_edges[j + 1], m)
            T, Uu = np.meshgrid(t, u, indexing="ij")
            l1 = T / (1 + Uu)
            pts = np.stack([l1, l1 * Uu], axis=-1).reshape(-1, 2)
            dens = np.exp(james_roots_log_density(n, Psi, pts)).reshape(T.shape)
            jac = T / (1 + Uu) ** 2
            probs[i, j] = float(wt @ (dens * jac) @ wu)

    R = roots(p["samples"], _child_seed(seed, 1))
    obs, _, _ = np.histogram2d(R.sum(1), R[:, 1] / R[:, 0], bins=[t_edges, u_edges])
    N = R.shape[0]
    expected = N * probs / probs.sum()
    chi2_stat = float(((obs - expected) ** 2 / expected).sum())
    df = nt * nu - 1
    st = {"chi2_statistic": chi2_stat, "df": df,
          "critical_value": float(stats.chi2.ppf(1 - p["alpha"], df)),
          "total_probability": float(probs.sum()), "min_expected": float(expected.min())}
    st["chi2_margin"] = st["critical_value"] - chi2_stat
    return Outcome(st, [Check("chi2_margin", ">", 0.0),
                        Check("total_probability", ">=", 1 - p["mass_tol"]),
                        Check("total_probability", "<=", 1 + p["mass_tol"])],
                   dump={"roots": R, "observed": obs, "expected": expected})


@register("james-reduction", "latent-root density of the reduced model against the James form")
def james_reduction(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(p["count"]):
        k = int(rng.integers(2, p["k_max"] + 1))
        n = int(rng.integers(k, k + 4))
        Psi = random_spd(k, rng, cond=3)
        l = np.sort(rng.uniform(0.2, 2.0 * n, k))[::-1]
        a = james_roots_density(n, Psi, l)
        b = roots_density(QFModel(T3Spec(np.eye(n), Psi)), l)
        worst = _worst(worst, _rel(b, a))
    k1 = 0.0
    for _ in range(p["count"]):
        n = int(rng.integers(1, 7))
        spec = random_spec(str(rng.choice(["T1", "T15"])), n, 1, rng)
        model = QFModel(spec)
        s = float(rng.uniform(0.1, 3.0 * n))
        k1 = _worst(k1, _rel(roots_density(model, [s]), density_S(model, [[s]])))
    Psi = random_spd(2, rng, cond=3)
    repeated = james_roots_density(4, Psi, [1.5, 1.5])
    unordered = roots_density(QFModel(T3Spec(np.eye(4), Psi)), [1.0, 2.0])
    st = {"max_rel_error": worst, "k1_max_rel_error": k1, "repeated_root_value": repeated,
          "unordered_value": unordered}
    return Outcome(st, [Check("max_rel_error", "<=", p["tol"]), Check("k1_max_rel_error", "<=", p["k1_tol"]),
                        Check("repeated_root_value", "==", 0.0), Check("unordered_value", "==", 0.0)])


@register("wishart1928-crosscheck", "three-variate product-moment formula against the Wishart density")
def wishart1928_crosscheck(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    n = p["n"]
    Sigma = random_spd(3, rng, cond=p["cond"])
    X = sample(T3Spec(np.eye(n - 1), Sigma), p["count"], _child_seed(seed, 0))
    Ts = np.einsum("mij,mil->mjl", X, X) / n
    F = (n / 2) * np.linalg.inv(Sigma)[0, 1]
    lv, lc, fs = [], [], []
    for T in Ts:
        ref = wishart_density(n - 1, np.eye(n - 1), Sigma / n, T)
        args = (T[0, 0], T[1, 1], T[2, 2], T[0, 1], T[0, 2], T[1, 2], Sigma, n)
        lv.append(math.log(wishart1928_density_k3(*args, cross_f=8.0, scale=n / 2) / ref))
        lc.append(math.log(wishart1928_density_k3(*args, cross_f=2.0, scale=n / 2) / ref))
        fs.append(T[0, 1])
    lv, lc, fs = map(np.array, (lv, lc, fs))
    verbatim = float(np.abs(np.expm1(lv - lv[0])).max())
    corrected = float(np.abs(np.expm1(lc - lc[0])).max())
    corrected_abs = float(np.abs(np.expm1(lc)).max())
    # the log ratio of the verbatim form should be explained by -(8 - 2) F f alone
    residual = float(np.abs((lv - lv[0]) + 6.0 * F * (fs - fs[0])).max())
    st = {"verbatim_max_rel_error": verbatim, "verbatim_agrees": verbatim <= p["tol"],
          "corrected_max_rel_error": corrected, "corrected_max_rel_error_uncalibrated": corrected_abs,
          "ff_term_residual": residual, "F_coefficient": F}
    findings = []
    if verbatim > p["tol"]:
        findings.append("the printed cross term -8Ff makes the formula disagree after calibration "
                        f"(max relative error {verbatim:.3g}); the disagreement is fully explained by "
                        f"that term (residual {residual:.2g}) and -2Ff restores agreement "
                        f"({corrected:.2g})")
    return Outcome(st, [Check("corrected_max_rel_error", "<=", p["tol"]),
                        Check("ff_term_residual", "<=", p["residual_tol"])], findings=findings)


@register("gindikin-table", "membership table for the Gindikin set")
def gindikin_table(p: dict, seed: int) -> Outcome:
    mism = 0
    for k, a, expected in p["cases"]:
        mism += gindikin_contains(k, a) != expected
    mono = 0
    for k in range(1, 7):
        grid = 0.5 * (k - 1) + np.linspace(0, 10, 101)
        mono += sum(not gindikin_contains(k, float(a)) for a in grid)
    # the gamma function domain is the continuous part minus its endpoint
    domain = 0
    for k in range(1, 7):
        for a in np.linspace(-1, 4, 41):
            try:
                mv_gamma_ln(k, float(a))
                ok = True
            except DomainError:
                ok = False
            domain += ok != (a > 0.5 * (k - 1))
    return Outcome({"mismatches": int(mism), "monotonicity_violations": int(mono),
                    "domain_mismatches": int(domain)},
                   [Check("mismatches", "==", 0), Check("monotonicity_violations", "==", 0),
                    Check("domain_mismatches", "==", 0)])


@register("zonal-sum-rule", "zonal normalization and agreement of the two evaluation routes")
def zonal_sum_rule(p: dict, seed: int) -> Outcome:
    from .._jack import zonal_over_factorial
    from ..partitions import partitions_of
    from ..zonal import default_table

    rng = np.random.default_rng(seed)
    sum_err = route_err = 0.0
    for n in range(1, p["n_max"] + 1):
        x = rng.uniform(-1, 2, n)
        tab = default_table(n)
        table, vals = zonal_over_factorial(x[None, :], p["max_weight"])
        index = {tuple(int(v) for v in row if v): i for i, row in enumerate(table.parts)}
        for m in range(p["max_weight"] + 1):
            parts = partitions_of(m, n)
            exact = [float(tab.evaluate(kp, x[None, :])[0]) for kp in parts]
            sum_err = _worst(sum_err, abs(sum(exact) - x.sum() ** m) / max(1.0, np.abs(x).sum() ** m))
            fact = math.factorial(m)
            for kp, e in zip(parts, exact):
                route_err = _worst(route_err, abs(vals[index[kp], 0] * fact - e) / max(1.0, abs(e)))
    st = {"sum_rule_max_rel_error": sum_err, "route_max_rel_error": route_err}
    return Outcome(st, [Check("sum_rule_max_rel_error", "<=", p["tol"]),
                        Check("route_max_rel_error", "<=", p["tol"])])
