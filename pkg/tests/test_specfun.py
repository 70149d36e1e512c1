import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from matgamma.errors import DimensionError, DivergenceError, DomainError, PoleError
from matgamma.linalg import etr, random_orthogonal
from matgamma.specfun import (HypergeomConfig, haar_average_oracle, hypergeom_eigs,
                              hypergeom_one, hypergeom_one_batch, hypergeom_two,
                              hypergeom_two_batch, mv_gamma, mv_gamma_ln)

C00 = HypergeomConfig((), ())


def sym(rng, n, radius):
    q = random_orthogonal(n, rng)
    return (q * rng.uniform(-radius, radius, n)) @ q.T


class TestMultivariateGamma:
    def test_examples(self):
        assert mv_gamma_ln(1, 1.0) == 0.0
        np.testing.assert_allclose(mv_gamma_ln(2, 1.5), math.log(math.pi / 2), rtol=1e-14)
        with pytest.raises(DomainError, match=r"\(k-1\)/2"):
            mv_gamma_ln(3, 1.0)

    @settings(max_examples=50)
    @given(st.integers(1, 8), st.floats(0.01, 30))
    def test_against_scipy(self, k, off):
        a = 0.5 * (k - 1) + off
        np.testing.assert_allclose(mv_gamma_ln(k, a), special.multigammaln(a, k), rtol=1e-13, atol=1e-13)

    def test_value(self):
        np.testing.assert_allclose(mv_gamma(2, 1.5), math.pi / 2)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            HypergeomConfig(max_weight=0)
        with pytest.raises(ValueError):
            HypergeomConfig(rel_tol=0)

    def test_pole(self):
        cfg = HypergeomConfig((), (1.0,))
        cfg.check(2)
        with pytest.raises(PoleError):
            HypergeomConfig((), (0.5,)).check(3)  # (i-1)/2 - t = 0.5 at i=2, t=0
        with pytest.raises(PoleError):
            hypergeom_eigs(HypergeomConfig((), (-1.0,)), [0.1])


class TestOneArgument:
    def test_trivial(self):
        assert hypergeom_one(C00, np.zeros((3, 3))).value == 1.0
        assert hypergeom_one(C00, np.zeros((3, 3)), use_closed_form=False).value == 1.0
        assert hypergeom_one(HypergeomConfig((), (1.5,)), np.zeros((3, 3))).value == 1.0

    def test_1f0_scalar(self):
        cfg = HypergeomConfig((2.0,), (), 60, 1e-12)
        np.testing.assert_allclose(hypergeom_one(cfg, [[0.5]]).value, 4.0)
        np.testing.assert_allclose(hypergeom_one(cfg, [[0.5]], use_closed_form=False).value, 4.0, rtol=1e-10)

    def test_1f0_divergent(self):
        with pytest.raises(DivergenceError):
            hypergeom_one(HypergeomConfig((1.0,), ()), np.diag([0.5, 1.2]))

    def test_etr_matrix(self, rng):
        X = sym(rng, 3, 2.0)
        r = hypergeom_one(HypergeomConfig((), (), 60, 1e-12), X, use_closed_form=False)
        assert r.converged and r.method == "series"
        np.testing.assert_allclose(r.value, etr(X), rtol=1e-10)

    def test_det_power(self, rng):
        X = sym(rng, 3, 0.5)
        for a in (0.5, 2.0, 3.5):
            r = hypergeom_one(HypergeomConfig((a,), (), 60, 1e-12), X, use_closed_form=False)
            np.testing.assert_allclose(r.value, np.linalg.det(np.eye(3) - X) ** -a, rtol=1e-8)

    @pytest.mark.parametrize("a,b,x", [(0.7, 1.9, 1.3), (2.0, 0.6, -2.0), (-1.5, 2.5, 0.9)])
    def test_1f1_scalar(self, a, b, x):
        r = hypergeom_eigs(HypergeomConfig((a,), (b,), 60, 1e-13), [x])
        np.testing.assert_allclose(r.value, special.hyp1f1(a, b, x), rtol=1e-11)

    @pytest.mark.parametrize("a,b,c,x", [(0.5, 1.5, 2.2, 0.4), (1.2, -0.7, 0.8, -0.5)])
    def test_2f1_scalar(self, a, b, c, x):
        r = hypergeom_eigs(HypergeomConfig((a, b), (c,), 60, 1e-13), [x])
        np.testing.assert_allclose(r.value, special.hyp2f1(a, b, c, x), rtol=1e-10)

    def test_0f1_scalar_bessel(self):
        b, x = 1.5, 2.3
        ref = special.gamma(b) * x ** ((1 - b) / 2) * special.iv(b - 1, 2 * math.sqrt(x))
        np.testing.assert_allclose(hypergeom_eigs(HypergeomConfig((), (b,)), [x]).value, ref, rtol=1e-11)

    def test_not_converged_is_flagged(self):
        r = hypergeom_eigs(HypergeomConfig((), (), 5, 1e-12), [3.0, 2.0], use_closed_form=False)
        assert not r.converged
        assert r.truncated_at == 5

    def test_large_argument_log_space(self):
        r = hypergeom_eigs(HypergeomConfig((), (), 60, 1e-10), [800.0])
        assert math.isinf(r.value)
        np.testing.assert_allclose(r.log_abs, 800.0)

    def test_batch_matches_single(self, rng):
        cfg = HypergeomConfig((1.3,), (2.1,), 60, 1e-12)
        eigs = rng.uniform(-1, 1, size=(5, 3))
        la, sg, conv = hypergeom_one_batch(cfg, eigs)
        single = [hypergeom_eigs(cfg, e) for e in eigs]
        np.testing.assert_allclose(sg * np.exp(la), [r.value for r in single], rtol=1e-12)
        assert conv.all()


class TestTwoArgument:
    def test_identity_reduces(self, rng):
        X = sym(rng, 3, 1.0)
        r = hypergeom_two(C00, X, np.eye(3), use_closed_form=False)
        np.testing.assert_allclose(r.value, etr(X), rtol=1e-9)

    def test_scaling(self, rng):
        X, Y = sym(rng, 2, 1.0), sym(rng, 2, 1.0)
        a = hypergeom_two(C00, X, 2 * Y).value
        b = hypergeom_two(C00, 2 * X, Y).value
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_scalar(self):
        np.testing.assert_allclose(hypergeom_two(C00, [[0.3]], [[0.7]]).value, math.exp(0.21), rtol=1e-12)

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            hypergeom_two(C00, np.eye(3), np.eye(2))

    def test_embed_pads_smaller(self, rng):
        X = sym(rng, 3, 1.0)
        Y = np.diag([0.4, -0.2])
        Yp = np.zeros((3, 3))
        Yp[:2, :2] = Y
        a = hypergeom_two(C00, X, Y, embed=True).value
        b = hypergeom_two(C00, X, Yp).value
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_center_matches_raw(self, rng):
        X, Y = sym(rng, 3, 2.0), sym(rng, 3, 2.0)
        cfg = HypergeomConfig((), (), 60, 1e-13)
        raw = hypergeom_two(cfg, X, Y)
        cen = hypergeom_two(cfg, X, Y, center=True)
        np.testing.assert_allclose(cen.value, raw.value, rtol=1e-9)
        with pytest.raises(ValueError):
            hypergeom_two(HypergeomConfig((1.0,), ()), X * 0.1, Y * 0.1, center=True)

    def test_batch(self, rng):
        cfg = HypergeomConfig((), (1.7,), 60, 1e-12)
        x = np.array([0.5, -0.3])
        ys = rng.uniform(-1, 1, size=(4, 2))
        la, sg, conv = hypergeom_two_batch(cfg, x, ys)
        single = [hypergeom_two(cfg, np.diag(x), np.diag(y), use_closed_form=False).value for y in ys]
        np.testing.assert_allclose(sg * np.exp(la), single, rtol=1e-12)


class TestHaarOracle:
    def test_zero_argument(self):
        mean, se = haar_average_oracle(C00, np.zeros((3, 3)), np.eye(2), 200, 1)
        assert mean == 1.0 and se == 0.0

    def test_one_by_one(self):
        mean, se = haar_average_oracle(C00, [[0.4]], [[1.5]], 200, 1)
        np.testing.assert_allclose(mean, math.exp(0.6), rtol=1e-14)

    def test_validation(self):
        with pytest.raises(ValueError):
            haar_average_oracle(C00, np.eye(2), np.eye(2), 10, 1)
        with pytest.raises(DimensionError):
            haar_average_oracle(C00, np.eye(2), np.eye(3), 200, 1)

    def test_deterministic_and_worker_independent(self, rng):
        X, Y = sym(rng, 3, 1.0), sym(rng, 2, 1.0)
        a = haar_average_oracle(C00, X, Y, 3000, 9, block_size=500)
        b = haar_average_oracle(C00, X, Y, 3000, 9, block_size=500, workers=3)
        assert a == b

    def test_1f1_average(self, rng):
        cfg = HypergeomConfig((0.8,), (1.9,), 60, 1e-12)
        X = np.diag([0.6, 0.2, -0.4])
        Y = np.diag([0.7, 0.3, 0.1])
        mean, se = haar_average_oracle(cfg, X, Y, 4000, 3)
        assert abs(mean - hypergeom_two(cfg, X, Y).value) <= 4 * se
