import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from matgamma import manifolds as mf
from matgamma.errors import DimensionError, DomainError


class TestStiefel:
    @pytest.mark.parametrize("n,k", [(1, 1), (3, 1), (4, 2), (5, 5)])
    def test_orthonormal_columns(self, n, k):
        H = mf.sample_stiefel(n, k, 200, seed=1)
        assert H.shape == (200, n, k)
        gram = np.swapaxes(H, 1, 2) @ H
        np.testing.assert_allclose(gram, np.broadcast_to(np.eye(k), gram.shape), atol=1e-13)

    def test_orthogonal_determinant(self):
        H = mf.sample_orthogonal(4, 2000, seed=2)
        d = np.linalg.det(H)
        np.testing.assert_allclose(np.abs(d), 1.0, atol=1e-12)
        # both components of O(n) are hit about equally often
        assert abs((d > 0).mean() - 0.5) < 0.05

    def test_second_moment(self):
        n, k, m = 4, 2, 20000
        H = mf.sample_stiefel(n, k, m, seed=3)
        np.testing.assert_allclose((H @ np.swapaxes(H, 1, 2)).mean(axis=0), k / n * np.eye(n),
                                   atol=0.02)

    def test_first_column_uniform_on_sphere(self):
        # x_1^2 ~ Beta(1/2, (n-1)/2) for a uniform unit vector
        n = 5
        h = mf.sample_stiefel(n, 2, 5000, seed=4)[:, :, 0]
        assert stats.kstest(h[:, 0] ** 2, stats.beta(0.5, 0.5 * (n - 1)).cdf).pvalue > 1e-3
        np.testing.assert_allclose(h.mean(axis=0), 0.0, atol=0.05)

    def test_left_invariance(self, rng):
        n = 3
        Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
        a = mf.sample_stiefel(n, 1, 5000, seed=5)[:, 0, 0]
        b = (Q @ mf.sample_stiefel(n, 1, 5000, seed=6))[:, 0, 0]
        assert stats.ks_2samp(a, b).pvalue > 1e-3

    def test_deterministic_and_worker_independent(self):
        a = mf.sample_stiefel(4, 2, 2500, seed=7, block_size=300)
        b = mf.sample_stiefel(4, 2, 2500, seed=7, block_size=300, workers=4)
        np.testing.assert_array_equal(a, b)

    def test_seed_sequence_is_not_consumed(self):
        ss = np.random.SeedSequence(11)
        a = mf.sample_stiefel(3, 2, 10, seed=ss)
        b = mf.sample_stiefel(3, 2, 10, seed=ss)
        np.testing.assert_array_equal(a, b)

    def test_k_larger_than_n(self):
        with pytest.raises(DimensionError):
            mf.sample_stiefel(2, 3, 5)

    def test_zero_count(self):
        assert mf.sample_stiefel(3, 2, 0, seed=1).shape == (0, 3, 2)

    @given(st.integers(0, 5000), st.integers(1, 2000))
    def test_block_partition(self, count, block):
        sizes = [m for _, m in mf.block_rngs(0, count, block)]
        assert sum(sizes) == count
        assert all(0 < m <= block for m in sizes)


class TestHaarAverage:
    def test_constant(self):
        mean, se = mf.haar_average(lambda h: np.ones(len(h)), 3, 2, 1000, seed=1)
        assert mean == 1.0 and se == 0.0

    def test_trace_moment(self):
        # E[h_11^2] = 1/n
        mean, se = mf.haar_average(lambda h: h[:, 0, 0] ** 2, 4, 1, 40000, seed=2,
                                   block_size=7000)
        assert abs(mean - 0.25) < 4 * se

    def test_workers_do_not_change_estimate(self):
        f = lambda h: h[:, 0, 0]
        a = mf.haar_average(f, 3, 2, 5000, seed=3, block_size=600)
        b = mf.haar_average(f, 3, 2, 5000, seed=3, block_size=600, workers=3)
        assert a == b

    def test_merge_matches_direct(self):
        f = lambda h: h[:, 1, 0] * 3.0
        mean, se = mf.haar_average(f, 3, 1, 3000, seed=4, block_size=700)
        v = f(mf.sample_stiefel(3, 1, 3000, seed=4, block_size=700))
        np.testing.assert_allclose(mean, v.mean(), rtol=1e-12)
        np.testing.assert_allclose(se, v.std(ddof=1) / np.sqrt(v.size), rtol=1e-10)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            mf.haar_average(lambda h: h[:, 0, 0], 2, 1, 1, seed=0)


class TestPolar:
    def test_reconstructs(self, rng):
        Z = rng.standard_normal((5, 3))
        H, R = mf.polar_decompose(Z)
        np.testing.assert_allclose(H @ R, Z, atol=1e-13)
        np.testing.assert_allclose(H.T @ H, np.eye(3), atol=1e-13)
        np.testing.assert_allclose(R, R.T)
        assert np.linalg.eigvalsh(R).min() > 0
        np.testing.assert_allclose(R @ R, Z.T @ Z, rtol=1e-12)

    def test_example(self):
        Z = np.array([[3.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
        H, R = mf.polar_decompose(Z)
        np.testing.assert_allclose(R, np.diag([3.0, 2.0]))
        np.testing.assert_allclose(H, [[1, 0], [0, 1], [0, 0]], atol=1e-15)

    def test_vector(self):
        H, R = mf.polar_decompose([3.0, 4.0])
        np.testing.assert_allclose(H[:, 0], [0.6, 0.8])
        np.testing.assert_allclose(R, [[5.0]])

    def test_unique_for_full_rank(self, rng):
        # any other orthonormal H' with PD R' giving Z must coincide
        Z = rng.standard_normal((4, 2))
        H, R = mf.polar_decompose(Z)
        Q = np.linalg.qr(rng.standard_normal((2, 2)))[0]
        H2, R2 = mf.polar_decompose((H @ Q) @ (Q.T @ R @ Q))
        np.testing.assert_allclose(H2, H @ Q, atol=1e-12)
        np.testing.assert_allclose(R2, Q.T @ R @ Q, atol=1e-12)

    def test_rank_deficient(self):
        with pytest.raises(DomainError):
            mf.polar_decompose([[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]])

    def test_wide(self):
        with pytest.raises(DomainError):
            mf.polar_decompose(np.ones((2, 3)))


class TestGindikin:
    @pytest.mark.parametrize("k,a,inside", [(3, 0.0, True), (3, 0.5, True), (3, 0.75, False),
                                            (3, 1.0, True), (3, 7.3, True), (3, -0.5, False),
                                            (1, 0.01, True), (4, 1.0, True), (4, 1.2, False),
                                            (4, 1.5, True)])
    def test_examples(self, k, a, inside):
        assert mf.gindikin_contains(k, a) is inside

    @given(st.integers(1, 10), st.floats(0, 20))
    def test_upward_closed_above_threshold(self, k, a):
        if mf.gindikin_contains(k, a) and a >= 0.5 * (k - 1):
            assert mf.gindikin_contains(k, a + 0.3)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            mf.gindikin_contains(0, 1.0)
