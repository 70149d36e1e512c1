import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from matgamma import models as M
from matgamma.linalg import random_spd
from matgamma.errors import DimensionError, InvalidModelError

FAMILIES = ["T1", "T15", "T2", "T3"]


def _vec_rows(X):
    return np.asarray(X).ravel()


class TestPrecision:
    def test_t3_identity(self):
        spec = M.T3Spec(np.eye(2), np.eye(3))
        np.testing.assert_array_equal(M.build_precision(spec).array, np.eye(6))

    def test_t3_diagonal_kron(self):
        # Phi^{-1} = diag(1, 2), Psi^{-1} = diag(3, 4)
        spec = M.T3Spec(np.diag([1.0, 0.5]), np.diag([1 / 3, 1 / 4]))
        np.testing.assert_allclose(np.diag(M.build_precision(spec).array), [3, 4, 6, 8])

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_logdet_structured_matches_dense(self, fam, rng):
        spec = M.random_spec(fam, 3, 2, rng)
        _, ld = np.linalg.slogdet(M.build_precision(spec).array)
        np.testing.assert_allclose(M.log_det_precision(spec), ld, rtol=1e-11)

    def test_t2_precision_is_rank_one_sum(self, rng):
        spec = M.random_spec("T2", 2, 2, rng)
        ref = np.zeros((4, 4))
        for i in range(2):
            for j in range(2):
                v = np.kron(spec.a[:, i], spec.b[:, j])
                ref += spec.gamma[i, j] * np.outer(v, v)
        np.testing.assert_allclose(M.build_precision(spec).array, ref, atol=1e-13)


class TestLogDensity:
    @pytest.mark.parametrize("fam", FAMILIES)
    def test_matches_dense_oracle(self, fam, rng):
        spec = M.random_spec(fam, 3, 2, rng)
        for _ in range(5):
            X = rng.standard_normal((3, 2))
            np.testing.assert_allclose(M.log_density(spec, X), M.dense_log_density(spec, X),
                                       rtol=1e-11)

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_matches_scipy_mvn(self, fam, rng):
        spec = M.random_spec(fam, 2, 3, rng)
        cov = np.linalg.inv(M.build_precision(spec).array)
        X = rng.standard_normal((2, 3))
        ref = stats.multivariate_normal(np.zeros(6), cov).logpdf(_vec_rows(X))
        np.testing.assert_allclose(M.log_density(spec, X), ref, rtol=1e-10)

    def test_t3_with_mean_matches_matrix_normal(self, rng):
        Phi = random_spd(3, rng)
        Psi = np.array([[2.0, 0.3], [0.3, 1.0]])
        mean = rng.standard_normal((3, 2))
        spec = M.T3Spec(Phi, Psi, mean)
        X = rng.standard_normal((3, 2))
        ref = stats.matrix_normal(mean, Phi, Psi).logpdf(X)
        np.testing.assert_allclose(M.log_density(spec, X), ref, rtol=1e-11)

    def test_batch(self, rng):
        spec = M.random_spec("T1", 2, 2, rng)
        X = rng.standard_normal((7, 2, 2))
        out = M.log_density(spec, X)
        assert out.shape == (7,)
        np.testing.assert_allclose(out[3], M.log_density(spec, X[3]))

    def test_scalar_example(self):
        np.testing.assert_allclose(M.log_density(M.T3Spec([[1.0]], [[1.0]]), [[0.0]]),
                                   -0.5 * np.log(2 * np.pi))

    def test_shape_mismatch(self, rng):
        spec = M.random_spec("T3", 2, 2, rng)
        with pytest.raises(DimensionError):
            M.log_density(spec, np.zeros((3, 2)))

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_integrates_to_one(self, fam, rng):
        spec = M.random_spec(fam, 2, 1, rng, cond=2.0)
        val, _ = integrate.dblquad(
            lambda y, x: np.exp(M.log_density(spec, [[x], [y]])), -12, 12, -12, 12,
            epsabs=1e-11)
        np.testing.assert_allclose(val, 1.0, atol=1e-7)


class TestVecIdentity:
    def test_symmetric_blocks_agree(self, rng):
        spec = M.random_spec("T15", 3, 2, rng)
        t1 = M.to_family(spec, "T1")
        X = rng.standard_normal((3, 2))
        np.testing.assert_allclose(M.display_quadratic_form(t1, X),
                                   M.quadratic_form(t1, X), rtol=1e-12)

    def test_trace_kron_transposed(self, rng):
        # tr(A X B X') = v'(A ⊗ B') v with v = vec of rows
        for _ in range(10):
            n, k = rng.integers(1, 5, size=2)
            A, B = rng.standard_normal((n, n)), rng.standard_normal((k, k))
            X = rng.standard_normal((n, k))
            v = _vec_rows(X)
            np.testing.assert_allclose(np.trace(A @ X @ B @ X.T), v @ np.kron(A, B.T) @ v,
                                       rtol=1e-10, atol=1e-12)


class TestValidation:
    def test_t1_asymmetric_grid(self):
        A = np.zeros((2, 2, 2, 2))
        A[0, 0] = A[1, 1] = np.eye(2)
        A[0, 1] = [[0, 0.1], [0, 0]]
        with pytest.raises(InvalidModelError):
            M.T1Spec(A, np.eye(2))

    def test_t1_offdiag_nonzero_diagonal(self):
        A = np.zeros((2, 2, 2, 2))
        A[0, 0] = A[1, 1] = np.eye(2)
        A[0, 1] = A[1, 0] = 0.1 * np.eye(2)
        with pytest.raises(InvalidModelError):
            M.T1Spec(A, np.eye(2))

    def test_frame_not_orthonormal(self):
        with pytest.raises(InvalidModelError):
            M.T15Spec(np.stack([np.eye(2)] * 2), [[1.0, 0.5], [0.0, 1.0]])

    def test_t15_not_pd(self):
        with pytest.raises(InvalidModelError):
            M.T15Spec(np.array([[[1.0, 2.0], [2.0, 1.0]]]), [[1.0]])

    def test_t2_nonpositive_gamma(self):
        with pytest.raises(InvalidModelError):
            M.T2Spec(np.eye(2), np.eye(2), [[1.0, 0.0], [1.0, 1.0]])

    def test_t3_not_pd(self):
        with pytest.raises(InvalidModelError):
            M.T3Spec([[1.0, 2.0], [2.0, 1.0]], [[1.0]])

    def test_t3_mean_shape(self):
        with pytest.raises(DimensionError):
            M.T3Spec(np.eye(2), np.eye(2), np.zeros((3, 2)))

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            M.degrees_of_freedom("T9", 2, 2)


class TestNesting:
    @pytest.mark.parametrize("src,dst", [("T3", "T2"), ("T2", "T15"), ("T15", "T1"),
                                         ("T3", "T1")])
    def test_conversion_preserves_density(self, src, dst, rng):
        spec = M.random_spec(src, 3, 2, rng)
        out = M.to_family(spec, dst)
        assert out.family == dst
        X = rng.standard_normal((4, 3, 2))
        np.testing.assert_allclose(M.log_density(out, X), M.log_density(spec, X), rtol=1e-10)

    def test_cannot_shrink(self, rng):
        with pytest.raises(ValueError):
            M.to_family(M.random_spec("T1", 2, 2, rng), "T3")

    def test_alias(self, rng):
        assert M.to_family(M.random_spec("T2", 2, 2, rng), "T1.5").family == "T15"


class TestDegreesOfFreedom:
    @pytest.mark.parametrize("fam,n,k,dof", [("T3", 3, 2, 5), ("T2", 3, 2, 6), ("T15", 2, 3, 9),
                                             ("T1", 2, 2, 8), ("T1", 3, 1, 6)])
    def test_examples(self, fam, n, k, dof):
        assert M.degrees_of_freedom(fam, n, k) == dof

    @given(st.integers(1, 8), st.integers(1, 8))
    def test_t1_equals_free_entries(self, n, k):
        assert M.degrees_of_freedom("T1", n, k) == M.free_parameter_count_t1(n, k)

    @given(st.integers(1, 8), st.integers(1, 8))
    def test_nesting_is_monotone(self, n, k):
        d = [M.degrees_of_freedom(f, n, k) for f in ["T3", "T2", "T15", "T1"]]
        assert d[1] <= d[2] <= d[3]

    def test_invalid(self):
        with pytest.raises(ValueError):
            M.degrees_of_freedom("T3", 0, 2)


class TestSerialization:
    @pytest.mark.parametrize("fam", FAMILIES)
    def test_round_trip_bitwise(self, fam, rng, tmp_path):
        spec = M.random_spec(fam, 3, 2, rng)
        path = tmp_path / "m.json"
        M.save_model(spec, path)
        back, mean = M.load_model(path)
        assert mean is None and back.family == spec.family
        X = rng.standard_normal((3, 2))
        assert M.log_density(back, X) == M.log_density(spec, X)

    def test_mean_survives(self, rng, tmp_path):
        mean = rng.standard_normal((2, 2))
        spec = M.T3Spec(np.eye(2), np.eye(2), mean)
        M.save_model(spec, tmp_path / "m.json")
        back, m = M.load_model(tmp_path / "m.json")
        np.testing.assert_array_equal(m, mean)
        np.testing.assert_array_equal(back.M, mean)

    def test_schema_missing_field(self):
        with pytest.raises(jsonschema.ValidationError):
            M.model_from_dict({"family": "T3", "n": 1, "k": 1, "Phi": [[1.0]]})

    def test_schema_bad_family(self):
        with pytest.raises(jsonschema.ValidationError):
            M.model_from_dict({"family": "T7", "n": 1, "k": 1})

    def test_declared_shape_mismatch(self):
        with pytest.raises(DimensionError):
            M.model_from_dict({"family": "T3", "n": 2, "k": 1, "Phi": [[1.0]], "Psi": [[1.0]]})

    def test_json_is_plain(self, rng):
        d = M.model_to_dict(M.random_spec("T1", 2, 2, rng))
        assert json.loads(json.dumps(d)) == d


class TestSampling:
    def test_deterministic(self, rng):
        spec = M.random_spec("T1", 2, 2, rng)
        a = M.sample(spec, 500, seed=5, block_size=128)
        b = M.sample(spec, 500, seed=5, block_size=128)
        np.testing.assert_array_equal(a, b)

    def test_workers_do_not_change_draws(self, rng):
        spec = M.random_spec("T15", 2, 2, rng)
        a = M.sample(spec, 700, seed=9, block_size=100, workers=1)
        b = M.sample(spec, 700, seed=9, block_size=100, workers=3)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_covariance(self, fam, rng):
        spec = M.random_spec(fam, 2, 2, rng, cond=3.0)
        draws = M.sample(spec, 40000, seed=1).reshape(40000, -1)
        cov = np.linalg.inv(M.build_precision(spec).array)
        np.testing.assert_allclose(np.cov(draws.T), cov, atol=0.06 * np.abs(cov).max())

    def test_t3_direct_matches_generic_mean(self, rng):
        mean = np.array([[1.0, -1.0], [0.5, 2.0]])
        spec = M.T3Spec(np.diag([1.0, 2.0]), np.diag([0.5, 1.0]), mean)
        a = M.sample_t3_direct(spec, 40000, seed=3)
        np.testing.assert_allclose(a.mean(axis=0), mean, atol=0.05)
        np.testing.assert_allclose(a.var(axis=0), np.outer([1, 2], [0.5, 1]), rtol=0.05)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 300))
    def test_count(self, seed, count):
        spec = M.T3Spec(np.eye(2), np.eye(1))
        assert M.sample(spec, count, seed=seed).shape == (count, 2, 1)
