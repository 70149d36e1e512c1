import json

import jsonschema
import numpy as np
import pytest

from matgamma.verify import (REGISTRY, Check, Experiment, ExperimentConfig, Outcome,
                             default_config, evaluate_checks, experiment_registry, recheck,
                             run_experiment, run_suite, validate_config, write_report)

REQUIRED = ["etr-identity", "detpow-identity", "haar-two-arg", "gamma-integral-scalar",
            "gamma-recurrence", "vec-kron", "density-vs-mvn", "pd-almost-surely",
            "q-invariance", "wishart-chisq", "mgf-mc", "roots-gof", "james-reduction",
            "wishart1928-crosscheck"]
CHEAP = ["gamma-recurrence", "vec-kron", "density-vs-mvn", "wishart1928-crosscheck",
         "gindikin-table", "zonal-sum-rule"]


def _toy_registry(value):
    def func(params, seed):
        rng = np.random.default_rng(seed)
        return Outcome({"x": value, "draw": float(rng.random())},
                       [Check("x", "<=", params.get("tol", 1.0))], {"runtime_seconds": 0.0},
                       ["toy"], {"draws": rng.random((3, 2))})
    return {"toy": Experiment("toy", "toy experiment", func)}


class TestRegistry:
    def test_required_ids(self):
        assert set(REQUIRED) <= set(REGISTRY)

    def test_every_id_has_a_valid_default(self):
        for exp_id in REGISTRY:
            cfg = default_config(exp_id)
            assert cfg.id == exp_id
            validate_config(cfg.to_dict())

    def test_listing(self):
        ids = [i for i, _ in experiment_registry()]
        assert ids == list(REGISTRY)

    def test_missing_default(self):
        with pytest.raises(KeyError):
            default_config("no-such-experiment")


class TestConfig:
    def test_requires_seed(self):
        with pytest.raises(jsonschema.ValidationError):
            validate_config({"id": "vec-kron"})

    def test_rejects_unknown_keys(self):
        with pytest.raises(jsonschema.ValidationError):
            validate_config({"id": "vec-kron", "seed": 1, "extra": 2})

    def test_rejects_nonpositive_tolerance(self):
        with pytest.raises(jsonschema.ValidationError):
            validate_config({"id": "vec-kron", "seed": 1, "parameters": {"tol": 0}})
        with pytest.raises(jsonschema.ValidationError):
            validate_config({"id": "vec-kron", "seed": 1, "parameters": {"mass_tol": -1e-3}})

    def test_round_trip(self):
        d = {"id": "vec-kron", "seed": 3, "parameters": {"count": 4}, "output": "x.json"}
        assert ExperimentConfig.from_dict(d).to_dict() == d


class TestChecks:
    def test_ops(self):
        rep = {"statistics": {"a": 1.0, "b": float("nan"), "c": "inf"},
               "timings": {"t": 2.0},
               "checks": [{"statistic": "a", "op": "<", "threshold": 2},
                          {"statistic": "b", "op": "<", "threshold": 2},
                          {"statistic": "c", "op": "<", "threshold": 2},
                          {"statistic": "timings.t", "op": ">=", "threshold": 2}]}
        assert evaluate_checks(rep) == [True, False, False, True]
        assert not recheck(rep)

    def test_bad_op(self):
        with pytest.raises(ValueError):
            Check("x", "!=", 1)


class TestRunner:
    @pytest.mark.parametrize("exp_id", CHEAP)
    def test_report_rechecks(self, exp_id):
        rep = run_experiment(default_config(exp_id))
        assert rep["pass"] and rep["certifying"]
        assert recheck(rep) == rep["pass"]
        assert rep["seed"] == default_config(exp_id).seed
        json.dumps(rep)

    def test_dict_config_and_overrides(self):
        rep = run_experiment({"id": "vec-kron", "seed": 5, "parameters": {"count": 3}})
        assert rep["inputs"]["count"] == 3
        assert rep["inputs"]["tol"] == default_config("vec-kron").parameters["tol"]

    def test_unknown_id(self):
        with pytest.raises(KeyError):
            run_experiment({"id": "nope", "seed": 1})

    def test_fresh_seed_is_not_certifying(self):
        rep = run_experiment({"id": "toy", "seed": 1}, registry=_toy_registry(0.5),
                             fresh_seed=True)
        assert rep["certifying"] is False

    def test_failing_check(self):
        rep = run_experiment({"id": "toy", "seed": 1, "parameters": {"tol": 0.1}},
                             registry=_toy_registry(0.5))
        assert rep["pass"] is False and rep["check_results"] == [False]

    def test_nan_statistic_fails(self):
        rep = run_experiment({"id": "toy", "seed": 1}, registry=_toy_registry(float("nan")))
        assert rep["statistics"]["x"] == "nan"
        assert rep["pass"] is False

    def test_written_report_and_dump(self, tmp_path):
        rep = run_experiment({"id": "toy", "seed": 2}, registry=_toy_registry(0.5),
                             out_dir=tmp_path, dump=True)
        stored = json.loads((tmp_path / "toy.json").read_text())
        assert stored == rep
        text = (tmp_path / "toy.draws.csv").read_text()
        assert text.startswith("# shape=3x2")
        assert np.loadtxt(tmp_path / "toy.draws.csv", delimiter=",").shape == (3, 2)

    def test_write_report_creates_dirs(self, tmp_path):
        target = tmp_path / "a" / "b" / "r.json"
        write_report({"x": 1}, target)
        assert json.loads(target.read_text()) == {"x": 1}

    def test_suite_order_and_parallel(self, tmp_path):
        a = run_suite(CHEAP, out_dir=tmp_path)
        b = run_suite(CHEAP, parallel=3)
        assert [r["id"] for r in a] == CHEAP
        assert [r["statistics"] for r in a] == [r["statistics"] for r in b]
        assert all((tmp_path / f"{i}.json").exists() for i in CHEAP)

    def test_suite_seed_override(self):
        (rep,) = run_suite(["vec-kron"], seed=99, overrides={"vec-kron": {"count": 2}})
        assert rep["seed"] == 99 and rep["inputs"]["count"] == 2
