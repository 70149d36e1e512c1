"""Experiment configs, reports and the runner."""
from __future__ import annotations

import json
import math
import operator
import os
import secrets
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable

import numpy as np

REPORT_VERSION = 1

_OPS: dict[str, Callable[[Any, Any], bool]] = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
}


@dataclass(frozen=True)
class Check:
    """``statistic op threshold``; ``statistic`` may be ``timings.<name>``."""

    statistic: str
    op: str
    threshold: Any

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"unknown comparator {self.op!r}")

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "op": self.op, "threshold": self.threshold}


@dataclass
class Outcome:
    """What an experiment function returns."""

    statistics: dict[str, Any]
    checks: list[Check]
    timings: dict[str, float] = field(default_factory=dict)
    findings: list[str] = field(default_factory=list)
    dump: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class Experiment:
    id: str
    description: str
    func: Callable[[dict, int], Outcome]


@dataclass
class ExperimentConfig:
    id: str
    seed: int
    parameters: dict = field(default_factory=dict)
    output: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        validate_config(d)
        return cls(d["id"], int(d["seed"]), dict(d.get("parameters", {})), d.get("output"))

    def to_dict(self) -> dict:
        d = {"id": self.id, "seed": self.seed, "parameters": self.parameters}
        if self.output is not None:
            d["output"] = self.output
        return d


def _schema() -> dict:
    text = resources.files("matgamma").joinpath("schemas/config.schema.json").read_text()
    return json.loads(text)


def validate_config(d: dict) -> None:
    import jsonschema

    jsonschema.validate(d, _schema())
    for key, val in d.get("parameters", {}).items():
        if (key == "tol" or key.endswith("_tol")) and not (isinstance(val, (int, float)) and val > 0):
            raise jsonschema.ValidationError(f"tolerance {key} must be positive")


def _lookup(report: dict, name: str):
    if name.startswith("timings."):
        return report["timings"][name.split(".", 1)[1]]
    return report["statistics"][name]


def evaluate_checks(report: dict) -> list[bool]:
    out = []
    for c in report["checks"]:
        val = _lookup(report, c["statistic"])
        thr = c["threshold"]
        if (isinstance(val, float) and math.isnan(val)) or isinstance(val, str):
            # non-finite statistics are stored as strings and never pass
            out.append(False)
        else:
            out.append(bool(_OPS[c["op"]](val, thr)))
    return out


def recheck(report: dict) -> bool:
    """Recompute the pass flag from stored statistics and thresholds."""
    return all(evaluate_checks(report))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v) or math.isinf(v):
            return repr(v)
        return v
    return x


def default_config(exp_id: str) -> ExperimentConfig:
    """Bundled default config for a registered experiment."""
    path = resources.files("matgamma").joinpath(f"verify/configs/{exp_id}.json")
    if not path.is_file():
        raise KeyError(f"no bundled config for {exp_id!r}")
    return ExperimentConfig.from_dict(json.loads(path.read_text()))


def _execute(cfg: ExperimentConfig | dict, registry, fresh_seed: bool):
    from .experiments import REGISTRY

    registry = REGISTRY if registry is None else registry
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    if cfg.id not in registry:
        raise KeyError(f"unknown experiment id {cfg.id!r}")
    exp = registry[cfg.id]
    try:
        params = default_config(cfg.id).parameters
    except KeyError:
        params = {}
    params = {**params, **cfg.parameters}
    seed = secrets.randbits(63) if fresh_seed else cfg.seed

    t0 = time.perf_counter()
    outcome = exp.func(params, seed)
    wall = time.perf_counter() - t0

    report = {
        "version": REPORT_VERSION,
        "id": exp.id,
        "description": exp.description,
        "seed": seed,
        "certifying": not fresh_seed,
        "inputs": _jsonable(params),
        "statistics": _jsonable(outcome.statistics),
        "checks": [c.to_dict() for c in outcome.checks],
        "timings": _jsonable(outcome.timings),
        "findings": list(outcome.findings),
        "wall_clock_seconds": wall,
    }
    report["check_results"] = evaluate_checks(report)
    report["pass"] = all(report["check_results"])
    return cfg, report, outcome.dump


def write_report(report: dict, target: str | os.PathLike,
                 dumps: dict[str, np.ndarray] | None = None) -> None:
    """Write ``report`` as JSON and each dump array as ``<stem>.<name>.csv``."""
    target = os.fspath(target)
    os.makedirs(os.path.dirname(os.path.abspath(target)), exist_ok=True)
    with open(target, "w") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")
    base = os.path.splitext(target)[0]
    for name, arr in (dumps or {}).items():
        arr = np.atleast_2d(np.asarray(arr))
        np.savetxt(f"{base}.{name}.csv", arr.reshape(arr.shape[0], -1), delimiter=",",
                   header=f"shape={'x'.join(map(str, arr.shape))}")


def run_experiment(cfg: ExperimentConfig | dict, *, registry: dict[str, Experiment] | None = None,
                   out_dir: str | os.PathLike | None = None, dump: bool = False,
                   fresh_seed: bool = False) -> dict:
    """Run one experiment and return its report as a dict.

    Parameters
    ----------
    cfg : ExperimentConfig or dict
        ``parameters`` are merged over the bundled defaults for the id.
    out_dir : path, optional
        If given, the report is written to ``<out_dir>/<id>.json`` (or to
        ``cfg.output`` when set). With ``dump`` raw draws go next to it as CSV.
    fresh_seed : bool
        Replace the seed with an OS-random one; the report is then marked
        non-certifying.

    Raises
    ------
    KeyError
        Unknown experiment id.
    jsonschema.ValidationError
        Invalid config.
    """
    cfg, report, dumps = _execute(cfg, registry, fresh_seed)
    if out_dir is not None or cfg.output:
        target = cfg.output or os.path.join(out_dir, f"{report['id']}.json")
        write_report(report, target, dumps if dump else None)
    return report


def run_suite(ids: list[str] | None = None, *, seed: int | None = None, out_dir=None,
              parallel: int = 1, dump: bool = False, fresh_seed: bool = False,
              overrides: dict[str, dict] | None = None) -> list[dict]:
    """Run several experiments with their bundled configs.

    Experiments may run concurrently with ``parallel > 1``; reports are
    returned and written in the order of ``ids`` from the calling thread.
    """
    from .experiments import REGISTRY

    ids = list(REGISTRY) if ids is None else ids
    cfgs = []
    for i in ids:
        c = default_config(i)
        if seed is not None:
            c.seed = seed
        if overrides and i in overrides:
            c.parameters.update(overrides[i])
        cfgs.append(c)

    def one(c):
        return _execute(c, None, fresh_seed)

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as ex:
            results = list(ex.map(one, cfgs))
    else:
        results = [one(c) for c in cfgs]
    if out_dir is not None:
        for _, r, dumps in results:
            write_report(r, os.path.join(out_dir, f"{r['id']}.json"), dumps if dump else None)
    return [r for _, r, _ in results]
