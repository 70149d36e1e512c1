"""``matgamma`` command-line interface.

Exit status is 0 on success (or when every verification check passes),
1 when a verification check fails or a computation cannot be carried out,
and 2 on usage errors such as bad flags or unreadable inputs.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from typing import Sequence

import jsonschema
import numpy as np

from .errors import DivergenceError, MatGammaError

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- I/O helpers ---------------------------------------------------------------

def _parse_shape(line: str) -> tuple[int, ...] | None:
    body = line.lstrip("#").strip()
    if not body.startswith("shape"):
        return None
    dims = body.split("=", 1)[1].replace("x", ",")
    return tuple(int(d) for d in dims.split(",") if d.strip())


def read_points(path: str, item_shape: tuple[int, ...]) -> np.ndarray:
    """Read a CSV of flattened points, one per line; ``#`` lines are comments.

    Each row is reshaped (row-major) to ``item_shape``. A ``# shape=...``
    header, if present, must be consistent with it.
    """
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    for line in lines:
        if line.startswith("#"):
            shape = _parse_shape(line)
            if shape and tuple(shape[-len(item_shape):]) != tuple(item_shape):
                raise UsageError(f"{path}: header shape {shape} does not match {item_shape}")
    rows = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise UsageError(f"{path}: no data rows")
    try:
        data = np.loadtxt(io.StringIO("\n".join(rows)), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    size = int(np.prod(item_shape))
    if data.shape[1] != size:
        raise UsageError(f"{path}: expected {size} values per row, got {data.shape[1]}")
    return data.reshape((data.shape[0],) + tuple(item_shape))


def read_matrix(path: str) -> np.ndarray:
    """A square matrix stored as a plain CSV grid, or as one flattened row."""
    try:
        a = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read matrix from {path}: {exc}") from exc
    if a.shape[0] == 1 and a.shape[1] > 1:
        n = math.isqrt(a.shape[1])
        if n * n == a.shape[1]:
            a = a.reshape(n, n)
    if a.shape[0] != a.shape[1]:
        raise UsageError(f"{path}: matrix must be square, got {a.shape}")
    return a


def write_points(fh, arr: np.ndarray) -> None:
    """One flattened item per line with a ``# shape=`` header."""
    arr = np.asarray(arr)
    fh.write("# shape=" + "x".join(str(s) for s in arr.shape) + "\n")
    np.savetxt(fh, arr.reshape(arr.shape[0], -1), delimiter=",", fmt="%.17g")


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def _emit(args, payload, rows: list[tuple] | None = None, header: Sequence[str] = ()) -> None:
    if args.format == "csv" and rows is not None:
        text = ",".join(header) + "\n" + "".join(
            ",".join(repr(v) if isinstance(v, float) else str(v) for v in r) + "\n" for r in rows)
    else:
        text = json.dumps(payload, indent=1, default=_jsonable) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_model(path: str):
    from .models import load_model

    try:
        return load_model(path)
    except OSError as exc:
        raise UsageError(f"cannot read model {path}: {exc}") from exc


# -- subcommands ---------------------------------------------------------------

def cmd_zonal(args) -> int:
    from .zonal import format_partition, iter_table_rows, write_table_csv

    if args.max_weight < 0:
        raise UsageError("--max-weight must be non-negative")
    if args.format == "csv":
        if args.out:
            with open(args.out, "w", newline="") as fh:
                write_table_csv(args.max_weight, fh, args.max_parts)
        else:
            write_table_csv(args.max_weight, sys.stdout, args.max_parts)
        return EXIT_PASS
    rows = [{"weight": m, "kappa": format_partition(kp), "monomial": format_partition(lam),
             "coefficient": str(c)}
            for m, kp, lam, c in iter_table_rows(args.max_weight, args.max_parts)]
    _emit(args, rows)
    return EXIT_PASS


def _series_cfg(args):
    from .specfun import HypergeomConfig

    return HypergeomConfig(args.upper, args.lower, args.max_weight,
                           args.tol if args.tol is not None else 1e-10)


def cmd_hyp(args) -> int:
    from .specfun import hypergeom_eigs, hypergeom_one, hypergeom_two

    cfg = _series_cfg(args)
    if (args.matrix is None) == (args.eigs is None):
        raise UsageError("give exactly one of --matrix or --eigs")
    closed = not args.series_only
    if args.matrix2 is not None:
        if args.matrix is None:
            raise UsageError("--matrix2 needs --matrix")
        res = hypergeom_two(cfg, read_matrix(args.matrix), read_matrix(args.matrix2),
                            embed=args.embed, use_closed_form=closed)
    elif args.matrix is not None:
        res = hypergeom_one(cfg, read_matrix(args.matrix), use_closed_form=closed)
    else:
        res = hypergeom_eigs(cfg, args.eigs, use_closed_form=closed)
    d = res.to_dict()
    _emit(args, d, [tuple(d.values())], tuple(d.keys()))
    return EXIT_PASS


def _qf_model(args):
    from .quadform import QFModel

    spec, M = _load_model(args.model)
    return QFModel(spec, M, convention=args.convention)


def cmd_density(args) -> int:
    from .quadform import density_S, log_density_S

    model = _qf_model(args)
    pts = read_points(args.points, (model.k, model.k))
    if args.log:
        vals = [log_density_S(model, S, continuation_experimental=args.continuation_experimental)
                for S in pts]
    else:
        vals = [density_S(model, S, continuation_experimental=args.continuation_experimental)
                for S in pts]
    payload = {"quantity": "log_density" if args.log else "density", "convention": args.convention,
               "certified": not args.continuation_experimental, "values": vals}
    _emit(args, payload, list(enumerate(vals)), ("index", payload["quantity"]))
    return EXIT_PASS


def cmd_mgf(args) -> int:
    from .quadform import mgf

    model = _qf_model(args)
    k = model.k
    if args.gamma is not None:
        G = read_points(args.gamma, (k, k))
    elif args.gamma_values is not None:
        iu = np.triu_indices(k)
        if len(args.gamma_values) != len(iu[0]):
            raise UsageError(f"--gamma-values needs {len(iu[0])} upper-triangle entries")
        g = np.zeros((k, k))
        g[iu] = args.gamma_values
        G = g[None]
    else:
        raise UsageError("give --gamma or --gamma-values")
    vals = [mgf(model, g, log=args.log) for g in G]
    payload = {"quantity": "log_mgf" if args.log else "mgf", "convention": args.convention,
               "values": vals}
    _emit(args, payload, list(enumerate(vals)), ("index", payload["quantity"]))
    return EXIT_PASS


def cmd_roots(args) -> int:
    from .quadform import roots_density

    model = _qf_model(args)
    pts = read_points(args.points, (model.k,))
    vals = [roots_density(model, l) for l in pts]
    _emit(args, {"quantity": "roots_density", "values": vals}, list(enumerate(vals)),
          ("index", "roots_density"))
    return EXIT_PASS


def cmd_sample(args) -> int:
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    if args.model:
        from .models import sample

        spec, M = _load_model(args.model)
        draws = sample(spec, args.count, args.seed, mean=M, workers=args.parallel)
    else:
        from .manifolds import sample_stiefel

        if args.n is None:
            raise UsageError("--n is required")
        k = args.n if args.manifold == "orthogonal" else (args.k if args.k is not None else 1)
        if args.manifold == "orthogonal" and args.k not in (None, args.n):
            raise UsageError("--k must equal --n for the orthogonal group")
        if not 1 <= k <= args.n:
            raise UsageError("need 1 <= k <= n")
        draws = sample_stiefel(args.n, k, args.count, args.seed, workers=args.parallel)
    if args.format == "json":
        _emit(args, {"shape": list(draws.shape), "seed": args.seed, "draws": draws.tolist()})
    elif args.out:
        with open(args.out, "w") as fh:
            write_points(fh, draws)
    else:
        write_points(sys.stdout, draws)
    return EXIT_PASS


def cmd_verify(args) -> int:
    from .verify import (ExperimentConfig, REGISTRY, default_config, experiment_registry,
                         write_report)
    from .verify.core import _execute

    if args.list:
        reg = experiment_registry()
        _emit(args, [{"id": i, "description": d} for i, d in reg], reg, ("id", "description"))
        return EXIT_PASS
    cfgs = []
    for path in args.config or []:
        try:
            with open(path) as fh:
                cfgs.append(ExperimentConfig.from_dict(json.load(fh)))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
    for exp_id in args.ids:
        if exp_id not in REGISTRY:
            raise UsageError(f"unknown experiment id {exp_id!r}; see 'matgamma verify --list'")
        cfgs.append(default_config(exp_id))
    if not cfgs:
        cfgs = [default_config(i) for i in REGISTRY]
    for c in cfgs:
        if c.id not in REGISTRY:
            raise UsageError(f"unknown experiment id {c.id!r}")
        if args.seed is not None:
            c.seed = args.seed
        if args.tol is not None and "tol" in default_config(c.id).parameters:
            c.parameters["tol"] = args.tol

    def one(c):
        return _execute(c, None, args.fresh_seed)

    if args.parallel > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.parallel) as ex:
            results = list(ex.map(one, cfgs))
    else:
        results = [one(c) for c in cfgs]

    summary = []
    for c, rep, dumps in results:
        if args.out or c.output:
            target = c.output or os.path.join(args.out, f"{rep['id']}.json")
            write_report(rep, target, dumps if args.dump else None)
        summary.append({"id": rep["id"], "pass": rep["pass"], "certifying": rep["certifying"],
                        "seed": rep["seed"], "wall_clock_seconds": round(rep["wall_clock_seconds"], 3),
                        "findings": rep["findings"]})
    text_rows = [(s["id"], "PASS" if s["pass"] else "FAIL", s["seed"], s["wall_clock_seconds"])
                 for s in summary]
    if args.format == "csv":
        sys.stdout.write("id,status,seed,seconds\n")
        for r in text_rows:
            sys.stdout.write(",".join(map(str, r)) + "\n")
    else:
        sys.stdout.write(json.dumps(summary, indent=1) + "\n")
    return EXIT_PASS if all(s["pass"] for s in summary) else EXIT_FAIL


# -- parser ---------------------------------------------------------------------

def _global_flags(sub: bool) -> argparse.ArgumentParser:
    # on subparsers the defaults are suppressed so they don't clobber values
    # given before the subcommand
    d = (lambda v: argparse.SUPPRESS) if sub else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=d(None), help="random seed")
    g.add_argument("--out", default=d(None),
                   help="output file (verify: directory for report JSON files)")
    g.add_argument("--format", choices=("json", "csv"), default=d(None),
                   help="output format (default: csv for sample and zonal, json otherwise)")
    g.add_argument("--tol", type=float, default=d(None),
                   help="series tolerance (hyp) or experiment tolerance (verify)")
    return p


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--convention", choices=("corrected", "literal"), default="corrected")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matgamma", parents=[_global_flags(False)],
                                     description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)
    g = [_global_flags(True)]

    p = subs.add_parser("zonal", parents=g, help="exact zonal coefficient table")
    p.add_argument("--max-weight", type=int, default=6)
    p.add_argument("--max-parts", type=int, default=None)
    p.set_defaults(func=cmd_zonal)

    p = subs.add_parser("hyp", parents=g, help="hypergeometric function of matrix argument")
    p.add_argument("--upper", type=float, nargs="*", default=[], help="a_1..a_p")
    p.add_argument("--lower", type=float, nargs="*", default=[], help="b_1..b_q")
    p.add_argument("--matrix", help="CSV file with the (first) matrix argument")
    p.add_argument("--matrix2", help="CSV file with the second matrix argument")
    p.add_argument("--eigs", type=float, nargs="+", help="spectrum of the argument")
    p.add_argument("--max-weight", type=int, default=60)
    p.add_argument("--embed", action="store_true", help="allow arguments of different size")
    p.add_argument("--series-only", action="store_true", help="skip closed-form shortcuts")
    p.set_defaults(func=cmd_hyp)

    p = subs.add_parser("density", parents=g, help="density of S = (X+M)'(X+M)")
    _model_args(p)
    p.add_argument("--points", required=True, help="CSV of flattened k x k matrices")
    p.add_argument("--log", action="store_true")
    p.add_argument("--continuation-experimental", action="store_true",
                   help="evaluate the formula for n <= k - 1 (not a density)")
    p.set_defaults(func=cmd_density)

    p = subs.add_parser("mgf", parents=g, help="moment generating function of S")
    _model_args(p)
    p.add_argument("--gamma", help="CSV of flattened k x k Gamma matrices (upper triangle read)")
    p.add_argument("--gamma-values", type=float, nargs="+",
                   help="upper-triangle gamma_ij, row by row")
    p.add_argument("--log", action="store_true")
    p.set_defaults(func=cmd_mgf)

    p = subs.add_parser("roots", parents=g, help="joint density of the latent roots of S")
    _model_args(p)
    p.add_argument("--points", required=True, help="CSV with k decreasing roots per row")
    p.set_defaults(func=cmd_roots)

    p = subs.add_parser("sample", parents=g, help="Haar or matrix-normal draws")
    p.add_argument("--manifold", choices=("orthogonal", "stiefel"), default="stiefel")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--model", help="sample this model instead of a manifold")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--parallel", type=int, default=1, help="worker threads")
    p.set_defaults(func=cmd_sample)

    p = subs.add_parser("verify", parents=g, help="run verification experiments")
    p.add_argument("ids", nargs="*", help="experiment ids (default: all)")
    p.add_argument("--config", action="append", help="experiment config JSON (repeatable)")
    p.add_argument("--list", action="store_true", help="list registered experiments")
    p.add_argument("--parallel", type=int, default=1, help="experiments run concurrently")
    p.add_argument("--dump", action="store_true", help="write raw draws as CSV next to reports")
    p.add_argument("--fresh-seed", action="store_true",
                   help="use an OS-random seed; reports are marked non-certifying")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_PASS
    if args.format is None:
        args.format = "csv" if args.command in ("sample", "zonal") else "json"
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"matgamma: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"matgamma: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (MatGammaError, ValueError, KeyError, jsonschema.ValidationError) as exc:
        # schema violations and invalid model parameters
        print(f"matgamma: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
