"""Command-line front end.

``logconc [global flags] <command> ...`` with commands ``legendre``,
``meanwidth``, ``bodies``, ``verify`` and ``lowmstar``.  Each command emits
one JSON document (stdout, or ``--out``) embedding a run manifest, preceded
by an aligned text table unless ``--json-only`` is given.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
``LOGCONC_SEED`` overrides any seed given on the command line or in a
config file.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from ._report import jsonable
from .bodies import mean_width_body, mean_width_body_limit, steiner_fit, urysohn_body_gap
from .core import GridPotential, write_grid
from .core.base import INF
from .core.grid import format_grid, sample_on_grid
from .core.specfile import (
    BODY_KEYS,
    EXPERIMENT_KEYS,
    SpecError,
    build_body,
    build_potential,
    read_keyvalue,
    resolve_path,
    sampling_grid,
)
from .legendre import conjugate, default_slope_grid, legendre_nd
from .lowmstar import LowMstarConfig, finite_volume_ratio_experiment, low_mstar_experiment
from .meanwidth import TildeConfig, mean_width, mean_width_tilde
from .verify import SUITES, run_suite

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _version():
    try:
        return version("logconc")
    except PackageNotFoundError:  # pragma: no cover
        return "unknown"


def _digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _env_seed(default):
    raw = os.environ.get("LOGCONC_SEED")
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"LOGCONC_SEED must be an integer, got '{raw}'") from None


def _read_spec(path, allowed=None):
    try:
        return read_keyvalue(path, allowed)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


# --------------------------------------------------------------------------
# text tables
# --------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, (float, np.floating)):
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def format_table(columns, rows) -> str:
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(x.ljust(w) for x, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


_ESTIMATE_META = {
    "value": "the estimate; the string 'inf' for a divergent mean width",
    "std_error": "standard error of the estimate, 0 for deterministic rules",
    "method": "integration rule that produced the value",
    "n_samples": "Monte Carlo sample count, 0 for deterministic rules",
    "seed": "RNG seed of the Monte Carlo stream",
}

_BODY_META = {
    "mean_width": "spherical mean width M*(K), length units",
    "limit": "M*(K) from the volume growth of D + eps K, length units",
    "steiner.quermass": "V_0 .. V_n; V_i carries length^i",
    "steiner.volumes": "Monte Carlo |K + tD| at each radius, length^n",
    "urysohn.gap": "M*(K) - (|K| / |D|)^(1/n), length units",
}

_SUITE_META = {
    "m_star": "mean width M*(f), dimensionless",
    "m_tilde": "differential mean width, dimensionless",
    "rel_gap": "|m_tilde - m_star| / |m_star|",
    "rhs": "2 log (int f / int G)^(1/n) + 1",
    "gap": "difference of the two sides of the tested inequality, >= 0 when it holds",
    "ratio": "Santalo product divided by (2 pi)^n",
    "x0_error": "max-norm distance of the chosen translation from the expected one",
    "worst": "worst deviation over the checked cases, in the units of the tolerance",
    "increment": "M*(f_k) - M*(f_(k-1)); the limit row holds the relative error",
}


# --------------------------------------------------------------------------
# commands: each returns (payload, table text, exit code)
# --------------------------------------------------------------------------

def cmd_legendre(args):
    spec = _read_spec(args.spec)
    phi = build_potential(spec)
    if phi.dim > 3:
        raise UsageError("the legendre command writes grids, which are limited to dim <= 3")
    in_grid = phi.spec if isinstance(phi, GridPotential) else sampling_grid(spec, phi.dim)
    if args.engine == "grid" or isinstance(phi, GridPotential):
        sampled = phi if isinstance(phi, GridPotential) else sample_on_grid(phi, in_grid)
        out_grid = default_slope_grid(sampled, args.points)
        res = legendre_nd(sampled, out_grid)
        engine = "discrete transform"
    else:
        h = conjugate(phi)
        out_grid = in_grid if args.points is None else type(in_grid).from_bounds(
            in_grid.origin, in_grid.upper, args.points)
        res = sample_on_grid(h, out_grid)
        res.provenance = f"L[{getattr(phi, 'provenance', type(phi).__name__)}]"
        engine = "closed form"
    text = format_grid(res)
    if args.grid_out:
        write_grid(res, args.grid_out)
    finite = res.values[np.isfinite(res.values)]
    payload = {
        "grid_out": args.grid_out,
        "engine": engine,
        "provenance": res.provenance,
        "shape": list(res.spec.shape),
        "origin": list(res.spec.origin),
        "spacing": list(res.spec.spacing),
        "finite_nodes": int(finite.size),
        "min": float(finite.min()) + 0.0 if finite.size else INF,
        "max": float(finite.max()) if finite.size else INF,
        "_meta": {"min": "smallest finite node value of L phi", "max": "largest finite node value of L phi",
                  "finite_nodes": "count of nodes where L phi is finite"},
    }
    if not args.grid_out:
        payload["grid"] = text
    table = format_table(["engine", "shape", "min", "max"], [payload])
    return payload, table, EXIT_OK, [args.spec]


def cmd_meanwidth(args):
    spec = _read_spec(args.spec)
    phi = build_potential(spec)
    seed = _env_seed(args.seed)
    if args.tilde:
        rep = mean_width_tilde(phi, TildeConfig(seed=seed, n_samples=args.samples))
        kind = "differential"
    else:
        rep = mean_width(phi, method=args.method, n_samples=args.samples, seed=seed)
        kind = "gaussian mean"
    payload = rep.to_dict()
    payload["definition"] = kind
    payload["_meta"] = _ESTIMATE_META
    row = {"definition": kind, "value": rep.value, "std_error": rep.std_error, "method": rep.method}
    table = format_table(["definition", "value", "std_error", "method"], [row])
    return payload, table, EXIT_OK, [args.spec]


def cmd_bodies(args):
    spec = _read_spec(args.spec, BODY_KEYS)
    K = build_body(spec)
    seed = _env_seed(args.seed)
    ops = ["mean_width", "limit", "steiner", "urysohn"] if args.op == "all" else [args.op]
    payload, rows = {}, []
    for op in ops:
        if op == "mean_width":
            r = mean_width_body(K, n_samples=args.samples, seed=seed)
            payload[op] = r.to_dict()
            rows.append({"quantity": "mean width (sphere)", "value": r.value, "std_error": r.std_error})
        elif op == "limit":
            r = mean_width_body_limit(K, n_samples=args.samples, seed=seed)
            payload[op] = r.to_dict()
            rows.append({"quantity": "mean width (volume limit)", "value": r.value, "std_error": r.std_error})
        elif op == "steiner":
            r = steiner_fit(K, n_samples=args.samples, seed=seed)
            payload[op] = r.to_dict()
            for i, v in enumerate(r.quermass):
                rows.append({"quantity": f"V_{i}", "value": v, "std_error": None})
        else:
            r = urysohn_body_gap(K, n_samples=args.samples, seed=seed, volume_samples=args.samples)
            payload[op] = jsonable(r)
            rows.append({"quantity": "urysohn gap M* - (|K|/|D|)^(1/n)", "value": r["gap"],
                         "std_error": r["mean_width_error"]})
    payload["body"] = type(K).__name__
    payload["_meta"] = {k: v for k, v in _BODY_META.items() if k.split(".")[0] in ops}
    table = format_table(["quantity", "value", "std_error"], rows)
    return payload, table, EXIT_OK, [args.spec]


def cmd_verify(args):
    seed = _env_seed(args.seed)
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    payload, tables, ok = {}, [], True
    for name in names:
        res = run_suite(name, seed)
        payload[name] = res.to_dict()
        ok = ok and res.passed
        tables.append(f"[{name}] {'PASS' if res.passed else 'FAIL'}\n" + format_table(res.columns, res.rows))
    payload["passed"] = ok
    payload["_meta"] = _SUITE_META
    return payload, "\n\n".join(tables), EXIT_OK if ok else EXIT_FAIL, []


def _experiment_config(spec, seed_override):
    try:
        c_probe = tuple(spec.floats("c_probe", [1.0, 2.0, 4.0]))
        cfg = LowMstarConfig(
            eps=spec.number("eps"),
            M=spec.number("M"),
            lam=spec.number("lambda"),
            n=spec.integer("n"),
            trials=spec.integer("trials", 64),
            samples=spec.integer("samples", 4096),
            seed=_env_seed(spec.integer("seed", 0) if seed_override is None else seed_override),
            c_probe=c_probe,
        )
    except SpecError:
        raise
    except ValueError as exc:
        raise UsageError(f"{spec.source}: invalid experiment config: {exc}") from None
    return cfg


def cmd_lowmstar(args):
    spec = _read_spec(args.config, EXPERIMENT_KEYS)
    cfg = _experiment_config(spec, args.seed)
    fpath = resolve_path(spec, spec.require("function"))
    fspec = _read_spec(fpath)
    phi = build_potential(fspec)
    mode = spec.raw("mode", "finite_volume_ratio")
    try:
        if mode == "finite_volume_ratio":
            rep = finite_volume_ratio_experiment(phi, cfg, threads=args.threads)
            ok = True
        elif mode == "low_mstar":
            rep = low_mstar_experiment(phi, cfg, threads=args.threads)
            ok = all(v for k, v in rep["checks"].items() if isinstance(v, bool))
        else:
            raise spec.error("mode", f"unknown mode '{mode}', expected finite_volume_ratio or low_mstar")
    except SpecError:
        raise
    except ValueError as exc:
        raise UsageError(f"precondition failed: {exc}") from None
    rep["mode"] = mode
    rep["_meta"] = {
        "volume_ratio": "(int f / int G)^(1/n), dimensionless",
        "per_trial.max_c": "smallest c with f <= (c . G) at every sampled shell point of the trial",
        "bounds": "[C_probe V]^(2/(1-lambda)) per probe constant",
        "summary.pass_fraction": "fraction of trials with max_c under each bound",
    }
    rows = [{"trial": r["subspace_seed"][1], "max_c": r["max_c"], "shell_count": r["shell_count"]}
            for r in rep["per_trial"]]
    s = rep["summary"]
    table = format_table(["trial", "max_c", "shell_count"], rows)
    table += f"\n\nV(f) = {_fmt(rep['volume_ratio'])}   max_c = {_fmt(s['max_c'])}   pass_fraction = {s['pass_fraction']}"
    return rep, table, EXIT_OK if ok else EXIT_FAIL, [args.config, fpath]


# --------------------------------------------------------------------------
# parser and entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logconc", description="Mean width and convex analysis of log-concave functions")
    p.add_argument("--json-only", action="store_true", help="suppress the text table")
    p.add_argument("--timing", action="store_true", help="record wall time in the manifest")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--out", help="write the JSON report to this file instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("legendre", help="Legendre transform of a function spec, written as a grid")
    s.add_argument("spec")
    s.add_argument("--grid-out", help="write the conjugate grid file here")
    s.add_argument("--engine", choices=["auto", "grid"], default="auto",
                   help="auto: closed form where known; grid: always the discrete transform")
    s.add_argument("--points", type=int, help="output points per axis")
    s.set_defaults(func=cmd_legendre)

    s = sub.add_parser("meanwidth", help="mean width of a function spec")
    s.add_argument("spec")
    s.add_argument("--method", default="auto",
                   choices=["auto", "quadrature", "monte_carlo", "radial_1d", "closed_form"])
    s.add_argument("--tilde", action="store_true", help="use the differential definition")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=200_000)
    s.set_defaults(func=cmd_meanwidth)

    s = sub.add_parser("bodies", help="convex-body quantities from a body spec")
    s.add_argument("spec")
    s.add_argument("--op", choices=["mean_width", "limit", "steiner", "urysohn", "all"], default="mean_width")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=200_000)
    s.set_defaults(func=cmd_bodies)

    s = sub.add_parser("verify", help="run a verification suite")
    s.add_argument("suite", choices=sorted(SUITES) + ["all"])
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("lowmstar", help="run a finite-volume-ratio or low-M* experiment")
    s.add_argument("config")
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(func=cmd_lowmstar)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    start = time.perf_counter()
    try:
        payload, table, code, inputs = args.func(args)
    except (SpecError, UsageError) as exc:
        print(f"logconc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    manifest = {
        "command": args.command,
        "arguments": {k: v for k, v in vars(args).items() if k not in ("func", "command", "timing", "out")},
        "seed": _env_seed(getattr(args, "seed", None)),
        "tool_version": _version(),
        "input_digests": {os.path.basename(p): _digest(p) for p in inputs},
        "sequential": args.threads == 1,
    }
    if args.timing:
        manifest["wall_time_s"] = time.perf_counter() - start
    doc = {"manifest": manifest, "report": payload}
    text = json.dumps(jsonable(doc), indent=2, sort_keys=True, allow_nan=False)
    if not args.json_only:
        print(table)
        print()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
