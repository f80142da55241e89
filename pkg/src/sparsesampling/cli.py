"""Command-line front end.

Every subcommand reads an optional JSON config, writes its outputs under
``--out`` and finishes with ``manifest.json`` (config hash, seed, versions,
output list). Exit codes: 0 success, 1 certification/assertion failure,
2 usage or config error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .dictionaries import SampledSystem, TrigSystem, evaluate_trig_series
from .discretization import (
    incoherence_estimate,
    rip_check,
    sampling_matrix,
    unconditionality_estimate,
    verify_usd,
)
from .errors import CapExceeded, ParameterError
from .experiments import (
    ConfigError,
    ExperimentConfig,
    RateTable,
    certified_points,
    continuous_error,
    draw_members,
    iteration_count,
    lebesgue_ensemble,
    linear_baseline,
    random_target,
    recovery_pipeline,
    resolve_threads,
    sample_count,
    svg_loglog,
)
from .greedy import sigma_v_bruteforce, wcga_run
from .lp_space import DiscreteMeasure, PointSet, torus_grid

log = logging.getLogger("sparsesampling")

SUBCOMMANDS = ("discretize", "verify-usd", "rip-check", "incoherence", "recover", "rates", "lebesgue",
               "oracle-compare", "plot")


class Failure(Exception):
    """Raised by a subcommand whose check did not pass (exit code 1)."""


def _dump(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _points(args, cfg, system, v):
    if args.points:
        return PointSet.from_csv(args.points), None
    if args.grid:
        return torus_grid(cfg.dim, args.grid), None
    cp = certified_points(cfg, v, system=system)
    return cp.points, cp


def cmd_discretize(args, cfg, out):
    system = TrigSystem(cfg.dim, cfg.dictionary_level)
    rows = []
    ok = True
    for v in cfg.v_grid:
        cp = certified_points(cfg, v, system=system)
        cp.points.to_csv(out / f"points_v{v}.csv")
        rows.append({"v": v, "m": cp.points.count, "certified": cp.certified, "attempts": cp.attempts,
                     "lower_ratio": cp.lower_ratio, "upper_ratio": cp.upper_ratio})
        ok &= cp.certified
    _dump(out / "discretize.json", {"N": system.size, "rows": rows})
    if not ok:
        raise Failure("some point sets could not be certified")
    return {"certified": ok}


def cmd_verify_usd(args, cfg, out):
    system = TrigSystem(cfg.dim, cfg.dictionary_level)
    v = args.u or cfg.v_grid[0]
    pts, _ = _points(args, cfg, system, v)
    report = verify_usd(system, pts, min(v, system.size), cfg.p, cfg.usd_trials, cfg.usd_refine_steps,
                        seed=cfg.seed)
    report.to_json(out / "usd_report.json")
    pts.to_csv(out / "points.csv")
    if not report.passed:
        raise Failure(f"usd certificate failed: [{report.lower_ratio}, {report.upper_ratio}]")
    return {"lower_ratio": report.lower_ratio, "upper_ratio": report.upper_ratio, "passed": True}


def cmd_rip_check(args, cfg, out):
    system = TrigSystem(cfg.dim, cfg.dictionary_level)
    v = args.u or cfg.v_grid[0]
    pts, _ = _points(args, cfg, system, v)
    U = sampling_matrix(system, pts, cfg.p)
    report = rip_check(U, args.norm, cfg.p, min(v, system.size), cfg.usd_trials, cfg.seed, system=system,
                       refine_steps=cfg.usd_refine_steps)
    _dump(out / "rip_report.json", report.to_dict())
    return {"delta_estimate": report.delta_estimate}


def cmd_incoherence(args, cfg, out):
    system = TrigSystem(cfg.dim, cfg.dictionary_level)
    v = args.u or cfg.v_grid[0]
    S = min(system.size, 2 * v)
    pts, _ = _points(args, cfg, system, v)
    kw = dict(p=cfg.p, v=min(v, S), S=S, trials=cfg.usd_trials, refine_steps=cfg.usd_refine_steps, seed=cfg.seed)
    cont = incoherence_estimate(system, None, r=cfg.incoherence_r, **kw)
    disc = incoherence_estimate(system, pts, r=cfg.incoherence_r, **kw)
    u_cont = unconditionality_estimate(system, None, **kw)
    u_disc = unconditionality_estimate(system, pts, **kw)
    result = {"continuous": cont.to_dict(), "discrete": disc.to_dict(),
              "unconditionality_continuous": u_cont, "unconditionality_discrete": u_disc}
    _dump(out / "incoherence.json", result)
    return {"V_continuous": cont.V_estimate, "V_discrete": disc.V_estimate}


def cmd_recover(args, cfg, out):
    system = TrigSystem(cfg.dim, cfg.dictionary_level)
    v = args.u or cfg.v_grid[0]
    cp = certified_points(cfg, v, system=system)
    if not cp.certified:
        raise Failure("no certified point set")
    member = draw_members(cfg)[0]
    measure = DiscreteMeasure.uniform(cp.points)
    from .lp_space import SampledFunction

    f0 = SampledFunction(evaluate_trig_series(member, cp.points), measure)
    u = iteration_count(cfg, v)
    trace = wcga_run(f0, system, cfg.p, t=cfg.t, max_iter=u, stop_tol=0.0, tol=cfg.tol)
    trace.to_json(out / "trace.json")
    err = continuous_error(member, trace.final_coefficients(), cfg.p, cfg.dim)
    _dump(out / "recover.json", {"v": v, "m": cp.points.count, "u": u, "continuous_error": err,
                                 "approximant": trace.final_coefficients().to_json()})
    return {"continuous_error": err}


def _write_table(table: RateTable, out: Path, stem: str):
    table.to_csv(out / f"{stem}.csv")
    table.to_json(out / f"{stem}.json")


def cmd_rates(args, cfg, out):
    threads = resolve_threads(args.threads or cfg.threads)
    tables = [recovery_pipeline(cfg, threads)]
    _write_table(tables[0], out, "rates_nonlinear")
    result = {"nonlinear_slope": tables[0].slope}
    if cfg.p == 2.0:
        tables.append(linear_baseline(cfg, threads))
        _write_table(tables[1], out, "rates_linear")
        result["linear_slope"] = tables[1].slope
    svg_loglog(tables, out / "rates.svg")
    if any(not row["certified"] for t in tables for row in t.rows):
        raise Failure("some point sets could not be certified")
    return result


def cmd_lebesgue(args, cfg, out):
    table = lebesgue_ensemble(cfg, resolve_threads(args.threads or cfg.threads))
    table.to_csv(out / "lebesgue.csv")
    table.to_json(out / "lebesgue.json")
    if not table.summary["all_finite"]:
        raise Failure("non-finite Lebesgue ratio")
    return {k: table.summary[k] for k in ("ratio_inf", "ratio_mixed", "ratio_bv")}


def cmd_oracle_compare(args, cfg, out):
    """WCGA error after u steps against the brute-force sigma_u in the same discrete norm."""
    lc = cfg.lebesgue
    system = TrigSystem(cfg.dim, lc.level)
    v = lc.v
    cp = certified_points(cfg, v, lc.m or sample_count(cfg, v), system)
    measure = DiscreteMeasure.uniform(cp.points)
    ctx = SampledSystem(system, measure)
    rows = []
    ok = True
    for trial in range(lc.trials):
        target = random_target(system, v, lc.perturbation, cfg.seed, trial)
        f0 = ctx.function(system.to_dense(target))
        trace = wcga_run(f0, system, cfg.p, t=cfg.t, max_iter=v, stop_tol=0.0, context=ctx, tol=cfg.tol)
        for u in range(1, trace.iterations + 1):
            k = len(trace.support_at(u))
            sigma = sigma_v_bruteforce(f0, system, k, cfg.p, cap=cfg.oracle_cap).error
            wc = trace.residual_norms[u]
            good = wc >= sigma - 1e-9
            ok &= good
            rows.append({"trial": trial, "u": u, "terms": k, "wcga_error": wc, "sigma": sigma, "dominates": good})
    _dump(out / "oracle_compare.json", {"N": system.size, "m": cp.points.count, "rows": rows})
    if not ok:
        raise Failure("WCGA error fell below the brute-force oracle")
    return {"comparisons": len(rows), "dominates": ok}


def cmd_plot(args, cfg, out):
    src = Path(args.input) if args.input else out
    tables = []
    for stem in ("rates_nonlinear", "rates_linear"):
        path = src / f"{stem}.json"
        if path.exists():
            data = json.loads(path.read_text())
            t = RateTable(data["kind"], data["rows"], data["fit_variable"], data["slope"], data["intercept"],
                          data["residual"], data["reference_slope"], data["notes"])
            tables.append(t)
    if not tables:
        raise ParameterError(f"no rate tables found in {src}")
    svg_loglog(tables, out / "rates.svg")
    return {"tables": [t.kind for t in tables]}


COMMANDS = {
    "discretize": cmd_discretize,
    "verify-usd": cmd_verify_usd,
    "rip-check": cmd_rip_check,
    "incoherence": cmd_incoherence,
    "recover": cmd_recover,
    "rates": cmd_rates,
    "lebesgue": cmd_lebesgue,
    "oracle-compare": cmd_oracle_compare,
    "plot": cmd_plot,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsesampling", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    sub.required = True
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=(COMMANDS[name].__doc__ or name).splitlines()[0])
        sp.add_argument("--config", help="experiment config JSON (defaults apply when omitted)")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", default="out", help="output directory (default: ./out)")
        sp.add_argument("--threads", type=int, help="worker threads (default: $SPARSESAMPLING_THREADS or CPU count)")
        if name in ("verify-usd", "rip-check", "incoherence"):
            sp.add_argument("--points", help="point set CSV to use instead of drawing one")
            sp.add_argument("--grid", type=int, help="use the uniform grid with this many nodes per axis")
        if name in ("verify-usd", "rip-check", "incoherence", "recover"):
            sp.add_argument("--u", type=int, help="sparsity level (default: first entry of v_grid)")
        if name == "rip-check":
            sp.add_argument("--norm", choices=("euclidean", "synthesis"), default="synthesis")
        if name == "plot":
            sp.add_argument("--input", help="directory holding rates_*.json (default: --out)")
    return parser


def _versions():
    return {"sparsesampling": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
    except FileNotFoundError as exc:
        print(f"error: config file not found: {exc.filename}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config_text = cfg.to_json()
    code, status, result = 0, "ok", {}
    try:
        result = COMMANDS[args.command](args, cfg, out) or {}
    except Failure as exc:
        code, status = 1, f"failed: {exc}"
    except AssertionError as exc:
        code, status = 1, f"assertion failed: {exc}"
    except (ParameterError, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code, status = 2, f"usage error: {exc}"
    outputs = sorted(p.name for p in out.iterdir() if p.is_file() and p.name != "manifest.json")
    manifest = {
        "subcommand": args.command,
        "status": status,
        "exit_code": code,
        "seed": cfg.seed,
        "config": json.loads(config_text),
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "versions": _versions(),
        "outputs": outputs,
        "result": _clean(result),
    }
    _dump(out / "manifest.json", manifest)
    if status != "ok":
        print(status, file=sys.stderr)
    return code


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def main():
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
