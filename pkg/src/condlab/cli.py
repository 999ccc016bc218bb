"""``condlab`` command line: analyze, verify, experiment, roots.

Exit codes: 0 success, 1 usage or input error, 2 an instance was degenerate
(reported in the output, not fatal).
"""
from __future__ import annotations

import argparse
import datetime as _dt
import math
import os
import sys

import numpy as np

from . import condcore, ensembles
from .condcore import ConditionMap, analyze_map, kappa_avg_estimate, sphere_average_oracle
from .errors import CondlabError, PreconditionError, SigmaError
from .io import InputError, dump_csv, dump_json, number, read_problem_file
from .problems import (
    HPolySystem,
    ProblemAnalysis,
    build_eigen,
    build_hpoly_system,
    build_kernel,
    build_linear_fixed_b,
    build_linear_general,
    build_upoly,
    refine_root,
    roots_upoly,
)
from .problems.upoly import root_residual

EXPERIMENTS = ("edelman", "bp-bound", "rank-r")
EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------- analyses


def _map_analysis(matrix) -> ProblemAnalysis:
    cmap = ConditionMap.from_matrix(matrix)
    rep = analyze_map(cmap, componentwise=True)
    return ProblemAnalysis("map", None, cmap, rep, rep, 1.0, 1.0)


def build_analyses(problem, p_list=(2,)):
    """List of ``(row_id, analysis-or-SigmaError)`` for one parsed problem."""
    d, fam, pid = problem.data, problem.family, problem.id

    def guarded(row_id, fn):
        try:
            return [(row_id, fn())]
        except SigmaError as exc:
            return [(row_id, exc)]

    if fam == "linear_fixed_b":
        return guarded(pid, lambda: build_linear_fixed_b(d["A"], d["b"], p_list))
    if fam == "linear_general":
        return guarded(pid, lambda: build_linear_general(d["A"], d["b"], p_list))
    if fam == "kernel":
        return guarded(pid, lambda: build_kernel(d["A"], d["rank"], p_list=p_list))
    if fam == "map":
        return [(pid, _map_analysis(d["matrix"]))]
    if fam == "eigen":
        try:
            ea = build_eigen(d["A"], d["which"], p_list)
        except SigmaError as exc:
            return [(f"{pid}#eigenvector", exc), (f"{pid}#eigenvalue", exc)]
        return [(f"{pid}#eigenvector", ea.eigenvector), (f"{pid}#eigenvalue", ea.eigenvalue)]
    if fam == "upoly":
        f = d["coefficients"]
        if d["root"] is not None:
            return guarded(pid, lambda: build_upoly(f, d["root"], d["metric"], p_list))
        out = []
        for i, z in enumerate(roots_upoly(f)):
            out += guarded(f"{pid}#root{i}", lambda z=z: build_upoly(f, z, d["metric"], p_list))
        return out
    if fam == "hpoly_system":
        system = HPolySystem(d["n"], tuple(d["degrees"]), tuple(d["polys"]))

        def run():
            root = d.get("root")
            if root is None:
                root = refine_root(system, d["start"])
            return build_hpoly_system(system, root, p_list)

        return guarded(pid, run)
    raise InputError(f"unknown family {fam!r}")


def _report_fields(rep) -> dict:
    return {
        "kappa": number(rep.kappa),
        "kappa_frobenius": number(rep.kappa_frobenius),
        "kappa_avg": {str(p): number(v) for p, v in sorted(rep.kappa_avg.items())},
    }


def _sigma_row(row_id, family, exc) -> dict:
    return {
        "id": row_id, "family": family, "m": None, "n": None,
        "kappa": "inf", "kappa_frobenius": "inf", "kappa_avg": {}, "componentwise": None,
        "closed_form": None, "flags": ["Sigma"], "message": str(exc),
    }


def _analysis_row(row_id, an: ProblemAnalysis, p_list, relative, seed_path) -> dict:
    cmap = an.map
    avg = {}
    for p in p_list:
        est = kappa_avg_estimate(cmap, p, "auto", seed=seed_path + (p,))
        avg[p] = est.value
    engine = condcore.replace(an.engine, kappa_avg=avg)
    row = {"id": row_id, "family": an.family, "m": cmap.input_dim, "n": cmap.output_dim}
    row.update(_report_fields(engine))
    row["componentwise"] = [number(c) for c in engine.componentwise or []]
    row["closed_form"] = _report_fields(an.closed_form)
    flags = []
    if abs(an.closed_form.kappa - an.engine.kappa) > 1e-8 * max(an.engine.kappa, 1e-300):
        flags.append("closed_form_mismatch")
    if "avg_candidates" in an.notes:
        flags.append("avg_constant_discrepancy")
        row["avg_candidates"] = {k: number(v) for k, v in an.notes["avg_candidates"].items()}
    if relative:
        try:
            rel = an.relative()
        except CondlabError as exc:
            row["relative"] = None
            flags.append(f"relative_undefined: {exc}")
        else:
            row["relative"] = dict(_report_fields(rel), scale=number(rel.relative_scale))
    row["flags"] = flags
    return row


def _analysis_csv_row(row, p_list) -> dict:
    flat = {k: row.get(k) for k in ("id", "family", "m", "n", "kappa", "kappa_frobenius")}
    for p in p_list:
        flat[f"kappa_avg_p{p}"] = row["kappa_avg"].get(str(p))
    comp = row.get("componentwise")
    flat["componentwise"] = ";".join(format(c, ".17g") if isinstance(c, float) else str(c) for c in comp) if comp else None
    closed = row.get("closed_form") or {}
    flat["closed_kappa"] = closed.get("kappa")
    flat["closed_kappa_avg_p2"] = (closed.get("kappa_avg") or {}).get("2")
    if "relative" in row:
        rel = row["relative"] or {}
        flat["relative_kappa"] = rel.get("kappa")
        flat["relative_kappa_avg_p2"] = (rel.get("kappa_avg") or {}).get("2")
    flat["flags"] = ";".join(row["flags"])
    return flat


def cmd_analyze(args) -> tuple[str, int]:
    problems = read_problem_file(args.input)
    rows, status = [], EXIT_OK
    for i, prob in enumerate(problems):
        for j, (row_id, an) in enumerate(build_analyses(prob, (2,))):
            if isinstance(an, SigmaError):
                rows.append(_sigma_row(row_id, prob.family, an))
                status = EXIT_DEGENERATE
            else:
                rows.append(_analysis_row(row_id, an, args.p_list, args.relative, (args.seed, i, j)))
    if args.format == "csv":
        cols = ["id", "family", "m", "n", "kappa", "kappa_frobenius"] + [f"kappa_avg_p{p}" for p in args.p_list]
        cols += ["componentwise", "closed_kappa", "closed_kappa_avg_p2"]
        if args.relative:
            cols += ["relative_kappa", "relative_kappa_avg_p2"]
        cols.append("flags")
        text = dump_csv(cols, [_analysis_csv_row(r, args.p_list) for r in rows], _comments(args))
    else:
        text = dump_json(_envelope(args, "analyze", rows))
    return text, status


def _z(diff, se, scale):
    if se > 0:
        return abs(diff) / se
    return 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(scale)) else math.inf


def _adjudicate(row_id, an, oracle, tol) -> dict:
    cands = an.notes["avg_candidates"]
    z = {k: _z(v - oracle.value, oracle.std_error, v) for k, v in cands.items()}
    within = [k for k, zz in z.items() if zz <= tol]
    supported = within[0] if len(within) == 1 else ("ambiguous" if within else "neither")
    a, b = cands.values()
    sep = abs(a - b) / oracle.std_error if oracle.std_error > 0 else math.inf
    line = (
        f"{row_id}: oracle {oracle.value:.6g} +/- {oracle.std_error:.2g}; "
        + "; ".join(f"kappa/{k} = {v:.6g} (z={z[k]:.2f})" for k, v in cands.items())
        + f"; separation {sep:.1f} sigma; supported: {supported}"
    )
    return {
        "id": row_id,
        "oracle": number(oracle.value),
        "oracle_std_error": number(oracle.std_error),
        "candidates": {k: {"value": number(v), "z": number(z[k])} for k, v in cands.items()},
        "separation_sigmas": number(sep),
        "supported": supported,
        "line": line,
    }


def cmd_verify(args) -> tuple[str, int]:
    if args.samples < 1000:
        raise UsageError("--samples must be at least 1000")
    problems = read_problem_file(args.input)
    rows, adjudications, status = [], [], EXIT_OK
    for i, prob in enumerate(problems):
        for j, (row_id, an) in enumerate(build_analyses(prob, (2,))):
            if isinstance(an, SigmaError):
                rows.append({"id": row_id, "family": prob.family, "p": None, "flags": ["Sigma"], "pass": None,
                             "message": str(an)})
                status = EXIT_DEGENERATE
                continue
            cmap = an.map
            oracles = {}
            for p in args.p_list:
                closed = kappa_avg_estimate(cmap, p, "auto", args.samples, (args.seed, i, j, 1, p), args.threads)
                oracle = sphere_average_oracle(cmap, p, args.samples, (args.seed, i, j, 0, p), args.threads)
                oracles[p] = oracle
                se = math.hypot(closed.std_error, oracle.std_error)
                z = _z(closed.value - oracle.value, se, closed.value)
                rows.append({
                    "id": row_id, "family": an.family, "p": p, "m": cmap.input_dim, "n": cmap.output_dim,
                    "closed": number(closed.value), "closed_std_error": number(closed.std_error),
                    "oracle": number(oracle.value), "oracle_std_error": number(oracle.std_error),
                    "z": number(z), "tol_sigmas": args.tol_sigmas, "pass": bool(z <= args.tol_sigmas),
                    "flags": [],
                })
            if "avg_candidates" in an.notes:
                oracle = oracles.get(2) or sphere_average_oracle(
                    cmap, 2, args.samples, (args.seed, i, j, 0, 2), args.threads
                )
                adjudications.append(_adjudicate(row_id, an, oracle, args.tol_sigmas))
    for adj in adjudications:
        print(adj["line"], file=sys.stderr)
    if args.format == "csv":
        cols = ["id", "family", "p", "m", "n", "closed", "closed_std_error", "oracle", "oracle_std_error",
                "z", "tol_sigmas", "pass", "flags"]
        flat = [dict(r, flags=";".join(r["flags"])) for r in rows]
        text = dump_csv(cols, flat, _comments(args) + [a["line"] for a in adjudications])
    else:
        doc = _envelope(args, "verify", rows)
        doc["adjudications"] = adjudications
        text = dump_json(doc)
    return text, status


# ---------------------------------------------------------------- experiments


def _experiment_rows(res: ensembles.ExperimentResult) -> list[dict]:
    rows = [dict(r) for r in res.rows]
    if res.name == "edelman":
        unit = res.fits["log_kappa_rel_unit_slope"]
        rows.append({
            "quantity": "fit:log_kappa_rel_minus_log_n.intercept", "size": "fit",
            "mean": unit["intercept"], "std_error": unit["intercept_se"],
            "trials": res.meta["trials"], "bound": ensembles.EDELMAN_C,
            "pass": abs(unit["intercept"] - ensembles.EDELMAN_C) <= 0.25,
        })
        if "log_kappa_rel_av" in res.fits:
            fit = res.fits["log_kappa_rel_av"]
            rows.append({
                "quantity": "fit:log_kappa_rel_av.slope", "size": "fit", "mean": fit["slope"],
                "std_error": fit["slope_se"], "trials": res.meta["trials"], "bound": 0.5,
                "pass": abs(fit["slope"] - 0.5) <= 0.1,
            })
            rows.append({
                "quantity": "fit:log_kappa_rel_av.intercept", "size": "fit", "mean": fit["intercept"],
                "std_error": fit["intercept_se"], "trials": res.meta["trials"],
            })
    return rows


def cmd_experiment(args) -> tuple[str, int]:
    if args.name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {args.name!r}; valid names: {', '.join(EXPERIMENTS)}")
    results = []
    if args.name == "edelman":
        results.append(ensembles.edelman_experiment(args.sizes, args.trials or 200, args.seed, args.threads))
    elif args.name == "bp-bound":
        for d in args.d:
            results.append(ensembles.bp_bound_experiment(d, args.trials or 2000, args.seed, args.n, args.threads))
    else:
        results.append(
            ensembles.rank_r_sample_experiment(args.k, args.q, args.r, args.trials or 500, args.seed, args.threads)
        )
    rows, fits, notes, meta = [], {}, [], []
    for res in results:
        rows += _experiment_rows(res)
        fits.update(res.fits)
        notes += [n for n in res.notes if n not in notes]
        meta.append(res.meta)
    if args.format == "csv":
        cols = ["size", "mean", "std_error", "trials", "bound", "pass", "quantity", "ci_low", "ci_high"]
        text = dump_csv(cols, rows, _comments(args) + notes)
    else:
        doc = _envelope(args, "experiment", [_jsonable(r) for r in rows])
        doc.update(name=args.name, fits=_jsonable(fits), notes=notes, meta={"runs": _jsonable(meta)})
        text = dump_json(doc)
    return text, EXIT_OK


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (float, np.floating)):
        return number(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# ---------------------------------------------------------------- roots


def cmd_roots(args) -> tuple[str, int]:
    problems = read_problem_file(args.input)
    rows = []
    for prob in problems:
        if prob.family != "upoly":
            raise InputError(f"{prob.id}: roots needs a univariate 'upoly' problem, got {prob.family!r}")
        f = prob.data["coefficients"]
        for k, z in enumerate(roots_upoly(f)):
            rows.append({"id": prob.id, "index": k, "root": [number(z.real), number(z.imag)],
                         "residual": number(root_residual(f, z))})
    if args.format == "csv":
        flat = [{"id": r["id"], "index": r["index"], "re": r["root"][0], "im": r["root"][1],
                 "residual": r["residual"]} for r in rows]
        text = dump_csv(["id", "index", "re", "im", "residual"], flat, _comments(args))
    else:
        text = dump_json(_envelope(args, "roots", rows))
    return text, EXIT_OK


# ---------------------------------------------------------------- plumbing


def _envelope(args, command, rows) -> dict:
    doc = {"command": command}
    if not args.no_timestamp:
        doc["generated"] = _timestamp()
    doc["rows"] = rows
    return doc


def _comments(args) -> list[str]:
    return [] if args.no_timestamp else [f"generated {_timestamp()}"]


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads; results do not depend on it")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="report format (default json)")
    common.add_argument("--no-timestamp", action="store_true", help="omit the generation timestamp")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")

    parser = _Parser(prog="condlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="condition numbers of each problem")
    p.add_argument("input", help="problem file (JSON)")
    p.add_argument("--p-list", type=_int_list, default=[2], help="comma-separated moment orders (default 2)")
    p.add_argument("--relative", action="store_true", help="also report relative condition numbers")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", parents=[common], help="check average condition numbers against the sphere oracle")
    p.add_argument("input", help="problem file (JSON)")
    p.add_argument("--samples", type=int, default=100_000, help="Monte Carlo draws per estimate, at least 1000")
    p.add_argument("--p-list", type=_int_list, default=[2], help="comma-separated moment orders (default 2)")
    p.add_argument("--tol-sigmas", type=float, default=3.0, help="agreement threshold in standard errors")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", parents=[common], help="run a statistical experiment")
    p.add_argument("name", help=f"one of: {', '.join(EXPERIMENTS)}")
    p.add_argument("--sizes", type=_int_list, default=[20, 40, 80, 160], help="matrix sizes for edelman")
    p.add_argument("--trials", type=int, default=None, help="trials per setting (200, 2000, 500 by experiment)")
    p.add_argument("--d", type=_int_list, default=[6], help="degrees for bp-bound")
    p.add_argument("--n", type=int, default=1, help="number of variables for bp-bound")
    p.add_argument("--k", type=int, default=4, help="rows for rank-r")
    p.add_argument("--q", type=int, default=4, help="columns for rank-r")
    p.add_argument("--r", type=int, default=2, help="rank for rank-r")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("roots", parents=[common], help="roots of univariate polynomials")
    p.add_argument("input", help="problem file with upoly problems (JSON)")
    p.set_defaults(func=cmd_roots)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        text, status = args.func(args)
    except (UsageError, InputError, PreconditionError, IndexError) as exc:
        print(f"condlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CondlabError as exc:
        print(f"condlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
