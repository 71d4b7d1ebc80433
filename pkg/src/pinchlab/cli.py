"""Command-line front end.

One binary, subcommand style.  Input is either a catalog model
(``--model`` plus ``--params`` JSON) or a tabulated jet file
(``--jet-file``); a JSON config file can stand in for any flag, with
explicit flags winning.  Every randomized command runs under an
explicit (or default, logged) seed and reports are byte-reproducible
for identical configurations.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import catalog, reporting, verify
from .curvature import (
    adapted_frame,
    bw_from_sff,
    dupin_decomposition,
    gauss_curvature,
    hodge_split,
    isotropic_min,
)
from .expr import DomainError, ParseError
from .jetfile import JetFileError, load_jet_chart
from .jets import NULLITY_RTOL, RankError, first_normal_rank, invariants, sff_at
from .pinching import ls_min, pinch_check

MAX_GRID_POINTS = 20000


def _add_input_flags(p):
    p.add_argument("--model", help="catalog model id (see: pinchlab catalog)")
    p.add_argument("--params", default=None,
                   help="JSON object of model parameters")
    p.add_argument("--jet-file", dest="jet_file", default=None,
                   help="path to a tabulated jet file")
    p.add_argument("--config", default=None,
                   help="JSON config file supplying defaults for any flag")


def _add_sampling_flags(p):
    p.add_argument("--samples", type=int, default=100,
                   help="random sample points over the parameter domain")
    p.add_argument("--grid", type=int, default=None,
                   help="use a product grid with this many points per axis")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")


def _add_output_flags(p):
    p.add_argument("--format", dest="fmt", choices=("table", "json", "csv"),
                   default="table")
    p.add_argument("--output", default=None, help="write the report here")


def _add_opt_flags(p):
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--opt-tol", dest="opt_tol", type=float, default=1e-12)
    p.add_argument("--max-sweeps", dest="max_sweeps", type=int, default=12)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pinchlab",
        description="curvature invariants and pinching checks for immersed "
                    "submanifolds of Euclidean spaces and round spheres")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, help_, sampling=True, opt=False):
        p = sub.add_parser(name, help=help_)
        _add_input_flags(p)
        if sampling:
            _add_sampling_flags(p)
        _add_output_flags(p)
        if opt:
            _add_opt_flags(p)
        return p

    cmd("invariants", "per-point S, H, traceless part, relative nullity")

    p = cmd("pinch", "pinching check S <= a(n,k,H,c) per point")
    p.add_argument("-k", type=int, required=True, help="pinching index k")
    p.add_argument("--c", type=float, default=None,
                   help="ambient curvature (default: from the input chart)")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="relative width of the equality band")

    cmd("bw", "Weitzenboeck operator: matrix, minimal eigenvalue, 4d split")

    p = cmd("isotropic-min", "minimize the isotropic functional over 4-frames",
            opt=True)
    p.add_argument("--frames", type=int, default=200,
                   help="random frames sampled before refinement")

    p = cmd("ls-min", "extremal partition value over orthonormal bases", opt=True)
    p.add_argument("-p", type=int, default=2, help="partition size")
    p.add_argument("--c", type=float, default=None)

    cmd("adapt-frame", "find an adapted frame at each sampled point", opt=True)
    cmd("dupin", "Dupin principal-normal decomposition per point")

    p = cmd("ovaloid", "principal-curvature spread margin over the grid")
    p.add_argument("-k", type=int, required=True)

    p = sub.add_parser("rotational", help="strictness check for a revolution "
                                          "hypersurface profile")
    p.add_argument("--profile", required=True, help="expression u(x)")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--x-lo", dest="x_lo", type=float, default=-0.5)
    p.add_argument("--x-hi", dest="x_hi", type=float, default=0.5)
    p.add_argument("--count", type=int, default=100)
    _add_output_flags(p)

    p = sub.add_parser("product-with-curve", help="curve x model product with "
                                                  "feasibility report")
    p.add_argument("--curve", required=True, help="JSON curve model spec")
    p.add_argument("--inner", required=True, help="JSON model spec of the factor")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--check-k", dest="check_k", type=int, default=None,
                   help="re-check the product pinching for this k")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    _add_output_flags(p)

    p = sub.add_parser("catalog", help="list model ids and parameter ranges")
    _add_output_flags(p)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("--suite", default="all",
                   help=f"one of: {', '.join(sorted(verify.SUITES))}")
    p.add_argument("--count", type=int, default=None,
                   help="override the sample count of counted criteria")
    p.add_argument("--seed", type=int, default=None)
    _add_output_flags(p)
    return ap


def _apply_config(args):
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ValueError("config file must hold a JSON object")
        for key, value in cfg.items():
            dest = key.replace("-", "_")
            if not hasattr(args, dest):
                continue
            # explicit command-line flags win over the config file
            if dest in args._explicit:
                continue
            setattr(args, dest, value)
    return args


def _mark_explicit(args, argv):
    explicit = set()
    for tok in argv:
        if tok.startswith("--"):
            explicit.add(tok[2:].split("=")[0].replace("-", "_"))
        elif tok in ("-k", "-p"):
            explicit.add(tok[1:])
    args._explicit = explicit
    return args


def _resolve_chart(args):
    model = getattr(args, "model", None)
    jet_file = getattr(args, "jet_file", None)
    if bool(model) == bool(jet_file):
        raise ValueError("exactly one input source is required: "
                         "--model or --jet-file")
    if jet_file:
        return load_jet_chart(jet_file)
    params = getattr(args, "params", None)
    if params is None:
        params = {}
    elif isinstance(params, str):
        params = json.loads(params)
    return catalog.build_model(catalog.ModelSpec(id=model, params=params))


def _sample_points(chart, args):
    if chart.meta.get("model") == "jetfile":
        return [np.asarray(u) for u in chart.meta["points"]]
    grid = getattr(args, "grid", None)
    if grid:
        if grid ** chart.n > MAX_GRID_POINTS:
            raise ValueError(
                f"grid of {grid}^{chart.n} points exceeds the "
                f"{MAX_GRID_POINTS}-point cap; use --samples instead")
        return list(chart.domain.grid(grid))
    rng = np.random.default_rng(args.seed)
    return list(chart.domain.sample(args.samples, rng))


def _base_config(args, chart=None, **extra):
    cfg = {"command": args.command}
    for key in ("model", "params", "jet_file", "samples", "grid", "seed",
                "restarts", "opt_tol", "max_sweeps", "tol"):
        if hasattr(args, key) and getattr(args, key) is not None:
            val = getattr(args, key)
            if key == "params" and isinstance(val, str):
                val = json.loads(val)
            cfg[key] = val
    if chart is not None:
        cfg["chart"] = chart.name
        cfg["ambient"] = {"dim": chart.ambient.dim,
                          "curvature_flag": chart.ambient.curvature_flag,
                          "radius": chart.ambient.radius,
                          "curvature": chart.ambient.curvature}
    cfg["thresholds"] = {"nullity_rtol": NULLITY_RTOL}
    cfg.update(extra)
    return cfg


def _emit(report, args) -> None:
    text = reporting.render(report, args.fmt)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommand bodies

def _cmd_invariants(args) -> int:
    chart = _resolve_chart(args)
    points = _sample_points(chart, args)
    records = []
    max_rank = 0
    for idx, u in enumerate(points):
        sff = sff_at(chart, u)
        inv = invariants(sff)
        max_rank = max(max_rank, first_normal_rank(sff))
        records.append({"index": idx, "u": list(map(float, u)), "S": inv.S,
                        "H": inv.H, "traceless_sq": inv.traceless_sq,
                        "nullity": inv.nullity_dim})
    summary = {
        "points": len(records),
        "S_min": min(r["S"] for r in records),
        "S_max": max(r["S"] for r in records),
        "H_min": min(r["H"] for r in records),
        "H_max": max(r["H"] for r in records),
        "max_first_normal_rank": max_rank,
        "effective_codimension": max_rank,
    }
    _emit(reporting.make_report(_base_config(args, chart), records, summary), args)
    return 0


def _cmd_pinch(args) -> int:
    chart = _resolve_chart(args)
    c = args.c if args.c is not None else chart.ambient.curvature
    points = _sample_points(chart, args)
    records = []
    for idx, u in enumerate(points):
        rep = pinch_check(invariants(sff_at(chart, u)), k=args.k, c=c,
                          tol=args.tol)
        rec = {"index": idx, "u": list(map(float, u))}
        rec.update(rep.as_record())
        records.append(rec)
    slacks = [r["slack"] for r in records]
    counts = {v: sum(1 for r in records if r["verdict"] == v)
              for v in ("strict", "equality", "violated")}
    summary = {"points": len(records), "slack_min": min(slacks),
               "slack_max": max(slacks), "verdict_counts": counts}
    _emit(reporting.make_report(_base_config(args, chart, k=args.k, c=c),
                                records, summary), args)
    return 0


def _cmd_bw(args) -> int:
    chart = _resolve_chart(args)
    points = _sample_points(chart, args)
    records = []
    for idx, u in enumerate(points):
        sff = sff_at(chart, u)
        bw = bw_from_sff(sff)
        rec = {"index": idx, "u": list(map(float, u)),
               "lambda_min": bw.min_eigenvalue(),
               "basis": [list(p) for p in bw.pairs],
               "matrix": bw.mat.tolist()}
        if chart.n == 4:
            Bp, Bm = hodge_split(bw)
            rec["plus_block"] = Bp.tolist()
            rec["minus_block"] = Bm.tolist()
            rec["plus_lambda_min"] = float(np.linalg.eigvalsh(Bp)[0])
            rec["minus_lambda_min"] = float(np.linalg.eigvalsh(Bm)[0])
        records.append(rec)
    summary = {"points": len(records),
               "lambda_min": min(r["lambda_min"] for r in records)}
    _emit(reporting.make_report(_base_config(args, chart), records, summary), args)
    return 0


def _cmd_isotropic_min(args) -> int:
    chart = _resolve_chart(args)
    points = _sample_points(chart, args)
    records = []
    for idx, u in enumerate(points):
        R = gauss_curvature(sff_at(chart, u))
        val, frame = isotropic_min(R, samples=args.frames, seed=args.seed + idx,
                                   restarts=args.restarts,
                                   max_sweeps=args.max_sweeps)
        records.append({"index": idx, "u": list(map(float, u)),
                        "isotropic_min": val, "frame": frame.tolist()})
    summary = {"points": len(records),
               "isotropic_min": min(r["isotropic_min"] for r in records)}
    _emit(reporting.make_report(_base_config(args, chart, frames=args.frames),
                                records, summary), args)
    return 0


def _cmd_ls_min(args) -> int:
    chart = _resolve_chart(args)
    c = args.c if args.c is not None else chart.ambient.curvature
    points = _sample_points(chart, args)
    records = []
    for idx, u in enumerate(points):
        rep = ls_min(sff_at(chart, u), p=args.p, c=c, restarts=args.restarts,
                     seed=args.seed + idx, max_sweeps=args.max_sweeps,
                     tol=args.opt_tol)
        records.append({"index": idx, "u": list(map(float, u)),
                        "value": rep.value, "converged": rep.minimized,
                        "basis": rep.basis.tolist()})
    summary = {"points": len(records),
               "value_max": max(r["value"] for r in records)}
    _emit(reporting.make_report(_base_config(args, chart, p=args.p, c=c),
                                records, summary), args)
    return 0


def _cmd_adapt_frame(args) -> int:
    chart = _resolve_chart(args)
    points = _sample_points(chart, args)
    records = []
    for idx, u in enumerate(points):
        sff = sff_at(chart, u)
        try:
            af = adapted_frame(sff, restarts=args.restarts, seed=args.seed + idx,
                               max_sweeps=args.max_sweeps)
            rec = {"index": idx, "u": list(map(float, u)), "found": True,
                   "residuals": af.residuals, "partition_value": af.ls_value,
                   "frame": af.frame.tolist(),
                   "kernel_cases": list(af.kernel_cases)}
            if af.rho is not None:
                rec["rho"] = af.rho
            if af.notes:
                rec["notes"] = list(af.notes)
        except ValueError as exc:
            rec = {"index": idx, "u": list(map(float, u)), "found": False,
                   "error": str(exc)}
        records.append(rec)
    found = sum(1 for r in records if r["found"])
    summary = {"points": len(records), "found": found}
    _emit(reporting.make_report(_base_config(args, chart), records, summary), args)
    return 0


def _cmd_dupin(args) -> int:
    chart = _resolve_chart(args)
    points = _sample_points(chart, args)
    records = []
    for idx, u in enumerate(points):
        try:
            res = dupin_decomposition(sff_at(chart, u))
            rec = {"index": idx, "u": list(map(float, u)), "kind": res.kind,
                   "eta1": res.eta1.tolist()}
            if res.kind == "pair":
                rec["eta2"] = res.eta2.tolist()
                rec["inner"] = res.inner
        except ValueError as exc:
            rec = {"index": idx, "u": list(map(float, u)), "kind": "error",
                   "error": str(exc)}
        records.append(rec)
    kinds = {}
    for r in records:
        kinds[r["kind"]] = kinds.get(r["kind"], 0) + 1
    _emit(reporting.make_report(_base_config(args, chart), records,
                                {"points": len(records), "kinds": kinds}), args)
    return 0


def _cmd_ovaloid(args) -> int:
    chart = _resolve_chart(args)
    margin = catalog.ovaloid_margin(chart, k=args.k,
                                    random_points=args.samples,
                                    seed=args.seed)
    records = [{"k": args.k, "margin": margin,
                "pinching_holds": bool(margin >= 0.0)}]
    _emit(reporting.make_report(_base_config(args, chart, k=args.k), records,
                                {"margin": margin}), args)
    return 0


def _cmd_rotational(args) -> int:
    xs = np.linspace(args.x_lo, args.x_hi, args.count)
    records = []
    for idx, x in enumerate(xs):
        chk = catalog.rotational_strict_check(args.profile, float(x), args.n)
        records.append({"index": idx, "x": float(x), "strict": chk.strict,
                        "curvature_form_margin": chk.curvature_form_margin,
                        "profile_form_margin": chk.profile_form_margin,
                        "lambda": chk.lam, "mu": chk.mu})
    strict_all = all(r["strict"] for r in records)
    a_n, b_n = catalog.rotational_constants(args.n)
    cfg = {"command": args.command, "profile": args.profile, "n": args.n,
           "x_range": [args.x_lo, args.x_hi], "count": args.count}
    _emit(reporting.make_report(cfg, records,
                                {"strict_everywhere": strict_all,
                                 "a_n": a_n, "b_n": b_n}), args)
    return 0


def _cmd_product_with_curve(args) -> int:
    curve = catalog.build_model(catalog.ModelSpec.from_json(json.loads(args.curve)))
    inner = catalog.build_model(catalog.ModelSpec.from_json(json.loads(args.inner)))
    chart, rep = catalog.product_with_curve(curve, inner, ell=args.ell,
                                            seed=args.seed)
    records = [{"n": rep.n, "ell": rep.ell,
                "max_kappa1_sq": rep.max_kappa1_sq,
                "kappa_bound": rep.kappa_bound, "min_gap": rep.min_gap,
                "feasible": rep.feasible}]
    summary = {"feasible": rep.feasible}
    if args.check_k is not None:
        rng = np.random.default_rng(args.seed)
        slacks = [pinch_check(invariants(sff_at(chart, u)), k=args.check_k,
                              c=0.0).slack
                  for u in chart.domain.sample(args.samples, rng)]
        summary["recheck_k"] = args.check_k
        summary["recheck_slack_max"] = max(slacks)
    cfg = {"command": args.command, "curve": json.loads(args.curve),
           "inner": json.loads(args.inner), "ell": args.ell,
           "samples": args.samples, "seed": args.seed}
    _emit(reporting.make_report(cfg, records, summary), args)
    return 0


def _cmd_catalog(args) -> int:
    records = []
    for mid in sorted(catalog.MODEL_INFO):
        info = catalog.MODEL_INFO[mid]
        records.append({"id": mid, "what": info["what"],
                        "params": info["params"]})
    _emit(reporting.make_report({"command": "catalog"}, records,
                                {"models": len(records)}), args)
    return 0


def _cmd_verify(args) -> int:
    try:
        results = verify.run_suite(args.suite, count=args.count, seed=args.seed)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    records = []
    for res in results:
        line = "PASS" if res.passed else "FAIL"
        print(f"{line} {res.name} ({res.seconds:.1f}s): {res.details}")
        records.append({"criterion": res.name, "passed": res.passed,
                        "details": res.details, "seconds": res.seconds})
    failed = [r for r in records if not r["passed"]]
    if args.fmt != "table" or args.output:
        cfg = {"command": "verify", "suite": args.suite}
        if args.count is not None:
            cfg["count"] = args.count
        if args.seed is not None:
            cfg["seed"] = args.seed
        _emit(reporting.make_report(cfg, records,
                                    {"passed": len(records) - len(failed),
                                     "failed": len(failed)}), args)
    return 1 if failed else 0


_DISPATCH = {
    "invariants": _cmd_invariants,
    "pinch": _cmd_pinch,
    "bw": _cmd_bw,
    "isotropic-min": _cmd_isotropic_min,
    "ls-min": _cmd_ls_min,
    "adapt-frame": _cmd_adapt_frame,
    "dupin": _cmd_dupin,
    "ovaloid": _cmd_ovaloid,
    "rotational": _cmd_rotational,
    "product-with-curve": _cmd_product_with_curve,
    "catalog": _cmd_catalog,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    _mark_explicit(args, argv)
    try:
        args = _apply_config(args)
        return _DISPATCH[args.command](args)
    except (ParseError, DomainError, JetFileError, RankError, ValueError,
            OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
