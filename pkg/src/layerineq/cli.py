"""Command-line front end: ``layer-ineq <command> --config run.json``.

Exit codes: 0 all checks pass, 2 some check failed, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .config import ConfigError, domain_from_config, expand_fields, load
from .domain import geometry_report
from .fields import field_from_spec
from .quadrature import integrate_surface, integrate_volume
from .sharpness import blend_basis_spec, radial_polynomial_spec, sharpness_sweep
from .verify import integral_bundle, make_grids, verify_identity, verify_inequalities

SCHEMA_VERSION = 1
COMMANDS = ("geometry", "verify", "identity", "sharpness", "convergence")
DESCRIPTORS = ("R1", "R2", "R3", "deltaR", "xi1", "xi2", "R_curv")
BUNDLE_KEYS = ("vol_P2", "vol_grad2", "vol_divrot2", "surf_gamma_P2", "surf_Gamma_P2")


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _scaled(res, k):
    return [int(n) * 2**k for n in res]


# ---------------------------------------------------------------------------
# workflows: each returns (result, passed, summary lines, csv rows)


def run_geometry(cfg, domain):
    rep = geometry_report(domain, cfg["resolution"]["extrema"])
    lines = [f"{k:>24s} = {v}" for k, v in rep.to_dict().items()]
    if not rep.admissible:
        lines.append("domain is NOT admissible: (rot/div) lower bound constant C2 <= 0")
    if not rep.convex_outer:
        lines.append("outer surface fails the convexity check")
    rows = [["quantity", "value"]] + [[k, v] for k, v in rep.to_dict().items()]
    return rep.to_dict(), bool(rep.admissible and rep.convex_outer), lines, rows


def run_verify(cfg, domain):
    res, th = cfg["resolution"], cfg["thresholds"]
    rep = geometry_report(domain, res["extrema"])
    if not rep.admissible:
        print("warning: domain not admissible; div_curl records suppressed", file=sys.stderr)
    grids = make_grids(domain, res["volume"], res["surface"])
    reports, lines = [], []
    rows = [["field", "record", "lhs", "rhs", "ratio", "applicable", "passed"]]
    for spec in expand_fields(cfg, "verify"):
        f = field_from_spec(spec, domain)
        vr = verify_inequalities(f, domain, rep, grids, rtol=th["rtol"], bc_tol=th["bc_residual"])
        reports.append({"spec": spec, **vr.to_dict()})
        ratios = ", ".join(
            f"{r['name']} {r['ratio']:.4g}" if r["applicable"] else f"{r['name']} n/a" for r in vr.records
        )
        lines.append(f"{'PASS' if vr.passed else 'FAIL'}  {vr.field}: {ratios}")
        for r in vr.records:
            rows.append([vr.field, r["name"], r["lhs"], r["rhs"], r["ratio"], r["applicable"], r["passed"]])
    passed = all(r["passed"] for r in reports)
    n_app = sum(r["applicable"] for rep_ in reports for r in rep_["records"])
    lines.append(f"{n_app} applicable records over {len(reports)} fields")
    return {"geometry": rep.to_dict(), "fields": reports}, passed, lines, rows


def run_identity(cfg, domain):
    res, th = cfg["resolution"], cfg["thresholds"]
    coarse = make_grids(domain, res["volume"], res["surface"])
    fine = make_grids(domain, _scaled(res["volume"], 1), _scaled(res["surface"], 1))
    table, lines = [], []
    rows = [["field", "residual", "residual_doubled", "passed"]]
    for spec in expand_fields(cfg, "identity"):
        # plain central differences would cap the residual near 1e-10
        f = field_from_spec(spec, domain).with_richardson()
        r0, r1 = verify_identity(f, coarse), verify_identity(f, fine)
        ok = r0 < th["identity_residual"] and (
            r1 <= r0 / th["identity_drop"] or max(r0, r1) < th["residual_floor"]
        )
        table.append(
            {
                "spec": spec,
                "field": f.name,
                "jacobian": f.provenance,
                "residual": r0,
                "residual_doubled": r1,
                "passed": bool(ok),
            }
        )
        lines.append(f"{'PASS' if ok else 'FAIL'}  {f.name}: {r0:.3e} -> {r1:.3e}")
        rows.append([f.name, r0, r1, bool(ok)])
    result = {
        "resolutions": [coarse.resolutions, fine.resolutions],
        "fields": table,
    }
    return result, all(t["passed"] for t in table), lines, rows


def run_sharpness(cfg, domain):
    res, th, sh = cfg["resolution"], cfg["thresholds"], cfg["sharpness"]
    rep = geometry_report(domain, res["extrema"])
    grid = make_grids(domain, res["volume"], res["surface"]).volume
    if sh["basis"] == "radial":
        specs = [radial_polynomial_spec(domain, n) for n in range(1, sh["n_max"] + 1)]
    else:
        specs = [blend_basis_spec(n) for n in range(1, sh["n_max"] + 1)]
    sweep = sharpness_sweep(domain, rep, specs, grid, eps=th["sharpness_eps"], threshold=th["deflation"])
    lines = [f"{'n':>3s} {'quotient_max':>14s} {'quotient_min':>14s}   (C1={rep.C1:.6g}, C2={rep.C2:.6g})"]
    rows = [["n", "quotient_max", "quotient_min", "C1", "C2", "passed"]]
    for r in sweep.rows:
        lines.append(f"{r.n:3d} {r.quotient_max:14.8g} {r.quotient_min:14.8g}   {'ok' if r.passed else 'VIOLATION'}")
        rows.append([r.n, r.quotient_max, r.quotient_min, rep.C1, rep.C2, r.passed])
    if not rep.admissible:
        lines.append("domain not admissible: C2 comparison suppressed")
    lines.append(f"nested={sweep.nested} monotone_max={sweep.monotone_max} monotone_min={sweep.monotone_min}")
    result = {"geometry": rep.to_dict(), "basis": sh["basis"], "sweep": sweep.to_dict()}
    return result, sweep.passed, lines, rows


def run_convergence(cfg, domain):
    res, th, cv = cfg["resolution"], cfg["thresholds"], cfg["convergence"]
    levels = cv["levels"]
    fields = [field_from_spec(s, domain) for s in expand_fields(cfg, "verify")[: cv["max_fields"]]]
    series: dict[str, list[float]] = {}
    kinds: dict[str, str] = {}
    for k in range(levels):
        grids = make_grids(domain, _scaled(res["volume"], k), _scaled(res["surface"], k))
        values = {
            "volume": integrate_volume(grids.volume, np.ones(grids.volume.size)),
            "area_outer": integrate_surface(grids.outer, np.ones(grids.outer.weights.size)),
            "area_inner": integrate_surface(grids.inner, np.ones(grids.inner.weights.size)),
        }
        for f in fields:
            b = integral_bundle(f, grids).to_dict()
            values.update({f"{f.name}:{key}": b[key] for key in BUNDLE_KEYS})
        for key, v in values.items():
            series.setdefault(key, []).append(v)
            kinds[key] = "integral"
        geo = geometry_report(domain, _scaled(res["extrema"], k)).to_dict()
        for key in DESCRIPTORS:
            series.setdefault(key, []).append(geo[key])
            kinds[key] = "descriptor"

    # field quantities are judged against the largest entry of the same field's bundle
    group_scale: dict[str, float] = {}
    for key, vals in series.items():
        group = key.rsplit(":", 1)[0]
        group_scale[group] = max(group_scale.get(group, 0.0), abs(vals[-1]))

    table, lines = [], []
    rows = [["quantity"] + [f"level{k}" for k in range(levels)] + ["passed"]]
    for key, vals in series.items():
        changes = [abs(b - a) for a, b in zip(vals, vals[1:])]
        ratios = [c1 / c0 if c0 > 0 else 0.0 for c0, c1 in zip(changes, changes[1:])]
        if kinds[key] == "descriptor":
            ok = all(c < th["descriptor_change"] for c in changes)
        else:
            floor = th["convergence_floor"] * group_scale[key.rsplit(":", 1)[0]]
            ok = changes[-1] <= max(changes[0], floor)
        table.append({"quantity": key, "values": vals, "changes": changes, "change_ratios": ratios, "passed": bool(ok)})
        lines.append(
            f"{'PASS' if ok else 'FAIL'}  {key}: {vals[-1]:.15g}  changes "
            + " ".join(f"{c:.2e}" for c in changes)
        )
        rows.append([key] + list(vals) + [bool(ok)])
    return {"levels": levels, "quantities": table}, all(t["passed"] for t in table), lines, rows


WORKFLOWS = {
    "geometry": run_geometry,
    "verify": run_verify,
    "identity": run_identity,
    "sharpness": run_sharpness,
    "convergence": run_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="layer-ineq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=f"run the {name} workflow")
        cmd.add_argument("--config", type=Path, required=True, help="JSON run configuration")
        cmd.add_argument("--out", type=Path, default=None, help="machine-readable JSON report")
        cmd.add_argument("--csv", type=Path, default=None, help="CSV table of the main results")
        cmd.add_argument("--seed", type=int, default=None, help="base seed for random field suites")
    return parser


def make_report(command: str, cfg: dict, result, passed: bool) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "command": command,
        "config": cfg,
        "passed": bool(passed),
        "result": result,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config, seed=args.seed)
        domain = domain_from_config(cfg)
        result, passed, lines, rows = WORKFLOWS[args.command](cfg, domain)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    report = make_report(args.command, cfg, result, passed)
    if args.out is not None:
        args.out.write_text(dumps_report(report))
    if args.csv is not None:
        with args.csv.open("w", newline="") as fh:
            csv.writer(fh).writerows(_jsonable(rows))
    print(f"layer-ineq {args.command}: {'PASS' if passed else 'CHECKS FAILED'}")
    for line in lines:
        print("  " + line)
    return 0 if passed else 2


if __name__ == "__main__":
    sys.exit(main())
