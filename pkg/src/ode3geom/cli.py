"""Command-line front end: classification, invariants, geometry and Chazy
reports as deterministic JSON."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import __version__
from .chazy import (ChazyTransformError, NotReducibleError, chazy_classify,
                    chazy_transform)
from .classify import InconclusiveError
from .contact import classify_contact, contact_branch
from .expr import (DEFAULT_CONFIG, DomainError, JetPoint, ParseError,
                   SignConsistencyError, SingularPointError, ZeroConfig,
                   normalize, parse)
from .geometry import (NonWunschmannError, RicciZeroError, WeylGateError,
                       conformal_metric, cotton_components, lorentz_check,
                       weyl_structure)
from .jet import Ode3, jet_invariants
from .point import classify_point, point_basic_invariants, point_trivial_check
from .transform import PointTransform, pullback_ode

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INCONCLUSIVE = 2
EXIT_INTERNAL = 3


def sym(e) -> dict:
    return {"value": str(normalize(e)), "provenance": "symbolic"}


def sampled(v) -> dict:
    return {"value": v, "provenance": "sampled"}


def quad(v) -> dict:
    return {"value": v, "provenance": "quadrature"}


def parse_box(text: str) -> dict:
    box = {}
    for part in text.split(","):
        name, lo, hi = part.split(":")
        box[name.strip()] = (float(lo), float(hi))
    for v in ("x", "y", "p", "q"):
        if v not in box:
            raise ValueError(f"box is missing variable {v}")
    return box


def load_config_file(path: str) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = val
    return out


def build_config(args, file_opts: dict) -> ZeroConfig:
    seed = int(file_opts.get("seed", args.seed))
    samples = int(file_opts.get("samples", args.samples))
    tol = float(file_opts.get("tol", args.tol))
    box_text = file_opts.get("box", args.box)
    box = parse_box(box_text) if box_text else dict(DEFAULT_CONFIG.box)
    return replace(DEFAULT_CONFIG, seed=seed, samples=samples, tol=tol,
                   box=box)


def _read_ode(text: str) -> Ode3:
    if text == "-":
        text = sys.stdin.read().strip()
    return Ode3.from_text(text)


def report_invariants(ode: Ode3, cfg: ZeroConfig) -> dict:
    inv = jet_invariants(ode, cfg)
    pb = point_basic_invariants(ode)
    out = {
        "K": sym(inv.K), "L": sym(inv.L), "M": sym(inv.M), "W": sym(inv.W),
        "W_status": inv.w_verdict.status,
        "Z": sym(inv.Z) if inv.Z is not None else None,
        "A1": sym(pb.A1), "B1": sym(pb.B1), "B2": sym(pb.B2),
        "B4": sym(pb.B4), "C1": sym(pb.C1),
    }
    return out


def report_classify(ode: Ode3, cfg: ZeroConfig, group: str,
                    args=None) -> dict:
    out = {}
    if group in ("contact", "both"):
        out["contact"] = classify_contact(ode, cfg).to_dict()
    if group in ("point", "both"):
        out["point"] = classify_point(ode, cfg).to_dict()
    if group == "fp":
        # fibre-preserving recognition runs through the Chazy machinery
        out["fibre_preserving"] = report_chazy(
            ode, cfg, args or argparse.Namespace(transform=False))
    return out


def report_geometry(ode: Ode3, cfg: ZeroConfig) -> dict:
    out = {"gates": {}}
    inv = jet_invariants(ode, cfg)
    out["gates"]["W"] = inv.w_verdict.status
    if not inv.w_verdict.is_zero:
        out["error"] = "NonWunschmann"
        return out
    g = conformal_metric(ode, cfg)
    coords = ("dx", "dy", "dp", "dq")
    out["metric"] = {f"{coords[i]}.{coords[j]}": sym(g.m[i][j])
                     for i in range(4) for j in range(i, 4)
                     if not g.m[i][j].rf.is_zero_poly()}
    dps = cotton_components(ode, cfg)
    out["cotton_zero"] = all(tf.is_zero_on(cfg) for tf in dps)
    try:
        wd = weyl_structure(ode, cfg)
        out["weyl"] = {
            "phi": {c: sym(comp) for c, comp in
                    zip(coords, wd.phi.components())
                    if not comp.rf.is_zero_poly()},
            "B1": sym(wd.B1), "B2": sym(wd.B2),
            "B3": sym(wd.B3), "B4": sym(wd.B4), "R": sym(wd.R),
        }
    except WeylGateError as exc:
        out["gates"]["cartan"] = "nonzero"
        out["weyl"] = None
        out["weyl_error"] = str(exc)
    try:
        lr = lorentz_check(ode, cfg)
        out["lorentz"] = {"ok": lr.ok, "sign": lr.sign,
                          "reason": lr.reason}
    except RicciZeroError:
        out["lorentz"] = {"ok": False, "sign": 0, "reason": "RicciZero"}
    return out


def report_chazy(ode: Ode3, cfg: ZeroConfig, args) -> dict:
    rep = chazy_classify(ode, cfg)
    out = {
        "preconditions": rep.preconditions,
        "P": sym(rep.P) if rep.P is not None else None,
        "Q": sym(rep.Q) if rep.Q is not None else None,
        "tau": ({"value": str(rep.tau), "provenance": "symbolic"}
                if rep.tau is not None else None),
        "matched": None,
        "cond40": rep.cond40,
        "syzygies": rep.syzygy_status,
        "reason": rep.reason,
    }
    if rep.matched:
        m = rep.matched
        out["matched"] = {
            "class": m.id, "sigma": m.sigma,
            "kappa": str(m.kappa), "lambda": str(m.lam),
            "mu": str(m.mu), "nu": str(m.nu), "tau": str(m.tau),
        }
    if rep.matched and getattr(args, "transform", False):
        base = JetPoint(*(float(s) for s in args.base.split(",")))
        maps = chazy_transform(ode, base, args.c1, args.c2,
                               matched=rep.matched, config=cfg)
        xs = [base.x + 0.05 * i for i in range(-4, 5)]
        out["transform"] = {
            "base": [base.x, base.y, base.p, base.q],
            "c1": args.c1, "c2": args.c2,
            "x_integrand": sym(maps.x_integrand),
            "y_integrand": sym(maps.y_integrand),
            "xbar_integrand": sym(maps.xbar_integrand),
            "xbar_samples": {f"{x:.3f}": quad(maps.xbar(x)) for x in xs},
            "ybar_at_base_line": {f"{x:.3f}": quad(maps.ybar(x, base.y))
                                  for x in xs},
        }
    return out


def run_report(text: str, cfg: ZeroConfig, group: str = "both",
               args=None) -> tuple:
    """Full pipeline report; returns (report dict, exit code)."""
    report = {"input": text, "tool_version": __version__,
              "config": {"seed": cfg.seed, "samples": cfg.samples,
                         "tol": cfg.tol,
                         "box": {k: list(v) for k, v in cfg.box.items()}},
              "diagnostics": {}}
    code = EXIT_OK
    try:
        ode = _read_ode(text)
    except ParseError as exc:
        report["error"] = f"parse error: {exc}"
        return report, EXIT_PARSE

    soft = (InconclusiveError, SignConsistencyError, SingularPointError,
            DomainError, ArithmeticError)

    def section(name, thunk):
        nonlocal code
        try:
            report[name] = thunk()
        except soft as exc:
            report[name] = None
            report["diagnostics"][name] = f"{type(exc).__name__}: {exc}"
            code = EXIT_INCONCLUSIVE

    def branch_section():
        br = contact_branch(ode, cfg)
        return {"contact": br.branch, "W": br.w_verdict.status,
                "F_qqqq": br.fqqqq_verdict.status}

    section("branch", branch_section)
    section("invariants", lambda: report_invariants(ode, cfg))
    if group in ("contact", "both", "fp"):
        section("contact", lambda: classify_contact(ode, cfg).to_dict())
    if group in ("point", "both", "fp"):
        section("point", lambda: classify_point(ode, cfg).to_dict())
    section("point_trivial", lambda: point_trivial_check(ode, cfg))
    if report.get("branch") and report["branch"]["W"] == "zero":
        section("geometry", lambda: report_geometry(ode, cfg))
    section("chazy", lambda: report_chazy(
        ode, cfg, args or argparse.Namespace(transform=False)))
    for name in ("contact", "point"):
        sec = report.get(name)
        if sec and sec.get("inconclusive"):
            code = EXIT_INCONCLUSIVE
    return report, code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ode3geom",
        description="Classify third-order ODEs y''' = F(x, y, y', y'') "
                    "up to contact/point/fibre-preserving equivalence.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--ode", "-o", help="right-hand side F, or - for stdin")
        sp.add_argument("--batch", help="file with one ODE per line")
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--samples", type=int, default=16)
        sp.add_argument("--tol", type=float, default=1e-9)
        sp.add_argument("--box", default=None,
                        help='sample box, e.g. "x:-1:1,y:-1:1,p:0.5:2,q:0.5:2"')
        sp.add_argument("--config", help="key=value config file")
        sp.add_argument("--json", action="store_true",
                        help="JSON output (always on for batch)")
        sp.add_argument("--group", choices=("contact", "point", "both", "fp"),
                        default="both")

    p_inv = sub.add_parser("invariants", help="K, L, M, W, Z and the basic "
                                              "point invariants")
    common(p_inv)
    p_cls = sub.add_parser("classify", help="table classification")
    common(p_cls)
    p_geo = sub.add_parser("geometry", help="conformal/Einstein-Weyl data")
    common(p_geo)
    p_chz = sub.add_parser("chazy", help="reduced Chazy recognition")
    common(p_chz)
    p_chz.add_argument("--transform", action="store_true")
    p_chz.add_argument("--base", default="0,1,0,0",
                       help="base jet point x,y,p,q")
    p_chz.add_argument("--c1", type=float, default=1.0)
    p_chz.add_argument("--c2", type=float, default=0.0)
    p_pb = sub.add_parser("pullback", help="pull an ODE back along a point "
                                           "transformation")
    common(p_pb)
    p_pb.add_argument("--chi", required=True)
    p_pb.add_argument("--phi", required=True)
    p_rep = sub.add_parser("report", help="full pipeline report")
    common(p_rep)

    args = parser.parse_args(argv)
    try:
        file_opts = load_config_file(args.config) if args.config else {}
        cfg = build_config(args, file_opts)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    if args.batch:
        return _run_batch(args, cfg)
    if not args.ode:
        print("an --ode is required (or --batch)", file=sys.stderr)
        return EXIT_PARSE
    try:
        return _run_single(args, cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NotReducibleError, NonWunschmannError, WeylGateError,
            RicciZeroError, ChazyTransformError, SingularPointError,
            DomainError, SignConsistencyError, InconclusiveError) as exc:
        print(json.dumps({"error": str(exc),
                          "kind": type(exc).__name__}, sort_keys=True))
        return EXIT_INCONCLUSIVE
    except Exception as exc:  # internal
        print(f"internal error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_INTERNAL


def _emit(payload: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload, sort_keys=True))
        return
    print(json.dumps(payload, sort_keys=True, indent=2))


def _run_single(args, cfg: ZeroConfig) -> int:
    group = "both" if args.group in ("both", "fp") else args.group
    if args.command == "invariants":
        ode = _read_ode(args.ode)
        _emit(report_invariants(ode, cfg), args.json)
        return EXIT_OK
    if args.command == "classify":
        ode = _read_ode(args.ode)
        payload = report_classify(ode, cfg,
                                  args.group if args.group == "fp"
                                  else group, args)
        _emit(payload, args.json)
        inconclusive = any(sec.get("inconclusive")
                           for sec in payload.values()
                           if isinstance(sec, dict))
        return EXIT_INCONCLUSIVE if inconclusive else EXIT_OK
    if args.command == "geometry":
        ode = _read_ode(args.ode)
        try:
            payload = report_geometry(ode, cfg)
        except NonWunschmannError as exc:
            _emit({"error": str(exc), "kind": "NonWunschmann"}, args.json)
            return EXIT_INCONCLUSIVE
        _emit(payload, args.json)
        return EXIT_INCONCLUSIVE if payload.get("error") else EXIT_OK
    if args.command == "chazy":
        ode = _read_ode(args.ode)
        _emit(report_chazy(ode, cfg, args), args.json)
        return EXIT_OK
    if args.command == "pullback":
        ode = _read_ode(args.ode)
        t = PointTransform(parse(args.chi), parse(args.phi))
        out = pullback_ode(ode, t, cfg)
        if args.json:
            _emit({"F": sym(out.F)}, True)
        else:
            print(normalize(out.F))
        return EXIT_OK
    # report
    rep, code = run_report(args.ode, cfg, group, args)
    _emit(rep, args.json)
    return code


def _run_batch(args, cfg: ZeroConfig) -> int:
    worst = EXIT_OK
    group = "both" if args.group in ("both", "fp") else args.group
    with open(args.batch, "r", encoding="utf-8") as fh:
        for line in fh:
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            rep, code = run_report(text, cfg, group, args)
            print(json.dumps(rep, sort_keys=True))
            worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
