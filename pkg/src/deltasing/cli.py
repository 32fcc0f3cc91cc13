"""Command-line front end: ``deltasing {verify,orbit,paths,classify,search,curve}``.

Exit codes: 0 all checks passed, 1 usage error, 2 a check failed,
3 the excluded parameter case (q3/q4 certificates unavailable).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import catalog_to_csv, catalog_to_json, closed_form_point, excluded_case, full_catalog, rank_deficiency_search
from .classification import classify
from .curve import emit_plot_samples, format_plot_data
from .errors import CertificateUnavailable, DeltaSingError, ParameterError
from .linalg import ToleranceConfig
from .mechanism import ORIGINAL, ParameterSet, PlatformPose, build_crank_slider, build_delta, from_tilde, lift_pose
from .symmetry import GroupElement, act
from .witness import DEFAULT_HALF_WIDTH, certify, path_samples, path_samples_csv, witness_paths

SCHEMA = 1
EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_EXCLUDED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- output

def _fmt_float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        return "null"
    return format(v, ".15g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats printed as ``%.15g`` so reports are byte-stable."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _write(text: str, out: str):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _report(command, args, params=None):
    rep = {"schema": SCHEMA, "tool": "deltasing", "version": __version__, "command": command}
    if params is not None:
        rep["parameters"] = params.as_dict()
    rep["tolerances"] = _tol(args).as_dict()
    return rep


def _tol(args) -> ToleranceConfig:
    return ToleranceConfig(rank_rel_tol=args.tol_rank, residual_tol=args.tol_residual, fd_step=args.fd_step)


def _params(args) -> ParameterSet:
    try:
        return ParameterSet(args.a, args.b, args.d)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- commands

def cmd_verify(args) -> int:
    params = _params(args)
    tol = _tol(args)
    t_start = time.perf_counter()
    records = full_catalog(params, tol)
    m = build_delta(params)
    checks = []
    failed = unavailable = 0
    for rec in records:
        entry = {"point": rec.name, "rank": rec.rank, "residual": rec.residual_max,
                 "sigma_ratio": float(rec.singular_values[-1] / rec.singular_values[0])}
        try:
            cert = certify(m, rec.config, tol, samples=args.samples, label=rec.name)
            rec.certificate_status = "certified"
            entry.update(certificate="certified", span_rank=cert.span_rank,
                         tangent_sigma_ratio=cert.sigma_ratio, path_residual=cert.max_residual)
        except CertificateUnavailable as exc:
            rec.certificate_status = "unavailable"
            entry.update(certificate="certificate unavailable", note=str(exc))
            unavailable += 1
        except DeltaSingError as exc:
            rec.certificate_status = "failed"
            entry.update(certificate="failed", note=f"{type(exc).__name__}: {exc}")
            failed += 1
        checks.append(entry)
    rep = _report("verify", args, params)
    rep["excluded_case"] = excluded_case(params)
    rep["checks"] = checks
    rep["summary"] = {"points": len(records), "certified": len(records) - failed - unavailable,
                      "unavailable": unavailable, "failed": failed}
    rep["verdict"] = "fail" if failed else ("excluded" if unavailable else "pass")
    if args.timings:
        rep["timings"] = {"total_s": time.perf_counter() - t_start}
    _write(dumps(rep) + "\n", args.out)
    print(f"verify: {rep['summary']['certified']}/{len(records)} certified, verdict {rep['verdict']}", file=sys.stderr)
    if failed:
        return EXIT_FAIL
    return EXIT_EXCLUDED if unavailable else EXIT_OK


def cmd_orbit(args) -> int:
    params = _params(args)
    records = full_catalog(params, _tol(args))
    if args.format == "csv":
        _write(catalog_to_csv(records), args.out)
    else:
        rep = _report("orbit", args, params)
        rep["points"] = catalog_to_json(records)
        _write(dumps(rep) + "\n", args.out)
    return EXIT_OK


def _parse_point(text: str, params: ParameterSet) -> tuple:
    label, _, elem = text.partition(":")
    try:
        g = GroupElement.parse(elem) if elem else GroupElement()
        x = act(g, closed_form_point(label, params))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return f"{label}:{g}", x


def cmd_paths(args) -> int:
    params = _params(args)
    tol = _tol(args)
    name, x = _parse_point(args.point, params)
    m = build_delta(params)
    try:
        cert = certify(m, x, tol, samples=args.samples, half_width=args.half_width, label=name)
    except CertificateUnavailable as exc:
        print(f"paths: {exc}", file=sys.stderr)
        return EXIT_EXCLUDED
    system = build_delta(params, "tilde").constraints
    paths = witness_paths(x, params, tol, half_width=args.half_width)
    rep = _report("paths", args, params)
    rep["certificate"] = cert.as_dict()
    if args.out in (None, "-"):
        _write(dumps(rep) + "\n", "-")
    else:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for path, hw in zip(paths, cert.half_widths):
            path.half_width = hw
            (outdir / f"{path.label}.csv").write_text(path_samples_csv(path_samples(path, system, args.samples)))
        (outdir / "certificate.json").write_text(dumps(rep) + "\n")
    return EXIT_OK if cert.valid else EXIT_FAIL


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"cannot parse numbers: {exc}") from None


def cmd_classify(args) -> int:
    tol = _tol(args)
    if args.mechanism == "crank-slider":
        try:
            m = build_crank_slider(args.l1, args.l2)
        except ParameterError as exc:
            raise UsageError(str(exc)) from None
        params_dict = {"l1": args.l1, "l2": args.l2}
        n = 3
    else:
        params = _params(args)
        m = build_delta(params, ORIGINAL)
        params_dict = params.as_dict()
        n = 15
    if (args.config is None) == (args.pose is None):
        raise UsageError("give exactly one of --config or --pose")
    if args.config is not None:
        x = np.array(_floats(args.config))
        if x.size != n:
            raise UsageError(f"configuration needs {n} numbers, got {x.size}")
    else:
        if args.mechanism != "delta":
            raise UsageError("--pose is only available for the Delta")
        vals = _floats(args.pose)
        if len(vals) != 6:
            raise UsageError(f"pose needs 6 numbers (px py pz psi1 psi2 psi3), got {len(vals)}")
        x = from_tilde(lift_pose(params, PlatformPose(np.array(vals[:3]), tuple(vals[3:]))))
    cls = classify(m, x, tol)
    rep = _report("classify", args)
    rep["mechanism"] = args.mechanism
    rep["parameters"] = params_dict
    rep["config"] = [float(v) for v in x]
    rep["classification"] = cls.as_dict()
    _write(dumps(rep) + "\n", args.out)
    return EXIT_OK


def cmd_search(args) -> int:
    params = _params(args)
    tol = _tol(args)
    m = build_delta(params)
    t_start = time.perf_counter()
    cands = rank_deficiency_search(m, args.seeds, args.budget, tol, rng_seed=args.seed)
    unmatched = [c for c in cands if c.match is None]
    rep = _report("search", args, params)
    rep["seed"] = args.seed
    rep["seeds"] = args.seeds
    rep["budget"] = args.budget
    rep["candidates"] = [c.as_dict() for c in cands]
    rep["summary"] = {"converged": len(cands), "matched": len(cands) - len(unmatched),
                      "distinct_matches": len({c.match for c in cands if c.match})}
    rep["verdict"] = "fail" if unmatched else "pass"
    if args.timings:
        rep["timings"] = {"total_s": time.perf_counter() - t_start}
    _write(dumps(rep) + "\n", args.out)
    return EXIT_FAIL if unmatched else EXIT_OK


def cmd_curve(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be positive")
    if not args.xmin < args.xmax:
        raise UsageError("--xmin must be below --xmax")
    samples = emit_plot_samples((args.xmin, args.xmax), args.count, args.coefficient)
    _write(format_plot_data(samples), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_params(p, required=True):
    p.add_argument("--a", type=float, required=required, help="upper arm length")
    p.add_argument("--b", type=float, required=required, help="lower arm length")
    p.add_argument("--d", type=float, required=required, help="base minus platform radius")


def _add_common(p):
    p.add_argument("--tol-rank", type=float, default=1e-8, help="relative singular value threshold")
    p.add_argument("--tol-residual", type=float, default=1e-9, help="residual bound relative to b^2")
    p.add_argument("--fd-step", type=float, default=1e-5, help="finite-difference step for tangents")
    p.add_argument("--out", default="-", help="output file (directory for paths); '-' is stdout")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deltasing", description="Singularity analysis of the Delta manipulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="catalog the 24 singular points and certify each")
    _add_params(p)
    _add_common(p)
    p.add_argument("--samples", type=int, default=41)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("orbit", help="write the 24-point catalog")
    _add_params(p)
    _add_common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("paths", help="witness path samples and certificate for one point")
    _add_params(p)
    _add_common(p)
    p.add_argument("--point", required=True, help="catalog point, e.g. q4 or q3:rs")
    p.add_argument("--samples", type=int, default=41)
    p.add_argument("--half-width", type=float, default=DEFAULT_HALF_WIDTH)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("classify", help="classify one configuration")
    p.add_argument("--mechanism", choices=("delta", "crank-slider"), default="delta")
    _add_params(p, required=False)
    p.add_argument("--l1", type=float, default=1.0)
    p.add_argument("--l2", type=float, default=2.0)
    _add_common(p)
    p.add_argument("--config", help="configuration as comma/space separated numbers")
    p.add_argument("--pose", help="platform point and arm angles: px py pz psi1 psi2 psi3")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("search", help="rank-deficiency search from random seeds")
    _add_params(p)
    _add_common(p)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--budget", type=int, default=60, help="descent iterations per seed")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("curve", help="plot data for y^3 + c x^2 y - x^4 = 0")
    p.add_argument("--count", type=int, default=400)
    p.add_argument("--xmin", type=float, default=-1.0)
    p.add_argument("--xmax", type=float, default=1.0)
    p.add_argument("--coefficient", type=int, choices=(1, 2), default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "classify" and args.mechanism == "delta" and None in (args.a, args.b, args.d):
        parser.error("classify --mechanism delta needs --a, --b and --d")
    try:
        if hasattr(args, "tol_rank"):
            _tol(args)
        return args.func(args)
    except UsageError as exc:
        print(f"deltasing: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DeltaSingError as exc:
        if isinstance(exc, ValueError):
            print(f"deltasing: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"deltasing: check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
