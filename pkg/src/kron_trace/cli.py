"""Command-line front end.

Exit codes: 0 success, 1 a failed check, 2 usage or data errors.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, acceptance
from .besov import ScaleFunction, ThetaField, comparability_report, ls_report
from .errors import KronTraceError
from .estimates import (
    cap_density_report,
    cap_doubling_report,
    exit_time_report,
    green_hm_report,
    hk_report,
    hm_doubling_report,
    jump_kernel_report,
    killing_report,
)
from .generators import (
    GENERATORS,
    GeneratedDomain,
    gen_grid_slit,
    gen_half_strip,
    gen_path,
    gen_sg_slit,
    gen_star,
)
from .io import (
    cover_to_dict,
    geometry_from_dict,
    geometry_to_dict,
    network_from_dict,
    network_to_dict,
    read_json,
    report_to_csv,
    report_to_dict,
    trace_to_dict,
    write_atomic,
    write_json,
)
from .potential import SolverConfig, harmonic_measure
from .report import Report
from .trace import schur_trace
from .whitney import build_cover, cover_stats, extension_report, partition_of_unity

REPORT_KINDS = ("besov", "whitney", "doubling", "capdensity", "jump", "killing", "exit",
                "heatkernel", "green-hm")
DEFAULT_PSI = {"sg-slit": float(acceptance.GASKET_WALK_DIMENSION), "star": 1.0, "path": 2.0,
               "half-strip": 2.0, "grid-slit": 2.0}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# domains


def _domain_from_args(args) -> GeneratedDomain:
    kind = args.domain
    if kind == "sg-slit":
        return gen_sg_slit(_need(args.level, "--level"))
    if kind == "half-strip":
        W = _need(args.width, "--width")
        return gen_half_strip(W, args.height if args.height is not None else W, args.far)
    if kind == "grid-slit":
        W = _need(args.width, "--width")
        return gen_grid_slit(W, args.slit if args.slit is not None else W // 4)
    if kind == "path":
        return gen_path(args.edges)
    if kind == "star":
        c = args.conductances or [1.0, 1.0, 1.0]
        return gen_star(c)
    raise UsageError(f"unknown domain {kind!r}")


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required for this domain")
    return value


def _domain_doc(d: GeneratedDomain) -> dict:
    return {
        "network": network_to_dict(d.net),
        "geometry": geometry_to_dict(d.net, d.geom, d.sigma),
        "domain": {"label": d.label, "params": d.params,
                   "pole": None if d.pole is None else d.net.ids[d.pole]},
    }


def _load_network(path):
    """Load a combined domain document or a bare network document as
    ``(net, geom, sigma, pole)``, with None for absent parts."""
    doc = read_json(path)
    if isinstance(doc, dict) and "network" in doc:
        net = network_from_dict(doc["network"])
        geom, sigma = (geometry_from_dict(net, doc["geometry"]) if "geometry" in doc
                       else (None, None))
        pole = (doc.get("domain") or {}).get("pole")
        return net, geom, sigma, None if pole is None else net.idx(pole)
    return network_from_dict(doc), None, None, None


def _measure(net, kind, sigma, pole, geom=None):
    if kind == "uniform":
        nb = len(net.boundary_idx)
        return np.asarray(sigma, dtype=float) if sigma is not None else np.ones(nb)
    if pole is None:
        if geom is None:
            from .geometry import build_geometry
            geom = build_geometry(net)
        iidx = net.interior_idx
        pole = int(iidx[np.argmax(geom.d_D[iidx])])
    return harmonic_measure(net, pole)


def _psi(args, d: GeneratedDomain) -> ScaleFunction:
    beta = args.psi_exponent if args.psi_exponent is not None else DEFAULT_PSI.get(d.label, 2.0)
    return ScaleFunction(beta)


# ---------------------------------------------------------------------------
# reports


def build_report(kind: str, d: GeneratedDomain, args, config: SolverConfig) -> Report:
    net, geom = d.net, d.geom
    psi = _psi(args, d)
    omega = _measure(net, args.measure, d.sigma, d.pole, geom)
    field_ = ThetaField(psi, omega, net.m0, geom)
    rng = np.random.default_rng(args.seed)
    nb = len(net.boundary_idx)
    if kind == "doubling":
        if args.which == "cap":
            return cap_doubling_report(net, geom, config)
        return hm_doubling_report(net, geom, [d.pole], config)
    if kind == "capdensity":
        return cap_density_report(net, geom, psi, config)
    if kind == "green-hm":
        return green_hm_report(net, geom, psi, d.pole, config)
    if kind == "whitney":
        cover = build_cover(geom, args.eps)
        pou = partition_of_unity(net, cover, psi)
        U = rng.standard_normal((nb, args.samples))
        rep = extension_report(net, cover, pou, omega, field_, U)
        rep.extra["cover"] = cover_stats(cover).extra
        return rep
    tf = schur_trace(net, omega, config)
    if kind == "besov":
        U = rng.standard_normal((nb, args.samples))
        rep = comparability_report(tf, U, field_, transient=net.has_ghost,
                                   max_ratio=args.max_ratio)
        try:
            rep.extra["theta_fit"] = ls_report(field_, min_radius=2 * float(
                np.min(field_.radius_grid))).fit
        except KronTraceError:
            pass
        return rep
    if kind == "jump":
        lo = 2 * float(np.min(field_.radius_grid))
        return jump_kernel_report(tf, omega, field_, fit_window=(lo, geom.diam_boundary / 2))
    if kind == "killing":
        return killing_report(tf, omega)
    if kind == "exit":
        return exit_time_report(tf, omega, field_)
    if kind == "heatkernel":
        return hk_report(tf, omega, field_)
    raise UsageError(f"unknown report {kind!r}")


def _with_threshold(rep: Report, args) -> Report:
    if getattr(args, "max_ratio", None) is not None:
        rep.thresholds.setdefault("max_ratio", args.max_ratio)
    return rep


def _write_report(rep: Report, path: Path) -> list[str]:
    path = Path(path)
    csv_path = path.with_suffix(".csv")
    write_json(path, report_to_dict(rep))
    write_atomic(csv_path, report_to_csv(rep))
    return [str(path), str(csv_path)]


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args, config) -> int:
    d = _domain_from_args(args)
    write_json(args.output, _domain_doc(d))
    print(json.dumps({"domain": d.label, "vertices": d.net.n, "edges": d.net.n_edges,
                      "boundary": len(d.boundary), "output": str(args.output)}))
    return 0


def cmd_trace(args, config) -> int:
    net, geom, sigma, pole = _load_network(args.network)
    omega = _measure(net, args.measure, sigma, pole, geom)
    tf = schur_trace(net, omega, config)
    write_json(args.output, trace_to_dict(tf))
    rep = killing_report(tf, omega)
    print(json.dumps({"boundary": tf.n, "sum_kappa": tf.capacity, "ghost": net.has_ghost,
                      "pass": rep.passed, "output": str(args.output)}))
    return 0 if rep.passed else 1


def cmd_report(args, config) -> int:
    d = _domain_from_args(args)
    rep = _with_threshold(build_report(args.kind, d, args, config), args)
    out = args.output or f"{args.kind}.json"
    _write_report(rep, out)
    print(json.dumps(_jsonable(rep.summary())))
    return 0 if rep.passed else 1


def _parse_range(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}; use A..B or A,B,C") from exc


def _suite_domains(args):
    if args.domain == "sg-slit":
        for n in _parse_range(args.levels or "3..6"):
            args.level = n
            yield f"level{n}", _domain_from_args(args)
    elif args.domain in ("half-strip", "grid-slit"):
        for W in _parse_range(args.widths or "8,16,32"):
            args.width, args.height = W, None
            yield f"width{W}", _domain_from_args(args)
    else:
        yield args.domain, _domain_from_args(args)


def cmd_suite(args, config) -> int:
    outdir = Path(args.output or "suite-out")
    started = datetime.now(timezone.utc).isoformat()
    timings, artifacts, summaries, domains = {}, [], {}, {}
    for tag, d in _suite_domains(args):
        domains[tag] = {"label": d.label, "params": d.params, "vertices": d.net.n,
                        "boundary": len(d.boundary)}
        for kind in REPORT_KINDS:
            t0 = time.perf_counter()
            try:
                rep = build_report(kind, d, args, config)
            except KronTraceError as exc:
                summaries[f"{tag}/{kind}"] = {"skipped": f"{type(exc).__name__}: {exc}"}
                continue
            timings[f"{tag}/{kind}"] = time.perf_counter() - t0
            artifacts += _write_report(rep, outdir / tag / f"{kind}.json")
            summaries[f"{tag}/{kind}"] = _jsonable(rep.summary())
    criteria = []
    if not args.no_criteria:
        for check in acceptance.CRITERIA:
            c = acceptance.run(check)
            print(c.line(), flush=True)
            timings[f"criterion{c.number}"] = c.seconds
            criteria.append({"number": c.number, "title": c.title, "pass": c.passed,
                             "stats": _jsonable(c.stats)})
    all_pass = all(c["pass"] for c in criteria)
    manifest = {
        "command": ["kron-trace"] + list(args.argv),
        "seed": args.seed,
        "solver": {"method": config.method, "rtol": config.rtol, "maxiter": config.maxiter},
        "domains": domains,
        "reports": summaries,
        "criteria": criteria,
        "calibrations": {"stability": acceptance.STABILITY,
                         "stress_trend": acceptance.STRESS_TREND,
                         "jump_max_ratio": 50, "comparability_max_ratio": 100,
                         "exit_max_ratio": 50, "killing_max_ratio": 50},
        "pass": all_pass,
        "artifacts": artifacts,
        "timings": timings,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "environment": {"python": platform.python_version(), "numpy": np.__version__,
                        "kron_trace": __version__},
    }
    write_json(outdir / "manifest.json", manifest)
    print(json.dumps({"manifest": str(outdir / "manifest.json"), "pass": all_pass}))
    return 0 if all_pass else 1


def cmd_export(args, config) -> int:
    d = _domain_from_args(args)
    outdir = Path(args.output or "export")
    omega = _measure(d.net, args.measure, d.sigma, d.pole, d.geom)
    tf = schur_trace(d.net, omega, config)
    paths = [write_json(outdir / "domain.json", _domain_doc(d)),
             write_json(outdir / "trace.json", trace_to_dict(tf))]
    try:
        paths.append(write_json(outdir / "cover.json",
                                cover_to_dict(d.net, build_cover(d.geom, args.eps))))
    except KronTraceError as exc:
        print(f"cover skipped: {exc}", file=sys.stderr)
    print(json.dumps({"artifacts": [str(p) for p in paths]}))
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "__dataclass_fields__"):
        return _jsonable(vars(obj))
    return obj


# ---------------------------------------------------------------------------
# parser


def _add_domain_flags(p, positional=True):
    if positional:
        p.add_argument("domain", choices=sorted(GENERATORS))
    p.add_argument("--level", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--slit", type=int, help="slit length for grid-slit (default width/4)")
    p.add_argument("--far", choices=("reflecting", "absorbing"), default="reflecting",
                   help="far boundary of the half-strip")
    p.add_argument("--edges", type=int, default=8, help="edge count for path")
    p.add_argument("--conductances", type=float, nargs="+", help="leaf conductances for star")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-12, help="relative solver residual")
    p.add_argument("--solver", choices=("auto", "direct", "cg"), default="auto")
    p.add_argument("--measure", choices=("uniform", "harmonic"), default="uniform")
    p.add_argument("--psi-exponent", type=float)
    p.add_argument("--eps", type=float, default=0.125)
    p.add_argument("-o", "--output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kron-trace", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a domain (network + geometry JSON)")
    _add_domain_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("trace", help="boundary trace of a network JSON")
    p.add_argument("network")
    _add_common(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("report", help="run one estimate report")
    p.add_argument("kind", choices=REPORT_KINDS)
    _add_domain_flags(p)
    _add_common(p)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--which", choices=("hm", "cap"), default="hm",
                   help="harmonic-measure or capacity doubling")
    p.add_argument("--max-ratio", type=float)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("suite", help="all reports over a ladder plus the acceptance criteria")
    _add_domain_flags(p)
    _add_common(p)
    p.add_argument("--levels", help="gasket levels, A..B or A,B,C")
    p.add_argument("--widths", help="lattice widths, A..B or A,B,C")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--which", choices=("hm", "cap"), default="hm")
    p.add_argument("--max-ratio", type=float)
    p.add_argument("--no-criteria", action="store_true", help="skip the acceptance criteria")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("export", help="write domain, trace and cover JSON")
    _add_domain_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_export)
    return ap


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    if args.command in ("gen", "trace") and not args.output:
        parser.print_usage(sys.stderr)
        print(f"kron-trace {args.command}: -o is required", file=sys.stderr)
        return 2
    try:
        config = SolverConfig(args.solver, args.tol)
        return args.func(args, config)
    except (UsageError, KronTraceError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"kron-trace: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
