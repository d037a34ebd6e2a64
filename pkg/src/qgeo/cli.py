"""Command-line front end: ``qgeo <command> [options]``.

Every command emits rows ``eta_or_tau,value,metric,quantity,branch`` as CSV
(floats with 17 significant digits) or as JSON records with a ``meta`` block.
``verify`` adds ``tol`` and ``status`` columns. Domain errors exit with code 2
and failed verification with code 3; both write a JSON error record to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from . import complexity as cx
from .curvature import curvature_report
from .errors import DomainError, VerificationError
from .geodesics import BRANCHES, GeodesicSpec, closed_form, integrate_geodesic
from .metrics import MetricKind
from .states import BlochPoint
from . import verify as vf

COLUMNS = ["eta_or_tau", "value", "metric", "quantity", "branch"]
VERIFY_COLUMNS = COLUMNS + ["tol", "status"]
COMMANDS = ("curvature", "geodesic", "length", "volume", "complexity", "compare", "verify")


def _row(x, value, metric, quantity, branch, **extra) -> dict:
    rec = {
        "eta_or_tau": None if x is None else float(x),
        "value": None if value is None or not math.isfinite(value) else float(value),
        "metric": metric,
        "quantity": quantity,
        "branch": branch,
    }
    rec.update(extra)
    return rec


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def to_csv(records: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([_fmt(rec.get(c)) for c in columns])
    return buf.getvalue()


def to_json(records: list[dict], args) -> str:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "figures")}
    meta = {"command": args.command, "config": config, "version": __version__, "seed": args.seed}
    return json.dumps({"meta": meta, "records": records}, indent=2, sort_keys=True) + "\n"


# Argument handling

def _grid(args, upper: float, include_zero: bool = False) -> np.ndarray:
    if args.grid < 2:
        raise DomainError("--grid needs at least 2 points")
    if not upper > 0.0:
        raise DomainError("grid upper limit must be positive")
    if include_zero:
        return np.linspace(0.0, upper, args.grid)
    return np.linspace(upper / args.grid, upper, args.grid)


def _kinds(args) -> list[MetricKind]:
    if args.metric is None:
        return [MetricKind.FS, MetricKind.SJOQVIST, MetricKind.BURES]
    return [MetricKind.parse(args.metric)]


def _spec(args, kind: MetricKind) -> GeodesicSpec:
    phidot = args.phidot0
    if phidot is None:
        phidot = 0.0 if kind is MetricKind.BURES else 0.6
    if kind.dim == 2:
        return GeodesicSpec(kind, BlochPoint(1.0, args.theta0, args.phi0), (args.thetadot0, phidot))
    return GeodesicSpec(kind, BlochPoint(args.r0, args.theta0, args.phi0),
                        (args.rdot0, args.thetadot0, phidot))


def _curve(args, kind: MetricKind):
    return closed_form(_spec(args, kind), args.branch)


# Commands

def cmd_curvature(args) -> list[dict]:
    rows = []
    point = BlochPoint(args.r0, args.theta0, args.phi0)
    for kind in _kinds(args):
        rep = curvature_report(kind, point)
        rows.append(_row(None, rep.scalar, kind.label, "R_scalar", args.branch))
        for (a, b), k in rep.sectionals.items():
            if kind.axes.index(a) < kind.axes.index(b):
                rows.append(_row(None, k, kind.label, f"K_{a}_{b}", args.branch))
    return rows


def cmd_geodesic(args) -> list[dict]:
    rows = []
    for kind in _kinds(args):
        spec = _spec(args, kind)
        etas = _grid(args, args.eta_max, include_zero=True)
        if args.method in ("closed", "both"):
            x, _ = closed_form(spec, args.branch).evaluate(etas)
            for j, axis in enumerate(kind.axes):
                rows += [_row(e, v, kind.label, axis, args.branch) for e, v in zip(etas, x[:, j])]
        if args.method in ("rk4", "both"):
            planar = kind is MetricKind.BURES and spec.velocity[2] == 0.0
            num = integrate_geodesic(kind, spec.coords, spec.velocity, args.eta_max, step=args.step,
                                     planar=planar)
            x = num.coords[np.clip(np.searchsorted(num.eta, etas - 1e-12), 0, len(num.eta) - 1)]
            for j, axis in enumerate(kind.axes):
                rows += [_row(e, v, kind.label, f"{axis}_rk4", "numeric") for e, v in zip(etas, x[:, j])]
    return rows


def cmd_length(args) -> list[dict]:
    rows = []
    for kind in _kinds(args):
        curve = _curve(args, kind)
        for e in _grid(args, args.eta_max):
            length = cx.path_length(kind, curve, e)
            rows.append(_row(e, length, kind.label, f"L_{kind.label}", args.branch))
            rows.append(_row(e, cx.action(kind, curve, args.mass, e), kind.label, f"A_{kind.label}",
                             args.branch))
    return rows


def cmd_volume(args) -> list[dict]:
    rows = []
    for kind in _kinds(args):
        if args.accessible:
            rows.append(_row(None, cx.accessible_volume(kind), kind.label, f"Vacc_{kind.label}", "none"))
            continue
        curve = _curve(args, kind)
        etas = _grid(args, args.eta_max)
        for e, vol in zip(etas, cx.explored_volume(kind, curve, etas)):
            rows.append(_row(e, vol.signed, kind.label, f"V_{kind.label}", args.branch))
            rows.append(_row(e, vol.magnitude, kind.label, f"absV_{kind.label}", args.branch))
    return rows


def cmd_complexity(args) -> list[dict]:
    rows = []
    for kind in _kinds(args):
        curve = _curve(args, kind)
        trace = cx.complexity_trace(kind, curve, _grid(args, args.tau_max))
        for t, v, c, s in zip(trace.tau, trace.volume, trace.igc, trace.ige):
            rows.append(_row(t, v, kind.label, f"V_{kind.label}", args.branch))
            rows.append(_row(t, c, kind.label, f"C_{kind.label}", args.branch))
            rows.append(_row(t, s, kind.label, f"S_{kind.label}", args.branch))
    if args.fit:
        spec = _spec(args, MetricKind.SJOQVIST)
        c_fs = cx.fs_unit_constants(spec)
        taus = cx.crest_grid(args.tau_max / 100.0, args.tau_max, args.grid, c_fs)
        fit = cx.asymptotic_ratio(c_fs, args.r0, args.rdot0 / cx.angular_rate(spec), taus, form="exact")
        lead = cx.asymptotic_ratio(c_fs, args.r0, args.rdot0 / cx.angular_rate(spec), taus)
        rows.append(_row(None, lead.limit, "Sjoqvist/FS", "ratio_over_tau_limit", "principal"))
        rows.append(_row(None, float(np.mean(lead.ratio_over_tau)), "Sjoqvist/FS", "ratio_over_tau_fit",
                         "principal"))
        rows.append(_row(None, fit.gap_slope, "Sjoqvist/FS", "IGE_gap_slope", "principal"))
    return rows


def cmd_compare(args) -> list[dict]:
    rng = np.random.default_rng(args.seed)
    n = args.samples
    rows = []
    r_i, r_f = rng.uniform(0, 0.999, n), rng.uniform(0, 0.999, n)
    theta_f = rng.uniform(0, np.pi, n)
    gap = np.array([cx.length_sjoqvist(a, b, t) - cx.length_fs(t) for a, b, t in zip(r_i, r_f, theta_f)])
    rows.append(_row(None, float(gap.min()), "Sjoqvist-FS", "min_L_gap", "none"))
    rows.append(_row(None, float(np.sum(gap < 0)), "Sjoqvist-FS", "violations", "none"))
    r_i = rng.uniform(0, 0.999, n)
    rp, td, ef = rng.normal(size=n), rng.uniform(0.01, 2, n), rng.uniform(0.01, 5, n)
    gap = np.array([cx.length_sjoqvist_eta(*z) - cx.length_bures(*z) for z in zip(r_i, rp, td, ef)])
    rows.append(_row(None, float(gap.min()), "Sjoqvist-Bures", "min_L_gap", "none"))
    rows.append(_row(None, float(np.sum(gap < 0)), "Sjoqvist-Bures", "violations", "none"))

    etas = _grid(args, args.eta_max)
    spec = _spec(args, MetricKind.SJOQVIST)
    c_fs = cx.fs_unit_constants(spec)
    rate = cx.angular_rate(spec)
    rep = cx.compare_sjoqvist_fs(c_fs, args.r0, args.rdot0 / rate, etas * rate)
    rows += [_row(e, v, "Sjoqvist", "Vratio_Sjoqvist", args.branch) for e, v in zip(etas, rep.larger)]
    rows += [_row(e, v, "FS", "Vratio_FS", args.branch) for e, v in zip(etas, rep.smaller)]
    rows.append(_row(None, None if rep.threshold is None else rep.threshold / rate, "Sjoqvist/FS",
                     "eta_star_compare", args.branch))
    rep = cx.compare_bures_sjoqvist(args.r0, args.theta0, args.rdot0, args.thetadot0, etas)
    rows += [_row(e, v, "Sjoqvist", "Aratio_Sjoqvist", "slice") for e, v in zip(etas, rep.larger)]
    rows += [_row(e, v, "Bures", "Aratio_Bures", "slice") for e, v in zip(etas, rep.smaller)]
    rows.append(_row(None, rep.threshold, "Bures/Sjoqvist", "eta_star_boys", "slice"))
    return rows


def cmd_verify(args) -> list[dict]:
    rows = []
    for name, residual, tol in vf.run_all(args.seed):
        status = "PASS" if vf.passed(residual, tol) else "FAIL"
        rows.append(_row(None, residual, "all", name, "none", tol=float(tol), status=status))
    return rows


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--metric", choices=[k.value for k in MetricKind], default=None,
                        help="metric (default: fs, sjoqvist and bures)")
    common.add_argument("--r0", type=float, default=0.2)
    common.add_argument("--theta0", type=float, default=0.5 * math.pi)
    common.add_argument("--phi0", type=float, default=0.0)
    common.add_argument("--rdot0", type=float, default=0.5)
    common.add_argument("--thetadot0", type=float, default=0.8)
    common.add_argument("--phidot0", type=float, default=None,
                        help="azimuthal rate (default 0.6, or 0 for bures)")
    common.add_argument("--eta-max", type=float, default=2.0)
    common.add_argument("--tau-max", type=float, default=20.0)
    common.add_argument("--grid", type=int, default=50)
    common.add_argument("--branch", choices=BRANCHES, default="principal")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--figures", default=None, metavar="DIR",
                        help="also render PNG figures of grid quantities into DIR")

    parser = argparse.ArgumentParser(prog="qgeo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "curvature": cmd_curvature, "geodesic": cmd_geodesic, "length": cmd_length,
        "volume": cmd_volume, "complexity": cmd_complexity, "compare": cmd_compare,
        "verify": cmd_verify,
    }
    subs = {name: sub.add_parser(name, parents=[common]) for name in COMMANDS}
    for name, p in subs.items():
        p.set_defaults(func=handlers[name])
    subs["geodesic"].add_argument("--method", choices=("closed", "rk4", "both"), default="closed")
    subs["geodesic"].add_argument("--step", type=float, default=1e-3)
    subs["length"].add_argument("--mass", type=float, default=1.0)
    subs["volume"].add_argument("--accessible", action="store_true")
    subs["complexity"].add_argument("--fit", action="store_true",
                                    help="add asymptotic Sjoqvist/FS fit rows on a crest grid up to tau-max")
    subs["compare"].add_argument("--samples", type=int, default=10_000)
    return parser


def _error(kind: str, message: str, command: str | None) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "command": command}, sort_keys=True) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        records = args.func(args)
    except DomainError as exc:
        _error(type(exc).__name__, str(exc), args.command)
        return 2
    columns = VERIFY_COLUMNS if args.command == "verify" else COLUMNS
    text = to_json(records, args) if args.format == "json" else to_csv(records, columns)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.figures:
        from .plotting import render

        render(records, args.command, args.figures)
    if args.command == "verify":
        failed = [r["quantity"] for r in records if r["status"] == "FAIL"]
        if failed:
            _error(VerificationError.__name__, "failed checks: " + ", ".join(failed), args.command)
            return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
