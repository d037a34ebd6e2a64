"""Oracle cross-checks run by ``qgeo verify``.

Each check returns a list of (name, residual, tolerance) triples. A check
passes when its residual is finite and no larger than its tolerance.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import complexity as cx
from .curvature import curvature_report, killing_check
from .geodesics import GeodesicSpec, closed_form, integrate_geodesic
from .metrics import MCPFunction, MetricKind, bures_from_spectral, line_element, mcp_metric
from .states import BlochPoint

DEFAULT_TOLS = {
    "scalar_analytic": 1e-12,
    "scalar_numeric": 1e-5,
    "accessible_volume": 1e-8,
    "geodesic_rk4": 1e-6,
    "conserved_drift": 1e-9,
    "bures_spectral": 1e-6,
    "mcp": 1e-12,
    "killing": 1e-8,
    "ratio_constancy": 1e-12,
    "ratio_limit": 1e-10,
    "ige_gap_slope": 0.02,
    "iv_derivative": 1e-6,
}

EXPECTED_SCALAR = {MetricKind.FS: 8.0, MetricKind.SJOQVIST: 8.0, MetricKind.BURES: 24.0}


def tolerances() -> dict:
    """Default tolerances, all replaced by ``QGEO_TOL`` when that is set."""
    override = os.environ.get("QGEO_TOL")
    if override is None:
        return dict(DEFAULT_TOLS)
    value = float(override)
    return {k: value for k in DEFAULT_TOLS}


def random_point(rng) -> BlochPoint:
    return BlochPoint(rng.uniform(0.05, 0.95), rng.uniform(0.2, np.pi - 0.2), rng.uniform(0.0, 2 * np.pi))


def check_curvature(rng, tol, n=20):
    out = []
    for kind, expected in EXPECTED_SCALAR.items():
        pts = [random_point(rng) for _ in range(n)]
        ana = max(abs(curvature_report(kind, p).scalar - expected) for p in pts)
        num = max(abs(curvature_report(kind, p, method="numeric").scalar - expected) for p in pts[:3])
        out.append((f"scalar_{kind.value}_analytic", ana, tol["scalar_analytic"]))
        out.append((f"scalar_{kind.value}_numeric", num, tol["scalar_numeric"]))
    return out


def check_volumes(rng, tol):
    return [
        (f"accessible_{k.value}",
         abs(cx.accessible_volume(k) - cx.accessible_volume(k, "analytic")),
         tol["accessible_volume"])
        for k in (MetricKind.FS, MetricKind.SJOQVIST, MetricKind.BURES)
    ]


def random_spec(kind: MetricKind, rng) -> GeodesicSpec:
    r = rng.uniform(0.1, 0.8)
    th = rng.uniform(0.4, np.pi - 0.4)
    ph = rng.uniform(0.0, 2 * np.pi)
    if kind is MetricKind.FS:
        return GeodesicSpec(kind, BlochPoint(1.0, th, ph), (rng.uniform(-1, 1), rng.uniform(-1, 1)))
    if kind is MetricKind.SJOQVIST:
        return GeodesicSpec(kind, BlochPoint(r, th, ph),
                            (rng.uniform(-0.5, 0.5), rng.uniform(-1, 1), rng.uniform(-1, 1)))
    td = rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 1.0)
    return GeodesicSpec(kind, BlochPoint(r, th, ph), (rng.uniform(-0.5, 0.5) * td, td, 0.0))


def geodesic_residual(spec: GeodesicSpec, eta_max: float = 1.5, step: float = 1e-3) -> tuple[float, float]:
    """(sup-norm closed form vs RK4, max conserved-quantity drift) on the validity window."""
    curve = closed_form(spec, "unwrapped")
    end = min(eta_max, 0.9 * curve.window[1])
    planar = spec.kind is MetricKind.BURES
    num = integrate_geodesic(spec.kind, spec.coords, spec.velocity, end, step=step, planar=planar)
    ok = np.isfinite(num.coords).all(axis=1)
    x, _ = curve.evaluate(num.eta[ok])
    diff = x - num.coords[ok]
    if spec.kind.dim == 2 or spec.kind is MetricKind.SJOQVIST:
        diff[:, -1] = np.angle(np.exp(1j * diff[:, -1]))
    drift = max(float(np.ptp(v)) for v in curve.conserved(num.eta[ok]).values())
    return float(np.max(np.abs(diff))), drift


def check_geodesics(rng, tol, n=5):
    out = []
    for kind in (MetricKind.FS, MetricKind.SJOQVIST, MetricKind.BURES):
        res = [geodesic_residual(random_spec(kind, rng)) for _ in range(n)]
        out.append((f"geodesic_{kind.value}_rk4", max(r[0] for r in res), tol["geodesic_rk4"]))
        out.append((f"conserved_{kind.value}_drift", max(r[1] for r in res), tol["conserved_drift"]))
    return out


def check_bures_spectral(rng, tol, n=50):
    worst = 0.0
    for _ in range(n):
        p = random_point(rng)
        d = rng.normal(size=3)
        exact = line_element(MetricKind.BURES, p, d)
        worst = max(worst, abs(bures_from_spectral(p, d) - exact) / exact)
    return [("bures_spectral_relative", worst, tol["bures_spectral"])]


def check_mcp(rng, tol, n=100):
    out = []
    for f, kind in ((MCPFunction.BURES, MetricKind.BURES), (MCPFunction.SJOQVIST, MetricKind.SJOQVIST)):
        worst = 0.0
        for _ in range(n):
            p = random_point(rng)
            d = rng.normal(size=3)
            worst = max(worst, abs(mcp_metric(f, p, d) - line_element(kind, p, d)))
        out.append((f"mcp_{f.value}", worst, tol["mcp"]))
    return out


def check_killing(rng, tol):
    out = [(f"killing_{name}", killing_check(name, grid=25), tol["killing"]) for name in ("k1", "k2", "k3")]
    out.append(("killing_combination", killing_check(rng.normal(size=3), grid=25), tol["killing"]))
    return out


def check_asymptotics(rng, tol):
    r_i, r_dot = rng.uniform(0.0, 0.6), rng.uniform(0.2, 0.8)
    c = rng.uniform(-0.9, 0.9)
    taus = cx.crest_grid(1e2, 1e4, 30, c)
    fit = cx.asymptotic_ratio(c, r_i, r_dot, taus)
    exact = cx.asymptotic_ratio(c, r_i, r_dot, taus, form="exact")
    expected = r_dot / (2.0 * math.sqrt(1.0 - r_i**2))
    return [
        ("ratio_over_tau_spread", fit.spread / expected, tol["ratio_constancy"]),
        ("ratio_over_tau_limit", abs(float(np.mean(fit.ratio_over_tau)) - expected), tol["ratio_limit"]),
        ("ige_gap_slope", abs(exact.gap_slope - 1.0), tol["ige_gap_slope"]),
    ]


def check_iv(rng, tol):
    c = rng.uniform(-0.95, 0.95)
    t = np.linspace(0.05, 1.5, 30)
    h = 1e-5
    fd = (cx.i_v_fs(t + h, c) - cx.i_v_fs(t - h, c)) / (2 * h)
    return [("iv_fs_derivative", float(np.max(np.abs(fd - np.sin(t) * np.arctan(c * np.tan(t))))),
             tol["iv_derivative"])]


CHECKS = (check_curvature, check_volumes, check_geodesics, check_bures_spectral, check_mcp,
          check_killing, check_asymptotics, check_iv)


def run_all(seed: int = 0, tol: dict | None = None) -> list[tuple[str, float, float]]:
    tol = tolerances() if tol is None else tol
    rng = np.random.default_rng(seed)
    results = []
    for check in CHECKS:
        results.extend(check(rng, tol))
    return results


def passed(residual: float, tolerance: float) -> bool:
    return bool(np.isfinite(residual) and residual <= tolerance)
