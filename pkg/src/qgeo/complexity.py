"""Lengths, actions, explored volumes and volume-based complexity measures.

The volume density of every metric here factorizes into one-dimensional
factors, so explored volumes are products of per-coordinate integrals over
the coordinate ranges swept by a curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError
from .geodesics import BuresEtaClosed, FSClosed, SjoqvistClosed, speed
from .metrics import MetricKind

QUAD_TOL = 1e-10


def _quad(f, a, b, points=None, **kw):
    """scipy adaptive Gauss-Kronrod with the package's default tolerances."""
    if a == b:
        return 0.0
    kw.setdefault("limit", 500)
    val, _ = integrate.quad(f, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, points=points, **kw)
    return val


# Volume density factors: sqrt(det g) = prefactor * prod_k density_k(xi^k).

@dataclass(frozen=True)
class Factor:
    density: object
    antiderivative: object
    lower: float
    upper: float


def _radial_sjoqvist():
    return Factor(lambda r: 1.0 / np.sqrt(1.0 - r * r), np.arcsin, 0.0, 1.0)


def _radial_bures():
    return Factor(lambda r: r * r / np.sqrt(1.0 - r * r),
                  lambda r: 0.5 * (np.arcsin(r) - r * np.sqrt(1.0 - r * r)), 0.0, 1.0)


_THETA = Factor(np.sin, lambda t: -np.cos(t), 0.0, np.pi)
_PHI = Factor(lambda p: np.ones_like(np.asarray(p, dtype=float)), lambda p: p, 0.0, 2.0 * np.pi)


def volume_factors(kind) -> tuple[float, list[Factor]]:
    kind = MetricKind.parse(kind)
    if kind is MetricKind.FS:
        return 0.25, [_THETA, _PHI]
    if kind is MetricKind.BSM:
        return 1.0, [_THETA, _PHI]
    if kind is MetricKind.SJOQVIST:
        return 0.125, [_radial_sjoqvist(), _THETA, _PHI]
    return 0.125, [_radial_bures(), _THETA, _PHI]


def accessible_volume(kind, method: str = "quadrature") -> float:
    """Volume of the whole chart: pi for FS, pi^2/4 for Sjoqvist, pi^2/8 for Bures.

    The radial factors have an inverse square-root endpoint singularity at
    r = 1, integrated with the algebraic weight (1 - r)^(-1/2).
    """
    kind = MetricKind.parse(kind)
    pref, factors = volume_factors(kind)
    if method == "analytic":
        return {MetricKind.FS: np.pi, MetricKind.BSM: 4.0 * np.pi,
                MetricKind.SJOQVIST: np.pi**2 / 4.0, MetricKind.BURES: np.pi**2 / 8.0}[kind]
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    total = pref
    for f in factors:
        if f is factors[0] and kind.dim == 3:
            reg = (lambda r: 1.0 / np.sqrt(1.0 + r)) if kind is MetricKind.SJOQVIST else (
                lambda r: r * r / np.sqrt(1.0 + r))
            val, _ = integrate.quad(reg, 0.0, 1.0, weight="alg", wvar=(0.0, -0.5),
                                    epsabs=QUAD_TOL, epsrel=QUAD_TOL)
        else:
            val = _quad(f.density, f.lower, f.upper)
        total *= val
    return float(total)


@dataclass(frozen=True)
class ExploredVolume:
    signed: float
    magnitude: float
    sign: int


def _curve_coords(curve, eta, continued: bool):
    """Coordinates at eta, optionally continuing closed forms past their window."""
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if isinstance(curve, SjoqvistClosed):
        ang = curve.angular
        if not continued:
            curve.evaluate(eta)
        else:
            ang = FSClosed(**{**ang.__dict__, "window": (0.0, math.inf)})
        x, _ = ang.evaluate(eta)
        return np.column_stack([curve.alpha(eta), x])
    if isinstance(curve, BuresEtaClosed):
        return curve.evaluate(eta, continued=continued)[0]
    if isinstance(curve, FSClosed) and continued:
        curve = FSClosed(**{**curve.__dict__, "window": (0.0, math.inf)})
    return curve.evaluate(eta)[0]


def explored_volume(kind, curve, eta, continued: bool = True) -> ExploredVolume:
    """Product over coordinates of the density factor integrated over the swept range.

    Factors are signed (a decreasing coordinate gives a negative factor); the
    result carries the signed value, its magnitude and the orientation sign.
    For Sjoqvist curves the radial factor is alpha(eta) - alpha_i with
    alpha = arcsin r continued linearly in eta, so the closed form remains
    defined after r would leave the Bloch ball. ``continued=False`` enforces
    the validity window instead.
    """
    kind = MetricKind.parse(kind)
    if kind is not curve.kind and not (kind is MetricKind.BSM and curve.kind is MetricKind.FS):
        raise ValueError(f"curve is a {curve.kind.label} geodesic, not {kind.label}")
    values = np.atleast_1d(_explored_signed(kind, curve, eta, continued))
    out = [ExploredVolume(float(v), abs(float(v)), int(np.sign(v))) for v in values]
    return out[0] if np.ndim(eta) == 0 else out


def _explored_signed(kind, curve, eta, continued=True):
    pref, factors = volume_factors(kind)
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    x0 = _curve_coords(curve, 0.0, continued)[0]
    x = _curve_coords(curve, eta, continued)
    total = np.full(len(eta), pref)
    for k, f in enumerate(factors):
        if kind.dim == 3 and k == 0 and isinstance(curve, SjoqvistClosed):
            total = total * (x[:, 0] - x0[0])
        else:
            total = total * (f.antiderivative(x[:, k]) - f.antiderivative(x0[k]))
    return total


def explored_volume_quadrature(kind, curve, eta: float) -> float:
    """Signed explored volume from line integrals of each density factor along the curve."""
    kind = MetricKind.parse(kind)
    pref, factors = volume_factors(kind)
    total = pref
    for k, f in enumerate(factors):
        def integrand(s, k=k, f=f):
            x, v = curve.evaluate(s)
            return float(f.density(x[0, k]) * v[0, k])
        total *= _quad(integrand, 0.0, eta)
    return float(total)


def explored_volume_box(kind, curve, eta: float) -> float:
    """Signed explored volume by nested quadrature over the swept coordinate box."""
    kind = MetricKind.parse(kind)
    pref, factors = volume_factors(kind)
    x0 = curve.evaluate(0.0)[0][0]
    x1 = curve.evaluate(eta)[0][0]
    dens = [f.density for f in factors]
    sign = float(np.prod(np.sign(x1 - x0)))
    lo, hi = np.minimum(x0, x1), np.maximum(x0, x1)
    opts = {"epsabs": QUAD_TOL, "epsrel": 1e-9}
    if kind.dim == 2:
        val, _ = integrate.nquad(lambda t, p: dens[0](t) * dens[1](p), list(zip(lo, hi)), opts=opts)
    else:
        val, _ = integrate.nquad(lambda r, t, p: dens[0](r) * dens[1](t) * dens[2](p),
                                 list(zip(lo, hi)), opts=opts)
    return sign * pref * val


# Lengths and actions

def path_length(kind, curve, eta_f: float) -> float:
    """Integral of sqrt(g(xi_dot, xi_dot)) over [0, eta_f]."""
    kind = MetricKind.parse(kind)
    curve.evaluate(eta_f)
    return _quad(lambda s: speed(kind, *[a[0] for a in curve.evaluate(s)]), 0.0, eta_f)


def action(kind, curve, mass: float, eta_f: float) -> float:
    """(m/2) times the integral of g(xi_dot, xi_dot) over [0, eta_f]."""
    kind = MetricKind.parse(kind)
    curve.evaluate(eta_f)
    return 0.5 * mass * _quad(lambda s: speed(kind, *[a[0] for a in curve.evaluate(s)]) ** 2, 0.0, eta_f)


def action_from_length(mass: float, energy: float, length: float) -> float:
    """A = sqrt(m E / 2) L for constant-speed curves, with E = m v^2 / 2."""
    return math.sqrt(mass * energy / 2.0) * length


def length_fs(theta_f: float) -> float:
    return 0.5 * theta_f


def length_sjoqvist(r_i: float, r_f: float, theta_f: float) -> float:
    return 0.5 * math.hypot(theta_f, math.asin(r_f) - math.asin(r_i))


def length_sjoqvist_eta(r_i: float, r_prime_i: float, theta_dot_i: float, eta_f: float) -> float:
    """Length of a constant-phi Sjoqvist geodesic; r_prime_i is dr/dtheta at the start."""
    return 0.5 * math.sqrt(1.0 + r_prime_i**2 / (1.0 - r_i**2)) * abs(theta_dot_i) * eta_f


def length_bures(r_i: float, r_prime_i: float, theta_dot_i: float, eta_f: float) -> float:
    """Length of a constant-phi Bures geodesic; r_prime_i is dr/dtheta at the start."""
    return 0.5 * math.sqrt(r_i**2 + r_prime_i**2 / (1.0 - r_i**2)) * abs(theta_dot_i) * eta_f


# Closed-form volumes and complexities for the theta_i = pi/2 unit-rate family

def _a(c_fs: float) -> float:
    if abs(c_fs) > 1.0:
        raise DomainError(f"|c_FS| = {abs(c_fs)} exceeds 1")
    return math.sqrt(1.0 - c_fs * c_fs)


def angular_rate(spec) -> float:
    """sqrt(theta_dot^2 + sin^2(theta) phi_dot^2), the rate that maps eta to the unit-rate family."""
    theta_dot, phi_dot = spec.velocity[-2:]
    return math.hypot(theta_dot, math.sin(spec.point.theta) * phi_dot)


def fs_unit_constants(spec) -> float:
    """c_FS of the equatorial unit-rate family matching ``spec``.

    The closed-form volumes and complexities below assume theta_i = pi/2 and
    an eta rescaled by :func:`angular_rate`.
    """
    if abs(math.cos(spec.point.theta)) > 1e-12:
        raise DomainError("closed-form volume laws need theta_i = pi/2")
    rate = angular_rate(spec)
    if rate == 0.0:
        raise DomainError("closed-form volume laws need a nonzero angular rate")
    return spec.velocity[-1] / rate


def radial_rate(r_i: float, r_dot_i: float) -> float:
    """r_dot_i / sqrt(1 - r_i^2)."""
    if not 0.0 <= r_i < 1.0:
        raise DomainError(f"r_i={r_i} outside [0, 1)")
    return r_dot_i / math.sqrt(1.0 - r_i * r_i)


def v_fs_closed(eta, c_fs: float):
    """(1/4) a sin(eta) arctan(c tan eta), principal branch."""
    eta = np.asarray(eta, dtype=float)
    return 0.25 * _a(c_fs) * np.sin(eta) * np.arctan(c_fs * np.tan(eta))


def v_sjoqvist_closed(eta, c_fs: float, r_i: float, r_dot_i: float):
    """(1/8) a omega eta sin(eta) arctan(c tan eta), principal branch."""
    eta = np.asarray(eta, dtype=float)
    return 0.5 * radial_rate(r_i, r_dot_i) * eta * v_fs_closed(eta, c_fs)


def i_v_fs(tau, c_fs: float):
    """Antiderivative of sin(t) arctan(c tan t) vanishing at t = 0.

    c/sqrt(c^2-1) arctan(sqrt(c^2-1) sin t) is real for |c| <= 1 and is
    evaluated as (c/a) artanh(a sin t) with a = sqrt(1 - c^2); at |c| = 1
    it reduces to c sin t.
    """
    tau = np.asarray(tau, dtype=float)
    a = _a(c_fs)
    s = np.sin(tau)
    if c_fs == 0.0:
        first = np.zeros_like(s)
    elif a < 1e-8:
        # series of artanh(a s)/a in a
        first = c_fs * s * (1.0 + (a * s) ** 2 / 3.0)
    else:
        first = c_fs / a * np.arctanh(a * s)
    return first - np.cos(tau) * np.arctan(c_fs * np.tan(tau))


def _int_i_v(tau: float, c_fs: float) -> float:
    """Integral of i_v_fs over [0, tau], using i_v_fs(t + pi) = -i_v_fs(t)."""
    if tau <= 0.0:
        return 0.0
    k, s = divmod(tau, np.pi)
    k = int(k)
    f = lambda t: float(i_v_fs(t, c_fs))
    # split at the kink by hand; crest grids put s within ulps of pi/2
    half = 0.5 * np.pi
    full = _quad(f, 0.0, half) + _quad(f, half, np.pi) if k % 2 else 0.0
    part = _quad(f, 0.0, min(s, half))
    if s - half > 1e-9:
        part += _quad(f, half, s)
    elif s > half:
        part += (s - half) * f(0.5 * (s + half))
    return full + (-1) ** k * part


def c_fs_closed(tau, c_fs: float):
    """(1/4) a I_V(tau) / tau."""
    tau = np.asarray(tau, dtype=float)
    return 0.25 * _a(c_fs) * i_v_fs(tau, c_fs) / tau


def c_sjoqvist_closed(tau, c_fs: float, r_i: float, r_dot_i: float):
    """(1/8) a omega (1/tau) [tau I_V(tau) - int_0^tau I_V], by parts."""
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    a, w = _a(c_fs), radial_rate(r_i, r_dot_i)
    out = np.array([
        0.125 * a * w / t * (t * float(i_v_fs(t, c_fs)) - _int_i_v(t, c_fs)) for t in tau_arr
    ])
    return out if np.ndim(tau) else float(out[0])


def c_sjoqvist_asymptotic(tau, c_fs: float, r_i: float, r_dot_i: float):
    """Leading large-tau form (1/8) a omega I_V(tau)."""
    return 0.125 * _a(c_fs) * radial_rate(r_i, r_dot_i) * i_v_fs(tau, c_fs)


# Averaged volumes along arbitrary curves

def _break_points(curve, tau):
    """Principal-branch jump locations of the FS azimuth inside (0, tau)."""
    fs = curve.angular if isinstance(curve, SjoqvistClosed) else curve
    if not isinstance(fs, FSClosed) or fs.branch != "principal" or fs.rate == 0.0:
        return None
    k = np.arange(0, int(tau * fs.rate / np.pi) + 2)
    pts = (0.5 * np.pi + k * np.pi - fs.psi) / fs.rate
    pts = pts[(pts > 0.0) & (pts < tau)]
    return list(pts) if len(pts) else None


def igc(kind, curve, tau: float, continued: bool = True) -> float:
    """C(tau) = (1/tau) times the integral of the signed explored volume over [0, tau]."""
    if tau <= 0.0:
        raise DomainError("tau must be positive")
    kind = MetricKind.parse(kind)
    f = lambda s: float(_explored_signed(kind, curve, s, continued)[0])
    edges = [0.0, *(_break_points(curve, tau) or []), tau]
    return math.fsum(_quad(f, a, b) for a, b in zip(edges[:-1], edges[1:])) / tau


def ige(kind, curve, tau: float, continued: bool = True) -> float:
    """S(tau) = log C(tau); undefined (DomainError) when C(tau) <= 0."""
    c = igc(kind, curve, tau, continued)
    if not c > 0.0:
        raise DomainError(f"IGE undefined: averaged volume C={c!r} is not positive")
    return math.log(c)


@dataclass(frozen=True)
class ComplexityTrace:
    tau: np.ndarray
    volume: np.ndarray
    igc: np.ndarray
    ige: np.ndarray

    @property
    def ige_defined(self) -> np.ndarray:
        return np.isfinite(self.ige)


def complexity_trace(kind, curve, taus, continued: bool = True) -> ComplexityTrace:
    """Explored volume, IGC and IGE on a grid; undefined IGE entries are NaN."""
    taus = np.asarray(taus, dtype=float)
    if np.any(np.diff(taus) <= 0.0) or np.any(taus <= 0.0):
        raise ValueError("tau grid must be positive and strictly increasing")
    kind = MetricKind.parse(kind)
    vol = _explored_signed(kind, curve, taus, continued)
    cs = np.array([igc(kind, curve, t, continued) for t in taus])
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(cs > 0.0, np.log(np.where(cs > 0.0, cs, 1.0)), np.nan)
    return ComplexityTrace(taus, vol, cs, s)


# Asymptotic comparison laws

@dataclass(frozen=True)
class AsymptoticFit:
    tau: np.ndarray
    ratio_over_tau: np.ndarray
    limit: float
    spread: float
    gap_slope: float
    gap_intercept: float
    used: np.ndarray


def crest_grid(tau_min: float, tau_max: float, n: int, c_fs: float = 1.0) -> np.ndarray:
    """Roughly log-spaced points where I_V attains its positive crest.

    The crests sit at pi/2 + 2 pi m for c_FS > 0 and at 3 pi/2 + 2 pi m for
    c_FS < 0.
    """
    offset = 0.5 * np.pi if c_fs >= 0.0 else 1.5 * np.pi
    m_lo = max(int(math.ceil((tau_min - offset) / (2 * np.pi))), 1)
    m_hi = int((tau_max - offset) // (2 * np.pi))
    if m_hi < m_lo:
        raise DomainError(f"no crest points in [{tau_min}, {tau_max}]")
    ms = np.unique(np.round(np.geomspace(m_lo, m_hi, n)).astype(int))
    return offset + 2.0 * np.pi * ms


def asymptotic_ratio(c_fs: float, r_i: float, r_dot_i: float, taus, form: str = "asymptotic",
                     fit_range: tuple | None = None) -> AsymptoticFit:
    """Fit C_Sjoqvist/C_FS against tau and the IGE gap against log tau.

    ``form="asymptotic"`` uses the leading large-tau Sjoqvist IGC, for which
    the ratio divided by tau is exactly omega/2. ``form="exact"`` uses the
    full by-parts expression. Grid points where either IGC is not positive
    are dropped from the gap fit. The fit defaults to the top decade of the
    grid.
    """
    if r_dot_i == 0.0:
        raise DomainError("r_dot_i = 0 gives a vanishing Sjoqvist volume")
    taus = np.asarray(taus, dtype=float)
    if np.any(np.diff(taus) <= 0.0) or taus[0] <= 0.0:
        raise ValueError("tau grid must be positive and strictly increasing")
    c_fs_vals = c_fs_closed(taus, c_fs)
    if form == "asymptotic":
        c_sj = c_sjoqvist_asymptotic(taus, c_fs, r_i, r_dot_i)
    elif form == "exact":
        c_sj = c_sjoqvist_closed(taus, c_fs, r_i, r_dot_i)
    else:
        raise ValueError(f"unknown form {form!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = c_sj / c_fs_vals / taus
    if fit_range is None:
        fit_range = (taus[-1] / 10.0, taus[-1])
    used = (c_fs_vals > 0.0) & (c_sj > 0.0) & (taus >= fit_range[0]) & (taus <= fit_range[1])
    if used.sum() < 2:
        raise DomainError("fewer than two grid points with a defined IGE gap")
    gap = np.log(c_sj[used]) - np.log(c_fs_vals[used])
    slope, intercept = np.polyfit(np.log(taus[used]), gap, 1)
    finite = np.isfinite(ratio)
    spread = float(np.ptp(ratio[finite])) if finite.any() else math.nan
    return AsymptoticFit(taus, ratio, 0.5 * radial_rate(r_i, r_dot_i), spread, float(slope),
                         float(intercept), used)


@dataclass(frozen=True)
class OrderingReport:
    eta: np.ndarray
    larger: np.ndarray
    smaller: np.ndarray
    holds: np.ndarray
    threshold: float | None


def _threshold(eta, holds):
    """Smallest grid eta after which the ordering holds on the rest of the grid."""
    if not holds[-1]:
        return None
    bad = np.flatnonzero(~holds)
    return float(eta[0] if len(bad) == 0 else eta[bad[-1] + 1])


def compare_sjoqvist_fs(c_fs: float, r_i: float, r_dot_i: float, etas,
                        tol: float = 1e-14) -> OrderingReport:
    """|V_Sjoqvist| / (pi^2/4) >= |V_FS| / pi on a grid, from the closed-form volumes."""
    etas = np.asarray(etas, dtype=float)
    sj = np.abs(v_sjoqvist_closed(etas, c_fs, r_i, r_dot_i)) / accessible_volume("sjoqvist", "analytic")
    fs = np.abs(v_fs_closed(etas, c_fs)) / accessible_volume("fs", "analytic")
    holds = sj >= fs - tol
    return OrderingReport(etas, sj, fs, holds, _threshold(etas, holds))


def slice_areas(r_i: float, theta_i: float, r_dot_i: float, theta_dot_i: float, etas):
    """Swept (r, theta) slice areas of matched constant-phi Sjoqvist and Bures geodesics.

    Sjoqvist density 1/(4 sqrt(1-r^2)) gives (1/4) omega eta * theta_dot_i eta,
    with the polar angle of the constant-phi plane taken as unbounded. Bures
    density r/(4 sqrt(1-r^2)) gives
    (1/4)[sqrt(1-r_i^2) - sqrt(1-r(eta)^2)] (theta(eta) - theta_i) along the
    closed form, continued through its reflections at r = 1.
    """
    from .geodesics import bures_geodesic_eta

    etas = np.asarray(etas, dtype=float)
    w = radial_rate(r_i, r_dot_i)
    area_sj = 0.25 * (w * etas) * (theta_dot_i * etas)
    curve = bures_geodesic_eta(r_i, theta_i, theta_dot_i, r_dot_i / theta_dot_i)
    x, _ = curve.evaluate(etas, continued=True)
    area_b = 0.25 * (math.sqrt(1.0 - r_i**2) - np.sqrt(np.maximum(1.0 - x[:, 0] ** 2, 0.0))) * (
        x[:, 1] - theta_i)
    return area_sj, area_b


def compare_bures_sjoqvist(r_i: float, theta_i: float, r_dot_i: float, theta_dot_i: float, etas,
                           tol: float = 1e-14) -> OrderingReport:
    """|A_Bures| / (pi^2/8) <= |A_Sjoqvist| / (pi^2/4) on a grid."""
    etas = np.asarray(etas, dtype=float)
    area_sj, area_b = slice_areas(r_i, theta_i, r_dot_i, theta_dot_i, etas)
    sj = np.abs(area_sj) / accessible_volume("sjoqvist", "analytic")
    bu = np.abs(area_b) / accessible_volume("bures", "analytic")
    holds = bu <= sj + tol
    return OrderingReport(etas, sj, bu, holds, _threshold(etas, holds))
