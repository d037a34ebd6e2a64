"""Closed-form geodesics and a fixed-step RK4 geodesic integrator.

Curves are parametrized by an affine parameter ``eta`` starting at 0. Every
closed-form curve exposes ``evaluate(eta) -> (coords, velocity)`` with arrays
of shape (n, dim), a validity ``window`` and its ``conserved`` quantities.
Angles along curves are real numbers and are not reduced mod 2*pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, WindowError
from .metrics import MetricKind, diagonal
from .states import BlochPoint

BRANCHES = ("principal", "unwrapped")
HALF_PI = 0.5 * np.pi


@dataclass(frozen=True)
class GeodesicSpec:
    """Initial data: a point and coordinate rates (r_dot, theta_dot, phi_dot).

    Two-dimensional metrics take (theta_dot, phi_dot).
    """

    kind: MetricKind
    point: BlochPoint
    velocity: tuple

    def __post_init__(self):
        kind = MetricKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        vel = tuple(float(v) for v in self.velocity)
        if len(vel) != kind.dim:
            raise ValueError(f"{kind.label} geodesics need {kind.dim} velocity components")
        object.__setattr__(self, "velocity", vel)

    @property
    def coords(self) -> np.ndarray:
        return self.point.coords(self.kind.dim)


def speed(kind, coords, velocity) -> np.ndarray:
    """sqrt(g(v, v)) at raw coordinates; half the bracket norm of the metric."""
    kind = MetricKind.parse(kind)
    x = np.atleast_2d(np.asarray(coords, dtype=float))
    v = np.atleast_2d(np.asarray(velocity, dtype=float))
    r = x[:, 0] if kind.dim == 3 else 0.0
    if kind.dim == 3 and np.any(r >= 1.0):
        raise DomainError("speed is undefined on the pure-state boundary for this metric")
    g = diagonal(kind, r, x[:, -2])
    out = np.sqrt(np.sum(g * v.T * v.T, axis=0))
    return out if np.ndim(coords) > 1 else float(out[0])


def unwrapped_arctan(k, u):
    """Continuous extension of arctan(k tan u) that agrees with it on |u| < pi/2."""
    k = float(k)
    u = np.asarray(u, dtype=float)
    if k == 0.0:
        return np.zeros_like(u)
    m = abs(k)
    s, c = np.sin(u), np.cos(u)
    out = u + np.arctan((m - 1.0) * s * c / (c * c + m * s * s))
    return out if k > 0 else -out


def principal_arctan(k, u):
    return np.arctan(k * np.tan(np.asarray(u, dtype=float)))


def _check_window(window, eta):
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    lo, hi = window
    if np.any(eta < lo - 1e-12) or np.any(eta > hi + 1e-12):
        raise WindowError(f"eta outside the validity window [{lo}, {hi}]")
    return eta


@dataclass(frozen=True)
class FSClosed:
    """Great-circle geodesic cos(theta) = a sin(v*eta + psi) on the sphere.

    ``c_fs`` and ``a_fs`` are normalized by the angular rate ``rate`` so that
    a_fs^2 + c_fs^2 = 1; the unit-rate case is the textbook one.
    """

    a_fs: float
    c_fs: float
    phi_i: float
    psi: float
    rate: float
    theta_i: float
    branch: str = "unwrapped"
    window: tuple = (0.0, math.inf)

    @property
    def kind(self) -> MetricKind:
        return MetricKind.FS

    def _phi(self, u):
        f = principal_arctan if self.branch == "principal" else unwrapped_arctan
        return self.phi_i + f(self.c_fs, u) - f(self.c_fs, self.psi)

    def evaluate(self, eta):
        eta = _check_window(self.window, eta)
        if self.rate == 0.0:
            x = np.column_stack([np.full_like(eta, self.theta_i), np.full_like(eta, self.phi_i)])
            return x, np.zeros_like(x)
        u = self.rate * eta + self.psi
        cos_t = self.a_fs * np.sin(u)
        theta = np.arccos(np.clip(cos_t, -1.0, 1.0))
        sin_t = np.sqrt(np.maximum(1.0 - cos_t * cos_t, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            theta_dot = -self.a_fs * self.rate * np.cos(u) / sin_t
            phi_dot = self.c_fs * self.rate / (sin_t * sin_t)
        return np.column_stack([theta, self._phi(u)]), np.column_stack([theta_dot, phi_dot])

    @property
    def node(self) -> float:
        """Azimuth at which the great circle crosses the equator going up in u."""
        f = principal_arctan if self.branch == "principal" else unwrapped_arctan
        return self.phi_i - float(f(self.c_fs, self.psi))

    def conserved(self, eta) -> dict:
        x, v = self.evaluate(eta)
        return {
            "c_FS": v[:, 1] * np.sin(x[:, 0]) ** 2,
            "v_FS": speed(MetricKind.FS, x, v),
        }


def fs_geodesic(spec: GeodesicSpec, branch: str = "unwrapped") -> FSClosed:
    """Closed-form Fubini-Study geodesic from initial data.

    The phase psi solves a sin(psi) = cos(theta_i) and
    a cos(psi) = -sin(theta_i) theta_dot_i / v, which fixes the hemisphere
    sign from the sign of theta_dot_i. With theta_i = pi/2 and
    theta_dot_i < 0 this is cos(theta) = a sin(eta), phi = phi_i + arctan(c tan eta).
    """
    if branch not in BRANCHES:
        raise ValueError(f"unknown branch {branch!r}")
    if spec.kind.dim == 3:
        theta_dot, phi_dot = spec.velocity[1:]
    else:
        theta_dot, phi_dot = spec.velocity
    theta_i, phi_i = spec.point.theta, spec.point.phi
    s_i = math.sin(theta_i)
    if s_i < 1e-15:
        s_i = 0.0
    rate = math.sqrt(theta_dot**2 + (s_i * phi_dot) ** 2)
    if rate == 0.0:
        return FSClosed(0.0, 1.0, phi_i, 0.0, 0.0, theta_i, branch)
    c = phi_dot * s_i * s_i / rate
    a = math.sqrt(max(1.0 - c * c, 0.0))
    psi = math.atan2(math.cos(theta_i), -s_i * theta_dot / rate)
    window = (0.0, math.inf)
    if a >= 1.0:
        # meridian: the chart breaks down when the curve reaches a pole
        window = (0.0, _next_crossing(psi, HALF_PI, np.pi) / rate)
    return FSClosed(a, c, phi_i, psi, rate, theta_i, branch, window)


def _next_crossing(x0: float, target: float, period: float) -> float:
    """Smallest t > 0 with x0 + t = target mod period."""
    t = (target - x0) % period
    return t if t > 1e-15 else period


def great_circle_residual(curve: FSClosed, etas) -> float:
    """max |cot(theta) - (a/c) sin(phi - phi_node)| over the samples.

    For theta_i = pi/2 the node is phi_i (or phi_i +- pi on the other
    hemisphere branch), which is the +- sign of the great-circle equation.
    """
    if curve.branch != "unwrapped":
        curve = FSClosed(**{**curve.__dict__, "branch": "unwrapped"})
    if curve.c_fs == 0.0:
        raise DomainError("the great-circle form needs c_FS != 0")
    if curve.a_fs == 0.0:
        return 0.0
    x, _ = curve.evaluate(etas)
    lhs = np.cos(x[:, 0]) / np.sin(x[:, 0])
    rhs = curve.a_fs / curve.c_fs * np.sin(x[:, 1] - curve.node)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class SjoqvistClosed:
    """r = sin(alpha_i + omega*eta) times a Fubini-Study angular motion."""

    r_i: float
    r_dot_i: float
    angular: FSClosed
    window: tuple = (0.0, math.inf)

    @property
    def kind(self) -> MetricKind:
        return MetricKind.SJOQVIST

    @property
    def alpha_i(self) -> float:
        return math.asin(self.r_i)

    @property
    def omega(self) -> float:
        """Radial rate r_dot_i / sqrt(1 - r_i^2); omega^2 is conserved."""
        if self.r_i == 1.0:
            return 0.0
        return self.r_dot_i / math.sqrt(1.0 - self.r_i**2)

    def alpha(self, eta):
        """arcsin r continued past the window as a linear function of eta."""
        return self.alpha_i + self.omega * np.asarray(eta, dtype=float)

    def radial(self, eta):
        eta = _check_window(self.window, eta)
        a = self.alpha(eta)
        return np.sin(a), self.omega * np.cos(a)

    def evaluate(self, eta):
        eta = _check_window(self.window, eta)
        r, r_dot = self.radial(eta)
        x, v = self.angular.evaluate(eta)
        return np.column_stack([r, x]), np.column_stack([r_dot, v])

    def conserved(self, eta) -> dict:
        x, v = self.evaluate(eta)
        with np.errstate(divide="ignore", invalid="ignore"):
            radial = v[:, 0] ** 2 / (1.0 - x[:, 0] ** 2)
        return {
            "c_FS": v[:, 2] * np.sin(x[:, 1]) ** 2,
            "rdot2_over_1mr2": radial,
            "v_Sjoqvist": speed(MetricKind.SJOQVIST, x, v),
        }


def sjoqvist_geodesic(spec: GeodesicSpec, branch: str = "unwrapped") -> SjoqvistClosed:
    """Closed-form Sjoqvist geodesic; radial and angular motions decouple."""
    if spec.kind is not MetricKind.SJOQVIST:
        raise ValueError("sjoqvist_geodesic needs a Sjoqvist spec")
    r_i = spec.point.r
    r_dot = spec.velocity[0]
    if r_i == 1.0 and r_dot != 0.0:
        raise DomainError("a pure initial state cannot have a radial velocity")
    angular = fs_geodesic(spec, branch)
    curve = SjoqvistClosed(r_i, r_dot, angular)
    omega = curve.omega
    end = math.inf
    if omega > 0.0:
        end = (HALF_PI - curve.alpha_i) / omega
    elif omega < 0.0:
        end = curve.alpha_i / -omega
    end = min(end, angular.window[1])
    return SjoqvistClosed(r_i, r_dot, angular, (0.0, end))


@dataclass(frozen=True)
class ThetaCurve:
    """A radial profile r(theta) on theta in [theta_i, theta_end]."""

    kind: MetricKind
    theta_i: float
    window: tuple
    _r: object = field(repr=False)
    _dr: object = field(repr=False)
    constants: dict = field(default_factory=dict)

    def r(self, theta):
        theta = _check_window(self.window, theta)
        return self._r(theta)

    def r_prime(self, theta):
        theta = _check_window(self.window, theta)
        return self._dr(theta)

    def beltrami(self, theta) -> np.ndarray:
        """First integral of the theta-affine Euler-Lagrange equation."""
        r, rp = self.r(theta), self.r_prime(theta)
        if self.kind is MetricKind.BURES:
            return r * r / lagrangian(self.kind, r, rp)
        return rp * rp / (1.0 - r * r)


def lagrangian(kind, r, r_prime):
    """Arc-length integrand (up to the overall 1/2) for theta-affine radial profiles."""
    kind = MetricKind.parse(kind)
    base = r * r if kind is MetricKind.BURES else 1.0
    return np.sqrt(base + r_prime * r_prime / (1.0 - r * r))


def sjoqvist_r_of_theta(r_i: float, theta_f: float | None = None, r_f: float | None = None,
                        r_prime_i: float | None = None, theta_i: float = 0.0) -> ThetaCurve:
    """Sjoqvist radial geodesic as a function of the polar angle.

    Give either the boundary value ``r_f`` at ``theta_f`` or the initial slope
    ``r_prime_i``; theta is measured from ``theta_i``.
    """
    if not 0.0 < r_i <= 1.0:
        raise DomainError(f"r_i={r_i} outside (0, 1]")
    alpha_i = math.asin(r_i)
    if (r_f is None) == (r_prime_i is None):
        raise ValueError("pass exactly one of r_f or r_prime_i")
    if r_f is not None:
        if theta_f is None or theta_f <= 0.0:
            raise DomainError("the boundary form needs theta_f > 0")
        if not 0.0 < r_f <= 1.0:
            raise DomainError(f"r_f={r_f} outside (0, 1]")
        slope = (math.asin(r_f) - alpha_i) / theta_f
    else:
        if r_i == 1.0:
            raise DomainError("the slope form needs r_i < 1")
        slope = r_prime_i / math.sqrt(1.0 - r_i**2)
    if slope > 0:
        end = (HALF_PI - alpha_i) / slope
    elif slope < 0:
        end = alpha_i / -slope
    else:
        end = math.inf
    if theta_f is not None:
        end = min(end, theta_f) if r_f is None else theta_f
    constants = {"k": slope * slope}
    if theta_f is not None and r_f is not None:
        constants["c_S"] = theta_f / math.hypot(theta_f, math.asin(r_f) - alpha_i)
    return ThetaCurve(
        MetricKind.SJOQVIST,
        theta_i,
        (theta_i, theta_i + end),
        lambda th: np.sin(alpha_i + slope * (th - theta_i)),
        lambda th: slope * np.cos(alpha_i + slope * (th - theta_i)),
        constants,
    )


def bures_constants(r_i: float, r_prime_i: float) -> tuple[float, float]:
    """(a_B, A) with a_B = 1/r_i^2 + r'^2/(r_i^4 (1 - r_i^2)), A = arctan[(r_i/r') (1 - r_i^2)]."""
    if not 0.0 < r_i < 1.0:
        raise DomainError(f"Bures radial geodesics need 0 < r_i < 1, got {r_i}")
    a_b = 1.0 / r_i**2 + r_prime_i**2 / (r_i**4 * (1.0 - r_i**2))
    big_a = HALF_PI if r_prime_i == 0.0 else math.atan(r_i * (1.0 - r_i**2) / r_prime_i)
    return a_b, big_a


def bures_r_of_theta(r_i: float, r_prime_i: float, theta_i: float = 0.0,
                     theta_span: float | None = None) -> ThetaCurve:
    """Bures radial geodesic r(theta) on a constant-phi slice.

    r^2 = (1 + tan^2 w) / (1 + a_B tan^2 w) with w = A - (theta - theta_i),
    evaluated as 1 / sqrt(cos^2 w + a_B sin^2 w). The window runs until r
    reaches 1, where sin w = 0.
    """
    a_b, big_a = bures_constants(r_i, r_prime_i)
    end = _next_crossing(-big_a, 0.0, np.pi)
    if theta_span is not None:
        end = min(end, theta_span)

    def r(th):
        w = big_a - (th - theta_i)
        return 1.0 / np.sqrt(np.cos(w) ** 2 + a_b * np.sin(w) ** 2)

    def dr(th):
        w = big_a - (th - theta_i)
        return (a_b - 1.0) * np.sin(w) * np.cos(w) * r(th) ** 3

    return ThetaCurve(MetricKind.BURES, theta_i, (theta_i, theta_i + end), r, dr,
                      {"a_B": a_b, "A": big_a, "c_B": 1.0 / math.sqrt(a_b)})


@dataclass(frozen=True)
class BuresEtaClosed:
    """Constant-phi Bures geodesic in the affine parameter.

    With x = beta - k*eta, beta = arctan(sqrt(a_B) tan A) and
    k = sqrt(a_B) r_i^2 theta_dot_i:
    r^2 = cos^2 x + sin^2 x / a_B and theta = theta_i + A - arctan(tan x / sqrt(a_B)),
    the arctan taken continuously in x.
    """

    r_i: float
    theta_i: float
    theta_dot_i: float
    r_prime_i: float
    phi_i: float = 0.0
    window: tuple = (0.0, math.inf)

    @property
    def kind(self) -> MetricKind:
        return MetricKind.BURES

    @property
    def a_b(self) -> float:
        return bures_constants(self.r_i, self.r_prime_i)[0]

    @property
    def big_a(self) -> float:
        return bures_constants(self.r_i, self.r_prime_i)[1]

    @property
    def beta(self) -> float:
        a_b, big_a = bures_constants(self.r_i, self.r_prime_i)
        if self.r_prime_i == 0.0:
            return HALF_PI
        return math.atan(math.sqrt(a_b) * math.tan(big_a))

    @property
    def k(self) -> float:
        return math.sqrt(self.a_b) * self.r_i**2 * self.theta_dot_i

    def _x(self, eta):
        return self.beta - self.k * np.asarray(eta, dtype=float)

    def evaluate(self, eta, continued: bool = False):
        """(r, theta, phi) and rates; ``continued`` skips the window check."""
        eta = np.atleast_1d(np.asarray(eta, dtype=float)) if continued else _check_window(self.window, eta)
        a_b, big_a = bures_constants(self.r_i, self.r_prime_i)
        x = self._x(eta)
        sx, cx = np.sin(x), np.cos(x)
        r = np.sqrt(cx * cx + sx * sx / a_b)
        theta = self.theta_i + big_a - unwrapped_arctan(1.0 / math.sqrt(a_b), x)
        theta_dot = self.r_i**2 * self.theta_dot_i / (r * r)
        r_dot = self.k * sx * cx * (1.0 - 1.0 / a_b) / r
        phi = np.full_like(r, self.phi_i)
        return np.column_stack([r, theta, phi]), np.column_stack([r_dot, theta_dot, np.zeros_like(r)])

    def conserved(self, eta) -> dict:
        x, v = self.evaluate(eta)
        return {
            "r2_thetadot": x[:, 0] ** 2 * v[:, 1],
            "v_Bures": speed(MetricKind.BURES, x, v),
        }


def bures_geodesic_eta(r_i: float, theta_i: float, theta_dot_i: float, r_prime_i: float,
                       phi_i: float = 0.0) -> BuresEtaClosed:
    """Closed-form constant-phi Bures geodesic; r_prime_i is dr/dtheta at theta_i."""
    if theta_dot_i == 0.0:
        raise DomainError("purely radial Bures motion has no closed form; integrate numerically")
    curve = BuresEtaClosed(r_i, theta_i, theta_dot_i, r_prime_i, phi_i)
    k = curve.k
    target = 0.0
    # r reaches 1 when x = beta - k*eta hits a multiple of pi
    end = _next_crossing(-curve.beta, target, np.pi) / k if k > 0 else _next_crossing(curve.beta, target, np.pi) / -k
    return BuresEtaClosed(r_i, theta_i, theta_dot_i, r_prime_i, phi_i, (0.0, end))


def bures_spec_curve(spec: GeodesicSpec) -> BuresEtaClosed:
    if spec.velocity[2] != 0.0:
        raise DomainError("closed-form Bures geodesics need phi_dot = 0")
    r_dot, theta_dot, _ = spec.velocity
    if theta_dot == 0.0:
        raise DomainError("purely radial Bures motion has no closed form; integrate numerically")
    return bures_geodesic_eta(spec.point.r, spec.point.theta, theta_dot, r_dot / theta_dot, spec.point.phi)


def closed_form(spec: GeodesicSpec, branch: str = "unwrapped"):
    """Dispatch to the closed-form geodesic for the spec's metric."""
    if spec.kind in (MetricKind.FS, MetricKind.BSM):
        return fs_geodesic(spec, branch)
    if spec.kind is MetricKind.SJOQVIST:
        return sjoqvist_geodesic(spec, branch)
    return bures_spec_curve(spec)


# Numerical integration

def acceleration(kind: MetricKind, x: np.ndarray, v: np.ndarray, planar: bool = False) -> np.ndarray:
    """Second derivatives from the geodesic equations, batched over rows."""
    if kind.dim == 2:
        th, ph_dot, th_dot = x[:, 0], v[:, 1], v[:, 0]
        s, c = np.sin(th), np.cos(th)
        return np.column_stack([s * c * ph_dot**2, -2.0 * c / s * th_dot * ph_dot])
    r, th = x[:, 0], x[:, 1]
    r_dot, th_dot, ph_dot = v[:, 0], v[:, 1], v[:, 2]
    s, c = np.sin(th), np.cos(th)
    q = 1.0 - r * r
    acc_r = -r * r_dot**2 / q
    acc_th = s * c * ph_dot**2
    acc_ph = np.zeros_like(r) if planar else -2.0 * c / s * th_dot * ph_dot
    if kind is MetricKind.BURES:
        acc_r = acc_r + q * r * (th_dot**2 + s * s * ph_dot**2)
        acc_th = acc_th - 2.0 / r * r_dot * th_dot
        if not planar:
            acc_ph = acc_ph - 2.0 / r * r_dot * ph_dot
    return np.column_stack([acc_r, acc_th, acc_ph])


def _rk4_step(kind, y, h, planar):
    d = kind.dim

    def f(state):
        return np.hstack([state[:, d:], acceleration(kind, state[:, :d], state[:, d:], planar)])

    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def boundary_distance(kind: MetricKind, x: np.ndarray, planar: bool = False) -> np.ndarray:
    """Signed distance of each row to the chart boundary (negative outside)."""
    parts = []
    if not planar:
        parts.append(np.abs(np.sin(x[:, -2])))
    if kind.dim == 3:
        parts += [x[:, 0], 1.0 - x[:, 0]]
    if not parts:
        return np.full(len(x), np.inf)
    return np.min(np.column_stack(parts), axis=1)


@dataclass(frozen=True)
class NumericSamples:
    kind: MetricKind
    eta: np.ndarray
    coords: np.ndarray
    velocity: np.ndarray
    event_eta: np.ndarray

    def evaluate(self, eta=None):
        if eta is None:
            return self.coords, self.velocity
        idx = np.searchsorted(self.eta, np.atleast_1d(eta))
        return self.coords[..., idx, :], self.velocity[..., idx, :]


def integrate_geodesic(kind, x0, v0, eta_max: float, step: float = 1e-3, edge: float = 1e-6,
                       planar: bool = False, event_tol: float = 1e-10) -> NumericSamples:
    """Fixed-step RK4 integration of the geodesic equations.

    ``x0`` and ``v0`` may carry a leading batch axis. Each trajectory stops at
    the first step that brings it within ``edge`` of the chart boundary while
    moving toward it; the event location is refined by bisection of the final
    step to ``event_tol`` and later samples are NaN. ``planar`` drops the
    azimuthal equation (constant-phi motion) and the pole check.
    """
    kind = MetricKind.parse(kind)
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    single = x0.ndim == 1
    y = np.hstack([np.atleast_2d(x0), np.atleast_2d(v0)])
    d = kind.dim
    n = max(int(math.ceil(eta_max / step - 1e-9)), 1)
    h = eta_max / n
    etas = np.linspace(0.0, eta_max, n + 1)
    out = np.full((y.shape[0], n + 1, 2 * d), np.nan)
    out[:, 0] = y
    events = np.full(y.shape[0], np.nan)
    alive = np.ones(y.shape[0], dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(1, n + 1):
            if not alive.any():
                break
            prev = y[alive]
            new = _rk4_step(kind, prev, h, planar)
            dist_old = boundary_distance(kind, prev[:, :d], planar)
            dist_new = boundary_distance(kind, new[:, :d], planar)
            hit = ((dist_new < edge) & (dist_new < dist_old)) | ~np.isfinite(new).all(axis=1)
            idx = np.flatnonzero(alive)
            for j, row in zip(idx[hit], np.flatnonzero(hit)):
                events[j] = etas[i - 1] + _bisect_event(kind, prev[row:row + 1], h, edge, planar, event_tol)
            alive[idx[hit]] = False
            keep = ~hit
            y[idx[keep]] = new[keep]
            out[idx[keep], i] = new[keep]
    out_x, out_v = out[..., :d], out[..., d:]
    if single:
        out_x, out_v = out_x[0], out_v[0]
    return NumericSamples(kind, etas, out_x, out_v, events[0] if single else events)


def _bisect_event(kind, y, h, edge, planar, tol):
    lo, hi = 0.0, h
    d = kind.dim
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        new = _rk4_step(kind, y, mid, planar)
        if np.isfinite(new).all() and boundary_distance(kind, new[:, :d], planar)[0] >= edge:
            lo = mid
        else:
            hi = mid
    return hi
