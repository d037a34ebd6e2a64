"""Connection and curvature of the qubit metrics.

Index layout used throughout:

* ``gamma[k, i, j]`` is the Christoffel symbol with upper index k.
* ``dgamma[l, k, i, j]`` is its derivative along coordinate l.
* ``riemann_up[a, b, c, d]`` is R^a_{bcd} and ``riemann[a, b, c, d]`` lowers
  the first index with the metric.

The sign convention gives the unit 2-sphere scalar curvature +2. Passing
``convention="weinberg"`` flips the sign of Riemann and Ricci.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .metrics import MetricKind, diagonal
from .states import BlochPoint

CONVENTIONS = ("standard", "weinberg")


@dataclass(frozen=True)
class TangentPlane:
    """A pair of distinct orthonormal frame axes, e.g. ("r", "theta")."""

    first: str
    second: str

    def __post_init__(self):
        if self.first == self.second:
            raise ValueError("a tangent plane needs two distinct frame axes")


@dataclass(frozen=True)
class CurvatureReport:
    kind: MetricKind
    christoffels: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    sectionals: dict = field(default_factory=dict)


def _check_interior(kind: MetricKind, point: BlochPoint) -> None:
    if abs(np.sin(point.theta)) < 1e-12:
        raise DomainError("curvature needs sin(theta) != 0")
    if kind.dim == 3 and not 0.0 < point.r < 1.0:
        raise DomainError(f"curvature of {kind.label} needs 0 < r < 1, got r={point.r}")


def metric_matrix(kind: MetricKind, x) -> np.ndarray:
    """Metric at raw chart coordinates ``x`` (no domain checks)."""
    if kind.dim == 2:
        return np.diag(diagonal(kind, 0.0, x[0]))
    return np.diag(diagonal(kind, x[0], x[1]))


def _analytic(kind: MetricKind, point: BlochPoint, dtype=float) -> tuple[np.ndarray, np.ndarray]:
    d = kind.dim
    g = np.zeros((d, d, d), dtype=dtype)
    dg = np.zeros((d, d, d, d), dtype=dtype)
    theta = dtype(point.theta)
    s, c = np.sin(theta), np.cos(theta)
    cot = c / s

    def sym(k, i, j, val):
        g[k, i, j] = g[k, j, i] = val

    def dsym(l, k, i, j, val):
        dg[l, k, i, j] = dg[l, k, j, i] = val

    if d == 2:
        # (theta, phi); the constant factor of the metric drops out
        sym(0, 1, 1, -s * c)
        sym(1, 0, 1, cot)
        dsym(0, 0, 1, 1, -np.cos(2.0 * theta))
        dsym(0, 1, 0, 1, -1.0 / s**2)
        return g, dg

    r = dtype(point.r)
    q = 1.0 - r * r
    sym(0, 0, 0, r / q)
    dsym(0, 0, 0, 0, (1.0 + r * r) / q**2)
    sym(1, 2, 2, -s * c)
    dsym(1, 1, 2, 2, -np.cos(2.0 * theta))
    sym(2, 1, 2, cot)
    dsym(1, 2, 1, 2, -1.0 / s**2)
    if kind is MetricKind.BURES:
        sym(0, 1, 1, -r * q)
        dsym(0, 0, 1, 1, -(1.0 - 3.0 * r * r))
        sym(0, 2, 2, -r * q * s * s)
        dsym(0, 0, 2, 2, -(1.0 - 3.0 * r * r) * s * s)
        dsym(1, 0, 2, 2, -2.0 * r * q * s * c)
        sym(1, 0, 1, 1.0 / r)
        dsym(0, 1, 0, 1, -1.0 / r**2)
        sym(2, 0, 2, 1.0 / r)
        dsym(0, 2, 0, 2, -1.0 / r**2)
    return g, dg


def christoffel(kind, point: BlochPoint) -> np.ndarray:
    """Closed-form Christoffel symbols gamma[k, i, j]."""
    kind = MetricKind.parse(kind)
    _check_interior(kind, point)
    return _analytic(kind, point)[0]


def christoffel_derivatives(kind, point: BlochPoint) -> np.ndarray:
    """Closed-form derivatives dgamma[l, k, i, j]."""
    kind = MetricKind.parse(kind)
    _check_interior(kind, point)
    return _analytic(kind, point)[1]


def _fd_step(kind: MetricKind, x, h: float) -> float:
    """Shrink h so the 4th-order stencil (reach 2h) stays inside the chart."""
    room = [x[-2], np.pi - x[-2]]
    if kind.dim == 3:
        room += [x[0], 1.0 - x[0]]
    limit = min(room) / 4.0
    if limit <= 1e-7:
        raise DomainError("point too close to the chart boundary for finite differences")
    return min(h, limit)


def _d4(f, x, axis: int, h: float):
    e = np.zeros_like(x)
    e[axis] = h
    return (-f(x + 2 * e) + 8.0 * f(x + e) - 8.0 * f(x - e) + f(x - 2 * e)) / (12.0 * h)


def _gamma_from_metric(kind: MetricKind, x, h: float = 1e-30) -> np.ndarray:
    """Christoffels with metric derivatives from the complex step Im g(x + i h e) / h."""
    d = kind.dim
    dmetric = np.empty((d, d, d))
    for ax in range(d):
        e = np.zeros(d, dtype=complex)
        e[ax] = 1j * h
        dmetric[ax] = metric_matrix(kind, x + e).imag / h
    ginv = np.linalg.inv(metric_matrix(kind, x))
    # dmetric[l, i, j] = d_l g_ij
    lowered = 0.5 * (
        np.einsum("isj->sij", dmetric) + np.einsum("jis->sij", dmetric) - dmetric
    )
    return np.einsum("ks,sij->kij", ginv, lowered)


def christoffel_numeric(kind, point: BlochPoint) -> np.ndarray:
    """Christoffel symbols from complex-step derivatives of the metric."""
    kind = MetricKind.parse(kind)
    _check_interior(kind, point)
    return _gamma_from_metric(kind, point.coords(kind.dim))


def christoffel_derivatives_numeric(kind, point: BlochPoint, h: float = 1e-3) -> np.ndarray:
    """4th-order central differences of :func:`christoffel_numeric`.

    The step is capped at 1/400 of the distance to the nearest chart edge,
    since the connection of the ball metrics grows like 1/r near the centre.
    """
    kind = MetricKind.parse(kind)
    _check_interior(kind, point)
    x = point.coords(kind.dim)
    h = min(_fd_step(kind, x, h), _fd_step(kind, x, 1.0) / 100.0)
    return np.array([_d4(lambda y: _gamma_from_metric(kind, y), x, ax, h) for ax in range(kind.dim)])


def riemann_up(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """R^a_{bcd} = d_c G^a_{bd} - d_d G^a_{bc} + G^a_{ec} G^e_{bd} - G^a_{ed} G^e_{bc}."""
    return (
        np.einsum("cabd->abcd", dgamma)
        - np.einsum("dabc->abcd", dgamma)
        + np.einsum("aec,ebd->abcd", gamma, gamma)
        - np.einsum("aed,ebc->abcd", gamma, gamma)
    )


def ricci_from(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """R_mn = d_a G^a_mn - d_n G^a_ma + G^a_mn G^b_ab - G^c_ma G^a_nc."""
    return (
        np.einsum("aamn->mn", dgamma)
        - np.einsum("nama->mn", dgamma)
        + np.einsum("amn,bab->mn", gamma, gamma)
        - np.einsum("cma,anc->mn", gamma, gamma)
    )


def sectional_from(riemann: np.ndarray, g: np.ndarray, u, v) -> float:
    """R_{abcd} u^a v^b u^c v^d / (<u,u><v,v> - <u,v>^2)."""
    u = np.asarray(u, dtype=g.dtype)
    v = np.asarray(v, dtype=g.dtype)
    num = np.einsum("abcd,a,b,c,d->", riemann, u, v, u, v)
    den = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
    return float(num / den)


def frame_vector(kind: MetricKind, g: np.ndarray, axis: str) -> np.ndarray:
    """Coordinate basis vector along ``axis`` divided by its scale factor."""
    if axis not in kind.axes:
        raise DomainError(f"axis {axis!r} is not available for the {kind.label} metric")
    i = kind.axes.index(axis)
    e = np.zeros(kind.dim, dtype=g.dtype)
    e[i] = 1.0 / np.sqrt(g[i, i])
    return e


def curvature_report(kind, point: BlochPoint, method: str = "analytic", convention: str = "standard",
                     h: float = 1e-3) -> CurvatureReport:
    """Christoffels, lowered Riemann, Ricci, scalar and frame sectional curvatures.

    ``method="numeric"`` replaces the closed-form connection by finite
    differences of the metric (and of the connection for its derivatives).
    """
    kind = MetricKind.parse(kind)
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown sign convention {convention!r}")
    _check_interior(kind, point)
    x = point.coords(kind.dim)
    if method == "analytic":
        # extended precision: near the centre and the poles the Ricci terms
        # cancel at the 1/(r^2 sin^2) scale and lose ~4 digits in float64
        gamma, dgamma = _analytic(kind, point, dtype=np.longdouble)
        x = x.astype(np.longdouble)
    elif method == "numeric":
        gamma = christoffel_numeric(kind, point)
        dgamma = christoffel_derivatives_numeric(kind, point, h=h)
    else:
        raise ValueError(f"unknown method {method!r}")
    sign = 1.0 if convention == "standard" else -1.0
    g = metric_matrix(kind, x)
    riem = sign * np.einsum("ae,ebcd->abcd", g, riemann_up(gamma, dgamma))
    ricci = sign * ricci_from(gamma, dgamma)
    # all four metrics are diagonal in their charts
    scalar = float(np.sum(np.diag(ricci) / np.diag(g)))
    sectionals = {}
    for a, b in itertools.permutations(kind.axes, 2):
        sectionals[(a, b)] = float(sectional_from(riem, g, frame_vector(kind, g, a), frame_vector(kind, g, b)))
    gamma, riem, ricci = (np.asarray(t, dtype=float) for t in (gamma, riem, ricci))
    return CurvatureReport(kind, gamma, riem, ricci, scalar, sectionals)



def sectional_curvature(kind, point: BlochPoint, plane: TangentPlane) -> float:
    kind = MetricKind.parse(kind)
    for axis in (plane.first, plane.second):
        if axis not in kind.axes:
            raise DomainError(f"axis {axis!r} is not available for the {kind.label} metric")
    return curvature_report(kind, point).sectionals[(plane.first, plane.second)]


@dataclass(frozen=True)
class SymmetryReport:
    kind: MetricKind
    dimension: int
    curvature_constant: float
    residuals: dict
    tol: float

    @property
    def failing(self) -> list[str]:
        return [name for name, res in self.residuals.items() if not res <= self.tol]

    @property
    def maximally_symmetric(self) -> bool:
        return not self.failing


def maximal_symmetry_check(kind, points, tol: float = 1e-8) -> SymmetryReport:
    """Test R = n(n-1)K, Ric = (n-1)K g and the constant-curvature Riemann tensor.

    K is the mean frame sectional curvature over all sample points. Residuals
    are maxima over the sample.
    """
    kind = MetricKind.parse(kind)
    points = list(points)
    if len(points) < 2:
        raise ValueError("maximal symmetry check needs at least two sample points")
    n = kind.dim
    reports = [curvature_report(kind, p) for p in points]
    k = float(np.mean([v for rep in reports for v in rep.sectionals.values()]))
    res = {"sectional": 0.0, "scalar": 0.0, "ricci": 0.0, "riemann": 0.0}
    for p, rep in zip(points, reports):
        g = metric_matrix(kind, p.coords(n))
        model = k * (np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g))
        res["sectional"] = max(res["sectional"], max(abs(v - k) for v in rep.sectionals.values()))
        res["scalar"] = max(res["scalar"], abs(rep.scalar - n * (n - 1) * k))
        res["ricci"] = max(res["ricci"], float(np.max(np.abs(rep.ricci - (n - 1) * k * g))))
        res["riemann"] = max(res["riemann"], float(np.max(np.abs(rep.riemann - model))))
    return SymmetryReport(kind, n, k, res, tol)


# Killing fields of the unit sphere d theta^2 + sin^2 theta d phi^2, lowered.

def _killing_basis(theta, phi):
    """Lowered components and their (theta, phi) derivatives for k1, k2, k3.

    Returns arrays of shape (3, 2) and (3, 2, 2): ``low[f, s]`` is k_s of field
    f and ``dlow[f, p, s]`` is d_p k_s.
    """
    s, c = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    c2 = np.cos(2.0 * theta)
    low = np.array([[sp, s * c * cp], [-cp, s * c * sp], [0.0, -s * s]])
    dlow = np.array([
        [[0.0, c2 * cp], [cp, -s * c * sp]],
        [[0.0, c2 * sp], [sp, s * c * cp]],
        [[0.0, -2.0 * s * c], [0.0, 0.0]],
    ])
    return low, dlow


KILLING_FIELDS = {"k1": (1.0, 0.0, 0.0), "k2": (0.0, 1.0, 0.0), "k3": (0.0, 0.0, 1.0)}


def killing_residual(coefficients, theta: float, phi: float) -> float:
    """max |D_p k_s + D_s k_p| for the field sum_f coefficients[f] * k_f."""
    if abs(np.sin(theta)) < 1e-6:
        raise DomainError("Killing check needs points away from the poles")
    a = np.asarray(coefficients, dtype=float)
    low, dlow = _killing_basis(theta, phi)
    k = a @ low
    dk = np.einsum("f,fps->ps", a, dlow)
    gamma = _analytic(MetricKind.BSM, BlochPoint(1.0, theta, phi))[0]
    cov = dk - np.einsum("lsp,l->ps", gamma, k)
    return float(np.max(np.abs(cov + cov.T)))


def killing_check(field, grid: int = 50, margin: float = 0.05) -> float:
    """Largest Killing residual over a grid x grid sample of the sphere.

    ``field`` is a name from ``KILLING_FIELDS`` or a length-3 coefficient
    vector over (k1, k2, k3).
    """
    coeffs = KILLING_FIELDS[field] if isinstance(field, str) else field
    thetas = np.linspace(margin, np.pi - margin, grid)
    phis = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    return max(killing_residual(coeffs, t, p) for t in thetas for p in phis)
