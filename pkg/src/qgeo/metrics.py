"""Metric tensors on the qubit state manifolds.

Coordinates are (theta, phi) for the two sphere metrics and (r, theta, phi)
for the two ball metrics. All four metrics are diagonal in these charts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DomainError
from .states import BlochPoint, eigenvectors, validate_pure

SINGULAR_TOL = 1e-12


class MetricKind(enum.Enum):
    FS = "fs"
    SJOQVIST = "sjoqvist"
    BURES = "bures"
    BSM = "bsm"

    @property
    def dim(self) -> int:
        return 2 if self in (MetricKind.FS, MetricKind.BSM) else 3

    @property
    def label(self) -> str:
        return {"fs": "FS", "sjoqvist": "Sjoqvist", "bures": "Bures", "bsm": "BSM"}[self.value]

    @property
    def axes(self) -> tuple[str, ...]:
        return ("theta", "phi") if self.dim == 2 else ("r", "theta", "phi")

    @classmethod
    def parse(cls, value) -> "MetricKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class MetricEvaluation:
    components: np.ndarray
    determinant: float
    fisher_density: float
    coordinate_singular: bool = False


def diagonal(kind: MetricKind, r, theta) -> np.ndarray:
    """Diagonal entries of the metric at raw coordinates, without domain checks.

    Broadcasts over array-valued ``r`` and ``theta``; the leading axis of the
    result indexes the coordinate. Complex inputs are kept complex so that
    complex-step derivatives can be taken through this function.
    """
    dtype = np.result_type(np.asarray(r), np.asarray(theta), float)
    r, theta = np.broadcast_arrays(np.asarray(r, dtype=dtype), np.asarray(theta, dtype=dtype))
    s2 = np.sin(theta) ** 2
    one = np.ones_like(s2)
    if kind is MetricKind.FS:
        return np.stack([0.25 * one, 0.25 * s2])
    if kind is MetricKind.BSM:
        return np.stack([one, s2])
    radial = 0.25 / (1.0 - r * r)
    if kind is MetricKind.SJOQVIST:
        return np.stack([radial, 0.25 * one, 0.25 * s2])
    return np.stack([radial, 0.25 * r * r, 0.25 * r * r * s2])


def check_domain(kind: MetricKind, r: float) -> None:
    if kind.dim == 3 and not r < 1.0:
        raise DomainError(f"{kind.label} radial component diverges at r={r}")


def metric_tensor(kind, point: BlochPoint) -> MetricEvaluation:
    kind = MetricKind.parse(kind)
    check_domain(kind, point.r)
    diag = diagonal(kind, point.r, point.theta)
    det = float(np.prod(diag))
    singular = abs(np.sin(point.theta)) < SINGULAR_TOL or (kind is MetricKind.BURES and point.r == 0.0)
    if singular:
        det = 0.0
    return MetricEvaluation(np.diag(diag), det, float(np.sqrt(det)), singular)


def line_element(kind, point: BlochPoint, displacement) -> float:
    """ds^2 = g_mn dxi^m dxi^n."""
    kind = MetricKind.parse(kind)
    d = np.asarray(displacement, dtype=float)
    if d.shape != (kind.dim,):
        raise ValueError(f"{kind.label} needs a {kind.dim}-component displacement")
    check_domain(kind, point.r)
    return float(np.dot(diagonal(kind, point.r, point.theta), d * d))


def fs_overlap_check(psi, psi_bar) -> float:
    """1 - |<psi_bar|psi>|^2 for two pure states."""
    overlap = np.vdot(validate_pure(psi_bar), validate_pure(psi))
    return float(1.0 - abs(overlap) ** 2)


def fisher_rao_discrete(probabilities, jacobian) -> np.ndarray:
    """sum_k (1/p_k) dp_k/dxi^m dp_k/dxi^n.

    ``jacobian`` has shape (K, d) with rows dp_k/dxi.
    """
    p = np.asarray(probabilities, dtype=float)
    jac = np.asarray(jacobian, dtype=float)
    if jac.ndim == 1:
        jac = jac[:, None]
    if np.any(p <= 0.0):
        raise DomainError("Fisher-Rao metric needs strictly positive probabilities")
    if abs(p.sum() - 1.0) > 1e-12:
        raise DomainError("probabilities do not sum to 1")
    return (jac / p[:, None]).T @ jac


def _eigvec_derivatives(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """d e_k / d(theta, phi) for the canonical eigenvectors; shape (2, 2) per k.

    In canonical phase e0 = (c, e^{i phi} s) and e1 = (s, -e^{i phi} c) with
    c = cos(theta/2), s = sin(theta/2).
    """
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    w = np.exp(1j * phi)
    de0 = np.array([[-0.5 * s, 0.5 * w * c], [0.0, 1j * w * s]], dtype=complex)
    de1 = np.array([[0.5 * c, 0.5 * w * s], [0.0, -1j * w * c]], dtype=complex)
    return de0, de1


def projector_fs_term(e, de) -> tuple[float, float]:
    """FS line element of a rank-one projector, computed two ways.

    Returns (<de|de> - |<e|de>|^2, tr(P dP dP)) for P = |e><e|.
    """
    e = np.asarray(e, dtype=complex)
    de = np.asarray(de, dtype=complex)
    ket = np.vdot(de, de).real - abs(np.vdot(e, de)) ** 2
    p = np.outer(e, e.conj())
    dp = np.outer(de, e.conj()) + np.outer(e, de.conj())
    return float(ket), float(np.trace(p @ dp @ dp).real)


def sjoqvist_decomposition(point: BlochPoint, displacement) -> tuple[float, float]:
    """Split the Sjoqvist line element into (classical, quantum) parts.

    The classical part is the Fisher-Rao term of the eigenvalue distribution;
    the quantum part is the eigenvalue-weighted FS length of the eigenvectors.
    """
    r = point.r
    if not 0.0 < r < 1.0:
        raise DomainError(f"Sjoqvist decomposition needs 0 < r < 1, got r={r}")
    dr, dth, dph = np.asarray(displacement, dtype=float)
    p = np.array([0.5 * (1.0 + r), 0.5 * (1.0 - r)])
    dp = np.array([0.5 * dr, -0.5 * dr])
    classical = 0.25 * float(np.sum(dp * dp / p))
    e = eigenvectors(point.theta, point.phi)
    quantum = 0.0
    for pk, ek, dek in zip(p, e, _eigvec_derivatives(point.theta, point.phi)):
        quantum += pk * projector_fs_term(ek, dek[0] * dth + dek[1] * dph)[0]
    return classical, float(quantum)


def _rho(r, theta, phi) -> np.ndarray:
    off = 0.5 * r * np.sin(theta) * np.exp(-1j * phi)
    return np.array(
        [[0.5 * (1.0 + r * np.cos(theta)), off], [np.conj(off), 0.5 * (1.0 - r * np.cos(theta))]],
        dtype=complex,
    )


def drho(point: BlochPoint, displacement) -> np.ndarray:
    """Exact differential of rho(r, theta, phi) along a coordinate displacement."""
    r, th, ph = point.r, point.theta, point.phi
    dr, dth, dph = np.asarray(displacement, dtype=float)
    diag = 0.5 * (np.cos(th) * dr - r * np.sin(th) * dth)
    off = 0.5 * np.exp(-1j * ph) * (np.sin(th) * dr + r * np.cos(th) * dth - 1j * r * np.sin(th) * dph)
    return np.array([[diag, off], [np.conj(off), -diag]], dtype=complex)


def spectral_sum(point: BlochPoint, d_rho) -> float:
    """(1/2) sum_{m,n} |<e_m|d rho|e_n>|^2 / (p_m + p_n)."""
    r = point.r
    if r == 0.0:
        raise DegeneracyError("spectral sum needs a nondegenerate state")
    p = (0.5 * (1.0 + r), 0.5 * (1.0 - r))
    e = eigenvectors(point.theta, point.phi)
    total = 0.0
    for m in range(2):
        for n in range(2):
            total += abs(np.vdot(e[m], d_rho @ e[n])) ** 2 / (p[m] + p[n])
    return 0.5 * total


def bures_from_spectral(point: BlochPoint, displacement, h: float = 1e-4, richardson: bool = True) -> float:
    """Bures line element from the spectral sum with a finite-difference d rho.

    d rho is the central difference of rho along ``displacement`` with step h,
    which makes the estimate accurate to O(h^2). With ``richardson`` the
    estimates at h and h/2 are combined to cancel the leading error term.
    """
    if not 0.0 < point.r < 1.0:
        raise DomainError(f"spectral Bures form needs 0 < r < 1, got r={point.r}")
    d = np.asarray(displacement, dtype=float)
    x = point.coords()

    def estimate(step):
        diff = (_rho(*(x + step * d)) - _rho(*(x - step * d))) / (2.0 * step)
        return spectral_sum(point, diff)

    if not richardson:
        return estimate(h)
    return (4.0 * estimate(0.5 * h) - estimate(h)) / 3.0


class MCPFunction(enum.Enum):
    """Named Morozova-Cencov functions f(t)."""

    BURES = "bures"
    SJOQVIST = "sjoqvist"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self is MCPFunction.BURES:
            out = 0.5 * (1.0 + t)
        else:
            out = 0.5 * (1.0 - t) ** 2 / (1.0 + t)
        return out if out.ndim else float(out)


def mcp_metric(f: MCPFunction, point: BlochPoint, displacement) -> float:
    """(1/4)[dr^2/(1-r^2) + (1/f(t)) r^2/(1+r) dOmega^2] with t = (1-r)/(1+r)."""
    r = point.r
    if not r < 1.0:
        raise DomainError(f"monotone metric form needs r < 1, got r={r}")
    t = (1.0 - r) / (1.0 + r)
    ft = f(t)
    if ft == 0.0:
        raise DomainError(f"f({t}) = 0: the {f.value} monotone metric is singular at r={r}")
    dr, dth, dph = np.asarray(displacement, dtype=float)
    d_omega2 = dth * dth + np.sin(point.theta) ** 2 * dph * dph
    return float(0.25 * (dr * dr / (1.0 - r * r) + r * r / ((1.0 + r) * ft) * d_omega2))
