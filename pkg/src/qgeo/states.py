"""Qubit states: Bloch coordinates, density matrices, spectra and overlaps.

Density matrices are plain 2x2 complex ``numpy`` arrays and pure states are
length-2 complex arrays. ``BlochPoint`` carries the (r, theta, phi) chart used
by every metric in the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DomainError

TWO_PI = 2.0 * np.pi
ANGLE_TOL = 1e-12
STATE_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class BlochPoint:
    """A point of the Bloch ball in spherical coordinates.

    ``phi`` is reduced mod 2*pi and ``theta`` is clamped into [0, pi] when it
    overshoots by less than 1e-12; larger violations raise ``DomainError``.
    """

    r: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        r, theta, phi = float(self.r), float(self.theta), float(self.phi)
        if not np.isfinite([r, theta, phi]).all():
            raise DomainError(f"non-finite Bloch coordinates {(r, theta, phi)}")
        if -ANGLE_TOL < r < 0.0:
            r = 0.0
        elif 1.0 < r < 1.0 + ANGLE_TOL:
            r = 1.0
        if not 0.0 <= r <= 1.0:
            raise DomainError(f"r={r} outside [0, 1]")
        if -ANGLE_TOL < theta < 0.0:
            theta = 0.0
        elif np.pi < theta < np.pi + ANGLE_TOL:
            theta = np.pi
        if not 0.0 <= theta <= np.pi:
            raise DomainError(f"theta={theta} outside [0, pi]")
        phi = phi % TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @property
    def is_pure(self) -> bool:
        return self.r == 1.0

    def vector(self) -> np.ndarray:
        """Cartesian polarization vector r * n."""
        st = np.sin(self.theta)
        return self.r * np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    def coords(self, dim: int = 3) -> np.ndarray:
        """Chart coordinates: (r, theta, phi) for dim 3, (theta, phi) for dim 2."""
        if dim == 3:
            return np.array([self.r, self.theta, self.phi])
        if dim == 2:
            return np.array([self.theta, self.phi])
        raise ValueError(f"unsupported chart dimension {dim}")


@dataclass(frozen=True)
class SpectralDecomposition:
    p0: float
    p1: float
    e0: np.ndarray
    e1: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([self.p0, self.p1])

    @property
    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        return self.e0, self.e1


def validate_density(rho, tol: float = STATE_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array after checking it is a qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise DomainError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise DomainError("density matrix trace differs from 1")
    if np.real(np.linalg.det(rho)) < -tol or np.real(rho[0, 0]) < -tol or np.real(rho[1, 1]) < -tol:
        raise DomainError("density matrix is not positive semidefinite")
    return rho


def validate_pure(psi, tol: float = STATE_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2,):
        raise DomainError(f"expected a 2-vector, got shape {psi.shape}")
    if abs(np.vdot(psi, psi).real - 1.0) > tol:
        raise DomainError("pure state is not normalized")
    return psi


def bloch_to_density(point: BlochPoint) -> np.ndarray:
    """(1 + r.sigma) / 2 for the point's polarization vector."""
    r, th, ph = point.r, point.theta, point.phi
    off = 0.5 * r * np.sin(th) * np.exp(-1j * ph)
    return np.array(
        [[0.5 * (1.0 + r * np.cos(th)), off], [np.conj(off), 0.5 * (1.0 - r * np.cos(th))]],
        dtype=complex,
    )


def bloch_vector(rho) -> np.ndarray:
    """Expectation values tr(rho sigma) as a real 3-vector."""
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(rho @ s).real for s in PAULI])


def density_to_bloch(rho) -> BlochPoint:
    """Invert :func:`bloch_to_density`; the maximally mixed state maps to (0, 0, 0)."""
    rho = validate_density(rho)
    x, y, z = bloch_vector(rho)
    rho_xy = np.hypot(x, y)
    r = np.hypot(rho_xy, z)
    if r == 0.0:
        return BlochPoint(0.0, 0.0, 0.0)
    theta = np.arctan2(rho_xy, z)
    phi = np.arctan2(y, x) if rho_xy > 0.0 else 0.0
    return BlochPoint(min(r, 1.0), theta, phi)


def pure_state(theta: float, phi: float) -> np.ndarray:
    """cos(theta/2)|0> + exp(i phi) sin(theta/2)|1>."""
    return np.array([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)], dtype=complex)


def canonical_phase(v) -> np.ndarray:
    """Fix the global phase so the first nonzero component is real and positive."""
    v = np.asarray(v, dtype=complex)
    for i, comp in enumerate(v):
        if abs(comp) > 1e-15:
            out = v * (abs(comp) / comp)
            out[i] = abs(comp)
            return out
    return v


def eigenvectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors of the state with polarization direction (theta, phi).

    The first belongs to eigenvalue (1 + r)/2, the second to (1 - r)/2. Both are
    returned with the canonical global phase.
    """
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    w = np.exp(-1j * phi)
    e0 = np.array([w * c, s], dtype=complex)
    e1 = np.array([-w * s, c], dtype=complex)
    return canonical_phase(e0), canonical_phase(e1)


def spectral(rho) -> SpectralDecomposition:
    """Closed-form eigen-decomposition of a nondegenerate qubit state."""
    point = density_to_bloch(rho)
    if point.r == 0.0:
        raise DegeneracyError("maximally mixed state has a degenerate spectrum")
    e0, e1 = eigenvectors(point.theta, point.phi)
    return SpectralDecomposition(0.5 * (1.0 + point.r), 0.5 * (1.0 - point.r), e0, e1)


def _eigvals(rho) -> np.ndarray:
    r = np.linalg.norm(bloch_vector(rho))
    return np.array([0.5 * (1.0 + r), 0.5 * (1.0 - r)])


def purity(rho) -> float:
    """Tr rho^2."""
    rho = validate_density(rho)
    return float(np.trace(rho @ rho).real)


def von_neumann_entropy(rho) -> float:
    """-Tr rho log rho in nats, with 0 log 0 = 0."""
    p = _eigvals(validate_density(rho))
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p)) + 0.0)


def wootters_angle(psi_i, psi_f) -> float:
    """arccos |<psi_i|psi_f>|."""
    overlap = abs(np.vdot(validate_pure(psi_i), validate_pure(psi_f)))
    return float(np.arccos(min(overlap, 1.0)))


def sqrtm_psd(m) -> np.ndarray:
    """Square root of a 2x2 Hermitian positive semidefinite matrix.

    Uses the closed-form eigenvalues (tr/2 +- sqrt(tr^2/4 - det)) and the
    identity sqrt(M) = (M + sqrt(l0 l1) I) / (sqrt(l0) + sqrt(l1)).
    """
    m = np.asarray(m, dtype=complex)
    m = 0.5 * (m + m.conj().T)
    tr = np.trace(m).real
    det = np.linalg.det(m).real
    disc = max(0.25 * tr * tr - det, 0.0)
    l0 = 0.5 * tr + np.sqrt(disc)
    l1 = 0.5 * tr - np.sqrt(disc)
    if l1 < -STATE_TOL or l0 < -STATE_TOL:
        raise DomainError("matrix square root of a non-PSD matrix")
    if l1 < 16.0 * np.finfo(float).eps * abs(l0):
        # below rounding level; a square root would inflate it to ~1e-8
        l1 = 0.0
    s0, s1 = np.sqrt(max(l0, 0.0)), np.sqrt(max(l1, 0.0))
    if s0 + s1 == 0.0:
        return np.zeros((2, 2), dtype=complex)
    return (m + s0 * s1 * np.eye(2)) / (s0 + s1)


def bures_fidelity(rho_i, rho_f) -> float:
    """[Tr sqrt(sqrt(rho_i) rho_f sqrt(rho_i))]^2."""
    rho_i, rho_f = validate_density(rho_i), validate_density(rho_f)
    root = sqrtm_psd(rho_i)
    inner = sqrtm_psd(root @ rho_f @ root)
    return float(min(max(np.trace(inner).real ** 2, 0.0), 1.0))


def bures_angle(rho_i, rho_f) -> float:
    """Bures angle arccos(sqrt(F)), which equals the Wootters angle on pure states."""
    return float(np.arccos(np.sqrt(bures_fidelity(rho_i, rho_f))))


def bures_distance(rho_i, rho_f) -> float:
    """sqrt(2 (1 - sqrt(F)))."""
    return float(np.sqrt(max(2.0 * (1.0 - np.sqrt(bures_fidelity(rho_i, rho_f))), 0.0)))


def precession_demo(theta0: float, phi0: float, omega0: float, t: float) -> BlochPoint:
    """Pure state evolved under H = hbar*omega0*sigma_z for time t.

    The polar angle is conserved and the azimuth advances by 2*omega0*t.
    """
    return BlochPoint(1.0, theta0, phi0 + 2.0 * omega0 * t)
