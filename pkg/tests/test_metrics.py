import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgeo.errors import DegeneracyError, DomainError
from qgeo.metrics import (
    MCPFunction,
    MetricKind,
    _rho,
    bures_from_spectral,
    diagonal,
    drho,
    fisher_rao_discrete,
    fs_overlap_check,
    line_element,
    mcp_metric,
    metric_tensor,
    projector_fs_term,
    sjoqvist_decomposition,
    spectral_sum,
)
from qgeo.states import BlochPoint, eigenvectors, pure_state

interior_r = st.floats(0.02, 0.98)
interior_theta = st.floats(0.05, np.pi - 0.05)
azimuth = st.floats(0.0, 2 * np.pi, exclude_max=True)
component = st.floats(-2.0, 2.0)
displacement = st.tuples(component, component, component).filter(lambda d: np.linalg.norm(d) > 1e-3)


def test_parse_and_dims():
    assert MetricKind.parse("Bures") is MetricKind.BURES
    assert [k.dim for k in MetricKind] == [2, 3, 3, 2]
    assert MetricKind.SJOQVIST.axes == ("r", "theta", "phi")
    with pytest.raises(ValueError):
        MetricKind.parse("euclid")


def test_diagonal_values():
    r, th = 0.5, 1.0
    s2 = np.sin(th) ** 2
    assert np.allclose(diagonal(MetricKind.FS, 0, th), [0.25, 0.25 * s2])
    assert np.allclose(diagonal(MetricKind.BSM, 0, th), [1.0, s2])
    assert np.allclose(diagonal(MetricKind.SJOQVIST, r, th), [1 / 3, 0.25, 0.25 * s2])
    assert np.allclose(diagonal(MetricKind.BURES, r, th), [1 / 3, 0.0625, 0.0625 * s2])


def test_diagonal_broadcasts():
    out = diagonal(MetricKind.BURES, np.array([0.1, 0.2]), 1.0)
    assert out.shape == (3, 2)


def test_metric_tensor_flags_coordinate_singularities():
    assert metric_tensor("fs", BlochPoint(1.0, 0.0)).coordinate_singular
    assert metric_tensor("bures", BlochPoint(0.0, 1.0)).coordinate_singular
    ev = metric_tensor("sjoqvist", BlochPoint(0.0, 1.0))
    assert not ev.coordinate_singular
    assert ev.determinant == pytest.approx(0.25**3 * np.sin(1.0) ** 2)
    assert ev.fisher_density == pytest.approx(np.sqrt(ev.determinant))


@pytest.mark.parametrize("kind", ["sjoqvist", "bures"])
def test_ball_metrics_diverge_on_boundary(kind):
    with pytest.raises(DomainError):
        metric_tensor(kind, BlochPoint(1.0, 1.0))
    with pytest.raises(DomainError):
        line_element(kind, BlochPoint(1.0, 1.0), [1, 0, 0])


def test_line_element_shape_check():
    with pytest.raises(ValueError):
        line_element("fs", BlochPoint(1.0, 1.0), [1, 0, 0])


@given(interior_theta, azimuth, st.floats(-1, 1), st.floats(-1, 1))
def test_fs_line_element_from_overlap(theta, phi, dth, dph):
    # 1 - |<psi(x - dx/2)|psi(x + dx/2)>|^2 = ds^2 + O(dx^4)
    eps = 1e-4
    lo = pure_state(theta - 0.5 * eps * dth, phi - 0.5 * eps * dph)
    hi = pure_state(theta + 0.5 * eps * dth, phi + 0.5 * eps * dph)
    ds2 = line_element("fs", BlochPoint(1.0, theta, phi), [dth, dph])
    assert fs_overlap_check(hi, lo) / eps**2 == pytest.approx(ds2, abs=1e-7)


def test_fisher_rao_two_outcome():
    r = 0.3
    p = np.array([(1 + r) / 2, (1 - r) / 2])
    jac = np.array([0.5, -0.5])
    assert fisher_rao_discrete(p, jac)[0, 0] == pytest.approx(1 / (1 - r * r))
    with pytest.raises(DomainError):
        fisher_rao_discrete([1.0, 0.0], [0.5, -0.5])
    with pytest.raises(DomainError):
        fisher_rao_discrete([0.5, 0.6], [0.5, -0.5])


@given(interior_theta, azimuth, st.floats(-1, 1), st.floats(-1, 1))
def test_projector_forms_agree(theta, phi, a, b):
    for e in eigenvectors(theta, phi):
        # tangent to the unit sphere: Re<e|de> = 0
        de = 1j * a * e + b * np.array([e[1].conj(), -e[0].conj()])
        ket, trace = projector_fs_term(e, de)
        assert ket == pytest.approx(trace, abs=1e-12)


@given(interior_r, interior_theta, azimuth, displacement)
def test_sjoqvist_decomposition_sums_to_metric(r, theta, phi, d):
    p = BlochPoint(r, theta, phi)
    classical, quantum = sjoqvist_decomposition(p, d)
    assert classical == pytest.approx(d[0] ** 2 / (4 * (1 - r * r)), rel=1e-12)
    assert classical + quantum == pytest.approx(line_element("sjoqvist", p, d), rel=1e-10, abs=1e-14)


@given(interior_r, interior_theta, azimuth, displacement)
def test_drho_matches_finite_difference(r, theta, phi, d):
    p = BlochPoint(r, theta, phi)
    h = 1e-5
    x = p.coords()
    fd = (_rho(*(x + h * np.array(d))) - _rho(*(x - h * np.array(d)))) / (2 * h)
    assert np.allclose(drho(p, d), fd, atol=1e-8)


@given(interior_r, interior_theta, azimuth, displacement)
def test_spectral_sum_of_exact_drho_is_bures(r, theta, phi, d):
    p = BlochPoint(r, theta, phi)
    assert spectral_sum(p, drho(p, d)) == pytest.approx(line_element("bures", p, d), rel=1e-10, abs=1e-14)


@given(interior_r, interior_theta, azimuth, displacement)
def test_bures_spectral_richardson(r, theta, phi, d):
    p = BlochPoint(r, theta, phi)
    exact = line_element("bures", p, d)
    assert bures_from_spectral(p, d) == pytest.approx(exact, rel=1e-6, abs=1e-14)


def test_richardson_beats_plain_difference():
    p = BlochPoint(0.4, 1.2, 0.3)
    d = [0.3, -1.0, 0.7]
    exact = line_element("bures", p, d)
    plain = abs(bures_from_spectral(p, d, h=1e-2, richardson=False) - exact)
    rich = abs(bures_from_spectral(p, d, h=1e-2) - exact)
    assert rich < plain / 100


def test_spectral_forms_reject_degenerate_and_pure():
    with pytest.raises(DegeneracyError):
        spectral_sum(BlochPoint(0.0, 1.0), np.zeros((2, 2)))
    with pytest.raises(DomainError):
        bures_from_spectral(BlochPoint(1.0, 1.0), [1, 0, 0])


@pytest.mark.parametrize("f, kind", [(MCPFunction.BURES, "bures"), (MCPFunction.SJOQVIST, "sjoqvist")])
@given(r=interior_r, theta=interior_theta, phi=azimuth, d=displacement)
def test_mcp_reconstructs_line_elements(f, kind, r, theta, phi, d):
    p = BlochPoint(r, theta, phi)
    assert mcp_metric(f, p, d) == pytest.approx(line_element(kind, p, d), rel=1e-12, abs=1e-15)


def test_mcp_functions():
    assert MCPFunction.BURES(1.0) == 1.0
    assert MCPFunction.SJOQVIST(1.0) == 0.0
    assert MCPFunction.SJOQVIST(0.0) == 0.5
    with pytest.raises(DomainError):
        mcp_metric(MCPFunction.SJOQVIST, BlochPoint(0.0, 1.0), [1, 0, 0])
    assert mcp_metric(MCPFunction.BURES, BlochPoint(0.0, 1.0), [1, 0, 0]) == 0.25
