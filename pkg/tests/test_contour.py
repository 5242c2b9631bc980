import numpy as np
import pytest
from scipy.integrate import quad

from mbhalf.contour import (A, SIGMA, ContourConstants, build_contour, check_pole_clearance,
                            integrate_boundary, make_residue_transforms, residue_term)
from mbhalf.errors import NonFiniteIntegrand, PoleOnContour
from mbhalf.profiles import Gaussian
from mbhalf.transforms import half_line_ft, time_transform


def test_sigma_identities():
    assert abs(1 + SIGMA + SIGMA**2) <= 1e-15
    assert abs(SIGMA**3 - 1) <= 1e-15
    assert abs(A**2 - np.exp(2j * np.pi / 3)) <= 1e-15
    c = ContourConstants()
    assert c.a_R == pytest.approx(0.5) and c.a_I == pytest.approx(np.sqrt(3) / 2)


@pytest.mark.parametrize("gamma,pole", [(-1.0, None), (0.0, None), (2.0, 2j)])
def test_pole_activation(gamma, pole):
    q = build_contour(10.0, 64, gamma)
    assert q.pole == pole
    assert q.residue_active == (pole is not None)


def test_ray_geometry():
    q = build_contour(10.0, 64)
    np.testing.assert_allclose(np.angle(q.right), np.pi / 3, atol=1e-15)
    np.testing.assert_allclose(np.angle(q.left), 2 * np.pi / 3, atol=1e-15)
    assert q.nq == 64 and np.all((q.ray_nodes > 0) & (q.ray_nodes < 10))
    assert np.sum(q.weights) == pytest.approx(10.0)


def test_pole_clearance():
    check_pole_clearance(build_contour(10.0, 256, 2.0))
    with pytest.raises(PoleOnContour):
        check_pole_clearance(build_contour(10.0, 64, 0.5))


def test_zero_integrand():
    assert integrate_boundary(lambda z: np.zeros_like(z), build_contour(5.0, 32)) == 0


def test_against_direct_parametrization():
    F = lambda z: np.exp(z**2) * (1 + z)
    q = build_contour(8.0, 256)

    def ray(c):
        re = quad(lambda r: (F(c * r) * c).real, 0, 8, limit=200)[0]
        im = quad(lambda r: (F(c * r) * c).imag, 0, 8, limit=200)[0]
        return re + 1j * im

    assert integrate_boundary(F, q) == pytest.approx(ray(A) - ray(A**2), abs=1e-12)


def test_cauchy_theorem():
    # e^{xi^2} decays inside the sector, so the closed-path integral vanishes
    F = lambda z: np.exp(z**2) * z**3
    assert abs(integrate_boundary(F, build_contour(12.0, 512))) < 1e-12


def test_pole_inside_sector_gives_residue():
    # the path keeps the sector on its left, so it encircles 2i once
    F = lambda z: np.exp(z**2) / (z - 2j)
    val = integrate_boundary(F, build_contour(12.0, 512))
    assert val == pytest.approx(2j * np.pi * np.exp(-4.0), abs=1e-10)
    # a pole below the real axis contributes nothing
    G = lambda z: np.exp(z**2) / (z + 2j)
    assert abs(integrate_boundary(G, build_contour(12.0, 512))) < 1e-10


@pytest.mark.parametrize("R", [10.0, 20.0, 40.0])
def test_truncated_path_matches_antiderivative(R):
    # the pole -2i is outside, so only the path ends contribute
    F = lambda z: 1 / (z + 2j) ** 3
    ends = -0.5 * ((A * R + 2j) ** -2 - (A**2 * R + 2j) ** -2)
    assert integrate_boundary(F, build_contour(R, int(64 * R))) == pytest.approx(ends, abs=1e-15)
    assert abs(ends) < 1 / R**2


def test_nonfinite_integrand():
    q = build_contour(4.0, 16)
    with pytest.raises(NonFiniteIntegrand):
        integrate_boundary(lambda z: np.full_like(z, np.nan), q)


# residue term


def _bundle(gamma, u0_ft=(0j, 0j), phi=0j):
    return make_residue_transforms(np.array(u0_ft), None, phi, gamma)


def test_residue_zero_data():
    val = residue_term(1.0, 1.0, _bundle(1.0), np.linspace(0, 2, 5), np.linspace(0, 0.1, 3))
    assert not np.any(val)


def test_residue_vanishes_as_gamma_to_zero():
    prof = Gaussian(3.0, 1.0, 1.0)
    vals = []
    for g in (1e-2, 1e-4, 1e-6):
        nodes = 1j * np.array([SIGMA, SIGMA**2]) * g
        ft = prof.exact_ft(nodes, 10.0)
        vals.append(abs(residue_term(g, 1.0, _bundle(g, ft, 0.3), 0.0, 0.0)))
    assert vals[2] < vals[1] < vals[0] < 1e-1


def test_residue_hand_evaluation():
    gamma, alpha, T = 1.0, 1.0, 0.2
    t = np.linspace(0, T, 401)
    pulse = Gaussian(0.1, 0.02, 1.0)(t)
    phi = time_transform(pulse, -1j * gamma**3, alpha, T, t=t)
    # independent: int_0^T e^{-alpha gamma^3 s} h(s) ds
    ref = quad(lambda s: np.exp(-s) * Gaussian(0.1, 0.02, 1.0)(s), 0, T, points=[0.1])[0]
    assert phi == pytest.approx(ref, abs=1e-9)
    x0 = np.linspace(0, 10, 2001)
    u0 = Gaussian(3.0, 1.0, 0.5)(x0)
    nodes = 1j * np.array([SIGMA, SIGMA**2]) * gamma
    n1, n2 = half_line_ft(u0, nodes, x=x0)
    expected = -(2 + SIGMA) * gamma / SIGMA * (n2 - n1) - 3 * alpha * gamma**2 * phi
    got = residue_term(gamma, alpha, _bundle(gamma, (n1, n2), phi), 0.0, 0.0)
    assert complex(got) == pytest.approx(expected, abs=1e-14)
    later = residue_term(gamma, alpha, _bundle(gamma, (n1, n2), phi), 1.0, 0.1)
    assert complex(later) == pytest.approx(expected * np.exp(-1.0 + 0.1), abs=1e-14)


def test_residue_requires_positive_gamma():
    with pytest.raises(ValueError):
        residue_term(-1.0, 1.0, _bundle(1.0), 0.0, 0.0)
