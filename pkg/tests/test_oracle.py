import numpy as np
import pytest
from scipy.special import jv, jvp, yv, yvp

from robinhole.errors import RootBracketFailure
from robinhole.oracle import (
    annulus_dirichlet_eigs,
    annulus_robin_eigs,
    bisect_root,
    disk_eigs,
    rect_eigs,
    scan_roots,
)

PI2 = np.pi**2
J01 = 2.404825557695773


def test_rect_dirichlet_unit_square():
    spec = rect_eigs(1, 1, "dirichlet", 4)
    assert np.allclose(spec.eigenvalues, np.array([2, 5, 5, 8]) * PI2, rtol=1e-14)


def test_rect_neumann_unit_square():
    spec = rect_eigs(1, 1, "neumann", 4)
    assert np.allclose(spec.eigenvalues, np.array([0, 1, 1, 2]) * PI2, rtol=1e-14)


def test_rect_two_by_one():
    spec = rect_eigs(2, 1, "dirichlet", 1)
    assert spec.eigenvalues[0] == pytest.approx(5 * PI2 / 4, rel=1e-14)


def test_disk_first_bessel_root():
    root = bisect_root(lambda x: float(jv(0, x)), 2.0, 3.0)
    assert root == pytest.approx(J01, abs=1e-10)
    spec = disk_eigs(1.0, "dirichlet", 1)
    assert spec.eigenvalues[0] == pytest.approx(J01**2, abs=1e-9)
    assert spec.residuals.max() < 1e-10


def test_disk_radius_scaling():
    s1 = disk_eigs(1.0, "dirichlet", 3)
    s2 = disk_eigs(2.0, "dirichlet", 3)
    assert np.allclose(s2.eigenvalues, s1.eigenvalues / 4.0, rtol=1e-10)


def test_disk_neumann_constant():
    spec = disk_eigs(1.0, "neumann", 3)
    assert spec.eigenvalues[0] == 0.0


def test_annulus_gamma_infinity_pin():
    # the single most error-prone sign in the project: gamma -> infinity must
    # reproduce the Dirichlet-inner annulus
    robin = annulus_robin_eigs(0.1, 1.0, 1e8, "neumann", 5)
    diri = annulus_dirichlet_eigs(0.1, 1.0, "neumann", 5)
    assert np.allclose(robin.eigenvalues, diri.eigenvalues, rtol=1e-6)


def test_annulus_gamma_zero_neumann():
    spec = annulus_robin_eigs(0.1, 1.0, 0.0, "neumann", 3)
    assert spec.eigenvalues[0] == 0.0


def test_annulus_monotone_in_gamma():
    prev = None
    for gamma in (0.0, 0.5, 1.0, 2.0, 8.0):
        spec = annulus_robin_eigs(0.1, 1.0, gamma, "neumann", 5)
        if prev is not None:
            assert np.all(spec.eigenvalues >= prev - 1e-9)
        prev = spec.eigenvalues


def test_annulus_negative_gamma_has_negative_mode():
    spec = annulus_robin_eigs(0.1, 1.0, -2.0, "neumann", 3)
    assert spec.eigenvalues[0] < 0


def test_annulus_shrinking_hole_converges_to_disk():
    # radially symmetric instance of the spectral convergence statement
    disk = disk_eigs(1.0, "neumann", 4)
    prev = None
    for eps in (0.1, 0.05, 0.02):
        gamma = 1.0  # eps * M_eps with M_eps = 1/eps
        spec = annulus_robin_eigs(eps, 1.0, gamma, "neumann", 4)
        gap = np.abs(spec.eigenvalues - disk.eigenvalues).max()
        if prev is not None:
            assert gap < prev
        prev = gap
    assert prev < 0.2


def test_annulus_dirichlet_outer():
    spec = annulus_robin_eigs(0.1, 1.0, 1.0, "dirichlet", 3)
    disk = disk_eigs(1.0, "dirichlet", 3)
    assert np.all(spec.eigenvalues > 0)
    assert np.abs(spec.eigenvalues[0] - disk.eigenvalues[0]) < 1.5


def test_wronskian_identity():
    x = np.linspace(0.1, 50.0, 500)
    for m in range(4):
        w = jv(m, x) * yvp(m, x) - jvp(m, x) * yv(m, x)
        assert np.abs(w - 2.0 / (np.pi * x)).max() < 1e-10


def test_bisect_requires_bracket():
    with pytest.raises(RootBracketFailure):
        bisect_root(lambda x: 1.0 + 0 * x, 0.0, 1.0)


def test_scan_roots_finds_all():
    roots = scan_roots(lambda x: np.sin(x), 0.1, 10.0, density=200)
    assert np.allclose(roots, [np.pi, 2 * np.pi, 3 * np.pi], atol=1e-10)


def test_multiplicities_recorded():
    spec = disk_eigs(1.0, "dirichlet", 5)
    # j_{1,1} double, j_{2,1} double after the simple ground state
    assert spec.multiplicities[0] == 1
    assert spec.multiplicities[1] == 2
