import numpy as np
import pytest
import scipy.sparse as sp

from robinhole.eigensolve import (
    SolverConfig,
    cluster_multiplicities,
    residual_check,
    solve_lowest,
)
from robinhole.errors import ZeroVector
from robinhole.fem import DIRICHLET_OUTER, NEUMANN_OUTER, assemble, assemble_plain, robin_form


def test_dense_fallback_diag():
    A = sp.diags([1.0, 2.0, 3.0]).tocsr()
    M = sp.identity(3, format="csr")
    spec = solve_lowest(A, M, SolverConfig(k=3))
    assert np.allclose(spec.eigenvalues, [1, 2, 3], atol=1e-12)


def test_neumann_square_constant_mode(square_mesh):
    forms = assemble_plain(square_mesh, NEUMANN_OUTER)
    spec = solve_lowest(forms.K, forms.M, SolverConfig(k=3))
    assert abs(spec.eigenvalues[0]) < 1e-8
    v = spec.eigenvectors[:, 0]
    assert np.std(v) / np.abs(v).max() < 1e-6


def test_dirichlet_square_lowest(square_mesh):
    forms = assemble_plain(square_mesh, DIRICHLET_OUTER)
    spec = solve_lowest(forms.K, forms.M, SolverConfig(k=1))
    assert spec.eigenvalues[0] == pytest.approx(2 * np.pi**2, rel=0.01)


def test_residual_check_exact_and_zero():
    A = sp.diags([1.0, 2.0, 5.0]).tocsr()
    M = sp.identity(3, format="csr")
    x = np.array([0.0, 1.0, 0.0])
    assert residual_check(A, M, (2.0, x)) < 1e-14
    with pytest.raises(ZeroVector):
        residual_check(A, M, (2.0, np.zeros(3)))


def test_residual_monotone_in_perturbation():
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    A = sp.csr_matrix(Q @ np.diag([1.0, 2, 3, 4, 5, 6]) @ Q.T)
    M = sp.identity(6, format="csr")
    x = Q[:, 2]
    e = Q[:, 4]
    res = [residual_check(A, M, (3.0, x + d * e)) for d in (1e-6, 1e-5, 1e-4, 1e-3)]
    assert all(a < b for a, b in zip(res[:-1], res[1:]))


def test_cluster_multiplicities():
    pi2 = np.pi**2
    assert cluster_multiplicities([pi2, pi2 + 1e-10, 2 * pi2], 1e-6) == (2, 1)
    assert cluster_multiplicities([1.0, 2.0, 3.5], 1e-6) == (1, 1, 1)
    assert cluster_multiplicities([0.0, pi2, pi2 + 1e-9, 2 * pi2], 1e-6) == (1, 2, 1)


def test_robin_term_monotonicity(mesh_01):
    # adding gamma B (gamma > 0) cannot decrease any eigenvalue (Courant-Fischer)
    cfg = SolverConfig(k=4)
    prev = None
    for gamma in (0.0, 1.0, 10.0):
        forms = assemble(mesh_01, NEUMANN_OUTER, gamma)
        spec = solve_lowest(robin_form(forms), forms.M, cfg)
        if prev is not None:
            assert np.all(spec.eigenvalues >= prev - 1e-9)
        prev = spec.eigenvalues


def test_dirichlet_dominates_neumann(mesh_01):
    cfg = SolverConfig(k=4)
    fn = assemble(mesh_01, NEUMANN_OUTER, 1.0)
    fd = assemble(mesh_01, DIRICHLET_OUTER, 1.0)
    sn = solve_lowest(robin_form(fn), fn.M, cfg)
    sd = solve_lowest(robin_form(fd), fd.M, cfg)
    assert np.all(sd.eigenvalues >= sn.eigenvalues - 1e-9)


def test_solver_determinism(mesh_01):
    forms = assemble(mesh_01, NEUMANN_OUTER, 1.0)
    A = robin_form(forms)
    s1 = solve_lowest(A, forms.M, SolverConfig(k=4, seed=99))
    s2 = solve_lowest(A, forms.M, SolverConfig(k=4, seed=99))
    assert np.array_equal(s1.eigenvalues, s2.eigenvalues)


def test_m_orthonormal_eigenvectors(mesh_01):
    forms = assemble(mesh_01, NEUMANN_OUTER, 1.0)
    spec = solve_lowest(robin_form(forms), forms.M, SolverConfig(k=4))
    V = spec.eigenvectors
    G = V.T @ (forms.M @ V)
    assert np.abs(G - np.eye(4)).max() < 1e-8
