import numpy as np
import pytest
import scipy.sparse.linalg as spla

from robinhole import HoleSpec, make_punctured, refine, triangulate
from robinhole.errors import NegativeForm, NoHoleBoundary
from robinhole.fem import (
    DIRICHLET_OUTER,
    NEUMANN_OUTER,
    assemble,
    assemble_hole_boundary_mass,
    assemble_mass,
    assemble_stiffness,
    make_dofmap,
    norm1,
    robin_form,
)
from robinhole.mesh import HOLE, OUTER, TriMesh, boundary_edges


def _single_triangle(verts):
    return TriMesh(
        vertices=np.asarray(verts, dtype=float),
        triangles=np.array([[0, 1, 2]]),
        boundary_edges=np.array([[0, 1], [1, 2], [2, 0]]),
        boundary_tags=np.full(3, OUTER, dtype=np.int8),
        h_max=1.0,
        quality=45.0,
    )


def test_reference_stiffness_element():
    mesh = _single_triangle([[0, 0], [1, 0], [0, 1]])
    dm = make_dofmap(mesh, NEUMANN_OUTER)
    K = assemble_stiffness(mesh, dm).toarray()
    assert np.allclose(K, 0.5 * np.array([[2, -1, -1], [-1, 1, 0], [-1, 0, 1]]), atol=1e-15)


def test_reference_mass_element():
    mesh = _single_triangle([[0, 0], [1, 0], [0, 1]])
    dm = make_dofmap(mesh, NEUMANN_OUTER)
    M = assemble_mass(mesh, dm).toarray()
    assert np.allclose(M, np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 24.0, atol=1e-16)


def test_stiffness_scale_invariance(rng):
    verts = rng.random((3, 2))
    d1, d2 = verts[1] - verts[0], verts[2] - verts[0]
    if d1[0] * d2[1] - d1[1] * d2[0] < 0:
        verts = verts[[0, 2, 1]]
    for s in (0.1, 3.7):
        m1 = _single_triangle(verts)
        m2 = _single_triangle(s * verts)
        dm = make_dofmap(m1, NEUMANN_OUTER)
        K1 = assemble_stiffness(m1, dm).toarray()
        K2 = assemble_stiffness(m2, make_dofmap(m2, NEUMANN_OUTER)).toarray()
        assert np.allclose(K1, K2, atol=1e-13)


def test_constants_in_stiffness_kernel(mesh_01):
    dm = make_dofmap(mesh_01, NEUMANN_OUTER)
    K = assemble_stiffness(mesh_01, dm)
    ones = np.ones(dm.n_active)
    assert float(np.abs(K @ ones).max()) < 1e-12


def test_mass_total_area(square_mesh):
    dm = make_dofmap(square_mesh, NEUMANN_OUTER)
    M = assemble_mass(square_mesh, dm)
    ones = np.ones(dm.n_active)
    assert ones @ (M @ ones) == pytest.approx(1.0, abs=1e-12)
    assert M.toarray().min() >= 0.0


def test_matrix_symmetry(mesh_01):
    forms = assemble(mesh_01, NEUMANN_OUTER, 1.0)
    for mat in (forms.K, forms.M, forms.B):
        diff = (mat - mat.T).tocoo()
        scale = max(1.0, float(np.abs(mat.data).max()))
        assert len(diff.data) == 0 or float(np.abs(diff.data).max()) <= 1e-14 * scale


def test_spd_properties(mesh_01):
    forms = assemble(mesh_01, NEUMANN_OUTER, 1.0)
    lo_m = spla.eigsh(forms.M, k=1, which="SA", return_eigenvectors=False)[0]
    assert lo_m > 0
    lo_k = spla.eigsh(forms.K, k=1, sigma=-1e-3, return_eigenvectors=False)[0]
    assert lo_k > -1e-10
    lo_b = spla.eigsh(forms.B, k=1, sigma=-1e-3, return_eigenvectors=False)[0]
    assert lo_b > -1e-12


def _hole_tagged_fan():
    # geometrically a fan around the origin; three edges tagged HOLE so the
    # edge-block formula can be probed directly
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [-1.0, 1.0]])
    tris = np.array([[0, 1, 2], [0, 2, 3], [0, 3, 4]])
    edges = np.array([[1, 2], [2, 3], [3, 4], [0, 1], [4, 0]])
    tags = np.array([HOLE, HOLE, HOLE, OUTER, OUTER], dtype=np.int8)
    return TriMesh(
        vertices=verts, triangles=tris, boundary_edges=edges,
        boundary_tags=tags, h_max=2.0, quality=26.0,
    )


def test_hole_mass_edge_blocks():
    mesh = _hole_tagged_fan()
    dm = make_dofmap(mesh, NEUMANN_OUTER)
    B = assemble_hole_boundary_mass(mesh, dm)
    # terminal edge (3,4) of length 1: endpoint values (1,1) -> contribution L
    u = np.zeros(5)
    u[4] = 1.0
    u[3] = 1.0
    # vertex 3 also touches edge (2,3): subtract its one-sided share L/3
    total = u @ (B @ u)
    assert total == pytest.approx(1.0 + 1.0 / 3.0, rel=1e-14)
    # endpoint values (1,0) on edge (3,4): contribution L/3 from that edge
    v = np.zeros(5)
    v[4] = 1.0
    assert v @ (B @ v) == pytest.approx(1.0 / 3.0, rel=1e-14)


def test_hole_mass_requires_edges(square_mesh):
    dm = make_dofmap(square_mesh, NEUMANN_OUTER)
    with pytest.raises(NoHoleBoundary):
        assemble_hole_boundary_mass(square_mesh, dm)


def test_hole_mass_total_length(mesh_01):
    forms = assemble(mesh_01, NEUMANN_OUTER, 1.0)
    ones = np.ones(forms.dofmap.n_active)
    _, lengths = boundary_edges(mesh_01, HOLE)
    assert ones @ (forms.B @ ones) == pytest.approx(lengths.sum(), rel=1e-12)


def test_robin_form_gamma_zero(mesh_01):
    forms = assemble(mesh_01, NEUMANN_OUTER, 0.0)
    A = robin_form(forms)
    assert (A - forms.K).nnz == 0


def test_robin_form_constant_vector(mesh_01):
    forms = assemble(mesh_01, NEUMANN_OUTER, 1.0)
    A = robin_form(forms)
    ones = np.ones(forms.dofmap.n_active)
    _, lengths = boundary_edges(mesh_01, HOLE)
    assert ones @ (A @ ones) == pytest.approx(lengths.sum(), rel=1e-10)


def test_gamma_scaling_law_value():
    # alpha = 1 means M_eps = 1/eps, so gamma = eps * M_eps = 1
    eps = 0.1
    assert eps * eps ** (-1.0) == pytest.approx(1.0, rel=1e-15)


def test_norm1_values(mesh_01, punctured_01, rng):
    forms = assemble(mesh_01, NEUMANN_OUTER, 1.0)
    n = forms.dofmap.n_active
    assert norm1(forms, np.zeros(n)) == 0.0
    ones = np.ones(n)
    _, lengths = boundary_edges(mesh_01, HOLE)
    area = mesh_01.triangle_areas().sum()
    assert norm1(forms, ones) == pytest.approx(np.sqrt(area + lengths.sum()), rel=1e-12)
    u = rng.standard_normal(n)
    assert norm1(forms, u) ** 2 >= u @ (forms.M @ u) - 1e-12


def test_norm1_monotone_in_gamma(mesh_01, rng):
    u = rng.standard_normal(mesh_01.num_vertices)
    vals = []
    for g in (0.5, 1.0, 2.0, 4.0):
        forms = assemble(mesh_01, NEUMANN_OUTER, g)
        vals.append(norm1(forms, u))
    assert all(a < b for a, b in zip(vals[:-1], vals[1:]))


def test_norm1_negative_form(mesh_01):
    forms = assemble(mesh_01, NEUMANN_OUTER, -1e6)
    ones = np.ones(forms.dofmap.n_active)
    with pytest.raises(NegativeForm):
        norm1(forms, ones)


def test_dirichlet_elimination(mesh_01):
    dm = make_dofmap(mesh_01, DIRICHLET_OUTER)
    outer_edges, _ = boundary_edges(mesh_01, OUTER)
    hole_edges, _ = boundary_edges(mesh_01, HOLE)
    eliminated = set(np.unique(outer_edges))
    assert eliminated.isdisjoint(set(np.unique(hole_edges)))
    assert dm.n_active == mesh_01.num_vertices - len(eliminated)


def test_dirichlet_zero_extension_identity(mesh_01, rng):
    # q2 of an active vector equals q1 of its zero-extension
    forms_d = assemble(mesh_01, DIRICHLET_OUTER, 1.3)
    forms_n = assemble(mesh_01, NEUMANN_OUTER, 1.3)
    u = rng.standard_normal(forms_d.dofmap.n_active)
    q2 = u @ (robin_form(forms_d) @ u)
    ufull = forms_d.dofmap.extend(u)
    q1 = ufull @ (robin_form(forms_n) @ ufull)
    assert q2 == pytest.approx(q1, rel=1e-12)


def test_galerkin_consistency_rate(punctured_01):
    # interpolant energy of a smooth field converges at O(h^2)
    from robinhole.spectral_metrics import fit_rate

    exact = np.pi**2 / 2  # energy of sin(pi x) sin(pi y) on the unit square
    hole_energy_defect = None
    errs, hs = [], []
    mesh = triangulate(punctured_01, 0.06)
    for _ in range(3):
        dm = make_dofmap(mesh, NEUMANN_OUTER)
        K = assemble_stiffness(mesh, dm)
        v = np.sin(np.pi * mesh.vertices[:, 0]) * np.sin(np.pi * mesh.vertices[:, 1])
        # exact energy over the punctured domain: subtract the hole integral
        from robinhole.quadrature import polar_band_rule, periodic_trapezoid

        theta, _ = periodic_trapezoid(512)
        pts, w, _, _ = polar_band_rule(np.array([0.5, 0.5]), theta, 0.0, 0.1, 12)
        gx = np.pi * np.cos(np.pi * pts[:, 0]) * np.sin(np.pi * pts[:, 1])
        gy = np.pi * np.sin(np.pi * pts[:, 0]) * np.cos(np.pi * pts[:, 1])
        hole_energy_defect = float(np.sum(w * (gx**2 + gy**2)))
        errs.append(abs(v @ (K @ v) - (exact - hole_energy_defect)))
        hs.append(mesh.h_max)
        mesh = refine(mesh)
    slope, _, _ = fit_rate(hs, errs)
    assert 1.7 <= slope <= 2.3
