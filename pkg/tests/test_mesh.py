import numpy as np
import pytest

from robinhole import HoleSpec, OuterDomain, make_punctured, refine, triangulate, triangulate_domain
from robinhole.errors import MeshFailure
from robinhole.mesh import (
    HOLE,
    OUTER,
    PointLocator,
    boundary_edges,
    boundary_loops,
    check_mesh,
    load_mesh,
    matched_mesh_pair,
    min_angle_deg,
    save_mesh,
    signed_areas,
)


def test_quality_and_hmax(unit_square):
    dom = make_punctured(unit_square, HoleSpec.disk((0.5, 0.5), 0.2))
    mesh = triangulate(dom, 0.05, grading=1)
    assert mesh.quality >= 20.0
    assert mesh.h_max <= 0.05 * 1.5
    check_mesh(mesh)


def test_mesh_failure_unresolvable_hole(unit_square):
    dom = make_punctured(unit_square, HoleSpec.disk((0.5, 0.5), 0.1))
    with pytest.raises(MeshFailure):
        triangulate(dom, 0.5, grading=1)


def test_coarse_square_euler(unit_square):
    mesh = triangulate_domain(unit_square, 0.5)
    assert mesh.num_triangles >= 8
    assert mesh.euler_characteristic() == 1


def test_punctured_euler(mesh_01):
    # one hole: V - E + F = 0 (annulus topology)
    assert mesh_01.euler_characteristic() == 0


def test_refine_counts_and_euler(mesh_01):
    fine = refine(mesh_01)
    assert fine.num_triangles == 4 * mesh_01.num_triangles
    assert fine.euler_characteristic() == mesh_01.euler_characteristic()
    check_mesh(fine)


def test_refine_halves_hmax(mesh_01):
    fine = refine(mesh_01)
    assert abs(fine.h_max / mesh_01.h_max - 0.5) < 0.1 * 0.5


def test_refine_preserves_interior_angles(mesh_01):
    fine = refine(mesh_01)
    boundary_verts = set(np.unique(mesh_01.boundary_edges))
    for t, tri in enumerate(mesh_01.triangles[:50]):
        if boundary_verts & set(int(v) for v in tri):
            continue
        parent = min_angle_deg(mesh_01.vertices, mesh_01.triangles[t : t + 1])
        children = min_angle_deg(fine.vertices, fine.triangles[4 * t : 4 * t + 4])
        assert children >= parent - 1e-9


def test_refine_inherits_tags(mesh_01):
    fine = refine(mesh_01)
    for tag in (OUTER, HOLE):
        n_coarse = int(np.sum(mesh_01.boundary_tags == tag))
        n_fine = int(np.sum(fine.boundary_tags == tag))
        assert n_fine == 2 * n_coarse


def test_hole_boundary_length_square_hole(unit_square):
    dom = make_punctured(unit_square, HoleSpec.square((0.5, 0.5), 0.2))
    mesh = triangulate(dom, 0.04)
    _, lengths = boundary_edges(mesh, HOLE)
    side = 2 * 0.2 / np.sqrt(2.0)
    assert lengths.sum() == pytest.approx(4 * side, rel=1e-12)


def test_hole_boundary_length_disk_defect(punctured_01):
    # inscribed-polygon perimeter defect is O(h^2)
    mesh = triangulate(punctured_01, 0.02)
    _, lengths = boundary_edges(mesh, HOLE)
    exact = 2 * np.pi * 0.1
    n = len(lengths)
    defect_bound = exact * (np.pi / n) ** 2 / 6 * 1.5
    assert 0 < exact - lengths.sum() < defect_bound


def test_boundary_edges_empty_tag(square_mesh):
    edges, lengths = boundary_edges(square_mesh, HOLE)
    assert len(edges) == 0 and len(lengths) == 0


def test_tag_loops(mesh_01):
    assert len(boundary_loops(mesh_01, OUTER)) == 1
    assert len(boundary_loops(mesh_01, HOLE)) == 1


def test_determinism(punctured_01):
    a = triangulate(punctured_01, 0.04, seed=7)
    b = triangulate(punctured_01, 0.04, seed=7)
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.triangles, b.triangles)


def test_hole_endpoints_on_curve(mesh_01, punctured_01):
    edges, _ = boundary_edges(mesh_01, HOLE)
    pts = mesh_01.vertices[np.unique(edges)]
    assert float(punctured_01.hole.boundary_distance(pts).max()) < 1e-10


def test_save_load_roundtrip(tmp_path, mesh_01):
    path = tmp_path / "mesh.txt"
    save_mesh(mesh_01, str(path))
    back = load_mesh(str(path))
    assert np.array_equal(back.vertices, mesh_01.vertices)
    assert np.array_equal(back.triangles, mesh_01.triangles)
    assert np.array_equal(back.boundary_edges, mesh_01.boundary_edges)
    assert np.array_equal(back.boundary_tags, mesh_01.boundary_tags)


def test_point_locator_roundtrip(mesh_01, rng):
    loc = PointLocator(mesh_01)
    # sample random points inside kept triangles via barycentric draws
    t = rng.integers(0, mesh_01.num_triangles, 200)
    w = rng.dirichlet(np.ones(3), 200)
    pts = np.einsum("nk,nkd->nd", w, mesh_01.vertices[mesh_01.triangles[t]])
    ti, ba = loc.locate(pts)
    for field in (mesh_01.vertices[:, 0], mesh_01.vertices[:, 1]):
        vals = loc.evaluate(field, ti, ba)
        exact = np.einsum("nk,nk->n", field[mesh_01.triangles[t]], w)
        assert np.allclose(vals, exact, atol=1e-12)


def test_matched_pair_prefix_property(pair_01):
    assert np.allclose(
        pair_01.full.vertices[: pair_01.n_punct_vertices], pair_01.punct.vertices
    )
    assert np.array_equal(
        pair_01.full.triangles[: pair_01.n_punct_triangles], pair_01.punct.triangles
    )
    assert pair_01.full.euler_characteristic() == 1
    assert np.all(signed_areas(pair_01.full.vertices, pair_01.full.triangles) > 0)
    # the full mesh covers the whole outer domain
    assert pair_01.full.triangle_areas().sum() == pytest.approx(1.0, rel=1e-12)


def test_disk_outer_mesh(disk_mesh):
    check_mesh(disk_mesh)
    assert disk_mesh.quality >= 20.0
    assert disk_mesh.triangle_areas().sum() == pytest.approx(np.pi, rel=2e-3)
