import numpy as np
import pytest

from robinhole import (
    HoleSpec,
    OuterDomain,
    annulus_probe_circle,
    hole_boundary_parameterization,
    make_punctured,
)
from robinhole.errors import DegenerateHole, HoleTouchesBoundary, RadiusOutOfRange


def test_make_punctured_valid(unit_square):
    dom = make_punctured(unit_square, HoleSpec.disk((0.5, 0.5), 0.1))
    assert dom.clearance == pytest.approx(0.4, abs=1e-12)


def test_make_punctured_touching(unit_square):
    with pytest.raises(HoleTouchesBoundary):
        make_punctured(unit_square, HoleSpec.disk((0.05, 0.5), 0.1))


def test_make_punctured_degenerate(unit_square):
    with pytest.raises(DegenerateHole):
        make_punctured(unit_square, HoleSpec.disk((0.5, 0.5), 0.0))


def test_square_hole_scaled_vertices(unit_square):
    # eps*K + x0 with K the square inscribed in the unit ball
    hole = HoleSpec.square((0.5, 0.5), 0.2)
    dom = make_punctured(unit_square, hole)
    verts = dom.hole.scaled_vertices()
    half = 0.2 / np.sqrt(2.0)
    expected = 0.5 + half * np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    assert np.allclose(np.sort(verts, axis=0), np.sort(expected, axis=0), atol=1e-15)
    # corners sit on the enclosing ball
    assert np.allclose(np.linalg.norm(verts - 0.5, axis=1), 0.2, atol=1e-15)


def test_parameterization_disk_circumference():
    hole = HoleSpec.disk((0.0, 0.0), 0.1)
    assert hole.boundary_length() == pytest.approx(2 * np.pi * 0.1, rel=1e-15)
    pts, speeds = hole_boundary_parameterization(hole, 256)
    chord = np.sum(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1))
    # chords converge to the circumference at the requested resolution
    assert chord == pytest.approx(2 * np.pi * 0.1, rel=1e-3)
    assert np.all(speeds == speeds[0])


def test_parameterization_square_exact():
    hole = HoleSpec.square((0.0, 0.0), 0.2)
    side = 2 * 0.2 / np.sqrt(2.0)
    assert hole.boundary_length() == pytest.approx(4 * side, rel=1e-15)
    pts, _ = hole_boundary_parameterization(hole, 37)
    chord = np.sum(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1))
    assert chord == pytest.approx(4 * side, rel=1e-10)


def test_parameterization_disk_four_samples():
    hole = HoleSpec.disk((0.0, 0.0), 1.0)
    pts, _ = hole_boundary_parameterization(hole, 4)
    angles = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
    assert np.allclose(np.sort(angles), [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-14)


def test_samples_on_curve_and_in_ball():
    for hole in (HoleSpec.disk((0.3, 0.4), 0.07), HoleSpec.square((0.3, 0.4), 0.07)):
        pts, _ = hole_boundary_parameterization(hole, 200)
        assert float(hole.boundary_distance(pts).max()) < 1e-12
        r = np.linalg.norm(pts - hole.center, axis=1)
        assert np.all(r <= hole.epsilon * (1 + 1e-12))


def test_polygon_scaling_law():
    tri = np.array([[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]])
    small = HoleSpec("polygon", (0.0, 0.0), 0.05, unit_vertices=tri)
    unit = HoleSpec("polygon", (0.0, 0.0), 1.0, unit_vertices=tri)
    assert small.boundary_length() == pytest.approx(0.05 * unit.boundary_length(), rel=1e-15)


def test_make_punctured_deterministic(unit_square):
    a = make_punctured(unit_square, HoleSpec.disk((0.5, 0.5), 0.1))
    b = make_punctured(unit_square, HoleSpec.disk((0.5, 0.5), 0.1))
    assert a.clearance == b.clearance
    assert np.array_equal(a.hole.center, b.hole.center)


def test_annulus_probe_circle(punctured_01):
    samples = annulus_probe_circle(punctured_01, 0.1, 0.15, n=8)
    assert np.allclose(samples.angles, np.arange(8) * np.pi / 4)
    assert np.allclose(np.linalg.norm(samples.points - [0.5, 0.5], axis=1), 0.15)
    with pytest.raises(RadiusOutOfRange):
        annulus_probe_circle(punctured_01, 0.1, 0.25)


def test_radial_extent_square():
    hole = HoleSpec.square((0.0, 0.0), 0.2)
    phi = np.linspace(0, 2 * np.pi, 33)
    r = hole.radial_extent(phi)
    half = 0.2 / np.sqrt(2.0)
    expected = half / np.maximum(np.abs(np.cos(phi)), np.abs(np.sin(phi)))
    assert np.allclose(r, expected, atol=1e-12)


def test_outer_domain_validation():
    with pytest.raises(ValueError):
        OuterDomain.polygon([[0, 0], [1, 0], [1, 1], [0.2, -0.5]])  # self-intersecting
    with pytest.raises(ValueError):
        OuterDomain.rectangle(0, 0, 0, 1)
