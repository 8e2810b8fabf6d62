"""Domain geometry: outer domain, scaled hole, enclosing ball.

All values are immutable after construction; operations are pure functions.
Disks are kept exact here (center + radius) and only turned into inscribed
polygons at meshing time.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHole, HoleTouchesBoundary, RadiusOutOfRange

CLEARANCE_GUARD = 1e-9

RECTANGLE = "rectangle"
DISK = "regular-polygon-approximated-disk"
POLYGON = "general-polygon"


def _as_points(vertices) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise ValueError("vertices must be an (n, 2) array with n >= 3")
    return v


def polygon_area(vertices: np.ndarray) -> float:
    """Signed area, positive for counterclockwise orientation."""
    x, y = vertices[:, 0], vertices[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def polygon_contains(vertices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Ray-cast point-in-polygon test, vectorized over points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    v = vertices
    n = len(v)
    for i in range(n):
        x0, y0 = v[i]
        x1, y1 = v[(i + 1) % n]
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xint)
    return inside


def segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point to the segment [a, b]."""
    pts = np.atleast_2d(points)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(pts - a, axis=1)
    t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(pts - proj, axis=1)


def polygon_boundary_distance(vertices: np.ndarray, points: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(points)
    d = np.full(len(pts), np.inf)
    n = len(vertices)
    for i in range(n):
        d = np.minimum(d, segment_distance(pts, vertices[i], vertices[(i + 1) % n]))
    return d


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def polygon_is_simple(vertices: np.ndarray) -> bool:
    n = len(vertices)
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = vertices[j], vertices[(j + 1) % n]
            if _segments_intersect(a, b, c, d):
                return False
    return True


@dataclass(frozen=True)
class OuterDomain:
    """Unperturbed domain: a ccw simple polygon, or an exact disk.

    For kind == DISK the polygon approximation is generated on demand with a
    vertex count tied to the mesh size h.
    """

    kind: str
    vertices: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind == DISK:
            if self.radius is None or self.radius <= 0:
                raise ValueError("disk needs a positive radius")
            object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        else:
            v = _as_points(self.vertices)
            if polygon_area(v) <= 0:
                raise ValueError("outer polygon must be counterclockwise with positive area")
            if not polygon_is_simple(v):
                raise ValueError("outer polygon must be simple")
            object.__setattr__(self, "vertices", v)
            v.setflags(write=False)

    @classmethod
    def rectangle(cls, x0: float, y0: float, x1: float, y1: float) -> "OuterDomain":
        if x1 <= x0 or y1 <= y0:
            raise ValueError("degenerate rectangle")
        verts = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
        return cls(kind=RECTANGLE, vertices=verts)

    @classmethod
    def unit_square(cls) -> "OuterDomain":
        return cls.rectangle(0.0, 0.0, 1.0, 1.0)

    @classmethod
    def disk(cls, center, radius: float) -> "OuterDomain":
        return cls(kind=DISK, center=np.asarray(center, dtype=float), radius=float(radius))

    @classmethod
    def polygon(cls, vertices) -> "OuterDomain":
        return cls(kind=POLYGON, vertices=_as_points(vertices))

    def polygon_vertices(self, h: float | None = None) -> np.ndarray:
        """Boundary polygon; for disks an inscribed n-gon with n tied to h."""
        if self.kind != DISK:
            return self.vertices
        if h is None:
            n = 256
        else:
            n = max(64, int(np.ceil(2 * np.pi * self.radius / h)))
        th = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.column_stack([np.cos(th), np.sin(th)])

    def area(self) -> float:
        if self.kind == DISK:
            return np.pi * self.radius**2
        return polygon_area(self.vertices)

    def diameter(self) -> float:
        if self.kind == DISK:
            return 2.0 * self.radius
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=2)))

    def contains(self, points: np.ndarray) -> np.ndarray:
        if self.kind == DISK:
            pts = np.atleast_2d(points)
            return np.linalg.norm(pts - self.center, axis=1) < self.radius
        return polygon_contains(self.vertices, points)

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        if self.kind == DISK:
            pts = np.atleast_2d(points)
            return np.abs(self.radius - np.linalg.norm(pts - self.center, axis=1))
        return polygon_boundary_distance(self.vertices, points)

    def project_to_boundary(self, points: np.ndarray) -> np.ndarray:
        """Snap points to the analytic boundary (used by mesh refinement)."""
        pts = np.atleast_2d(points).copy()
        if self.kind == DISK:
            rel = pts - self.center
            r = np.linalg.norm(rel, axis=1)
            return self.center + rel * (self.radius / r)[:, None]
        return pts  # polygon edges are straight: midpoints already lie on them


# unit square inscribed in the unit disk, axis aligned
_UNIT_SQUARE_HOLE = np.array(
    [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]
) / np.sqrt(2.0)


@dataclass(frozen=True)
class HoleSpec:
    """Reference hole K at scale 1 inside the unit ball, plus center and scale.

    The scaled hole is K_eps = epsilon * K + center, contained in the closed
    ball of radius epsilon around the center.
    """

    unit_shape: str
    center: np.ndarray
    epsilon: float
    unit_vertices: np.ndarray | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.unit_shape == "square":
            object.__setattr__(self, "unit_vertices", _UNIT_SQUARE_HOLE.copy())
        if self.unit_shape == "polygon":
            v = _as_points(self.unit_vertices)
            if polygon_area(v) <= 0:
                raise ValueError("unit hole polygon must be counterclockwise")
            r = np.linalg.norm(v, axis=1)
            if np.any(r > 1.0 + 1e-12):
                raise ValueError("unit hole must be contained in the unit ball")
            e1 = np.roll(v, -1, axis=0) - v
            e2 = np.roll(v, -2, axis=0) - v
            cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
            if np.any(cross <= 0):
                raise ValueError("unit hole polygon must be convex")
            if not polygon_contains(v, np.zeros((1, 2)))[0]:
                raise ValueError("unit hole must contain the origin")
            object.__setattr__(self, "unit_vertices", v)
        elif self.unit_shape not in ("disk", "square"):
            raise ValueError(f"unknown hole shape {self.unit_shape!r}")

    @classmethod
    def disk(cls, center, epsilon: float) -> "HoleSpec":
        return cls("disk", np.asarray(center, float), float(epsilon))

    @classmethod
    def square(cls, center, epsilon: float) -> "HoleSpec":
        return cls("square", np.asarray(center, float), float(epsilon))

    def scaled_vertices(self) -> np.ndarray | None:
        """Vertices of K_eps = eps*K + x0 (None for the disk)."""
        if self.unit_shape == "disk":
            return None
        return self.center + self.epsilon * self.unit_vertices

    def boundary_length(self) -> float:
        if self.unit_shape == "disk":
            return 2 * np.pi * self.epsilon
        v = self.scaled_vertices()
        return float(np.sum(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)))

    def radial_extent(self, phi: np.ndarray) -> np.ndarray:
        """Distance from the center to the hole boundary along direction phi."""
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        if self.unit_shape == "disk":
            return np.full_like(phi, self.epsilon)
        d = np.column_stack([np.cos(phi), np.sin(phi)])
        v = self.epsilon * self.unit_vertices
        n = len(v)
        r = np.full(len(phi), np.inf)
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            e = b - a
            # solve t*d = a + s*e, keep t > 0, s in [0, 1]
            det = d[:, 0] * (-e[1]) - d[:, 1] * (-e[0])
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (a[0] * (-e[1]) - a[1] * (-e[0])) / det
                s = (d[:, 0] * a[1] - d[:, 1] * a[0]) / det
            ok = (np.abs(det) > 1e-15) & (t > 0) & (s >= -1e-12) & (s <= 1 + 1e-12)
            r = np.where(ok, np.minimum(r, np.where(ok, t, np.inf)), r)
        return r

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        rel = pts - self.center
        if self.unit_shape == "disk":
            return np.linalg.norm(rel, axis=1) < self.epsilon
        return np.linalg.norm(rel, axis=1) < self.radial_extent(np.arctan2(rel[:, 1], rel[:, 0]))

    def boundary_points(self, n: int) -> np.ndarray:
        """n points on the hole boundary; polygon corners always included."""
        pts, _ = hole_boundary_parameterization(self, n)
        return pts

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        if self.unit_shape == "disk":
            return np.abs(np.linalg.norm(pts - self.center, axis=1) - self.epsilon)
        return polygon_boundary_distance(self.scaled_vertices(), pts)

    def project_to_boundary(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points).copy()
        if self.unit_shape == "disk":
            rel = pts - self.center
            r = np.linalg.norm(rel, axis=1)
            return self.center + rel * (self.epsilon / r)[:, None]
        return pts


@dataclass(frozen=True)
class PuncturedDomain:
    """Outer domain minus the scaled hole, with positive clearance recorded."""

    outer: OuterDomain
    hole: HoleSpec
    clearance: float

    @property
    def epsilon(self) -> float:
        return self.hole.epsilon

    @property
    def center(self) -> np.ndarray:
        return self.hole.center

    def area(self) -> float:
        if self.hole.unit_shape == "disk":
            hole_area = np.pi * self.hole.epsilon**2
        else:
            hole_area = polygon_area(self.hole.scaled_vertices())
        return self.outer.area() - hole_area


def make_punctured(outer: OuterDomain, hole: HoleSpec) -> PuncturedDomain:
    """Validate that the closed ball B_eps around the hole sits strictly inside."""
    if hole.epsilon <= 0:
        raise DegenerateHole(f"epsilon must be positive, got {hole.epsilon}")
    if not outer.contains(hole.center[None, :])[0]:
        raise HoleTouchesBoundary("hole center outside the outer domain")
    dist = float(outer.boundary_distance(hole.center[None, :])[0])
    clearance = dist - hole.epsilon
    if clearance <= CLEARANCE_GUARD:
        raise HoleTouchesBoundary(
            f"ball of radius {hole.epsilon} at {hole.center.tolist()} not strictly "
            f"inside the outer domain (clearance {clearance:.3e})"
        )
    return PuncturedDomain(outer=outer, hole=hole, clearance=clearance)


def hole_boundary_parameterization(hole: HoleSpec, n: int = 64):
    """Arc-length-consistent boundary sampling of the scaled hole.

    Returns (points, speeds) where speeds are |dp/dt| for the arc-length
    parameterization with t in [0, 1). For polygonal holes every corner is a
    sample so that chord lengths sum to the exact perimeter.
    """
    if n < 3:
        raise ValueError("need at least 3 samples")
    total = hole.boundary_length()
    if hole.unit_shape == "disk":
        th = 2 * np.pi * np.arange(n) / n
        pts = hole.center + hole.epsilon * np.column_stack([np.cos(th), np.sin(th)])
        return pts, np.full(n, total)
    v = hole.scaled_vertices()
    edges = np.roll(v, -1, axis=0) - v
    lengths = np.linalg.norm(edges, axis=1)
    pts = []
    for i, L in enumerate(lengths):
        m = max(1, int(round(n * L / total)))
        t = np.arange(m) / m
        pts.append(v[i] + t[:, None] * edges[i])
    pts = np.vstack(pts)
    return pts, np.full(len(pts), total)


@dataclass(frozen=True)
class CircleSamples:
    """Uniform angular samples of a circle inside the domain."""

    center: np.ndarray
    radius: float
    angles: np.ndarray
    points: np.ndarray


def annulus_probe_circle(
    domain: PuncturedDomain, epsilon: float, candidate_radius: float, n: int = 256
) -> CircleSamples:
    """Sample the circle of a candidate intermediate radius in (eps, 2*eps)."""
    if not (epsilon < candidate_radius < 2 * epsilon):
        raise RadiusOutOfRange(
            f"candidate radius {candidate_radius} not in ({epsilon}, {2 * epsilon})"
        )
    dist = float(domain.outer.boundary_distance(domain.center[None, :])[0])
    if candidate_radius >= dist:
        raise RadiusOutOfRange("probe circle leaves the outer domain")
    th = 2 * np.pi * np.arange(n) / n
    pts = domain.center + candidate_radius * np.column_stack([np.cos(th), np.sin(th)])
    return CircleSamples(center=domain.center, radius=candidate_radius, angles=th, points=pts)
