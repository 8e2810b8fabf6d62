"""Conforming triangulations of punctured domains with tagged boundary edges.

The mesher places boundary samples exactly on the analytic curves, fills the
interior with a hex lattice plus graded rings around the hole, and relaxes
free vertices by Laplacian smoothing over repeated Delaunay passes. Boundary
vertices never move, so tagged edges stay on their curves to round-off.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import Delaunay

from .errors import MeshFailure, TraceInterpolationFailure
from .geometry import DISK, OuterDomain, PuncturedDomain, polygon_contains

OUTER = 0
HOLE = 1
TAG_NAMES = {OUTER: "OUTER", HOLE: "HOLE"}
TAG_CODES = {v: k for k, v in TAG_NAMES.items()}

MIN_ANGLE_DEG = 20.0
_SPACING = 0.95  # internal spacing factor keeping h_max safely below 1.5*h_target


@dataclass(frozen=True)
class TriMesh:
    """Triangle mesh with ccw triangles and tagged boundary edges."""

    vertices: np.ndarray        # (V, 2)
    triangles: np.ndarray       # (T, 3) int
    boundary_edges: np.ndarray  # (B, 2) int
    boundary_tags: np.ndarray   # (B,) int, OUTER or HOLE
    h_max: float
    quality: float              # minimum angle, degrees
    domain: object = None       # PuncturedDomain | OuterDomain | None

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def triangle_areas(self) -> np.ndarray:
        return signed_areas(self.vertices, self.triangles)

    def edge_count(self) -> int:
        e = np.vstack([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]])
        return len(np.unique(np.sort(e, axis=1), axis=0))

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.edge_count() + self.num_triangles


def signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = vertices[triangles]
    return 0.5 * (
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    )


def min_angle_deg(vertices: np.ndarray, triangles: np.ndarray) -> float:
    p = vertices[triangles]
    worst = 180.0
    for i in range(3):
        a = p[:, (i + 1) % 3] - p[:, i]
        b = p[:, (i + 2) % 3] - p[:, i]
        cosang = np.sum(a * b, axis=1) / (
            np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
        )
        worst = min(worst, float(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))).min()))
    return worst


def max_edge_length(vertices: np.ndarray, triangles: np.ndarray) -> float:
    p = vertices[triangles]
    e = p[:, [1, 2, 0]] - p
    return float(np.linalg.norm(e, axis=2).max())


def _sample_polygon(poly: np.ndarray, spacing: float) -> np.ndarray:
    """Points along polygon edges at roughly the given spacing, corners kept."""
    pts = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        L = float(np.linalg.norm(b - a))
        m = max(1, int(round(L / spacing)))
        t = np.arange(m) / m
        pts.append(a + t[:, None] * (b - a))
    return np.vstack(pts)


def _hex_lattice(bbox, h: float) -> np.ndarray:
    x0, x1, y0, y1 = bbox
    dy = h * np.sqrt(3) / 2
    rows = []
    ny = int(np.ceil((y1 - y0) / dy)) + 1
    for j in range(ny):
        y = y0 + j * dy
        off = 0.5 * h if j % 2 else 0.0
        xs = np.arange(x0 + off, x1 + 1e-12, h)
        if len(xs):
            rows.append(np.column_stack([xs, np.full(len(xs), y)]))
    return np.vstack(rows) if rows else np.zeros((0, 2))


def _smooth(points: np.ndarray, n_fixed: int, keep_fn, iters: int) -> tuple:
    """Laplacian smoothing of free points over repeated Delaunay passes."""
    pts = points.copy()
    tris = None
    for _ in range(max(1, iters)):
        dela = Delaunay(pts)
        tris = dela.simplices[keep_fn(pts, dela.simplices)]
        acc = np.zeros_like(pts)
        cnt = np.zeros(len(pts))
        for i in range(3):
            for j in range(3):
                if i != j:
                    np.add.at(acc, tris[:, i], pts[tris[:, j]])
                    np.add.at(cnt, tris[:, i], 1.0)
        sel = cnt > 0
        sel[:n_fixed] = False
        pts[sel] = acc[sel] / cnt[sel, None]
    dela = Delaunay(pts)
    tris = dela.simplices[keep_fn(pts, dela.simplices)]
    return pts, tris


def _orient_ccw(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    areas = signed_areas(vertices, triangles)
    flipped = triangles.copy()
    neg = areas < 0
    flipped[neg] = flipped[neg][:, [0, 2, 1]]
    return flipped


def _boundary_edges_of(triangles: np.ndarray) -> np.ndarray:
    e = np.vstack([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    key = np.sort(e, axis=1)
    _, idx, counts = np.unique(key, axis=0, return_index=True, return_counts=True)
    return e[idx[counts == 1]]


def _tag_edges(vertices, edges, domain: PuncturedDomain | None, outer: OuterDomain):
    tags = np.full(len(edges), OUTER, dtype=np.int8)
    if domain is not None and len(edges):
        mid = 0.5 * (vertices[edges[:, 0]] + vertices[edges[:, 1]])
        d_hole = domain.hole.boundary_distance(mid)
        d_outer = outer.boundary_distance(mid)
        tags[d_hole < d_outer] = HOLE
    return tags


def triangulate(
    domain: PuncturedDomain,
    h_target: float,
    grading: float | None = None,
    smooth_iters: int = 6,
    seed: int = 0,
) -> TriMesh:
    """Mesh a punctured domain at target size h with refinement near the hole.

    grading is the ratio of far-field h to near-hole h; the default law keeps
    at least ~8 edges resolving the hole. Deterministic for fixed inputs; the
    seed is accepted for interface stability but not used.
    """
    del seed
    if h_target <= 0:
        raise MeshFailure("h_target must be positive")
    eps = domain.epsilon
    if grading is None:
        grading = max(1.0, h_target / (eps / 4))
    if grading < 1:
        raise MeshFailure("grading must be >= 1")
    if h_target > eps and grading == 1:
        raise MeshFailure(
            f"h_target {h_target} cannot resolve hole of size {eps} without grading"
        )
    h_far = _SPACING * h_target
    h_near = h_far / grading

    outer, hole, x0 = domain.outer, domain.hole, domain.center
    outer_poly = outer.polygon_vertices(h_target)
    outer_pts = _sample_polygon(outer_poly, h_far)
    n_hole = max(16, int(np.ceil(hole.boundary_length() / h_near)))
    hole_pts = hole.boundary_points(n_hole)
    hole_spacing = hole.boundary_length() / len(hole_pts)
    fixed = np.vstack([outer_pts, hole_pts])
    n_fixed = len(fixed)

    # graded rings around the hole
    clearance_radius = float(outer.boundary_distance(x0[None, :])[0])
    rings = []
    spacing = hole_spacing
    r = eps
    k = 0
    growth = 1.0 if grading == 1 else 1.2
    while True:
        if grading == 1 and r >= eps + 3 * h_far:
            break
        if grading > 1 and spacing >= h_far / 1.05 and k >= 1:
            break
        r_next = r + spacing * np.sqrt(3) / 2
        if r_next > clearance_radius - 0.7 * h_far:
            break
        r = r_next
        m = max(12, int(np.ceil(2 * np.pi * r / spacing)))
        th = 2 * np.pi * (np.arange(m) + 0.5 * (k % 2)) / m
        rings.append(x0 + r * np.column_stack([np.cos(th), np.sin(th)]))
        spacing = min(spacing * growth, h_far)
        k += 1
    ring_pts = np.vstack(rings) if rings else np.zeros((0, 2))
    ring_rmax = r if rings else eps + 0.5 * hole_spacing

    verts = outer_poly if outer.kind != DISK else None
    bbox_src = outer_pts
    bbox = (
        bbox_src[:, 0].min(), bbox_src[:, 0].max(),
        bbox_src[:, 1].min(), bbox_src[:, 1].max(),
    )
    lattice = _hex_lattice(bbox, h_far)
    if len(lattice):
        margin = 0.58 * h_far
        keep = outer.contains(lattice)
        keep &= outer.boundary_distance(lattice) > margin
        keep &= np.linalg.norm(lattice - x0, axis=1) > ring_rmax + 0.58 * h_far
        lattice = lattice[keep]
    pts = np.vstack([fixed, ring_pts, lattice])

    hole_test = hole if hole.unit_shape == "disk" else None
    hole_poly = hole.scaled_vertices()

    def keep_fn(p, tris):
        cent = p[tris].mean(axis=1)
        if hole_test is not None:
            inside_hole = np.linalg.norm(cent - x0, axis=1) < eps
        else:
            inside_hole = polygon_contains(hole_poly, cent)
        keep = ~inside_hole
        if outer.kind == DISK:
            keep &= np.linalg.norm(cent - outer.center, axis=1) < outer.radius
        elif outer.kind != "rectangle":
            keep &= polygon_contains(verts, cent)
        return keep

    pts, tris = _smooth(pts, n_fixed, keep_fn, smooth_iters)
    return _finalize(pts, tris, domain, outer)


def triangulate_domain(
    outer: OuterDomain, h_target: float, smooth_iters: int = 6
) -> TriMesh:
    """Mesh an unpunctured outer domain (used for reference spectra)."""
    if h_target <= 0:
        raise MeshFailure("h_target must be positive")
    h = _SPACING * h_target
    outer_poly = outer.polygon_vertices(h_target)
    outer_pts = _sample_polygon(outer_poly, h)
    n_fixed = len(outer_pts)
    bbox = (
        outer_pts[:, 0].min(), outer_pts[:, 0].max(),
        outer_pts[:, 1].min(), outer_pts[:, 1].max(),
    )
    lattice = _hex_lattice(bbox, h)
    if len(lattice):
        keep = outer.contains(lattice)
        keep &= outer.boundary_distance(lattice) > 0.58 * h
        lattice = lattice[keep]
    pts = np.vstack([outer_pts, lattice])

    def keep_fn(p, tris):
        cent = p[tris].mean(axis=1)
        if outer.kind == DISK:
            return np.linalg.norm(cent - outer.center, axis=1) < outer.radius
        if outer.kind != "rectangle":
            return polygon_contains(outer_poly, cent)
        return np.ones(len(tris), dtype=bool)

    pts, tris = _smooth(pts, n_fixed, keep_fn, smooth_iters)
    return _finalize(pts, tris, None, outer)


def _finalize(pts, tris, domain, outer) -> TriMesh:
    tris = _orient_ccw(pts, tris)
    areas = signed_areas(pts, tris)
    if np.any(areas <= 0):
        raise MeshFailure("mesher produced a non-positive-area triangle")
    edges = _boundary_edges_of(tris)
    tags = _tag_edges(pts, edges, domain, outer)
    quality = min_angle_deg(pts, tris)
    if quality < MIN_ANGLE_DEG:
        raise MeshFailure(f"minimum angle {quality:.2f} below {MIN_ANGLE_DEG}")
    mesh = TriMesh(
        vertices=pts,
        triangles=tris,
        boundary_edges=edges,
        boundary_tags=tags,
        h_max=max_edge_length(pts, tris),
        quality=quality,
        domain=domain if domain is not None else outer,
    )
    for a in ("vertices", "triangles", "boundary_edges", "boundary_tags"):
        getattr(mesh, a).setflags(write=False)
    return mesh


def refine(mesh: TriMesh) -> TriMesh:
    """Uniform 4-way refinement with boundary midpoints snapped to the curve."""
    verts = mesh.vertices
    tris = mesh.triangles
    edge_mid: dict[tuple, int] = {}
    new_pts = [verts]
    next_id = len(verts)

    def midpoint(i, j):
        nonlocal next_id
        key = (i, j) if i < j else (j, i)
        if key not in edge_mid:
            edge_mid[key] = next_id
            new_pts.append(0.5 * (verts[i] + verts[j])[None, :])
            next_id += 1
        return edge_mid[key]

    children = np.empty((4 * len(tris), 3), dtype=tris.dtype)
    for t, (a, b, c) in enumerate(tris):
        mab, mbc, mca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        children[4 * t + 0] = (a, mab, mca)
        children[4 * t + 1] = (mab, b, mbc)
        children[4 * t + 2] = (mca, mbc, c)
        children[4 * t + 3] = (mab, mbc, mca)
    pts = np.vstack(new_pts)

    # project boundary midpoints onto the analytic curve, tags inherited
    b_edges = []
    b_tags = []
    domain = mesh.domain
    for (i, j), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        m = edge_mid[(i, j) if i < j else (j, i)]
        target = None
        if isinstance(domain, PuncturedDomain):
            target = domain.hole if tag == HOLE else domain.outer
        elif isinstance(domain, OuterDomain):
            target = domain
        if target is not None:
            pts[m] = target.project_to_boundary(pts[m][None, :])[0]
        b_edges.extend([(i, m), (m, j)])
        b_tags.extend([tag, tag])

    areas = signed_areas(pts, children)
    if np.any(areas <= 0):
        raise MeshFailure("refinement inverted a triangle during boundary projection")
    refined = TriMesh(
        vertices=pts,
        triangles=children,
        boundary_edges=np.asarray(b_edges, dtype=tris.dtype),
        boundary_tags=np.asarray(b_tags, dtype=np.int8),
        h_max=max_edge_length(pts, children),
        quality=min_angle_deg(pts, children),
        domain=domain,
    )
    for a in ("vertices", "triangles", "boundary_edges", "boundary_tags"):
        getattr(refined, a).setflags(write=False)
    return refined


def boundary_edges(mesh: TriMesh, tag) -> tuple[np.ndarray, np.ndarray]:
    """Edges with the given tag and their lengths."""
    code = TAG_CODES.get(tag, tag)
    sel = mesh.boundary_tags == code
    edges = mesh.boundary_edges[sel]
    if len(edges) == 0:
        return edges.reshape(0, 2), np.zeros(0)
    lengths = np.linalg.norm(
        mesh.vertices[edges[:, 1]] - mesh.vertices[edges[:, 0]], axis=1
    )
    return edges, lengths


def boundary_loops(mesh: TriMesh, tag) -> list[list[int]]:
    """Connected vertex loops formed by the edges of one tag."""
    edges, _ = boundary_edges(mesh, tag)
    succ = {int(i): int(j) for i, j in edges}
    loops = []
    seen = set()
    for start in list(succ):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        cur = succ.get(start)
        while cur is not None and cur != start:
            loop.append(cur)
            seen.add(cur)
            cur = succ.get(cur)
        loops.append(loop)
    return loops


def check_mesh(mesh: TriMesh, punctured: bool | None = None) -> None:
    """Validate structural mesh invariants, raising MeshFailure on violation."""
    areas = signed_areas(mesh.vertices, mesh.triangles)
    if np.any(areas <= 0):
        raise MeshFailure("non-positive triangle area")
    e = np.vstack(
        [mesh.triangles[:, [0, 1]], mesh.triangles[:, [1, 2]], mesh.triangles[:, [2, 0]]]
    )
    key = np.sort(e, axis=1)
    _, counts = np.unique(key, axis=0, return_counts=True)
    if np.any(counts > 2):
        raise MeshFailure("edge shared by more than two triangles")
    n_boundary = int(np.sum(counts == 1))
    if n_boundary != len(mesh.boundary_edges):
        raise MeshFailure("boundary edge list inconsistent with triangle incidence")
    if punctured is None:
        punctured = isinstance(mesh.domain, PuncturedDomain)
    chi = mesh.euler_characteristic()
    expected = 0 if punctured else 1
    if chi != expected:
        raise MeshFailure(f"Euler characteristic {chi}, expected {expected}")
    if isinstance(mesh.domain, PuncturedDomain):
        dom = mesh.domain
        for tag, curve in ((HOLE, dom.hole), (OUTER, dom.outer)):
            edges, _ = boundary_edges(mesh, tag)
            if len(edges):
                endpoints = mesh.vertices[np.unique(edges)]
                d = curve.boundary_distance(endpoints)
                if float(d.max()) > 1e-10:
                    raise MeshFailure(
                        f"{TAG_NAMES[tag]} endpoints off the curve by {d.max():.2e}"
                    )
            loops = boundary_loops(mesh, tag)
            if len(loops) != 1:
                raise MeshFailure(
                    f"expected one {TAG_NAMES[tag]} loop, found {len(loops)}"
                )


# ---------------------------------------------------------------------------
# matched full/punctured mesh pairs for the closeness lab
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeshPair:
    """Full-domain mesh whose vertex/triangle prefixes form the punctured mesh.

    full.vertices[:n_punct_vertices] coincide with punct.vertices, and
    full.triangles[:n_punct_triangles] with punct.triangles, so restriction
    and extension by zero are exact index operations.
    """

    full: TriMesh
    punct: TriMesh
    n_punct_vertices: int
    n_punct_triangles: int

    @property
    def hole_triangles(self) -> np.ndarray:
        return self.full.triangles[self.n_punct_triangles:]


def matched_mesh_pair(
    domain: PuncturedDomain, h_target: float, grading: float | None = None,
    smooth_iters: int = 6,
) -> MeshPair:
    punct = triangulate(domain, h_target, grading=grading, smooth_iters=smooth_iters)
    loops = boundary_loops(punct, HOLE)
    if len(loops) != 1:
        raise MeshFailure(f"expected one hole loop, found {len(loops)}")
    loop = np.asarray(loops[0], dtype=int)
    loop_pts = punct.vertices[loop]

    # interior fill of the hole: shrunken copies of the loop plus the center
    x0 = domain.center
    rel = loop_pts - x0
    rmax = np.linalg.norm(rel, axis=1).max()
    spacing = domain.hole.boundary_length() / len(loop)
    n_layers = max(1, int(np.floor(rmax / (spacing * np.sqrt(3) / 2))) - 1)
    inner = [x0[None, :]]
    for k in range(1, n_layers):
        s = k / n_layers
        m = max(6, int(round(len(loop) * s)))
        th = 2 * np.pi * (np.arange(m) + 0.5 * k) / m
        rr = s * domain.hole.radial_extent(th) * 0.999
        inner.append(x0 + np.column_stack([rr * np.cos(th), rr * np.sin(th)]))
    inner_pts = np.vstack(inner)
    hole_all = np.vstack([loop_pts, inner_pts])

    def keep_all(p, tris):
        return np.ones(len(tris), dtype=bool)

    hole_pts, hole_tris = _smooth(hole_all, len(loop_pts), keep_all, max(2, smooth_iters // 2))
    hole_tris = _orient_ccw(hole_pts, hole_tris)
    if np.any(signed_areas(hole_pts, hole_tris) <= 0):
        raise MeshFailure("hole fill produced a degenerate triangle")

    # merge: punct arrays first, then hole-interior vertices and triangles
    n_pv, n_pt = punct.num_vertices, punct.num_triangles
    remap = np.empty(len(hole_pts), dtype=int)
    remap[: len(loop)] = loop
    remap[len(loop):] = n_pv + np.arange(len(hole_pts) - len(loop))
    full_vertices = np.vstack([punct.vertices, hole_pts[len(loop):]])
    full_triangles = np.vstack([punct.triangles, remap[hole_tris]])
    outer_sel = punct.boundary_tags == OUTER
    full = TriMesh(
        vertices=full_vertices,
        triangles=full_triangles,
        boundary_edges=punct.boundary_edges[outer_sel],
        boundary_tags=punct.boundary_tags[outer_sel],
        h_max=max_edge_length(full_vertices, full_triangles),
        quality=min_angle_deg(full_vertices, full_triangles),
        domain=domain.outer,
    )
    for a in ("vertices", "triangles", "boundary_edges", "boundary_tags"):
        getattr(full, a).setflags(write=False)
    return MeshPair(full=full, punct=punct, n_punct_vertices=n_pv, n_punct_triangles=n_pt)


# ---------------------------------------------------------------------------
# point location and P1 evaluation
# ---------------------------------------------------------------------------


def triangle_gradients(mesh: TriMesh) -> np.ndarray:
    """Per-triangle gradients of the three P1 basis functions, shape (T, 3, 2)."""
    p = mesh.vertices[mesh.triangles]
    area2 = 2.0 * signed_areas(mesh.vertices, mesh.triangles)
    g = np.empty((len(mesh.triangles), 3, 2))
    for i in range(3):
        a = p[:, (i + 1) % 3]
        b = p[:, (i + 2) % 3]
        g[:, i, 0] = (a[:, 1] - b[:, 1]) / area2
        g[:, i, 1] = (b[:, 0] - a[:, 0]) / area2
    return g


class PointLocator:
    """Grid-binned point location with barycentric coordinates."""

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        p = mesh.vertices[mesh.triangles]
        self._lo = p.min(axis=1)
        self._hi = p.max(axis=1)
        self._cell = max(mesh.h_max, 1e-12)
        self._origin = mesh.vertices.min(axis=0)
        self._bins: dict[tuple, list] = {}
        lo_idx = np.floor((self._lo - self._origin) / self._cell).astype(int)
        hi_idx = np.floor((self._hi - self._origin) / self._cell).astype(int)
        for t in range(len(mesh.triangles)):
            for ix in range(lo_idx[t, 0], hi_idx[t, 0] + 1):
                for iy in range(lo_idx[t, 1], hi_idx[t, 1] + 1):
                    self._bins.setdefault((ix, iy), []).append(t)
        self._p0 = p[:, 0]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        self._inv = np.empty((len(mesh.triangles), 2, 2))
        self._inv[:, 0, 0] = d2[:, 1] / det
        self._inv[:, 0, 1] = -d2[:, 0] / det
        self._inv[:, 1, 0] = -d1[:, 1] / det
        self._inv[:, 1, 1] = d1[:, 0] / det

    def _candidates(self, pt, widen=False):
        ix = int(np.floor((pt[0] - self._origin[0]) / self._cell))
        iy = int(np.floor((pt[1] - self._origin[1]) / self._cell))
        if not widen:
            return self._bins.get((ix, iy), ())
        cands = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cands.extend(self._bins.get((ix + dx, iy + dy), ()))
        return cands

    def _best(self, pt, cands):
        best_t, best_b, best_viol = -1, None, np.inf
        for t in cands:
            rel = pt - self._p0[t]
            lm = self._inv[t] @ rel
            b = np.array([1.0 - lm[0] - lm[1], lm[0], lm[1]])
            viol = -b.min()
            if viol < best_viol:
                best_t, best_b, best_viol = t, b, viol
            if viol <= 0.0:
                break
        return best_t, best_b, best_viol

    def locate(self, points: np.ndarray, tol: float = 1e-9):
        """Return (triangle indices, barycentric coordinates) for each point."""
        pts = np.atleast_2d(points)
        tri_idx = np.full(len(pts), -1, dtype=int)
        bary = np.zeros((len(pts), 3))
        for n, pt in enumerate(pts):
            best_t, best_b, best_viol = self._best(pt, self._candidates(pt))
            if best_viol > 0.0:
                t2, b2, v2 = self._best(pt, self._candidates(pt, widen=True))
                if v2 < best_viol:
                    best_t, best_b, best_viol = t2, b2, v2
            if best_t < 0 or best_viol > tol:
                raise TraceInterpolationFailure(
                    f"point {pt.tolist()} not inside the mesh (violation {best_viol:.2e})"
                )
            tri_idx[n] = best_t
            bary[n] = np.clip(best_b, 0.0, None)
            bary[n] /= bary[n].sum()
        return tri_idx, bary

    def evaluate(self, values: np.ndarray, tri_idx, bary) -> np.ndarray:
        return np.einsum("nk,nk->n", values[self.mesh.triangles[tri_idx]], bary)

    def gradient(self, values: np.ndarray, tri_idx, grads=None) -> np.ndarray:
        if grads is None:
            grads = triangle_gradients(self.mesh)
        v = values[self.mesh.triangles[tri_idx]]
        return np.einsum("nk,nkd->nd", v, grads[tri_idx])


# ---------------------------------------------------------------------------
# plain-text mesh export
# ---------------------------------------------------------------------------


def save_mesh(mesh: TriMesh, path: str) -> None:
    """Write 'V T B' header, vertex lines, triangle lines, tagged edge lines."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.num_vertices} {mesh.num_triangles} {len(mesh.boundary_edges)}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")
        for (i, j), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
            fh.write(f"{i} {j} {TAG_NAMES[int(tag)]}\n")


def load_mesh(path: str) -> TriMesh:
    with open(path) as fh:
        nv, nt, nb = map(int, fh.readline().split())
        verts = np.array([list(map(float, fh.readline().split())) for _ in range(nv)])
        tris = np.array([list(map(int, fh.readline().split())) for _ in range(nt)], dtype=int)
        edges = np.empty((nb, 2), dtype=int)
        tags = np.empty(nb, dtype=np.int8)
        for b in range(nb):
            i, j, name = fh.readline().split()
            edges[b] = (int(i), int(j))
            tags[b] = TAG_CODES[name]
    return TriMesh(
        vertices=verts,
        triangles=tris,
        boundary_edges=edges,
        boundary_tags=tags,
        h_max=max_edge_length(verts, tris),
        quality=min_angle_deg(verts, tris),
        domain=None,
    )
