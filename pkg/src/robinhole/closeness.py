"""Identification operators between the full and punctured discretizations
and measured closeness ratios.

The restriction J and zero-extension J' act on matched mesh pairs where the
punctured mesh is a vertex/triangle prefix of the full mesh, so the
restriction/extension identities hold to rounding. The transplantation J1'
replaces a function inside the intermediate circle by the radial profile
(r/radius) * trace, realized through a 256-node angular trace table.
Integrals over the hole neighborhood use polar quadrature bands so that no
cut-cell error enters the measured ratios.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import EmptyTestSet, GridExhausted, MeshMismatch, RadiusOutOfRange
from .fem import NEUMANN_OUTER, AssembledForms, assemble, assemble_plain, norm1
from .geometry import PuncturedDomain
from .mesh import HOLE, MeshPair, PointLocator, boundary_edges, triangle_gradients
from .probes import TestFunction
from .quadrature import (
    _TRI7_B,
    gauss_legendre,
    periodic_trapezoid,
    piecewise_linear_derivative_norm_sq,
    piecewise_linear_norm_sq,
    polar_band_rule,
    rect_rule,
    triangle_rule,
)

# ---------------------------------------------------------------------------
# restriction and zero-extension
# ---------------------------------------------------------------------------


def op_J(pair: MeshPair, f_full: np.ndarray) -> np.ndarray:
    """Restriction of a full-domain vertex vector to the punctured mesh."""
    f_full = np.asarray(f_full, dtype=float)
    if f_full.shape != (pair.full.num_vertices,):
        raise MeshMismatch("expected a full-mesh vertex vector")
    return f_full[: pair.n_punct_vertices].copy()


@dataclass(frozen=True)
class ZeroExtension:
    """Extension by zero into the hole, kept as an L2 object.

    The extension is supported on the punctured triangles only; it is not a
    P1 function on the full mesh, so its norms and inner products are taken
    element-wise over the punctured prefix of the full triangle list.
    """

    pair: MeshPair
    values: np.ndarray  # punctured-mesh vertex coefficients

    @property
    def full_vertex_values(self) -> np.ndarray:
        out = np.zeros(self.pair.full.num_vertices)
        out[: self.pair.n_punct_vertices] = self.values
        return out

    def inner_full(self, f_full: np.ndarray) -> float:
        """(f, J'u) over the full domain, summed over punctured triangles.

        Independent of the punctured mass matrix assembly path on purpose.
        """
        full = self.pair.full
        tris = full.triangles[: self.pair.n_punct_triangles]
        p = full.vertices[tris]
        areas = 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )
        fv = np.asarray(f_full, dtype=float)[tris]
        uv = self.full_vertex_values[tris]
        # int over T of f*u for P1: (A/12) (sum_i f_i sum_j u_j + sum_i f_i u_i)
        return float(
            np.sum(areas / 12.0 * (fv.sum(axis=1) * uv.sum(axis=1) + np.sum(fv * uv, axis=1)))
        )

    def norm0(self) -> float:
        return float(np.sqrt(self.inner_full(self.full_vertex_values)))


def op_Jprime(pair: MeshPair, u_punct: np.ndarray) -> ZeroExtension:
    """Extension of a punctured-mesh function by zero into the hole."""
    u = np.asarray(u_punct, dtype=float)
    if u.shape != (pair.punct.num_vertices,):
        raise MeshMismatch("expected a punctured-mesh vertex vector")
    return ZeroExtension(pair=pair, values=u.copy())


# ---------------------------------------------------------------------------
# the transplantation operator J1'
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class J1Extension:
    """u outside the circle of the intermediate radius, (r/radius)*trace inside."""

    center: np.ndarray
    radius: float
    theta: np.ndarray
    trace: np.ndarray
    locator: PointLocator
    values: np.ndarray

    def trace_at(self, phi: np.ndarray) -> np.ndarray:
        """Piecewise-linear angular interpolation of the trace table."""
        n = len(self.theta)
        dtheta = 2 * np.pi / n
        s = np.mod(np.asarray(phi, dtype=float), 2 * np.pi) / dtheta
        j = np.floor(s).astype(int) % n
        t = s - np.floor(s)
        return (1 - t) * self.trace[j] + t * self.trace[(j + 1) % n]

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        rel = pts - self.center
        r = np.linalg.norm(rel, axis=1)
        phi = np.arctan2(rel[:, 1], rel[:, 0])
        out = np.empty(len(pts))
        inside = r < self.radius
        out[inside] = (r[inside] / self.radius) * self.trace_at(phi[inside])
        if np.any(~inside):
            ti, ba = self.locator.locate(pts[~inside])
            out[~inside] = self.locator.evaluate(self.values, ti, ba)
        return out


class RadiusChoice(NamedTuple):
    radius: float
    angular_energy: float
    bound: float
    satisfied: bool
    tie_break: str


# ---------------------------------------------------------------------------
# measurement context
# ---------------------------------------------------------------------------


class ClosenessLab:
    """Cached quadrature tables for one (mesh pair, gamma) configuration."""

    def __init__(
        self,
        pair: MeshPair,
        domain: PuncturedDomain,
        gamma: float,
        n_angular: int = 256,
        n_radial: int = 8,
    ):
        self.pair = pair
        self.domain = domain
        self.gamma = float(gamma)
        self.eps = domain.epsilon
        self.center = domain.center
        self.n_angular = n_angular
        self.n_radial = n_radial
        self.forms: AssembledForms = assemble(pair.punct, NEUMANN_OUTER, gamma)
        self.forms_full: AssembledForms = assemble_plain(pair.full, NEUMANN_OUTER)
        self.locator = PointLocator(pair.punct)
        self.tri_grads = triangle_gradients(pair.punct)
        self.theta, _ = periodic_trapezoid(n_angular)
        self.dtheta = 2 * np.pi / n_angular
        self.r_hole = domain.hole.radial_extent(self.theta)
        self.full_rule = triangle_rule(pair.full)
        self.punct_rule = triangle_rule(pair.punct)
        # hole-boundary Gauss points for boundary pairings (3 per edge)
        edges, lengths = boundary_edges(pair.punct, HOLE)
        gx, gw = gauss_legendre(3, 0.0, 1.0)
        a = pair.punct.vertices[edges[:, 0]]
        b = pair.punct.vertices[edges[:, 1]]
        self._hole_edges = edges
        self._hole_edge_pts = a[:, None, :] + gx[None, :, None] * (b - a)[:, None, :]
        self._hole_edge_w = lengths[:, None] * gw[None, :]
        self._hole_edge_t = gx
        self._trace_cache: dict[float, tuple] = {}
        self._band_cache: dict[tuple, tuple] = {}

    # -- traces and bands ---------------------------------------------------

    def _circle_loc(self, radius: float):
        key = round(radius, 15)
        if key not in self._trace_cache:
            pts = self.center + radius * np.column_stack(
                [np.cos(self.theta), np.sin(self.theta)]
            )
            self._trace_cache[key] = self.locator.locate(pts)
        return self._trace_cache[key]

    def trace(self, u: np.ndarray, radius: float) -> np.ndarray:
        """Angular trace table of a punctured-mesh P1 function on a circle."""
        ti, ba = self._circle_loc(radius)
        return self.locator.evaluate(np.asarray(u, dtype=float), ti, ba)

    def trace_derivative(self, g: np.ndarray) -> np.ndarray:
        """Centered angular derivative of a trace table."""
        return (np.roll(g, -1) - np.roll(g, 1)) / (2 * self.dtheta)

    def band(self, r_inner, r_outer, locate: bool = True):
        """Polar quadrature band keyed by its radial bounds."""
        key = (
            tuple(np.round(np.broadcast_to(r_inner, (self.n_angular,)), 15)),
            tuple(np.round(np.broadcast_to(r_outer, (self.n_angular,)), 15)),
            locate,
        )
        if key not in self._band_cache:
            pts, w, r, tidx = polar_band_rule(
                self.center, self.theta, r_inner, r_outer, self.n_radial
            )
            loc = self.locator.locate(pts) if locate else None
            self._band_cache[key] = (pts, w, r, tidx, loc)
        return self._band_cache[key]

    # -- norms ---------------------------------------------------------------

    def f_norms(self, f: TestFunction) -> dict:
        """L2, H1-seminorm, and graph-norm integrals of an analytic probe."""
        pts, w = self.full_rule
        flat = pts.reshape(-1, 2)
        vals = f.value(flat).reshape(w.shape)
        grads = f.grad(flat)
        gsq = np.sum(grads * grads, axis=1).reshape(w.shape)
        src = (-f.laplacian(flat) + f.value(flat)).reshape(w.shape)
        l2 = float(np.sum(w * vals * vals))
        h1 = float(np.sum(w * gsq))
        h2 = float(np.sum(w * src * src))
        return {"l2_sq": l2, "h1_semi_sq": h1, "graph_sq": h2,
                "norm1": np.sqrt(l2 + h1), "norm2": np.sqrt(h2)}

    def u_norm1(self, u: np.ndarray) -> float:
        return norm1(self.forms, np.asarray(u, dtype=float))

    def u_norm0(self, u: np.ndarray) -> float:
        u = np.asarray(u, dtype=float)
        return float(np.sqrt(u @ (self.forms.M @ u)))

    def interpolate(self, f: TestFunction, mesh="full") -> np.ndarray:
        verts = (self.pair.full if mesh == "full" else self.pair.punct).vertices
        return f.value(verts)

    # -- hole-region integrals ------------------------------------------------

    def hole_integral_sq(self, f: TestFunction) -> float:
        """Integral of |f|^2 over the hole region K_eps (analytic probe)."""
        pts, w, _, _ = polar_band_rule(
            self.center, self.theta, 0.0, self.r_hole, self.n_radial
        )
        vals = f.value(pts)
        return float(np.sum(w * vals * vals))


# ---------------------------------------------------------------------------
# exact identities (3.1)-(3.4)
# ---------------------------------------------------------------------------


def measure_exact_identities(lab: ClosenessLab, smooth_fulls: list, roughs: list) -> dict:
    """Measured defects of the identity conditions and boundedness factors."""
    pair = lab.pair
    M_punct = lab.forms.M
    d1 = d2 = d3 = 0.0
    factor_J = 0.0
    factor_Jp = 0.0
    for f_full in smooth_fulls:
        jf = op_J(pair, f_full)
        j1f = op_J(pair, f_full)  # J1 acts by the same restriction
        diff = jf - j1f
        n1 = np.sqrt(max(diff @ (M_punct @ diff), 0.0))
        fn1 = np.sqrt(f_full @ (lab.forms_full.M @ f_full) + f_full @ (lab.forms_full.K @ f_full))
        if fn1 > 0:
            d1 = max(d1, n1 / fn1)
        f0 = np.sqrt(f_full @ (lab.forms_full.M @ f_full))
        jf0 = np.sqrt(jf @ (M_punct @ jf))
        if f0 > 0:
            factor_J = max(factor_J, jf0 / f0)
    for u in roughs:
        ext = op_Jprime(pair, u)
        back = op_J(pair, ext.full_vertex_values)
        diff = back - u
        un1 = lab.u_norm1(u)
        n3 = np.sqrt(max(diff @ (M_punct @ diff), 0.0))
        if un1 > 0:
            d3 = max(d3, n3 / un1)
        u0 = lab.u_norm0(u)
        if u0 > 0:
            factor_Jp = max(factor_Jp, ext.norm0() / u0)
        for f_full in smooth_fulls:
            jf = op_J(pair, f_full)
            lhs = jf @ (M_punct @ u)
            rhs = ext.inner_full(f_full)
            f0 = np.sqrt(f_full @ (lab.forms_full.M @ f_full))
            if f0 > 0 and u0 > 0:
                d2 = max(d2, abs(lhs - rhs) / (f0 * u0))
    d4 = max(0.0, factor_J - 2.0, factor_Jp - 2.0)
    return {
        "delta1": d1, "delta2": d2, "delta3": d3, "delta4": d4,
        "factor_restriction": factor_J, "factor_extension": factor_Jp,
    }


# ---------------------------------------------------------------------------
# conditions (5'), (6), (7)
# ---------------------------------------------------------------------------


def check_condition5prime(lab: ClosenessLab, f: TestFunction, f_norms: dict | None = None) -> float:
    """||f - J'Jf||_0 / ||f||_1 = sqrt(int_{K_eps} |f|^2) / ||f||_1."""
    if f_norms is None:
        f_norms = lab.f_norms(f)
    return float(np.sqrt(lab.hole_integral_sq(f)) / f_norms["norm1"])


def make_j1prime(lab: ClosenessLab, u: np.ndarray, radius: float) -> J1Extension:
    eps = lab.eps
    if not (eps < radius < 2 * eps):
        raise RadiusOutOfRange(f"intermediate radius {radius} not in ({eps}, {2 * eps})")
    g = lab.trace(u, radius)
    return J1Extension(
        center=lab.center, radius=radius, theta=lab.theta, trace=g,
        locator=lab.locator, values=np.asarray(u, dtype=float),
    )


def op_J1prime(lab: ClosenessLab, u: np.ndarray, radius: float) -> J1Extension:
    """Spec-facing alias for the transplantation operator."""
    return make_j1prime(lab, u, radius)


def condition6_numerator_sq(lab: ClosenessLab, u: np.ndarray, radius: float,
                            g: np.ndarray | None = None) -> float:
    """||J'u - J1'u||_0^2 split over the annulus band and the hole region."""
    u = np.asarray(u, dtype=float)
    if g is None:
        g = lab.trace(u, radius)
    pts, w, r, tidx, loc = lab.band(lab.r_hole, radius)
    uvals = lab.locator.evaluate(u, *loc)
    j1vals = (r / radius) * g[tidx]
    i_ann = float(np.sum(w * (uvals - j1vals) ** 2))
    i_hole = float(np.sum(lab.dtheta * g * g * lab.r_hole**4 / (4 * radius**2)))
    return i_ann + i_hole


def check_condition6(lab: ClosenessLab, u: np.ndarray, radius: float,
                     g: np.ndarray | None = None, un1: float | None = None) -> float:
    """||J'u - J1'u||_0 / ||u||_1."""
    if un1 is None:
        un1 = lab.u_norm1(u)
    return float(np.sqrt(condition6_numerator_sq(lab, u, radius, g)) / un1)


class Condition7Result(NamedTuple):
    ratio: float
    term_grad_extension: float
    term_grad_annulus: float
    term_boundary: float


def check_condition7(
    lab: ClosenessLab,
    f: TestFunction,
    u: np.ndarray,
    radius: float,
    g: np.ndarray | None = None,
    f_norms: dict | None = None,
    un1: float | None = None,
) -> Condition7Result:
    """|a(f, J1'u) - a'(J1 f, u)| / (||f||_2 ||u||_1) via the three-term split.

    The three terms are the gradient pairing with the radial extension inside
    the circle, the gradient pairing over the annulus band, and the
    gamma-weighted hole-boundary pairing.
    """
    u = np.asarray(u, dtype=float)
    if g is None:
        g = lab.trace(u, radius)
    if f_norms is None:
        f_norms = lab.f_norms(f)
    if un1 is None:
        un1 = lab.u_norm1(u)
    gp = lab.trace_derivative(g)

    # T1: grad f . grad(J1'u) over the disk; grad(J1'u) = (g e_r + g' e_phi)/radius
    pts, w, r, tidx, _ = lab.band(0.0, radius, locate=False)
    gf = f.grad(pts)
    cos = np.cos(lab.theta[tidx])
    sin = np.sin(lab.theta[tidx])
    f_r = gf[:, 0] * cos + gf[:, 1] * sin
    f_t = -gf[:, 0] * sin + gf[:, 1] * cos
    t1 = float(np.sum(w * (f_r * g[tidx] + f_t * gp[tidx])) / radius)

    # T2: grad f . grad u over the annulus between the hole and the circle
    pts2, w2, _, _, loc2 = lab.band(lab.r_hole, radius)
    gu = lab.locator.gradient(u, loc2[0], lab.tri_grads)
    gf2 = f.grad(pts2)
    t2 = float(np.sum(w2 * np.sum(gf2 * gu, axis=1)))

    # T3: gamma * int over the hole boundary of (J1 f) u
    fvals = f.value(lab._hole_edge_pts.reshape(-1, 2)).reshape(lab._hole_edge_w.shape)
    ue = u[lab._hole_edges]
    uvals = ue[:, 0][:, None] * (1 - lab._hole_edge_t)[None, :] + ue[:, 1][:, None] * lab._hole_edge_t[None, :]
    t3 = lab.gamma * float(np.sum(lab._hole_edge_w * fvals * uvals))

    denom = f_norms["norm2"] * un1
    ratio = abs(t1 - t2 - t3) / denom if denom > 0 else 0.0
    return Condition7Result(
        ratio=ratio,
        term_grad_extension=abs(t1) / denom if denom > 0 else 0.0,
        term_grad_annulus=abs(t2) / denom if denom > 0 else 0.0,
        term_boundary=abs(t3) / denom if denom > 0 else 0.0,
    )


# ---------------------------------------------------------------------------
# trace constant, auxiliary L2 bound, radial-extension energy
# ---------------------------------------------------------------------------


def circle_trace_ratio(lab: ClosenessLab, u: np.ndarray, radius: float,
                       delta: float = 0.5, g: np.ndarray | None = None) -> float:
    """Trace-inequality ratio for the circle of the given radius.

    int_{circle} u^2 dmu over int_{r > radius} (delta |grad u|^2 + u^2/delta).
    """
    u = np.asarray(u, dtype=float)
    if g is None:
        g = lab.trace(u, radius)
    lhs = radius * piecewise_linear_norm_sq(g, lab.dtheta)
    pts, w = lab.punct_rule
    rr = np.linalg.norm(pts - lab.center, axis=2)
    mask = rr > radius
    tris = lab.pair.punct.triangles
    uq = np.einsum("qk,tk->tq", _TRI7_B, u[tris])
    gu = np.einsum("tk,tkd->td", u[tris], lab.tri_grads)
    gsq = np.sum(gu * gu, axis=1)
    rhs = float(np.sum(w * mask * (delta * gsq[:, None] + uq * uq / delta)))
    return lhs / rhs if rhs > 0 else 0.0


def check_trace(mesh, u: np.ndarray, delta: float = 0.5) -> float:
    """Whole-boundary trace ratio on an arbitrary mesh (Lipschitz omega).

    Returns int_{boundary} u^2 dmu / int (delta |grad u|^2 + u^2/delta); the
    fitted constant is the sup of this ratio over a test set.
    """
    u = np.asarray(u, dtype=float)
    edges = mesh.boundary_edges
    a = mesh.vertices[edges[:, 0]]
    b = mesh.vertices[edges[:, 1]]
    lengths = np.linalg.norm(b - a, axis=1)
    ua, ub = u[edges[:, 0]], u[edges[:, 1]]
    lhs = float(np.sum(lengths / 3.0 * (ua * ua + ua * ub + ub * ub)))
    pts, w = triangle_rule(mesh)
    tris = mesh.triangles
    uq = np.einsum("qk,tk->tq", _TRI7_B, u[tris])
    grads = triangle_gradients(mesh)
    gu = np.einsum("tk,tkd->td", u[tris], grads)
    gsq = np.sum(gu * gu, axis=1)
    rhs = float(np.sum(w * (delta * gsq[:, None] + uq * uq / delta)))
    return lhs / rhs if rhs > 0 else 0.0


def check_lemma_auxiliary(lab: ClosenessLab, u: np.ndarray, radius: float,
                          un1: float | None = None) -> float:
    """Ratio of int_{B_radius \\ K} u^2 against (radius/gamma + radius) ||u||_1^2."""
    u = np.asarray(u, dtype=float)
    if un1 is None:
        un1 = lab.u_norm1(u)
    pts, w, _, _, loc = lab.band(lab.r_hole, radius)
    uvals = lab.locator.evaluate(u, *loc)
    lhs = float(np.sum(w * uvals * uvals))
    scale = (radius / lab.gamma + radius) if lab.gamma > 0 else radius
    return lhs / (scale * un1**2) if un1 > 0 else 0.0


def radial_extension_energy_sq(lab: ClosenessLab, g: np.ndarray) -> float:
    """int_{B_radius} |grad J1'u|^2 = (1/2) (int g^2 + int g'^2) d phi."""
    return 0.5 * (
        piecewise_linear_norm_sq(g, lab.dtheta)
        + piecewise_linear_derivative_norm_sq(g, lab.dtheta)
    )


# ---------------------------------------------------------------------------
# intermediate radius selection
# ---------------------------------------------------------------------------


def _radius_grid(eps: float, n_grid: int = 33) -> np.ndarray:
    return eps * (1.0 + (np.arange(1, n_grid + 1)) / (n_grid + 1))


def annulus_h1_integral(lab: ClosenessLab, u: np.ndarray) -> float:
    """int over B_{2 eps} minus B_eps of |grad u|^2 + u^2."""
    u = np.asarray(u, dtype=float)
    pts, w, _, _, loc = lab.band(np.full(lab.n_angular, lab.eps), 2 * lab.eps)
    uvals = lab.locator.evaluate(u, *loc)
    gu = lab.locator.gradient(u, loc[0], lab.tri_grads)
    return float(np.sum(w * (np.sum(gu * gu, axis=1) + uvals * uvals)))


def choose_intermediate_radius(
    lab: ClosenessLab, u: np.ndarray, n_grid: int = 33
) -> RadiusChoice:
    """Grid search for a radius satisfying the annulus mean-value bound.

    Scans radii in (eps, 2 eps), returns one whose angular-derivative energy
    is at most 4 times the annulus H1 integral, preferring the minimizer;
    ties break toward the midpoint. Raises GridExhausted when no grid radius
    satisfies the bound.
    """
    eps = lab.eps
    clearance_radius = float(lab.domain.outer.boundary_distance(lab.center[None, :])[0])
    if 2 * eps >= clearance_radius:
        raise RadiusOutOfRange("annulus of radius 2*eps leaves the outer domain")
    u = np.asarray(u, dtype=float)
    bound = 4.0 * annulus_h1_integral(lab, u)
    radii = _radius_grid(eps, n_grid)
    energies = np.empty(n_grid)
    for i, tau in enumerate(radii):
        g = lab.trace(u, tau)
        energies[i] = piecewise_linear_derivative_norm_sq(g, lab.dtheta)
    ok = energies <= bound * (1 + 1e-12)
    mid = 1.5 * eps
    if not np.any(ok):
        i_best = int(np.argmin(energies))
        raise GridExhausted(
            f"no radius satisfied the bound {bound:.3e}; best energy "
            f"{energies[i_best]:.3e} at radius {radii[i_best]:.6g}",
            best_radius=float(radii[i_best]),
            best_ratio=float(energies[i_best] / bound) if bound > 0 else np.inf,
        )
    emin = energies[ok].min()
    near = ok & (energies <= emin + 1e-12 * max(1.0, emin))
    cands = radii[near]
    radius = float(cands[np.argmin(np.abs(cands - mid))])
    tie = "sup" if radius <= mid else "inf"
    return RadiusChoice(
        radius=radius,
        angular_energy=float(energies[np.argmin(np.abs(radii - radius))]),
        bound=float(bound),
        satisfied=True,
        tie_break=tie,
    )


def shared_intermediate_radius(lab: ClosenessLab, roughs: list, n_grid: int = 33) -> RadiusChoice:
    """Single radius for a certification run: argmin of the summed energies."""
    eps = lab.eps
    radii = _radius_grid(eps, n_grid)
    total = np.zeros(n_grid)
    for u in roughs:
        u = np.asarray(u, dtype=float)
        for i, tau in enumerate(radii):
            g = lab.trace(u, tau)
            total[i] += piecewise_linear_derivative_norm_sq(g, lab.dtheta)
    tmin = total.min()
    near = total <= tmin + 1e-12 * max(1.0, tmin)
    cands = radii[near]
    mid = 1.5 * eps
    radius = float(cands[np.argmin(np.abs(cands - mid))])
    bound = 4.0 * sum(annulus_h1_integral(lab, u) for u in roughs)
    i = int(np.argmin(np.abs(radii - radius)))
    return RadiusChoice(
        radius=radius,
        angular_energy=float(total[i]),
        bound=float(bound),
        satisfied=bool(total[i] <= bound * (1 + 1e-12)),
        tie_break="sup" if radius <= mid else "inf",
    )


# ---------------------------------------------------------------------------
# appendix lemmas
# ---------------------------------------------------------------------------


def check_magnetic(g: TestFunction, radius: float, omega_prime, n_quad: int = 48,
                   center=(0.0, 0.0)) -> float:
    """Ratio int_{B_radius} |grad g|^2 / (radius^{4/3} ||-Delta g + g||^2_{Omega'})."""
    x0, x1, y0, y1 = omega_prime
    pts, w = rect_rule(x0, x1, y0, y1, n_quad)
    src = -g.laplacian(pts) + g.value(pts)
    denom = float(np.sum(w * src * src))
    theta, _ = periodic_trapezoid(256)
    bpts, bw, _, _ = polar_band_rule(np.asarray(center, float), theta, 0.0, radius, 8)
    gg = g.grad(bpts)
    num = float(np.sum(bw * np.sum(gg * gg, axis=1)))
    return num / (radius ** (4.0 / 3.0) * denom) if denom > 0 else 0.0


def check_delta_prime(z: TestFunction, rect, n_quad: int = 48) -> tuple[float, float]:
    """Margin of the graph-norm identity for Neumann-compatible functions.

    Returns (margin, 2*grad energy); the two agree for z in the Neumann
    domain since int |-Dz+z|^2 - int(|Dz|^2+|z|^2) = 2 int |grad z|^2.
    """
    if not z.neumann_compatible:
        raise ValueError("check_delta_prime needs a Neumann-compatible probe")
    x0, x1, y0, y1 = rect
    pts, w = rect_rule(x0, x1, y0, y1, n_quad)
    lap = z.laplacian(pts)
    val = z.value(pts)
    grad = z.grad(pts)
    lhs = float(np.sum(w * (val - lap) ** 2))
    rhs = float(np.sum(w * (lap * lap + val * val)))
    gsq = 2.0 * float(np.sum(w * np.sum(grad * grad, axis=1)))
    return lhs - rhs, gsq


def _rect_area(rect) -> float:
    x0, x1, y0, y1 = rect
    return (x1 - x0) * (y1 - y0)


def _rect_diameter(rect) -> float:
    x0, x1, y0, y1 = rect
    return float(np.hypot(x1 - x0, y1 - y0))


def marchenko_terms(v: TestFunction, Q, G, Pi, n_quad: int = 48):
    """LHS and the two RHS building blocks of the measurable-set L2 bound."""
    def integral_sq(rect):
        pts, w = rect_rule(*rect, n=n_quad)
        vals = v.value(pts)
        return float(np.sum(w * vals * vals))

    lhs = integral_sq(Q)
    g_int = integral_sq(G)
    pts, w = rect_rule(*Pi, n=n_quad)
    gr = v.grad(pts)
    grad_int = float(np.sum(w * np.sum(gr * gr, axis=1)))
    mu_q, mu_g = _rect_area(Q), _rect_area(G)
    first = 2.0 * mu_q / mu_g * g_int
    grad_coef = _rect_diameter(Pi) ** 3 * np.sqrt(mu_q) / mu_g
    return lhs, first, grad_coef * grad_int


def calibrate_marchenko(test_fns: list, Q, G, Pi, n_quad: int = 48) -> float:
    """Smallest dimension constant making the inequality hold on the family."""
    c = 0.0
    for v in test_fns:
        lhs, first, grad_block = marchenko_terms(v, Q, G, Pi, n_quad)
        if grad_block > 1e-14:
            c = max(c, (lhs - first) / grad_block)
    return max(c, 1.0)


def check_marchenko(v: TestFunction, Q, G, Pi, c2: float, n_quad: int = 48) -> float:
    """RHS - LHS margin of the inequality with a calibrated constant."""
    lhs, first, grad_block = marchenko_terms(v, Q, G, Pi, n_quad)
    return first + c2 * grad_block - lhs


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosenessReport:
    """Measured closeness ratios and fitted constants for one epsilon."""

    epsilon: float
    gamma: float
    intermediate_radius: float
    radius_tie_break: str
    delta1: float
    delta2: float
    delta3: float
    delta4: float
    factor_restriction: float
    factor_extension: float
    delta5prime: float
    delta6: float
    delta7: float
    k_trace: float
    c1: float
    c2: float
    envelope_56: float
    envelope_7: float
    condition7_terms: dict
    radial_energy_ratio: float
    n_smooth: int
    n_rough: int

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "gamma": self.gamma,
            "intermediate_radius": self.intermediate_radius,
            "radius_tie_break": self.radius_tie_break,
            "delta": {
                "1": self.delta1, "2": self.delta2, "3": self.delta3,
                "4": self.delta4, "5prime": self.delta5prime,
                "6": self.delta6, "7": self.delta7,
            },
            "bound_factors": {
                "restriction": self.factor_restriction,
                "extension": self.factor_extension,
            },
            "constants": {"K_trace": self.k_trace, "C1": self.c1, "C2": self.c2},
            "envelopes": {"cond56": self.envelope_56, "cond7": self.envelope_7},
            "condition7_terms": self.condition7_terms,
            "radial_energy_ratio": self.radial_energy_ratio,
            "test_set": {"smooth": self.n_smooth, "rough": self.n_rough},
        }


def certify(
    lab: ClosenessLab,
    smooth_set: list[TestFunction],
    rough_set: list[np.ndarray],
    n_grid: int = 33,
) -> ClosenessReport:
    """Measure every closeness condition for one epsilon and aggregate."""
    if not smooth_set or not rough_set:
        raise EmptyTestSet("certification needs smooth and rough probes")
    eps, gamma = lab.eps, lab.gamma

    choice = shared_intermediate_radius(lab, rough_set, n_grid)
    radius = choice.radius

    smooth_fulls = [lab.interpolate(f, "full") for f in smooth_set]
    exact = measure_exact_identities(lab, smooth_fulls, rough_set)

    f_norm_list = [lab.f_norms(f) for f in smooth_set]
    d5 = max(
        check_condition5prime(lab, f, fn) for f, fn in zip(smooth_set, f_norm_list)
    )

    traces = [lab.trace(np.asarray(u, float), radius) for u in rough_set]
    un1s = [lab.u_norm1(u) for u in rough_set]
    d6 = max(
        check_condition6(lab, u, radius, g, un1)
        for u, g, un1 in zip(rough_set, traces, un1s)
    )

    d7 = 0.0
    terms = {"grad_extension": 0.0, "grad_annulus": 0.0, "boundary": 0.0}
    neumann_fs = [(f, fn) for f, fn in zip(smooth_set, f_norm_list) if f.neumann_compatible]
    for f, fn in neumann_fs:
        for u, g, un1 in zip(rough_set, traces, un1s):
            r = check_condition7(lab, f, u, radius, g, fn, un1)
            d7 = max(d7, r.ratio)
            terms["grad_extension"] = max(terms["grad_extension"], r.term_grad_extension)
            terms["grad_annulus"] = max(terms["grad_annulus"], r.term_grad_annulus)
            terms["boundary"] = max(terms["boundary"], r.term_boundary)

    k_trace = max(
        circle_trace_ratio(lab, u, radius, g=g) for u, g in zip(rough_set, traces)
    )
    c1 = max(
        check_lemma_auxiliary(lab, u, radius, un1)
        for u, un1 in zip(rough_set, un1s)
    )
    d = float(lab.domain.outer.boundary_distance(lab.center[None, :])[0])
    half = d / np.sqrt(2.0)
    omega_prime = (
        lab.center[0] - half, lab.center[0] + half,
        lab.center[1] - half, lab.center[1] + half,
    )
    c2 = max(check_magnetic(f, radius, omega_prime, center=lab.center) for f in smooth_set)

    energy_ratio = max(
        radial_extension_energy_sq(lab, g) / un1**2
        for g, un1 in zip(traces, un1s) if un1 > 0
    )

    return ClosenessReport(
        epsilon=eps,
        gamma=gamma,
        intermediate_radius=radius,
        radius_tie_break=choice.tie_break,
        delta1=exact["delta1"],
        delta2=exact["delta2"],
        delta3=exact["delta3"],
        delta4=exact["delta4"],
        factor_restriction=exact["factor_restriction"],
        factor_extension=exact["factor_extension"],
        delta5prime=d5,
        delta6=d6,
        delta7=d7,
        k_trace=k_trace,
        c1=c1,
        c2=c2,
        envelope_56=float(np.sqrt(eps / gamma + eps)) if gamma > 0 else float(np.sqrt(eps)),
        envelope_7=float(eps ** (1.0 / 6.0) + np.sqrt(abs(gamma)) * eps**0.25),
        condition7_terms=terms,
        radial_energy_ratio=energy_ratio,
        n_smooth=len(smooth_set),
        n_rough=len(rough_set),
    )
