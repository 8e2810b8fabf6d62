"""Quadrature rules: triangles, rectangles, circles, and polar annuli."""
from __future__ import annotations

import numpy as np

# Dunavant degree-5 rule, 7 points (barycentric coordinates and weights)
_TRI7_W = np.array(
    [0.225]
    + [0.132394152788506] * 3
    + [0.125939180544827] * 3
)
_a1, _b1 = 0.059715871789770, 0.470142064105115
_a2, _b2 = 0.797426985353087, 0.101286507323456
_TRI7_B = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [_a1, _b1, _b1],
        [_b1, _a1, _b1],
        [_b1, _b1, _a1],
        [_a2, _b2, _b2],
        [_b2, _a2, _b2],
        [_b2, _b2, _a2],
    ]
)


def triangle_rule(mesh):
    """Physical quadrature points and weights per triangle, degree-5 rule.

    Returns (points, weights) of shapes (T, 7, 2) and (T, 7); weights sum to
    the triangle areas.
    """
    p = mesh.vertices[mesh.triangles]
    pts = np.einsum("qk,tkd->tqd", _TRI7_B, p)
    areas = mesh.triangle_areas()
    w = areas[:, None] * _TRI7_W[None, :]
    return pts, w


def mesh_integral(mesh, func, rule=None) -> float:
    """Integrate a callable over the mesh with the degree-5 triangle rule."""
    pts, w = rule if rule is not None else triangle_rule(mesh)
    vals = func(pts.reshape(-1, 2)).reshape(w.shape)
    return float(np.sum(vals * w))


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0):
    """Gauss-Legendre nodes and weights rescaled to [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def rect_rule(x0: float, x1: float, y0: float, y1: float, n: int = 32):
    """Tensor Gauss-Legendre rule on a rectangle: (points (n*n, 2), weights)."""
    gx, wx = gauss_legendre(n, x0, x1)
    gy, wy = gauss_legendre(n, y0, y1)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    W = np.outer(wx, wy)
    return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()


def periodic_trapezoid(n: int):
    """Equispaced angular nodes on [0, 2*pi) with uniform weights."""
    theta = 2 * np.pi * np.arange(n) / n
    w = np.full(n, 2 * np.pi / n)
    return theta, w


def polar_band_rule(center, theta, r_inner, r_outer, n_rad: int = 8):
    """Quadrature for {(r, phi): r_inner(phi) < r < r_outer(phi)} in polar form.

    theta are equispaced angular nodes (periodic trapezoid); the radial
    direction uses Gauss-Legendre per angle. Weights include the r Jacobian.
    Returns (points (n_ang*n_rad, 2), weights, r values, theta index array).
    """
    center = np.asarray(center, dtype=float)
    n_ang = len(theta)
    dtheta = 2 * np.pi / n_ang
    ri = np.broadcast_to(np.asarray(r_inner, dtype=float), (n_ang,))
    ro = np.broadcast_to(np.asarray(r_outer, dtype=float), (n_ang,))
    x, w = np.polynomial.legendre.leggauss(n_rad)
    # per-angle affine map of the reference nodes
    r = 0.5 * (ro - ri)[:, None] * x[None, :] + 0.5 * (ro + ri)[:, None]
    wr = 0.5 * (ro - ri)[:, None] * w[None, :]
    weights = (wr * r) * dtheta
    cos, sin = np.cos(theta), np.sin(theta)
    pts = np.empty((n_ang, n_rad, 2))
    pts[:, :, 0] = center[0] + r * cos[:, None]
    pts[:, :, 1] = center[1] + r * sin[:, None]
    theta_idx = np.repeat(np.arange(n_ang), n_rad)
    return pts.reshape(-1, 2), weights.ravel(), r.ravel(), theta_idx


def piecewise_linear_norm_sq(values: np.ndarray, dtheta: float) -> float:
    """Integral of g^2 over the circle for g piecewise linear in the angle."""
    g0 = values
    g1 = np.roll(values, -1)
    return float(np.sum(dtheta * (g0 * g0 + g0 * g1 + g1 * g1) / 3.0))


def piecewise_linear_derivative_norm_sq(values: np.ndarray, dtheta: float) -> float:
    """Integral of (dg/dphi)^2 for the piecewise-linear angular interpolant."""
    dg = np.roll(values, -1) - values
    return float(np.sum(dg * dg / dtheta))
