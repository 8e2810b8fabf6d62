"""Analytic test functions with closed-form gradients and Laplacians.

Smooth probes (trig products, Bessel-radial modes, polynomials, compact
bumps) feed the closeness measurements that need exact derivatives; rough
probes are discrete P1 coefficient vectors on the punctured mesh.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import jv, jvp

from .mesh import TriMesh


@dataclass(frozen=True)
class TestFunction:
    """Closed-form scalar field with consistent value/grad/Laplacian evaluators."""

    name: str
    family: str
    value: Callable
    grad: Callable
    laplacian: Callable
    neumann_compatible: bool = False

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return self.value(pts)


def trig_product(m: int, n: int, rect=(0.0, 1.0, 0.0, 1.0)) -> TestFunction:
    """cos(m pi x/a) cos(n pi y/b) on the rectangle, zero normal derivative."""
    x0, x1, y0, y1 = rect
    a, b = x1 - x0, y1 - y0
    km, kn = m * np.pi / a, n * np.pi / b

    def value(p):
        p = np.atleast_2d(p)
        return np.cos(km * (p[:, 0] - x0)) * np.cos(kn * (p[:, 1] - y0))

    def grad(p):
        p = np.atleast_2d(p)
        cx, sx = np.cos(km * (p[:, 0] - x0)), np.sin(km * (p[:, 0] - x0))
        cy, sy = np.cos(kn * (p[:, 1] - y0)), np.sin(kn * (p[:, 1] - y0))
        return np.column_stack([-km * sx * cy, -kn * cx * sy])

    def lap(p):
        return -(km**2 + kn**2) * value(p)

    return TestFunction(
        name=f"cos{m}cos{n}", family="trig-on-square",
        value=value, grad=grad, laplacian=lap, neumann_compatible=True,
    )


def trig_family(max_order: int = 4, rect=(0.0, 1.0, 0.0, 1.0)) -> list[TestFunction]:
    """Tensor cosine products of orders 0..max_order (the 25-function set)."""
    return [
        trig_product(m, n, rect)
        for m in range(max_order + 1)
        for n in range(max_order + 1)
    ]


def bessel_radial(m: int, k: float, center) -> TestFunction:
    """J_m(k r) cos(m phi) around the hole center; Laplacian is -k^2 f."""
    c = np.asarray(center, dtype=float)

    def polar(p):
        p = np.atleast_2d(p)
        rel = p - c
        r = np.maximum(np.linalg.norm(rel, axis=1), 1e-12)
        phi = np.arctan2(rel[:, 1], rel[:, 0])
        return r, phi

    def value(p):
        r, phi = polar(p)
        return jv(m, k * r) * np.cos(m * phi)

    def grad(p):
        r, phi = polar(p)
        dr = k * jvp(m, k * r) * np.cos(m * phi)
        dphi_over_r = -m * jv(m, k * r) * np.sin(m * phi) / r
        cos, sin = np.cos(phi), np.sin(phi)
        return np.column_stack([dr * cos - dphi_over_r * sin, dr * sin + dphi_over_r * cos])

    def lap(p):
        return -(k**2) * value(p)

    return TestFunction(
        name=f"J{m}(k={k:g})", family="bessel-radial",
        value=value, grad=grad, laplacian=lap,
    )


def bessel_family(center, ks=(4.0, 9.0), ms=(0, 1, 2)) -> list[TestFunction]:
    return [bessel_radial(m, k, center) for k in ks for m in ms]


def polynomial_family() -> list[TestFunction]:
    def mk(name, v, g, l):
        return TestFunction(
            name=name, family="polynomial",
            value=lambda p: v(np.atleast_2d(p)),
            grad=lambda p: g(np.atleast_2d(p)),
            laplacian=lambda p: l(np.atleast_2d(p)),
        )

    return [
        mk("x+y",
           lambda p: p[:, 0] + p[:, 1],
           lambda p: np.column_stack([np.ones(len(p)), np.ones(len(p))]),
           lambda p: np.zeros(len(p))),
        mk("xy",
           lambda p: p[:, 0] * p[:, 1],
           lambda p: np.column_stack([p[:, 1], p[:, 0]]),
           lambda p: np.zeros(len(p))),
        mk("x2-y2",
           lambda p: p[:, 0] ** 2 - p[:, 1] ** 2,
           lambda p: np.column_stack([2 * p[:, 0], -2 * p[:, 1]]),
           lambda p: np.zeros(len(p))),
        mk("x2+y2",
           lambda p: p[:, 0] ** 2 + p[:, 1] ** 2,
           lambda p: np.column_stack([2 * p[:, 0], 2 * p[:, 1]]),
           lambda p: np.full(len(p), 4.0)),
    ]


def bump(center, radius: float) -> TestFunction:
    """C^2 compactly supported radial bump (1 - r^2/R^2)^3 inside radius R."""
    c = np.asarray(center, dtype=float)
    R2 = radius * radius

    def parts(p):
        p = np.atleast_2d(p)
        rel = p - c
        r2 = np.sum(rel * rel, axis=1)
        u = r2 / R2
        inside = u < 1.0
        return rel, r2, u, inside

    def value(p):
        _, _, u, inside = parts(p)
        return np.where(inside, (1.0 - u) ** 3, 0.0)

    def grad(p):
        rel, _, u, inside = parts(p)
        coef = np.where(inside, -6.0 * (1.0 - u) ** 2 / R2, 0.0)
        return rel * coef[:, None]

    def lap(p):
        _, r2, u, inside = parts(p)
        # div(grad) = -12(1-u)^2/R^2 + 24 r^2 (1-u)/R^4
        out = -12.0 * (1.0 - u) ** 2 / R2 + 24.0 * r2 * (1.0 - u) / (R2 * R2)
        return np.where(inside, out, 0.0)

    return TestFunction(
        name=f"bump(R={radius:g})", family="bump",
        value=value, grad=grad, laplacian=lap,
    )


def standard_smooth_family(rect=(0.0, 1.0, 0.0, 1.0), hole_center=(0.5, 0.5)) -> list[TestFunction]:
    """Trig tensor set plus Bessel-radial probes near the hole."""
    return trig_family(4, rect) + bessel_family(hole_center)


def verify_consistency(
    fn: TestFunction, box, n: int = 16, seed: int = 0, step: float = 1e-5, tol: float = 1e-6
) -> float:
    """Max mismatch between analytic and finite-difference gradients."""
    x0, x1, y0, y1 = box
    rng = np.random.default_rng(seed)
    pts = np.column_stack(
        [rng.uniform(x0 + 2 * step, x1 - 2 * step, n), rng.uniform(y0 + 2 * step, y1 - 2 * step, n)]
    )
    g = fn.grad(pts)
    fd = np.empty_like(g)
    for d in range(2):
        dp = np.zeros(2)
        dp[d] = step
        fd[:, d] = (fn.value(pts + dp) - fn.value(pts - dp)) / (2 * step)
    err = float(np.abs(g - fd).max())
    if err > tol:
        raise ValueError(f"{fn.name}: gradient inconsistency {err:.2e} > {tol}")
    return err


def rough_fields(mesh: TriMesh, n_random: int = 7, seed: int = 1234) -> list[np.ndarray]:
    """Discrete probes: constant, smooth interpolants, and seeded random fields."""
    v = mesh.vertices
    fields = [np.ones(len(v))]
    fields.append(np.cos(np.pi * v[:, 0]) * np.cos(np.pi * v[:, 1]))
    fields.append(v[:, 0] + 0.5 * v[:, 1])
    center = v.mean(axis=0)
    fields.append(np.linalg.norm(v - center, axis=1))
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        fields.append(rng.standard_normal(len(v)))
    return fields
