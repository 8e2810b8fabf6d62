"""Reference spectra independent of the FEM stack.

Rectangles are separable, disks use Bessel roots, and concentric annuli with
a Robin inner boundary use cross-product determinant roots. Roots are found
by sign-scan bracketing plus bisection on scipy's Bessel evaluators; the
Robin sign convention -w'(eps) + gamma w(eps) = 0 comes from the weak form
with the domain normal pointing into the hole.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import iv, ivp, jv, jvp, kv, kvp, yv, yvp

from .errors import MissedRootWarning, RootBracketFailure

SCAN_DENSITY = 2000  # grid points per unit of sqrt(lambda) per mode
BISECT_TOL = 1e-12


@dataclass(frozen=True)
class AnalyticSpectrum:
    """Ascending eigenvalues (repeated by multiplicity) with root residuals."""

    eigenvalues: np.ndarray
    multiplicities: tuple
    descriptor: dict
    residuals: np.ndarray

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _group_multiplicities(values: np.ndarray, tol: float = 1e-9) -> tuple:
    sizes: list[int] = []
    last = None
    for v in values:
        if last is not None and abs(v - last) <= tol * max(1.0, abs(v)):
            sizes[-1] += 1
        else:
            sizes.append(1)
        last = v
    return tuple(sizes)


def bisect_root(f, lo: float, hi: float, tol: float = BISECT_TOL) -> float:
    """Bracketed bisection; requires a sign change on [lo, hi]."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise RootBracketFailure(f"no sign change on [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0 or hi - lo < tol:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return 0.5 * (lo + hi)


def scan_roots(f, lo: float, hi: float, density: int = SCAN_DENSITY) -> np.ndarray:
    """All roots of f on [lo, hi] located by sign scan plus bisection."""
    n = max(8, int(np.ceil((hi - lo) * density)))
    grid = np.linspace(lo, hi, n)
    vals = f(grid)
    sign = np.sign(vals)
    idx = np.nonzero(np.abs(np.diff(sign)) == 2)[0]
    return np.array([bisect_root(lambda x: float(f(np.atleast_1d(x))[0]), grid[i], grid[i + 1]) for i in idx])


def _weyl_check(values: np.ndarray, area: float, what: str) -> None:
    if len(values) == 0:
        return
    lam_max = values[-1]
    expected = area * lam_max / (4 * np.pi)
    if abs(len(values) - expected) > 0.35 * expected + 6:
        warnings.warn(
            f"{what}: found {len(values)} eigenvalues up to {lam_max:.3g}, "
            f"Weyl expectation {expected:.1f}",
            MissedRootWarning,
        )


def rect_eigs(a: float, b: float, bc: str, count: int) -> AnalyticSpectrum:
    """Separable rectangle spectrum: pi^2 (m^2/a^2 + n^2/b^2)."""
    if a <= 0 or b <= 0:
        raise ValueError("rectangle sides must be positive")
    start = 1 if bc == "dirichlet" else 0
    lam_cap = 4 * np.pi * (count + 10) / (a * b)
    while True:
        mmax = int(np.ceil(a * np.sqrt(lam_cap) / np.pi)) + 1
        nmax = int(np.ceil(b * np.sqrt(lam_cap) / np.pi)) + 1
        m = np.arange(start, mmax + 1)
        n = np.arange(start, nmax + 1)
        lam = np.pi**2 * (m[:, None] ** 2 / a**2 + n[None, :] ** 2 / b**2)
        lam = np.sort(lam[lam <= lam_cap].ravel())
        if len(lam) >= count:
            break
        lam_cap *= 1.6
    vals = lam[:count]
    return AnalyticSpectrum(
        eigenvalues=vals,
        multiplicities=_group_multiplicities(vals),
        descriptor={"shape": "rectangle", "a": a, "b": b, "bc": bc},
        residuals=np.zeros(count),
    )


def disk_eigs(R: float, bc: str, count: int) -> AnalyticSpectrum:
    """Disk spectrum from Bessel roots: (j_{m,k}/R)^2 or (j'_{m,k}/R)^2."""
    if R <= 0:
        raise ValueError("radius must be positive")
    lam_cap = 4 * (count + 8) / R**2
    while True:
        xmax = np.sqrt(lam_cap) * R
        entries = []   # (lambda, residual)
        if bc == "neumann":
            entries.append((0.0, 0.0))
        m = 0
        while m <= xmax + 2:
            if bc == "dirichlet":
                f = lambda x: jv(m, x)
            else:
                f = lambda x: jvp(m, x)
            roots = scan_roots(f, 1e-3, xmax)
            for x in roots:
                lam = (x / R) ** 2
                res = abs(float(f(np.atleast_1d(x))[0]))
                mult = 1 if m == 0 else 2
                entries.extend([(lam, res)] * mult)
            m += 1
        entries.sort()
        if len(entries) >= count:
            break
        lam_cap *= 1.6
    vals = np.array([e[0] for e in entries[:count]])
    res = np.array([e[1] for e in entries[:count]])
    _weyl_check(vals, np.pi * R**2, "disk_eigs")
    return AnalyticSpectrum(
        eigenvalues=vals,
        multiplicities=_group_multiplicities(vals),
        descriptor={"shape": "disk", "R": R, "bc": bc},
        residuals=res,
    )


def _normalized_annulus_det(m, eps, R, gamma, outer_bc, inner_bc):
    """Sign function of the radial dispersion relation, vectorized in k."""

    def det(k):
        k = np.atleast_1d(np.asarray(k, dtype=float))
        je, ye = jv(m, k * eps), yv(m, k * eps)
        jpe, ype = jvp(m, k * eps), yvp(m, k * eps)
        if inner_bc == "robin":
            r1a = -k * jpe + gamma * je
            r1b = -k * ype + gamma * ye
        else:  # dirichlet inner
            r1a, r1b = je, ye
        if outer_bc == "dirichlet":
            r2a, r2b = jv(m, k * R), yv(m, k * R)
        else:
            r2a, r2b = k * jvp(m, k * R), k * yvp(m, k * R)
        n1 = np.hypot(r1a, r1b)
        n2 = np.hypot(r2a, r2b)
        n1[n1 == 0] = 1.0
        n2[n2 == 0] = 1.0
        return (r1a * r2b - r1b * r2a) / (n1 * n2)

    return det


def _negative_modes(m, eps, R, gamma, outer_bc):
    """Roots lambda = -kappa^2 for gamma < 0 via modified Bessel functions."""

    def det(kappa):
        kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
        ie, ke = iv(m, kappa * eps), kv(m, kappa * eps)
        ipe, kpe = ivp(m, kappa * eps), kvp(m, kappa * eps)
        r1a = -kappa * ipe + gamma * ie
        r1b = -kappa * kpe + gamma * ke
        if outer_bc == "dirichlet":
            r2a, r2b = iv(m, kappa * R), kv(m, kappa * R)
        else:
            r2a, r2b = kappa * ivp(m, kappa * R), kappa * kvp(m, kappa * R)
        n1 = np.hypot(r1a, r1b)
        n2 = np.hypot(r2a, r2b)
        n1[n1 == 0] = 1.0
        n2[n2 == 0] = 1.0
        return (r1a * r2b - r1b * r2a) / (n1 * n2)

    kappa_max = max(5.0, 3.0 * abs(gamma))
    roots = scan_roots(det, 1e-4, kappa_max)
    return [(-float(k) ** 2, abs(float(det(np.atleast_1d(k))[0]))) for k in roots]


def _annulus_eigs(eps, R, gamma, outer_bc, count, inner_bc) -> AnalyticSpectrum:
    if not (0 < eps < R):
        raise ValueError("need 0 < inner radius < outer radius")
    lam_cap = 4 * (count + 8) / (R**2 - eps**2)
    while True:
        kmax = np.sqrt(lam_cap)
        entries = []
        if inner_bc == "robin" and gamma == 0.0 and outer_bc == "neumann":
            entries.append((0.0, 0.0))
        m = 0
        while m <= kmax * R + 2:
            det = _normalized_annulus_det(m, eps, R, gamma, outer_bc, inner_bc)
            mult = 1 if m == 0 else 2
            for k in scan_roots(det, 1e-4, kmax):
                lam = float(k) ** 2
                res = abs(float(det(np.atleast_1d(k))[0]))
                entries.extend([(lam, res)] * mult)
            if inner_bc == "robin" and gamma < 0:
                for lam, res in _negative_modes(m, eps, R, gamma, outer_bc):
                    entries.extend([(lam, res)] * mult)
            m += 1
        entries.sort()
        if len(entries) >= count:
            break
        lam_cap *= 1.6
    vals = np.array([e[0] for e in entries[:count]])
    res = np.array([e[1] for e in entries[:count]])
    _weyl_check(vals[vals >= 0], np.pi * (R**2 - eps**2), "annulus_eigs")
    if np.any(res > 1e-10):
        raise RootBracketFailure(f"dispersion residual {res.max():.2e} above 1e-10")
    return AnalyticSpectrum(
        eigenvalues=vals,
        multiplicities=_group_multiplicities(vals),
        descriptor={
            "shape": "annulus",
            "inner": eps,
            "outer": R,
            "gamma": gamma,
            "outer_bc": outer_bc,
            "inner_bc": inner_bc,
        },
        residuals=res,
    )


def annulus_robin_eigs(
    inner: float, outer: float, gamma: float, outer_bc: str, count: int
) -> AnalyticSpectrum:
    """Concentric annulus with Robin inner boundary -w'(inner)+gamma w(inner)=0."""
    return _annulus_eigs(inner, outer, float(gamma), outer_bc, count, "robin")


def annulus_dirichlet_eigs(
    inner: float, outer: float, outer_bc: str, count: int
) -> AnalyticSpectrum:
    """Dirichlet-inner annulus, the gamma -> infinity pin of the Robin family."""
    return _annulus_eigs(inner, outer, 0.0, outer_bc, count, "dirichlet")
