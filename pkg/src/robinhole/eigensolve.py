"""Lowest eigenpairs of the generalized symmetric problem A x = lambda M x.

Shift-invert ARPACK (scipy.sparse.linalg.eigsh) with a seeded start vector;
small problems fall back to a dense solve. The default shift -1 exploits
A + M > 0 in the gamma > 0 regime.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import FactorizationFailure, NoConvergence, ZeroVector

DENSE_CUTOFF = 80


@dataclass(frozen=True)
class SolverConfig:
    k: int = 5
    sigma: float = -1.0
    tol: float = 1e-9
    max_iter: int = 400
    seed: int = 1234

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with residuals and optional M-orthonormal vectors."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    eigenvectors: np.ndarray | None = None
    multiplicity_clusters: tuple = field(default=())

    def __len__(self) -> int:
        return len(self.eigenvalues)


def residual_check(A: sp.spmatrix, M: sp.spmatrix, pair) -> float:
    """Scaled residual ||Ax - lambda Mx|| / (||Ax|| + |lambda| ||Mx||)."""
    lam, x = pair
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise ZeroVector("residual of the zero vector is undefined")
    ax = A @ x
    mx = M @ x
    denom = np.linalg.norm(ax) + abs(lam) * np.linalg.norm(mx)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(ax - lam * mx) / denom)


def cluster_multiplicities(eigenvalues: np.ndarray, cluster_tol: float = 1e-6) -> tuple:
    """Greedy grouping of consecutive eigenvalues within a relative tolerance."""
    vals = np.asarray(eigenvalues, dtype=float)
    if len(vals) == 0:
        return ()
    sizes = [1]
    for prev, cur in zip(vals[:-1], vals[1:]):
        if abs(cur - prev) <= cluster_tol * max(1.0, abs(cur)):
            sizes[-1] += 1
        else:
            sizes.append(1)
    return tuple(sizes)


def _dense_solve(A, M, k):
    vals, vecs = scipy.linalg.eigh(A.toarray(), M.toarray())
    return vals[:k], vecs[:, :k]


def solve_lowest(A: sp.spmatrix, M: sp.spmatrix, cfg: SolverConfig) -> Spectrum:
    """k smallest eigenpairs, deterministic for a fixed seed."""
    n = A.shape[0]
    k = cfg.k
    if k >= n - 1 or n <= DENSE_CUTOFF:
        vals, vecs = _dense_solve(A, M, min(k, n))
    else:
        rng = np.random.default_rng(cfg.seed)
        v0 = rng.standard_normal(n)
        sigma = cfg.sigma
        last_err = None
        for attempt in range(3):
            try:
                vals, vecs = eigsh(
                    A.tocsc(),
                    k=k,
                    M=M.tocsc(),
                    sigma=sigma,
                    which="LM",
                    v0=v0,
                    maxiter=cfg.max_iter,
                    tol=0,
                )
                break
            except ArpackNoConvergence as err:
                raise NoConvergence(f"ARPACK did not converge: {err}") from err
            except RuntimeError as err:
                # factorization of (A - sigma M) failed: retry with a lower shift
                last_err = err
                sigma = 2.0 * sigma - 1.0
        else:
            raise FactorizationFailure(
                f"could not factorize A - sigma*M down to sigma={sigma}: {last_err}"
            )
    order = np.argsort(vals)
    vals = np.asarray(vals)[order]
    vecs = np.asarray(vecs)[:, order]
    # M-inverse-free surrogate ||Ax - lambda Mx|| / ||x||, robust at lambda = 0
    residuals = np.array(
        [
            np.linalg.norm(A @ vecs[:, i] - vals[i] * (M @ vecs[:, i]))
            / np.linalg.norm(vecs[:, i])
            for i in range(len(vals))
        ]
    )
    scale = max(1.0, float(np.abs(vals).max()))
    if np.any(residuals > cfg.tol * scale):
        raise NoConvergence(
            f"residual {residuals.max():.3e} above tolerance {cfg.tol * scale:.3e}"
        )
    return Spectrum(
        eigenvalues=vals,
        residuals=residuals,
        eigenvectors=vecs,
        multiplicity_clusters=cluster_multiplicities(vals),
    )
