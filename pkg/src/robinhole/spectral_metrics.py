"""Set distances between spectra and convergence-rate fitting."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import EmptySet, InsufficientEigenvalues, NonpositiveData, WindowMismatch


@dataclass(frozen=True)
class FiniteSpectrumWindow:
    """Finite ascending spectrum slice restricted to [0, cap]."""

    values: np.ndarray
    cap: float
    provenance: str = "FEM"

    @classmethod
    def from_values(cls, values, cap: float, provenance: str = "FEM"):
        v = np.sort(np.asarray(values, dtype=float))
        v = v[(v >= 0) & (v <= cap)]
        return cls(values=v, cap=float(cap), provenance=provenance)

    def __len__(self) -> int:
        return len(self.values)


def _directed(a: np.ndarray, b: np.ndarray) -> float:
    """sup over a of the distance to the sorted set b."""
    idx = np.searchsorted(b, a)
    left = np.where(idx > 0, np.abs(a - b[np.clip(idx - 1, 0, len(b) - 1)]), np.inf)
    right = np.where(idx < len(b), np.abs(a - b[np.clip(idx, 0, len(b) - 1)]), np.inf)
    return float(np.max(np.minimum(left, right)))


def hausdorff(A, B) -> float:
    """Hausdorff distance of two finite point sets on the real line."""
    a = np.sort(np.asarray(A, dtype=float).ravel())
    b = np.sort(np.asarray(B, dtype=float).ravel())
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("hausdorff distance needs nonempty sets")
    return max(_directed(a, b), _directed(b, a))


class DbarResult(NamedTuple):
    value: float
    truncation_bias: float


def dbar(A: FiniteSpectrumWindow, B: FiniteSpectrumWindow) -> DbarResult:
    """Hausdorff distance between the images of two spectra under x -> 1/(x+1).

    The truncation bias 1/(1+cap) bounds the effect of cutting the spectra at
    the shared window cap.
    """
    if not isinstance(A, FiniteSpectrumWindow) or not isinstance(B, FiniteSpectrumWindow):
        raise TypeError("dbar expects FiniteSpectrumWindow inputs")
    if abs(A.cap - B.cap) > 1e-12 * max(1.0, abs(A.cap)):
        raise WindowMismatch(f"window caps differ: {A.cap} vs {B.cap}")
    if len(A) == 0 or len(B) == 0:
        raise EmptySet("dbar needs nonempty spectra")
    ia = 1.0 / (A.values + 1.0)
    ib = 1.0 / (B.values + 1.0)
    return DbarResult(value=hausdorff(ia, ib), truncation_bias=1.0 / (1.0 + A.cap))


def match_with_multiplicity(reference, perturbed, k: int):
    """Index-wise pairing of two ascending spectra, first k entries."""
    ref = np.sort(np.asarray(getattr(reference, "eigenvalues", reference), dtype=float))
    per = np.sort(np.asarray(getattr(perturbed, "eigenvalues", perturbed), dtype=float))
    if len(ref) < k or len(per) < k:
        raise InsufficientEigenvalues(
            f"need {k} eigenvalues, have {len(ref)} reference and {len(per)} perturbed"
        )
    return [(float(ref[i]), float(per[i]), float(abs(ref[i] - per[i]))) for i in range(k)]


def fit_rate(epsilons, errors):
    """Least-squares slope/intercept of log(error) against log(eps), with r^2."""
    eps = np.asarray(epsilons, dtype=float)
    err = np.asarray(errors, dtype=float)
    if len(eps) < 3:
        raise NonpositiveData("rate fit needs at least 3 points")
    if np.any(eps <= 0) or np.any(err <= 0):
        raise NonpositiveData("rate fit needs strictly positive data")
    x, y = np.log(eps), np.log(err)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), r2


def window_cap(reference_values, k: int, tie_tol: float = 1e-9) -> float:
    """Midpoint between the k-th value and the next distinct reference value.

    Skipping ties keeps multiplets intact inside the window when the k-th and
    (k+1)-th eigenvalues coincide.
    """
    vals = np.sort(np.asarray(reference_values, dtype=float))
    if len(vals) < k + 1:
        raise InsufficientEigenvalues(f"need more than {k} reference values")
    lam_k = vals[k - 1]
    bigger = vals[vals > lam_k + tie_tol * max(1.0, abs(lam_k))]
    if len(bigger) == 0:
        raise InsufficientEigenvalues("no distinct eigenvalue above the k-th")
    return 0.5 * (lam_k + bigger[0])


@dataclass(frozen=True)
class ConvergenceRecord:
    """Per-epsilon eigenvalue errors and dbar values with fitted rates."""

    epsilons: list
    gammas: list
    errors: list            # one list of per-k errors per epsilon
    dbar_values: list
    slope: float | None = None
    intercept: float | None = None
    r_squared: float | None = None
    per_k_fits: list = field(default_factory=list)

    def __post_init__(self):
        if not all(a > b for a, b in zip(self.epsilons[:-1], self.epsilons[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        if not (len(self.epsilons) == len(self.gammas) == len(self.errors) == len(self.dbar_values)):
            raise ValueError("inconsistent record lengths")
