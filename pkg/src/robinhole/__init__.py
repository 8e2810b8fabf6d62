"""Numerical lab for Robin Laplacian spectral convergence on punctured domains."""

from .geometry import (
    HoleSpec,
    OuterDomain,
    PuncturedDomain,
    annulus_probe_circle,
    hole_boundary_parameterization,
    make_punctured,
)
from .mesh import TriMesh, boundary_edges, refine, triangulate, triangulate_domain

__version__ = "0.1.0"

__all__ = [
    "HoleSpec",
    "OuterDomain",
    "PuncturedDomain",
    "TriMesh",
    "annulus_probe_circle",
    "boundary_edges",
    "hole_boundary_parameterization",
    "make_punctured",
    "refine",
    "triangulate",
    "triangulate_domain",
    "__version__",
]
