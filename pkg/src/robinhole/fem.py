"""P1 assembly of the Robin-hole quadratic forms.

Stiffness, mass, and hole-boundary mass matrices are integrated in closed
form (no quadrature error). Dirichlet conditions on the outer boundary are
imposed by eliminating the tagged vertices, keeping the generalized
eigenproblem symmetric positive definite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateTriangle, NegativeForm, NoHoleBoundary
from .mesh import HOLE, OUTER, TriMesh, boundary_edges, signed_areas

NEUMANN_OUTER = "NEUMANN_OUTER"
DIRICHLET_OUTER = "DIRICHLET_OUTER"

AREA_FLOOR = 1e-14


@dataclass(frozen=True)
class DofMap:
    """Active degrees of freedom after optional outer-boundary elimination."""

    n_vertices: int
    mode: str
    active: np.ndarray          # active vertex indices
    full_to_active: np.ndarray  # -1 for eliminated vertices

    @property
    def n_active(self) -> int:
        return len(self.active)

    def restrict(self, matrix: sp.spmatrix) -> sp.csr_matrix:
        m = matrix.tocsr()
        return m[self.active][:, self.active]

    def extend(self, u: np.ndarray) -> np.ndarray:
        """Zero-extension of an active-dof vector to all vertices."""
        full = np.zeros(self.n_vertices)
        full[self.active] = u
        return full


def make_dofmap(mesh: TriMesh, mode: str) -> DofMap:
    if mode not in (NEUMANN_OUTER, DIRICHLET_OUTER):
        raise ValueError(f"unknown mode {mode!r}")
    n = mesh.num_vertices
    if mode == NEUMANN_OUTER:
        active = np.arange(n)
    else:
        outer_edges, _ = boundary_edges(mesh, OUTER)
        eliminated = np.unique(outer_edges)
        mask = np.ones(n, dtype=bool)
        mask[eliminated] = False
        active = np.nonzero(mask)[0]
    full_to_active = np.full(n, -1, dtype=int)
    full_to_active[active] = np.arange(len(active))
    return DofMap(n_vertices=n, mode=mode, active=active, full_to_active=full_to_active)


def _check_areas(mesh: TriMesh) -> np.ndarray:
    areas = signed_areas(mesh.vertices, mesh.triangles)
    if np.any(areas < AREA_FLOOR):
        raise DegenerateTriangle(f"triangle area below {AREA_FLOOR}")
    return areas


def _assemble_full_stiffness(mesh: TriMesh) -> sp.csr_matrix:
    areas = _check_areas(mesh)
    p = mesh.vertices[mesh.triangles]
    # b_i, c_i of the P1 gradient: grad(phi_i) = (b_i, c_i) / (2A)
    b = p[:, [1, 2, 0], 1] - p[:, [2, 0, 1], 1]
    c = p[:, [2, 0, 1], 0] - p[:, [1, 2, 0], 0]
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (
        4.0 * areas[:, None, None]
    )
    return _scatter(mesh, ke)


def _assemble_full_mass(mesh: TriMesh) -> sp.csr_matrix:
    areas = _check_areas(mesh)
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    me = areas[:, None, None] * base[None, :, :]
    return _scatter(mesh, me)


def _scatter(mesh: TriMesh, local: np.ndarray) -> sp.csr_matrix:
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.num_vertices
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n))
    return mat.tocsr()


def assemble_stiffness(mesh: TriMesh, dofmap: DofMap) -> sp.csr_matrix:
    """Stiffness matrix of grad-grad products on the active dofs."""
    return dofmap.restrict(_assemble_full_stiffness(mesh))


def assemble_mass(mesh: TriMesh, dofmap: DofMap) -> sp.csr_matrix:
    """L2 mass matrix on the active dofs."""
    return dofmap.restrict(_assemble_full_mass(mesh))


def assemble_hole_boundary_mass(mesh: TriMesh, dofmap: DofMap) -> sp.csr_matrix:
    """Arc-length mass matrix of the hole boundary, (L/6)[[2,1],[1,2]] blocks."""
    edges, lengths = boundary_edges(mesh, HOLE)
    if len(edges) < 3:
        raise NoHoleBoundary("mesh has fewer than 3 hole-tagged edges")
    n = mesh.num_vertices
    rows = np.concatenate([edges[:, 0], edges[:, 0], edges[:, 1], edges[:, 1]])
    cols = np.concatenate([edges[:, 0], edges[:, 1], edges[:, 0], edges[:, 1]])
    L = lengths
    vals = np.concatenate([L / 3.0, L / 6.0, L / 6.0, L / 3.0])
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return dofmap.restrict(mat)


@dataclass(frozen=True)
class AssembledForms:
    """Discrete realization of the Robin-hole quadratic form on active dofs."""

    K: sp.csr_matrix
    M: sp.csr_matrix
    B: sp.csr_matrix
    gamma: float
    dofmap: DofMap
    mesh: TriMesh


def assemble(mesh: TriMesh, mode: str, gamma: float) -> AssembledForms:
    dofmap = make_dofmap(mesh, mode)
    return AssembledForms(
        K=assemble_stiffness(mesh, dofmap),
        M=assemble_mass(mesh, dofmap),
        B=assemble_hole_boundary_mass(mesh, dofmap),
        gamma=float(gamma),
        dofmap=dofmap,
        mesh=mesh,
    )


def assemble_plain(mesh: TriMesh, mode: str) -> AssembledForms:
    """Forms for a hole-free mesh (reference spectra): B is empty, gamma 0."""
    dofmap = make_dofmap(mesh, mode)
    n = dofmap.n_active
    return AssembledForms(
        K=assemble_stiffness(mesh, dofmap),
        M=assemble_mass(mesh, dofmap),
        B=sp.csr_matrix((n, n)),
        gamma=0.0,
        dofmap=dofmap,
        mesh=mesh,
    )


def robin_form(forms: AssembledForms) -> sp.csr_matrix:
    """Form operator A = K + gamma * B on the active dofs."""
    if not np.isfinite(forms.gamma):
        raise ValueError("gamma must be finite")
    if forms.gamma == 0.0:
        return forms.K
    return (forms.K + forms.gamma * forms.B).tocsr()


def norm1(forms: AssembledForms, u: np.ndarray) -> float:
    """Graph norm sqrt(u'Mu + u'Ku + gamma u'Bu) of the perturbed operator."""
    u = np.asarray(u, dtype=float)
    if u.shape != (forms.dofmap.n_active,):
        raise ValueError("coefficient vector sized to active dofs required")
    val = u @ (forms.M @ u) + u @ (forms.K @ u) + forms.gamma * (u @ (forms.B @ u))
    if val < 0:
        raise NegativeForm(f"norm1 radicand {val} < 0 (gamma outside theorem regime)")
    return float(np.sqrt(val))


def save_forms(forms: AssembledForms, prefix: str) -> None:
    """Dump K, M, B in 'n nnz' + 'i j v' coordinate text format."""
    for name in ("K", "M", "B"):
        mat = getattr(forms, name).tocoo()
        with open(f"{prefix}.{name}", "w") as fh:
            fh.write(f"{mat.shape[0]} {mat.nnz}\n")
            for i, j, v in zip(mat.row, mat.col, mat.data):
                fh.write(f"{i} {j} {v:.17g}\n")
