"""
P1 vector finite elements on tetrahedra.

Degrees of freedom of a nodal vector field are interleaved, ``dof = 3*z + c``
for node ``z`` and component ``c``, so a ``(n_nodes, 3)`` array flattens
(C order) straight into a global vector. All matrices are returned as CSR.

Quadrature conventions:
    * products written as lumped use nodal quadrature with weights ``w_z``;
    * the strain of a P1 displacement is constant per element;
    * the magnetostrain of a nodal field enters element integrals as the
      centroid value of its P1 interpolant, i.e. the mean of the four
      nodal values ``Z:(m(z) (x) m(z))``.
"""

from typing import Optional

import numpy as np
import scipy.sparse as sp

from .exceptions import ConstraintViolationError, InvalidInputError
from .mesh import Mesh
from .tensors import (
    Tensor4,
    frobenius,
    magnetostrain_bilinear,
    t4_contract_mat,
    t4_transpose,
)
from .types import BoolArray, FloatArray, IndexArray, NodalField, VectorData

PROJECTION_TOL = 1e-12

_CONSISTENT_LOCAL = (np.ones((4, 4)) + np.eye(4)) / 20.0


def _sample(data: VectorData, points: FloatArray, name: str) -> FloatArray:
    """Evaluate a constant vector or a vectorised position callback."""
    if callable(data):
        values = np.asarray(data(points), dtype=np.float64)
        if values.shape != points.shape:
            raise InvalidInputError(
                f"{name} callback returned shape {values.shape}, expected {points.shape}",
                field=name,
            )
        return values
    vec = np.asarray(data, dtype=np.float64)
    if vec.shape != (3,):
        raise InvalidInputError(f"{name} must be a 3-vector or callback", field=name)
    return np.broadcast_to(vec, points.shape).copy()


def _as_field(mesh: Mesh, values: NodalField, name: str = "field") -> FloatArray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (mesh.n_nodes, 3):
        raise InvalidInputError(
            f"{name} must have shape ({mesh.n_nodes}, 3), got {arr.shape}", field=name
        )
    return arr


def element_dofs(mesh: Mesh) -> IndexArray:
    """(n_tets, 12) global dofs ordered (vertex, component)."""
    return (3 * mesh.tets[:, :, None] + np.arange(3)[None, None, :]).reshape(-1, 12)


def dirichlet_dofs(mask: BoolArray) -> BoolArray:
    """Expand a nodal mask to the interleaved dof layout."""
    return np.repeat(np.asarray(mask, dtype=bool), 3)


def free_dofs(mask: BoolArray) -> IndexArray:
    return np.flatnonzero(~dirichlet_dofs(mask))


def _scatter(values: FloatArray, tets: IndexArray, n_nodes: int) -> FloatArray:
    """Sum per-(element, vertex) 3-vectors into a nodal field."""
    out = np.zeros((n_nodes, 3))
    np.add.at(out, tets.ravel(), values.reshape(-1, 3))
    return out


# ---------------------------------------------------------------------------
# Interpolation and projection
# ---------------------------------------------------------------------------


def nodal_interpolate(fn: VectorData, mesh: Mesh) -> NodalField:
    """Nodal interpolant: values[z] = fn(coords[z])."""
    return _sample(fn, mesh.nodes, "field")


def nodal_project(m: NodalField) -> NodalField:
    """Normalise every node to unit length.

    Raises:
        ConstraintViolationError: If some node has |m(z)| < 1 - 1e-12.
    """
    m = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(m, axis=1)
    short = np.flatnonzero(norms < 1.0 - PROJECTION_TOL)
    if short.size:
        node = int(short[0])
        raise ConstraintViolationError(node, float(norms[node]))
    return m / norms[:, None]


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


def assemble_lumped_mass(mesh: Mesh) -> sp.csr_matrix:
    """Diagonal lumped mass, entry w_z for each component of node z."""
    return sp.diags(np.repeat(mesh.geometry.lumped_weights, 3), format="csr")


def lumped_inner(mesh: Mesh, a: NodalField, b: NodalField) -> float:
    """<a, b>_h = sum_z w_z a(z).b(z)."""
    w = mesh.geometry.lumped_weights
    return float(np.sum(w * np.einsum("zi,zi->z", a, b)))


def _scalar_to_vector(mesh: Mesh, local: FloatArray) -> sp.csr_matrix:
    """Assemble (n_tets, 4, 4) scalar element matrices and lift with I3."""
    rows = np.repeat(mesh.tets, 4, axis=1).ravel()
    cols = np.tile(mesh.tets, (1, 4)).ravel()
    scalar = sp.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)
    ).tocsr()
    return sp.kron(scalar, sp.identity(3), format="csr")


def assemble_vector_laplacian(mesh: Mesh) -> sp.csr_matrix:
    """Stiffness of <grad m, grad phi> for vector P1 fields."""
    geo = mesh.geometry
    local = geo.volumes[:, None, None] * np.einsum(
        "kai,kbi->kab", geo.gradients, geo.gradients
    )
    return _scalar_to_vector(mesh, local)


def assemble_consistent_mass(mesh: Mesh) -> sp.csr_matrix:
    """Exact L2 mass of vector P1 fields."""
    local = mesh.geometry.volumes[:, None, None] * _CONSISTENT_LOCAL[None]
    return _scalar_to_vector(mesh, local)


def assemble_elastic_stiffness(
    mesh: Mesh, C: Tensor4, mask: Optional[BoolArray] = None
) -> sp.csr_matrix:
    """
    Stiffness of <C:eps(u), eps(psi)>.

    Without ``mask`` the full singular matrix is returned. With a nodal
    Dirichlet mask the constrained rows and columns are eliminated and
    replaced by unit diagonal entries.
    """
    geo = mesh.geometry
    local = geo.volumes[:, None, None, None, None] * np.einsum(
        "ijlm,kaj,kbm->kaibl", C.comp, geo.gradients, geo.gradients
    )
    dofs = element_dofs(mesh)
    rows = np.repeat(dofs, 12, axis=1).ravel()
    cols = np.tile(dofs, (1, 12)).ravel()
    n = 3 * mesh.n_nodes
    K = sp.coo_matrix((local.reshape(-1, 144).ravel(), (rows, cols)), shape=(n, n)).tocsr()
    if mask is None:
        return K
    return eliminate_dirichlet(K, mask)


def eliminate_dirichlet(A: sp.spmatrix, mask: BoolArray) -> sp.csr_matrix:
    """Zero Dirichlet rows/columns of A and put ones on their diagonal."""
    fixed = dirichlet_dofs(mask).astype(np.float64)
    keep = sp.diags(1.0 - fixed)
    return (keep @ A @ keep + sp.diags(fixed)).tocsr()


def assemble_skew(mesh: Mesh, m: NodalField) -> sp.csr_matrix:
    """Block-diagonal lumped form of <m x v, phi>_h: blocks w_z [m(z)]_x."""
    w = mesh.geometry.lumped_weights
    m = _as_field(mesh, m, "m")
    blocks = np.zeros((mesh.n_nodes, 3, 3))
    blocks[:, 0, 1], blocks[:, 0, 2] = -m[:, 2], m[:, 1]
    blocks[:, 1, 0], blocks[:, 1, 2] = m[:, 2], -m[:, 0]
    blocks[:, 2, 0], blocks[:, 2, 1] = -m[:, 1], m[:, 0]
    n = mesh.n_nodes
    return sp.bsr_matrix(
        (w[:, None, None] * blocks, np.arange(n), np.arange(n + 1)), shape=(3 * n, 3 * n)
    ).tocsr()


# ---------------------------------------------------------------------------
# Element fields
# ---------------------------------------------------------------------------


def element_strain(mesh: Mesh, u: NodalField) -> FloatArray:
    """Constant symmetric gradient eps(u) per element, (n_tets, 3, 3)."""
    grad = np.einsum("kai,kaj->kij", u[mesh.tets], mesh.geometry.gradients)
    return 0.5 * (grad + grad.transpose(0, 2, 1))


def element_magnetostrain(
    mesh: Mesh, Z: Tensor4, a: NodalField, b: Optional[NodalField] = None
) -> FloatArray:
    """Centroid value of the P1 interpolant of Z:(a (x) b), symmetrised in (a, b)."""
    if b is None:
        nodal = magnetostrain_bilinear(Z, a, a)
    else:
        nodal = 0.5 * (magnetostrain_bilinear(Z, a, b) + magnetostrain_bilinear(Z, b, a))
    return nodal[mesh.tets].mean(axis=1)


def c_inner(mesh: Mesh, C: Tensor4, X: FloatArray, Y: FloatArray) -> float:
    """<C:X, Y> for element-constant tensors X, Y."""
    return float(np.sum(mesh.geometry.volumes * frobenius(t4_contract_mat(C, X), Y)))


def element_inner(mesh: Mesh, X: FloatArray, Y: FloatArray) -> float:
    """<X, Y> for element-constant tensors."""
    return float(np.sum(mesh.geometry.volumes * frobenius(X, Y)))


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------


def assemble_zeeman_load(mesh: Mesh, h_ext: VectorData) -> FloatArray:
    """<h_ext, phi> with h_ext sampled at element centroids (nodal quadrature)."""
    geo = mesh.geometry
    h = _sample(h_ext, geo.centroids, "h_ext")
    per_vertex = np.repeat((h * (geo.volumes / 4.0)[:, None])[:, None, :], 4, axis=1)
    return _scatter(per_vertex, mesh.tets, mesh.n_nodes).ravel()


def assemble_elastic_field_load(
    mesh: Mesh,
    C: Tensor4,
    Z: Tensor4,
    kappa: float,
    u: NodalField,
    m_proj: NodalField,
) -> FloatArray:
    """<h_m[u, m_proj], phi> with h_m = 2 kappa (Z^T:sigma) m_proj.

    sigma is element-constant, m_proj enters at the nodes with weights |K|/4.
    """
    geo = mesh.geometry
    sigma = t4_contract_mat(
        C, element_strain(mesh, u) - element_magnetostrain(mesh, Z, m_proj)
    )
    zt_sigma = t4_contract_mat(t4_transpose(Z), sigma)
    per_vertex = np.einsum(
        "k,kij,kaj->kai", 0.5 * kappa * geo.volumes, zt_sigma, m_proj[mesh.tets]
    )
    return _scatter(per_vertex, mesh.tets, mesh.n_nodes).ravel()


def assemble_llg_rhs(
    mesh: Mesh,
    m: NodalField,
    u: NodalField,
    C: Tensor4,
    Z: Tensor4,
    kappa: float,
    h_ext: VectorData = (0.0, 0.0, 0.0),
    laplacian: Optional[sp.spmatrix] = None,
    zeeman_load: Optional[FloatArray] = None,
) -> FloatArray:
    """
    Unreduced right-hand side of the tangent-plane step:
    -<grad m, grad phi> + <h_ext, phi> + <h_m[u, Pi_h m], phi>.

    Raises:
        ConstraintViolationError: If some node has |m(z)| < 1.
    """
    m = _as_field(mesh, m, "m")
    u = _as_field(mesh, u, "u")
    m_proj = nodal_project(m)
    K = assemble_vector_laplacian(mesh) if laplacian is None else laplacian
    b_zee = assemble_zeeman_load(mesh, h_ext) if zeeman_load is None else zeeman_load
    return -(K @ m.ravel()) + b_zee + assemble_elastic_field_load(mesh, C, Z, kappa, u, m_proj)


def assemble_loads(
    mesh: Mesh, f: VectorData = (0.0, 0.0, 0.0), g: VectorData = (0.0, 0.0, 0.0)
) -> FloatArray:
    """<f, psi> + <g, psi>_{Gamma_N} with f per element and g per Neumann face."""
    geo = mesh.geometry
    fv = _sample(f, geo.centroids, "f")
    vol = np.repeat((fv * (geo.volumes / 4.0)[:, None])[:, None, :], 4, axis=1)
    load = _scatter(vol, mesh.tets, mesh.n_nodes)

    if geo.neumann_faces.shape[0]:
        gv = _sample(g, geo.neumann_centroids, "g")
        surf = np.repeat((gv * (geo.neumann_areas / 3.0)[:, None])[:, None, :], 3, axis=1)
        load += _scatter(surf, geo.neumann_faces, mesh.n_nodes)
    return load.ravel()


def assemble_magnetostrain_load(
    mesh: Mesh, C: Tensor4, Z: Tensor4, m_proj: NodalField
) -> FloatArray:
    """<C:eps_m(m_proj), eps(psi)>."""
    geo = mesh.geometry
    S = t4_contract_mat(C, element_magnetostrain(mesh, Z, m_proj))
    per_vertex = np.einsum("k,kij,kaj->kai", geo.volumes, S, geo.gradients)
    return _scatter(per_vertex, mesh.tets, mesh.n_nodes).ravel()


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def l2_norm(mesh: Mesh, field: NodalField, mass: Optional[sp.spmatrix] = None) -> float:
    M = assemble_consistent_mass(mesh) if mass is None else mass
    x = np.asarray(field, dtype=np.float64).ravel()
    return float(np.sqrt(max(x @ (M @ x), 0.0)))


def h1_seminorm(
    mesh: Mesh, field: NodalField, laplacian: Optional[sp.spmatrix] = None
) -> float:
    K = assemble_vector_laplacian(mesh) if laplacian is None else laplacian
    x = np.asarray(field, dtype=np.float64).ravel()
    return float(np.sqrt(max(x @ (K @ x), 0.0)))


def lumped_norm(mesh: Mesh, field: NodalField) -> float:
    return float(np.sqrt(lumped_inner(mesh, field, field)))


def constraint_violation(mesh: Mesh, m: NodalField) -> float:
    """Lumped L1 norm of |m|^2 - 1."""
    sq = np.einsum("zi,zi->z", m, m)
    return float(np.sum(mesh.geometry.lumped_weights * np.abs(sq - 1.0)))
