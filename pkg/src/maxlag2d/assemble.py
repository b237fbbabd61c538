"""Assembly of the rot-rot, mass and mixed bilinear forms.

All element matrices are computed in a vectorized way from reference
integrals because the element maps are affine.
"""
from __future__ import annotations

import numpy as np
import scipy.io
import scipy.sparse as sp

from .fespace import FeSpace, LagrangeElement
from .quadrature import QuadratureRule, triangle_rule

__all__ = ["assemble_rot_rot", "assemble_mass", "assemble_mixed", "rot_matrix",
           "dg_space_mass", "export_matrix_market", "is_symmetric"]


def _ref_mass(element: LagrangeElement, rule: QuadratureRule, other: LagrangeElement | None = None):
    other = other or element
    x = rule.ref_points
    return np.einsum("q,qi,qj->ij", rule.weights, element.values(x), other.values(x))


def _rot_coefficients(mesh):
    """``D[t, c, a]``: rot of ``phi * e_c`` is ``sum_a D[t, c, a] d_a phi`` (reference derivatives)."""
    p = mesh.points[mesh.triangles]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)
    jit = np.linalg.inv(jac).transpose(0, 2, 1)  # grad_x = jit @ grad_ref
    return np.stack([-jit[:, 1, :], jit[:, 0, :]], axis=1)


def _scatter(rows_map, cols_map, local, shape):
    nt, nr = rows_map.shape
    nc = cols_map.shape[1]
    r = np.broadcast_to(rows_map[:, :, None], (nt, nr, nc)).ravel()
    c = np.broadcast_to(cols_map[:, None, :], (nt, nr, nc)).ravel()
    return sp.coo_matrix((local.ravel(), (r, c)), shape=shape).tocsr()


def _reduce(a, p_left, p_right=None, symmetric=True):
    p_right = p_left if p_right is None else p_right
    out = (p_left.T @ a @ p_right).tocsr()
    if symmetric:
        out = ((out + out.T) * 0.5).tocsr()
    out.sum_duplicates()
    out.sort_indices()
    return out


def _full_rot_rot(space: FeSpace, rule):
    el = space.element
    g = el.gradients(rule.ref_points)  # (nq, n, 2)
    gref = np.einsum("q,qia,qjb->abij", rule.weights, g, g)
    d = _rot_coefficients(space.mesh)
    loc = np.einsum("t,tca,tdb,abij->ticjd", space.mesh.areas, d, d, gref)
    n2 = 2 * el.n_local
    loc = loc.reshape(-1, n2, n2)
    dm = space.dof_map
    return _scatter(dm, dm, loc, (space.n_full, space.n_full))


def _full_mass(space: FeSpace, rule):
    el = space.element
    m = _ref_mass(el, rule)
    if space.n_components == 2:
        m = np.kron(m, np.eye(2))
    loc = space.mesh.areas[:, None, None] * m
    dm = space.dof_map
    return _scatter(dm, dm, loc, (space.n_full, space.n_full))


def assemble_rot_rot(space: FeSpace, rule: QuadratureRule | None = None, reduced: bool = True):
    """Stiffness ``K[i, j] = (rot phi_j, rot phi_i)`` as CSR."""
    if space.kind != "vector-lagrange":
        raise ValueError("rot-rot form needs a vector space")
    k = _full_rot_rot(space, rule or triangle_rule())
    return _reduce(k, space.prolongation) if reduced else k


def assemble_mass(space: FeSpace, rule: QuadratureRule | None = None, reduced: bool = True):
    """Gram matrix of the basis as CSR."""
    m = _full_mass(space, rule or triangle_rule())
    return _reduce(m, space.prolongation) if reduced else m


def assemble_mixed(v_space: FeSpace, q_space: FeSpace, rule: QuadratureRule | None = None,
                   reduced: bool = True):
    """``B[q, tau] = (q, rot tau)``, shape ``(dim Q, dim V)``."""
    if v_space.mesh is not q_space.mesh and not (
            v_space.mesh.n_triangles == q_space.mesh.n_triangles
            and np.array_equal(v_space.mesh.triangles, q_space.mesh.triangles)
            and np.array_equal(v_space.mesh.points, q_space.mesh.points)):
        raise ValueError("spaces live on different meshes")
    if v_space.kind != "vector-lagrange" or q_space.kind != "scalar-dg":
        raise ValueError("mixed form needs a vector space and a discontinuous space")
    rule = rule or triangle_rule()
    x = rule.ref_points
    psi = q_space.element.values(x)  # (nq, m)
    g = v_space.element.gradients(x)  # (nq, n, 2)
    ref = np.einsum("q,qm,qia->mai", rule.weights, psi, g)
    d = _rot_coefficients(v_space.mesh)
    loc = np.einsum("t,tca,mai->tmic", v_space.mesh.areas, d, ref)
    loc = loc.reshape(len(d), psi.shape[1], -1)
    b = _scatter(q_space.dof_map, v_space.dof_map, loc, (q_space.n_full, v_space.n_full))
    if not reduced:
        return b
    return _reduce(b, q_space.prolongation, v_space.prolongation, symmetric=False)


def rot_matrix(v_space: FeSpace) -> sp.csr_matrix:
    """Map full vector coefficients to the nodal values of rot in full DG ``P_{k-1}``.

    rot of a ``P_k`` field is a ``P_{k-1}`` polynomial on each triangle, so
    nodal interpolation is exact.
    """
    q_el = LagrangeElement(v_space.degree - 1)
    g = v_space.element.gradients(q_el.nodes)  # (m, n, 2)
    d = _rot_coefficients(v_space.mesh)
    loc = np.einsum("tca,mia->tmic", d, g).reshape(len(d), q_el.n_local, -1)
    nt = v_space.mesh.n_triangles
    rows = np.arange(nt * q_el.n_local).reshape(nt, -1)
    return _scatter(rows, v_space.dof_map, loc, (nt * q_el.n_local, v_space.n_full))


def dg_space_mass(mesh, degree: int, rule: QuadratureRule | None = None) -> sp.csr_matrix:
    """Block-diagonal mass of full (unconstrained) DG ``P_degree``."""
    el = LagrangeElement(degree)
    m = _ref_mass(el, rule or triangle_rule())
    return sp.kron(sp.diags(mesh.areas), sp.csr_matrix(m), format="csr")


def is_symmetric(a, tol: float = 1e-14) -> bool:
    diff = abs(a - a.T)
    scale = abs(a).max() if a.nnz else 1.0
    return bool(diff.max() <= tol * scale) if diff.nnz else True


def export_matrix_market(a, path, comment: str = "") -> None:
    """Write a sparse matrix in MatrixMarket coordinate format."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(a), comment=comment)
