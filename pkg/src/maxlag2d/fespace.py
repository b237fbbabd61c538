"""Lagrange finite element spaces.

Node numbering of a continuous space: mesh vertices, then ``k - 1`` nodes
per edge ordered from the lower to the higher vertex index, then the
interior nodes of each triangle.  Vector spaces interleave components, so
the full coefficient of component ``c`` at node ``i`` is ``2 * i + c``.

Boundary conditions and discrete constraints are realized by a sparse
prolongation ``P`` from free coefficients to full nodal coefficients.
Reduced matrices are ``P.T @ A @ P``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .mesh import CORNER_TURN_TOL, Mesh, MeshError, vertex_star
from .quadrature import QuadratureRule, triangle_rule
from .refine import RefinedMesh

__all__ = ["LagrangeElement", "FeSpace", "NodalBasisEval", "build_vector_space",
           "build_scalar_space", "build_pressure_space", "eval_basis", "ConstraintWarning"]


class ConstraintWarning(UserWarning):
    """Constraint functionals are linearly dependent."""


def _lattice(k):
    """Barycentric lattice of degree ``k``: vertices, edge nodes, interior nodes."""
    if k == 0:
        return np.array([[1 / 3, 1 / 3, 1 / 3]])
    eye = np.eye(3)
    nodes = [eye[0], eye[1], eye[2]]
    for a, b in ((0, 1), (1, 2), (2, 0)):
        for m in range(1, k):
            s = m / k
            nodes.append((1 - s) * eye[a] + s * eye[b])
    for i in range(1, k):
        for j in range(1, k - i):
            nodes.append(np.array([k - i - j, i, j]) / k)
    return np.array(nodes)


def _exponents(k):
    return [(i, d - i) for d in range(k + 1) for i in range(d, -1, -1)]


class LagrangeElement:
    """Nodal ``P_k`` basis on the reference triangle (0,0), (1,0), (0,1)."""

    def __init__(self, degree: int):
        if not 0 <= degree <= 4:
            raise ValueError(f"degree must lie in 0..4, got {degree}")
        self.degree = degree
        self.bary_nodes = _lattice(degree)
        self.nodes = self.bary_nodes[:, 1:]
        self._exp = np.array(_exponents(degree))
        vander = self._monomials(self.nodes)
        self._coef = np.linalg.inv(vander)  # column j: coefficients of basis j

    @property
    def n_local(self) -> int:
        return len(self.nodes)

    def _monomials(self, x):
        x = np.atleast_2d(x)
        return x[:, :1] ** self._exp[:, 0] * x[:, 1:2] ** self._exp[:, 1]

    def values(self, x) -> np.ndarray:
        """Basis values, shape ``(npts, n_local)``."""
        return self._monomials(x) @ self._coef

    def gradients(self, x) -> np.ndarray:
        """Reference gradients, shape ``(npts, n_local, 2)``."""
        x = np.atleast_2d(x)
        i, j = self._exp[:, 0], self._exp[:, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = np.where(i > 0, i * x[:, :1] ** np.maximum(i - 1, 0) * x[:, 1:2] ** j, 0.0)
            dy = np.where(j > 0, j * x[:, :1] ** i * x[:, 1:2] ** np.maximum(j - 1, 0), 0.0)
        return np.stack([dx @ self._coef, dy @ self._coef], axis=-1)


@dataclass(frozen=True)
class NodalBasisEval:
    """Basis values and physical gradients of one triangle at quadrature points."""
    points: np.ndarray  # barycentric, (nq, 3)
    values: np.ndarray  # (nq, n_local)
    gradients: np.ndarray  # (nq, n_local, 2)


def _inverse_transposed_jacobians(mesh):
    p = mesh.points[mesh.triangles]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)  # columns
    return np.linalg.inv(jac).transpose(0, 2, 1)


class FeSpace:
    """A finite element space on a triangulation.

    Use the ``build_*`` functions rather than the constructor.

    Attributes
    ----------
    mesh : Mesh
    kind : {"vector-lagrange", "scalar-lagrange", "scalar-dg"}
    degree : int
    element : LagrangeElement
    cell_nodes : ndarray, shape (nt, n_local)
        Global node of each local node.
    n_components : int
    prolongation : sparse matrix, shape (n_full, dim)
    """

    def __init__(self, mesh, kind, degree, cell_nodes, n_nodes, prolongation=None,
                 constraints=None, bc="none", refined=None):
        self.mesh = mesh
        self.kind = kind
        self.degree = degree
        self.element = LagrangeElement(degree)
        self.cell_nodes = cell_nodes
        self.n_nodes = n_nodes
        self.n_components = 2 if kind == "vector-lagrange" else 1
        self.bc = bc
        self.refined = refined
        self._prolongation = prolongation
        self.constraints = constraints

    def __repr__(self):
        return (f"FeSpace(kind={self.kind!r}, degree={self.degree}, dim={self.dim}, "
                f"n_full={self.n_full})")

    @property
    def n_full(self) -> int:
        return self.n_nodes * self.n_components

    @property
    def dof_map(self) -> np.ndarray:
        """Full coefficient index of each local basis function per triangle."""
        if self.n_components == 1:
            return self.cell_nodes
        d = 2 * self.cell_nodes[:, :, None] + np.arange(2)
        return d.reshape(len(self.cell_nodes), -1)

    @property
    def prolongation(self) -> sp.csr_matrix:
        if self._prolongation is None:
            if self.constraints is None:
                self._prolongation = sp.identity(self.n_full, format="csr")
            else:
                self._prolongation = sp.csr_matrix(_nullspace(self.constraints))
        return self._prolongation

    @property
    def dim(self) -> int:
        if self._prolongation is None and self.constraints is not None:
            return self.n_full - self.constraint_rank
        return self.prolongation.shape[1]

    @cached_property
    def constraint_rank(self) -> int:
        if self.constraints is None or self.constraints.shape[0] == 0:
            return 0
        return int(np.linalg.matrix_rank(self.constraints.toarray()))

    @cached_property
    def node_coordinates(self) -> np.ndarray:
        p = self.mesh.points[self.mesh.triangles]
        bary = self.element.bary_nodes
        xy = np.einsum("lv,tvd->tld", bary, p)
        out = np.empty((self.n_nodes, 2))
        out[self.cell_nodes.ravel()] = xy.reshape(-1, 2)
        return out

    def expand(self, coeffs) -> np.ndarray:
        """Full nodal coefficients from free coefficients."""
        return self.prolongation @ np.asarray(coeffs)

    def evaluate(self, full, triangles, ref_points) -> np.ndarray:
        """Values of a full coefficient vector at reference points of given triangles.

        Returns shape ``(len(triangles), npts)`` for scalar spaces and
        ``(len(triangles), npts, 2)`` for vector spaces.
        """
        triangles = np.asarray(triangles)
        phi = self.element.values(ref_points)
        loc = np.asarray(full)[self.dof_map[triangles]]
        if self.n_components == 2:
            loc = loc.reshape(len(triangles), -1, 2)
            return np.einsum("qi,tic->tqc", phi, loc)
        return loc @ phi.T

    def physical_gradients(self, ref_points) -> np.ndarray:
        """Basis gradients on every triangle, shape ``(nt, npts, n_local, 2)``."""
        g = self.element.gradients(ref_points)
        jit = _inverse_transposed_jacobians(self.mesh)
        return np.einsum("tab,qib->tqia", jit, g)


def _nullspace(c):
    c = c.toarray() if sp.issparse(c) else np.asarray(c)
    if c.shape[0] == 0:
        return np.eye(c.shape[1])
    return scipy.linalg.null_space(c, rcond=1e-10)


def _unwrap(mesh_or_refined):
    if isinstance(mesh_or_refined, RefinedMesh):
        return mesh_or_refined.mesh, mesh_or_refined
    if isinstance(mesh_or_refined, Mesh):
        return mesh_or_refined, None
    raise TypeError(f"expected Mesh or RefinedMesh, got {type(mesh_or_refined).__name__}")


def _continuous_nodes(mesh, k):
    nv, ne, nt = mesh.n_vertices, mesh.n_edges, mesh.n_triangles
    t = mesh.triangles
    ni = (k - 1) * (k - 2) // 2
    cols = [t]
    local_edges = ((0, 1, 2), (1, 2, 0), (2, 0, 1))  # (a, b, opposite vertex)
    m = np.arange(k - 1)
    for a, b, opp in local_edges:
        e = mesh.triangle_edges[:, opp]
        forward = (t[:, a] < t[:, b])[:, None]
        pos = np.where(forward, m, k - 2 - m)
        cols.append(nv + e[:, None] * (k - 1) + pos)
    cols.append(nv + ne * (k - 1) + np.arange(nt)[:, None] * ni + np.arange(ni))
    return np.hstack(cols).astype(np.int64), nv + ne * (k - 1) + nt * ni


def build_scalar_space(mesh_or_refined, k: int) -> FeSpace:
    """Continuous scalar ``P_k`` without boundary conditions."""
    mesh, refined = _unwrap(mesh_or_refined)
    if not 1 <= k <= 4:
        raise ValueError(f"degree must lie in 1..4, got {k}")
    nodes, n = _continuous_nodes(mesh, k)
    return FeSpace(mesh, "scalar-lagrange", k, nodes, n, refined=refined)


def boundary_node_normals(space: FeSpace):
    """Outward normal at every boundary node and a corner flag.

    Returns ``(nodes, normals, is_corner)`` for the boundary nodes only.
    """
    mesh = space.mesh
    k = space.degree
    nv = mesh.n_vertices
    be = mesh.boundary_oriented
    normals = mesh.boundary_normals()
    nvk = max(nv, 1)
    key = be.min(1) * nvk + be.max(1)
    ekeys = mesh.edges[:, 0] * nvk + mesh.edges[:, 1]
    edge_of = np.searchsorted(ekeys, key)

    inc, out = mesh._boundary_links
    bverts = np.flatnonzero(mesh.is_boundary_vertex)
    corner = np.zeros(nv, dtype=bool)
    corner[mesh.corners] = True
    turn = mesh.boundary_turn_angles()
    wrong = bverts[~corner[bverts] & (np.abs(turn[bverts]) > CORNER_TURN_TOL)]
    if wrong.size:
        raise MeshError(f"boundary edges at non-corner vertex {int(wrong[0])} are not collinear "
                        "(misclassified corner)")
    nodes = [bverts]
    nrm = [normals[out[bverts]]]
    flags = [corner[bverts]]
    if k > 1:
        m = np.arange(k - 1)
        enodes = nv + edge_of[:, None] * (k - 1) + m
        nodes.append(enodes.ravel())
        nrm.append(np.repeat(normals, k - 1, axis=0))
        flags.append(np.zeros(enodes.size, dtype=bool))
    return np.concatenate(nodes), np.vstack(nrm), np.concatenate(flags)


def build_vector_space(mesh_or_refined, k: int, bc: str = "H0rot") -> FeSpace:
    """Continuous vector ``P_k``, optionally with vanishing tangential trace.

    With ``bc="H0rot"`` each non-corner boundary node keeps only its normal
    component and corner nodes are fixed.
    """
    mesh, refined = _unwrap(mesh_or_refined)
    if not 1 <= k <= 4:
        raise ValueError(f"degree must lie in 1..4, got {k}")
    if bc not in ("H0rot", "none"):
        raise ValueError(f"unknown boundary condition {bc!r}")
    nodes, n = _continuous_nodes(mesh, k)
    space = FeSpace(mesh, "vector-lagrange", k, nodes, n, bc=bc, refined=refined)
    if bc == "none":
        return space
    bnodes, normals, is_corner = boundary_node_normals(space)
    ncols = np.full(n, 2, dtype=np.int64)
    ncols[bnodes] = np.where(is_corner, 0, 1)
    start = np.concatenate([[0], np.cumsum(ncols)[:-1]])
    nrm = np.zeros((n, 2))
    nrm[bnodes] = normals
    rows, cols, vals = [], [], []
    free = np.flatnonzero(ncols == 2)
    for c in (0, 1):
        rows.append(2 * free + c)
        cols.append(start[free] + c)
        vals.append(np.ones(len(free)))
    single = np.flatnonzero(ncols == 1)
    for c in (0, 1):
        rows.append(2 * single + c)
        cols.append(start[single])
        vals.append(nrm[single, c])
    p = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(2 * n, int(ncols.sum())))
    p.eliminate_zeros()
    space._prolongation = p
    return space


def _one_sided_values(element, mesh, z, tris):
    """Values of the local DG basis at vertex ``z`` from each triangle in ``tris``."""
    loc = np.argmax(mesh.triangles[tris] == z, axis=1)
    ref = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return element.values(ref)[loc]


def build_pressure_space(mesh_or_refined, degree: int, classification=None,
                         constrain=None, mean: bool = True) -> FeSpace:
    """Discontinuous ``P_degree`` with mean zero and singular-vertex constraints.

    Parameters
    ----------
    degree : int
        Polynomial degree, usually ``k - 1``.
    classification : VertexClassification, optional
        Computed when omitted, honoring the provenance of a refined mesh.
    constrain : set of {"interior", "corner"}, optional
        Which singular constraints to impose.  Defaults follow the split:
        Clough-Tocher uses none, Powell-Sabin and unsplit meshes interior
        singular points.  ``"corner"`` adds point values at corners with a
        single triangle; ``rot`` of a field with zero tangential trace need
        not vanish there (take ``v = (y, 0)`` at the corner of a square), so
        it is off by default.
    mean : bool
        Impose zero mean.  ``mean=False`` with ``constrain=set()`` gives the
        full discontinuous space.
    """
    from .singular import classify

    mesh, refined = _unwrap(mesh_or_refined)
    if not 0 <= degree <= 3:
        raise ValueError(f"pressure degree must lie in 0..3, got {degree}")
    if constrain is None:
        kind = refined.split_kind if refined is not None else "none"
        constrain = {"clough-tocher": set()}.get(kind, {"interior"})
    constrain = set(constrain)
    if not constrain <= {"interior", "corner"}:
        raise ValueError(f"unknown constraint kinds {constrain}")
    if classification is None and constrain:
        constructed = refined.constructed_singular_points if refined is not None else None
        classification = classify(mesh, constructed=constructed)
    el = LagrangeElement(degree)
    nl = el.n_local
    nt = mesh.n_triangles
    cell = np.arange(nt * nl, dtype=np.int64).reshape(nt, nl)
    rule = triangle_rule()
    mean_row = np.outer(mesh.areas, rule.weights @ el.values(rule.ref_points)).ravel()
    rows = [mean_row] if mean else []
    expected = int(mean)
    if "interior" in constrain:
        for z in classification.singular_interior.tolist():
            star = vertex_star(mesh, z)
            tris = np.asarray(star.triangles)
            vals = _one_sided_values(el, mesh, z, tris) * np.array([1, -1, 1, -1])[:, None]
            r = np.zeros(nt * nl)
            r[cell[tris].ravel()] = vals.ravel()
            rows.append(r)
            expected += 1
    if "corner" in constrain:
        for z in classification.singular_corner.tolist():
            tris = mesh.triangles_of_vertex(z)
            r = np.zeros(nt * nl)
            r[cell[tris].ravel()] = _one_sided_values(el, mesh, z, tris).ravel()
            rows.append(r)
            expected += 1
    c = sp.csr_matrix(np.vstack(rows)) if rows else None
    space = FeSpace(mesh, "scalar-dg", degree, cell, nt * nl, constraints=c, refined=refined)
    space.classification = classification
    if c is not None and nt * nl <= 20000:
        rank = space.constraint_rank
        if rank != expected:
            warnings.warn(f"expected {expected} independent constraints, found rank {rank}",
                          ConstraintWarning, stacklevel=2)
    return space


def eval_basis(space: FeSpace, triangle: int, rule: QuadratureRule | None = None) -> NodalBasisEval:
    """Values and physical gradients of the local basis on one triangle."""
    rule = rule or triangle_rule()
    x = rule.ref_points
    jit = _inverse_transposed_jacobians(space.mesh)[triangle]
    g = np.einsum("ab,qib->qia", jit, space.element.gradients(x))
    return NodalBasisEval(rule.points, space.element.values(x), g)
