"""Numerical checks of the structural properties behind the discretization.

Everything here is dense linear algebra on desk-scale problems: the
inclusion ``rot V_h in Q_h``, inf-sup constants, the discrete source
problem and its solution operator, and the modified Scott-Zhang
interpolant onto vector ``P1`` with vanishing tangential trace.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .assemble import _reduce, _scatter, assemble_mass, assemble_mixed, rot_matrix
from .fespace import FeSpace, build_pressure_space, build_vector_space
from .mesh import MeshError, vertex_star
from .quadrature import gauss_legendre, triangle_rule

__all__ = ["VerificationReport", "check_exactness", "exactness_residuals", "broken_pressure_space",
           "full_dg_space", "infsup_constant", "infsup_from_matrices", "h1_gram", "solve_source",
           "SourceSolver", "source_power_iteration", "source_operator_error", "scott_zhang",
           "scott_zhang_edges", "edge_duals", "l2_error", "run_verification", "DENSE_CAP"]

DENSE_CAP = 3000


@dataclass
class VerificationReport:
    """Outcome of :func:`run_verification`.

    ``source_errors`` holds ``||T_h f - T f||`` per sample when computed.
    """
    exactness_residual: float
    infsup_beta: float
    kernel_dim: int
    source_errors: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.exactness_residual < 0 or any(e < 0 for e in self.source_errors):
            raise ValueError("residuals must be nonnegative")

    def to_dict(self) -> dict:
        """Plain dict; a skipped ``infsup_beta`` (NaN) becomes ``None``."""
        out = asdict(self)
        if math.isnan(out["infsup_beta"]):
            out["infsup_beta"] = None
        return out


def _check_pair(v_space: FeSpace, q_space: FeSpace):
    if v_space.kind != "vector-lagrange" or q_space.kind != "scalar-dg":
        raise ValueError("need a vector Lagrange space and a discontinuous pressure space")
    if q_space.degree != v_space.degree - 1:
        raise ValueError(f"pressure degree {q_space.degree} does not match k-1 = "
                         f"{v_space.degree - 1}")
    if q_space.mesh.n_triangles != v_space.mesh.n_triangles or not np.array_equal(
            q_space.mesh.triangles, v_space.mesh.triangles):
        raise ValueError("spaces live on different meshes")


def _dg_mass_inverse(mesh, degree):
    from .assemble import _ref_mass
    from .fespace import LagrangeElement
    m = _ref_mass(LagrangeElement(degree), triangle_rule())
    return sp.kron(sp.diags(1.0 / mesh.areas), sp.csr_matrix(np.linalg.inv(m)), format="csr")


def exactness_residuals(v_space: FeSpace, q_space: FeSpace) -> np.ndarray:
    """``||rot phi - P_Q rot phi||_{L2}`` for every basis function ``phi`` of ``V_h``.

    ``Q_h`` is the subspace of full DG cut out by the constraint rows ``G``.
    The L2 distance of ``r`` to it is ``sqrt(g^T S^+ g)`` with ``g = G r`` and
    ``S = G M^{-1} G^T``.
    """
    _check_pair(v_space, q_space)
    g = q_space.constraints
    if g is None or g.shape[0] == 0:
        return np.zeros(v_space.dim)
    w = np.asarray((g @ (rot_matrix(v_space) @ v_space.prolongation)).todense())
    s = (g @ _dg_mass_inverse(q_space.mesh, q_space.degree) @ g.T).toarray()
    sp_inv = scipy.linalg.pinvh(0.5 * (s + s.T))
    return np.sqrt(np.maximum(np.einsum("ij,ik,kj->j", w, sp_inv, w), 0.0))


def check_exactness(v_space: FeSpace, q_space: FeSpace) -> float:
    """Largest L2 distance from ``rot`` of a ``V_h`` basis function to ``Q_h``."""
    r = exactness_residuals(v_space, q_space)
    return float(r.max()) if r.size else 0.0


def broken_pressure_space(mesh_or_refined, degree: int, vertex: int) -> FeSpace:
    """The usual pressure space plus an alternating-sum constraint at ``vertex``.

    Used as a negative control: at a non-singular vertex the alternating sum
    of one-sided values of ``rot v_h`` does not vanish.
    """
    from .fespace import LagrangeElement, _one_sided_values
    q = build_pressure_space(mesh_or_refined, degree)
    mesh = q.mesh
    star = vertex_star(mesh, int(vertex))
    if star.is_boundary or len(star.triangles) % 2:
        raise ValueError("vertex must be interior with an even number of triangles")
    tris = np.asarray(star.triangles)
    el = LagrangeElement(degree)
    signs = np.where(np.arange(len(tris)) % 2 == 0, 1.0, -1.0)
    row = np.zeros(q.n_full)
    row[q.cell_nodes[tris].ravel()] = (_one_sided_values(el, mesh, vertex, tris)
                                       * signs[:, None]).ravel()
    c = sp.vstack([q.constraints, sp.csr_matrix(row)]).tocsr()
    out = FeSpace(mesh, "scalar-dg", degree, q.cell_nodes, q.n_full, constraints=c,
                  refined=q.refined)
    out.classification = getattr(q, "classification", None)
    return out


def full_dg_space(mesh_or_refined, degree: int) -> FeSpace:
    """Discontinuous ``P_degree`` without any constraint, not even zero mean."""
    return build_pressure_space(mesh_or_refined, degree, constrain=set(), mean=False)


def h1_gram(space: FeSpace, rule=None) -> sp.csr_matrix:
    """Reduced Gram matrix of the ``H1`` seminorm ``(grad u, grad v)``."""
    rule = rule or triangle_rule()
    g = space.physical_gradients(rule.ref_points)  # (nt, nq, n, 2)
    loc = np.einsum("t,q,tqia,tqja->tij", space.mesh.areas, rule.weights, g, g)
    if space.n_components == 2:
        n = loc.shape[1]
        loc = np.einsum("tij,cd->ticjd", loc, np.eye(2)).reshape(len(loc), 2 * n, 2 * n)
    full = _scatter(space.dof_map, space.dof_map, loc, (space.n_full, space.n_full))
    return _reduce(full, space.prolongation)


def _chol(a, what):
    a = a.toarray() if sp.issparse(a) else np.asarray(a, dtype=float)
    try:
        return np.linalg.cholesky(0.5 * (a + a.T))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"{what} Gram matrix is numerically singular") from exc


def infsup_from_matrices(b, m_v, m_q) -> tuple[float, np.ndarray]:
    """Inf-sup constant of ``B`` (shape ``(m, n)``) in the norms given by ``m_v`` and ``m_q``.

    ``beta = inf_q sup_v (B v, q) / (|v| |q|)`` is the smallest singular value
    of ``L_Q^{-1} B L_V^{-T}`` counted on the ``Q`` side, so it is zero when
    ``B^T`` has a kernel.  Returns ``(beta, singular values)``.
    """
    bd = b.toarray() if sp.issparse(b) else np.atleast_2d(np.asarray(b, dtype=float))
    lq = _chol(m_q, "Q")
    lv = _chol(m_v, "V")
    x = scipy.linalg.solve_triangular(lq, bd, lower=True)
    x = scipy.linalg.solve_triangular(lv, x.T, lower=True).T
    s = np.linalg.svd(x, compute_uv=False)
    beta = 0.0 if bd.shape[0] > bd.shape[1] else float(s.min())
    return beta, s


def _dense_guard(*spaces):
    for s in spaces:
        if s.dim > DENSE_CAP:
            raise ValueError(f"{s.dim} unknowns exceed the dense verification cap {DENSE_CAP}")


def infsup_constant(v_space: FeSpace, q_space: FeSpace, norm: str = "h1") -> float:
    """Discrete inf-sup constant of ``(q, rot v)`` on ``V_h x Q_h``.

    ``norm`` selects the norm on ``V_h``: ``"h1"`` (gradient seminorm, the
    natural norm for the stability of Lagrange pairs, invariant under mesh
    scaling) or ``"l2"``.  ``Q_h`` always carries the L2 norm.
    """
    _check_pair(v_space, q_space)
    _dense_guard(v_space, q_space)
    if norm == "h1":
        m_v = h1_gram(v_space)
    elif norm == "l2":
        m_v = assemble_mass(v_space)
    else:
        raise ValueError(f"unknown norm {norm!r}")
    m_q = assemble_mass(q_space)
    beta, _ = infsup_from_matrices(assemble_mixed(v_space, q_space), m_v, m_q)
    return beta


class SourceSolver:
    """Discrete source problem ``M_V s + B^T u = 0``, ``B s = M_Q f``.

    ``s = A_h f`` and ``u = T_h f`` with ``f`` given by its ``Q_h``
    coefficients.  The saddle matrix is factorized once.
    """

    def __init__(self, v_space: FeSpace, q_space: FeSpace):
        _check_pair(v_space, q_space)
        _dense_guard(v_space, q_space)
        self.v_space, self.q_space = v_space, q_space
        self.m_v = assemble_mass(v_space).toarray()
        self.m_q = assemble_mass(q_space).toarray()
        self.b = assemble_mixed(v_space, q_space).toarray()
        nv, nq = self.m_v.shape[0], self.m_q.shape[0]
        a = np.block([[self.m_v, self.b.T], [self.b, np.zeros((nq, nq))]])
        self._lu = scipy.linalg.lu_factor(a, check_finite=False)
        d = np.abs(np.diag(self._lu[0]))
        if d.min() <= 1e-13 * d.max():
            raise np.linalg.LinAlgError("saddle matrix is singular: the pair is probably not "
                                        "inf-sup stable (rot V_h does not fill Q_h)")
        self.nv = nv

    def solve(self, f):
        f = np.asarray(f, dtype=float)
        rhs = np.concatenate([np.zeros((self.nv,) + f.shape[1:]), self.m_q @ f])
        x = scipy.linalg.lu_solve(self._lu, rhs, check_finite=False)
        return x[:self.nv], x[self.nv:]


def solve_source(v_space: FeSpace, q_space: FeSpace, f):
    """``(A_h f, T_h f)`` for ``f`` given by ``Q_h`` coefficients."""
    return SourceSolver(v_space, q_space).solve(f)


def source_power_iteration(v_space: FeSpace, q_space: FeSpace, tol: float = 1e-13,
                           max_iter: int = 500, block: int = 4, seed: int = 0) -> float:
    """First nonzero eigenvalue from block power iteration with ``T_h``.

    ``T_h`` maps ``rot u`` of an eigenfunction to ``-rot u / lambda``, so the
    dominant Ritz value ``mu`` of ``-T_h`` gives ``lambda = 1 / mu``.  A
    block keeps the iteration fast when the first eigenvalue is (nearly)
    double.
    """
    solver = SourceSolver(v_space, q_space)
    m = solver.m_q
    f = np.random.default_rng(seed).standard_normal((q_space.dim, min(block, q_space.dim)))
    mu_old = np.inf
    for _ in range(max_iter):
        f = f @ np.linalg.inv(np.linalg.cholesky(f.T @ m @ f)).T
        _, u = solver.solve(f)
        g = -(f.T @ m @ u)
        w, y = np.linalg.eigh(0.5 * (g + g.T))
        mu = float(w[-1])
        f = -u @ y
        if abs(mu - mu_old) <= tol * abs(mu):
            break
        mu_old = mu
    return 1.0 / mu


def _cosine_modes(count):
    """Mode pairs ``(n, m) != (0, 0)`` in order of ``n^2 + m^2``."""
    pairs = sorted(((n, m) for n in range(count + 1) for m in range(count + 1)
                    if n + m > 0), key=lambda p: (p[0] ** 2 + p[1] ** 2, p))
    return pairs[:count]


def source_operator_error(levels, split: str = "ps", degree: int = 1, samples: int = 20,
                          modes: int = 12, seed: int = 0, pattern: str = "right-split"):
    """Sampled ``max_f ||T_h f_h - T f||_{L2}`` on the unit square per level.

    ``f`` are random combinations, with unit coefficient vectors, of ``cos(n pi x) cos(m pi y)``, for
    which ``T f = -sum c_nm cos cos / (pi^2 (n^2 + m^2))`` exactly; ``f_h`` is
    the L2 projection onto ``Q_h``.  Returns one value per level.
    """
    from .mesh import generate_structured
    from .refine import refine
    rng = np.random.default_rng(seed)
    pairs = np.array(_cosine_modes(modes))
    lam = np.pi ** 2 * (pairs ** 2).sum(1)
    coeffs = rng.standard_normal((samples, len(pairs)))
    coeffs /= np.linalg.norm(coeffs, axis=1, keepdims=True)
    rule = triangle_rule()
    out = []
    for n in levels:
        r = refine(generate_structured(n, pattern), split)
        v = build_vector_space(r, degree)
        q = build_pressure_space(r, degree - 1)
        solver = SourceSolver(v, q)
        mesh = q.mesh
        p = mesh.points[mesh.triangles]
        xq = np.einsum("qv,tvd->tqd", rule.points, p)
        basis = np.cos(np.pi * pairs[:, 0] * xq[..., None, 0]) * np.cos(
            np.pi * pairs[:, 1] * xq[..., None, 1])  # (nt, nq, modes)
        psi = q.element.values(rule.ref_points)  # (nq, nl)
        load = np.einsum("t,q,qi,tqm->tim", mesh.areas, rule.weights, psi, basis)
        load = load.reshape(-1, len(pairs)) @ coeffs.T
        z = q.prolongation.toarray()
        f_h = np.linalg.solve(solver.m_q, z.T @ load)
        _, u = solver.solve(f_h)
        u_full = (z @ u).reshape(mesh.n_triangles, -1, samples)
        uq = np.einsum("qi,tis->tqs", psi, u_full)
        exact = -np.einsum("tqm,sm->tqs", basis, coeffs / lam)
        err = np.sqrt(np.einsum("t,q,tqs->s", mesh.areas, rule.weights, (uq - exact) ** 2))
        out.append(float(err.max()))
    return out


def edge_duals(length: float) -> np.ndarray:
    """Coefficients of ``psi_z = a phi_z + b phi_y`` with ``int psi_z phi_y = delta``.

    Solves the 2x2 edge mass system with entries ``L/3`` and ``L/6``, giving
    ``(4/L, -2/L)``.
    """
    m = length * np.array([[1 / 3, 1 / 6], [1 / 6, 1 / 3]])
    return np.linalg.solve(m, np.array([1.0, 0.0]))


def scott_zhang_edges(mesh) -> np.ndarray:
    """``e_z`` per vertex: the lowest-index incident edge, a boundary edge on the boundary."""
    e = mesh.edges
    ne = len(e)
    idx = np.arange(ne)
    choice = np.full(mesh.n_vertices, ne, dtype=np.int64)
    bnd = mesh.is_boundary_edge
    mask_b = mesh.is_boundary_vertex
    for end in (0, 1):
        z = e[:, end]
        np.minimum.at(choice, z, np.where(bnd | ~mask_b[z], idx, ne))
    return choice


def _edge_moment(tau, a, b, npts=8):
    """``int_{e} psi_a tau`` along the edge from vertex position ``a`` to ``b``."""
    s, w = gauss_legendre(npts)
    x = a[None] + s[:, None] * (b - a)[None]
    length = float(np.linalg.norm(b - a))
    ca, cb = edge_duals(length)
    psi = ca * (1 - s) + cb * s
    vals = np.asarray(tau(x), dtype=float)
    return length * np.tensordot(w * psi, vals, axes=(0, 0))


def scott_zhang(v_space_p1: FeSpace, tau, npts: int = 8) -> np.ndarray:
    """Modified Scott-Zhang interpolant of ``tau`` in vector ``P1`` with zero tangential trace.

    Parameters
    ----------
    v_space_p1 : FeSpace
        Vector ``P1`` space with ``bc="H0rot"``.
    tau : callable
        Maps points of shape ``(N, 2)`` to values of shape ``(N, 2)``.  The
        result has zero tangential trace when ``tau`` has.

    Returns
    -------
    ndarray
        Full nodal coefficients (``2 * n_vertices``).  Non-corner vertices get
        ``int_{e_z} psi_z tau``; corners get ``beta_z(tau)`` built from the
        tangential moments on their two boundary edges.
    """
    if v_space_p1.kind != "vector-lagrange" or v_space_p1.degree != 1:
        raise ValueError("Scott-Zhang interpolation targets vector P1")
    mesh = v_space_p1.mesh
    pts = mesh.points
    e = mesh.edges
    ez = scott_zhang_edges(mesh)
    out = np.zeros((mesh.n_vertices, 2))
    corners = set(mesh.corners.tolist())
    for z in range(mesh.n_vertices):
        if z in corners:
            continue
        a, b = e[ez[z]]
        y = b if a == z else a
        out[z] = _edge_moment(tau, pts[z], pts[y], npts)
    inc, outg = mesh._boundary_links
    be = mesh.boundary_oriented
    normals = mesh.boundary_normals()
    for z in corners:
        parts = []
        for j in (inc[z], outg[z]):
            y = be[j, 0] if be[j, 1] == z else be[j, 1]
            n = normals[j]
            t = np.array([-n[1], n[0]])
            parts.append((n, t, _edge_moment(tau, pts[z], pts[y], npts) @ t))
        (n1, t1, m1), (n2, t2, m2) = parts
        d1, d2 = n2 @ t1, n1 @ t2
        if abs(d1) < 1e-12 or abs(d2) < 1e-12:
            raise MeshError(f"boundary edges at corner {z} are collinear")
        out[z] = n2 / d1 * m1 + n1 / d2 * m2
    return out.ravel()


def l2_error(space: FeSpace, full, func, rule=None) -> float:
    """``||u_h - func||_{L2}`` for full coefficients of a vector or scalar space."""
    rule = rule or triangle_rule()
    mesh = space.mesh
    tri = np.arange(mesh.n_triangles)
    uh = space.evaluate(full, tri, rule.ref_points)
    xq = np.einsum("qv,tvd->tqd", rule.points, mesh.points[mesh.triangles])
    exact = np.asarray(func(xq.reshape(-1, 2)), dtype=float).reshape(uh.shape)
    d = (uh - exact) ** 2
    if d.ndim == 3:
        d = d.sum(-1)
    return float(np.sqrt(np.einsum("t,q,tq->", mesh.areas, rule.weights, d)))


def run_verification(mesh_or_refined, degree: int, norm: str = "h1") -> VerificationReport:
    """Exactness residual, inf-sup constant and kernel dimension for one pair."""
    v = build_vector_space(mesh_or_refined, degree)
    q = build_pressure_space(mesh_or_refined, degree - 1)
    notes = [f"dim V = {v.dim}", f"dim Q = {q.dim}"]
    res = check_exactness(v, q)
    if v.dim <= DENSE_CAP and q.dim <= DENSE_CAP:
        beta = infsup_constant(v, q, norm=norm)
        b = assemble_mixed(v, q).toarray()
        s = np.linalg.svd(b, compute_uv=False)
        kernel = int(v.dim - np.sum(s > 1e-10 * s.max()))
    else:
        beta, kernel = float("nan"), -1
        notes.append(f"inf-sup skipped above {DENSE_CAP} unknowns")
    return VerificationReport(res, beta, kernel, [], notes)
