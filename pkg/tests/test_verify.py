import math

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp

from maxlag2d.assemble import assemble_mass, assemble_mixed, assemble_rot_rot
from maxlag2d.fespace import build_pressure_space, build_vector_space
from maxlag2d.mesh import Mesh, MeshError, generate_jittered, generate_structured
from maxlag2d.eig import lowest_nonzero
from maxlag2d.refine import clough_tocher, powell_sabin
from maxlag2d.verify import (SourceSolver, VerificationReport, broken_pressure_space,
                             check_exactness, edge_duals, full_dg_space, infsup_constant,
                             infsup_from_matrices, l2_error, run_verification, scott_zhang,
                             scott_zhang_edges, solve_source, source_operator_error,
                             source_power_iteration)


def pair(refined, k, **kw):
    return build_vector_space(refined, k), build_pressure_space(refined, k - 1, **kw)


@pytest.mark.parametrize("make,k", [
    (lambda: powell_sabin(generate_jittered(4, seed=1)), 1),
    (lambda: clough_tocher(generate_jittered(4, seed=1)), 2),
    (lambda: generate_structured(3, "criss-cross"), 4),
    (lambda: powell_sabin(generate_structured(4, domain="L-shape")), 1),
])
def test_exactness(make, k):
    assert check_exactness(*pair(make(), k)) < 1e-10


def test_broken_space_negative_control():
    r = powell_sabin(generate_jittered(4, seed=1))
    v = build_vector_space(r, 1)
    z = int(r.interior_points[5])  # an incenter, six triangles, not singular
    q = broken_pressure_space(r, 0, z)
    assert check_exactness(v, q) > 1e-3
    with pytest.raises(ValueError):
        broken_pressure_space(r, 0, 0)


def test_exactness_needs_matching_degree():
    r = powell_sabin(generate_structured(2))
    with pytest.raises(ValueError):
        check_exactness(build_vector_space(r, 2), build_pressure_space(r, 0))


def test_infsup_rank_one_closed_form():
    b = np.array([[3.0, 4.0]])
    beta, s = infsup_from_matrices(b, np.eye(2), np.eye(1))
    assert beta == pytest.approx(5.0)
    m_v = np.diag([4.0, 1.0])
    # scaled: b M_V^{-1/2} = (1.5, 4)
    assert infsup_from_matrices(b, m_v, np.eye(1))[0] == pytest.approx(math.hypot(1.5, 4.0))


def test_infsup_singular_gram():
    with pytest.raises(np.linalg.LinAlgError, match="singular"):
        infsup_from_matrices(np.ones((1, 2)), np.zeros((2, 2)), np.eye(1))


def test_infsup_ps_family_uniform():
    betas = [infsup_constant(*pair(powell_sabin(generate_structured(n)), 1)) for n in (2, 4, 8)]
    assert min(betas) > 0.1
    assert max(betas) / min(betas) <= 2
    assert max(betas) <= 1.5


def test_infsup_full_dg_unstable():
    mesh = generate_jittered(4, seed=3)
    v = build_vector_space(mesh, 1)
    assert infsup_constant(v, full_dg_space(mesh, 0)) < 1e-8


def test_infsup_scale_invariant():
    mesh = generate_jittered(3, seed=2)
    big = mesh.with_points(2 * mesh.points)
    a = infsup_constant(*pair(powell_sabin(mesh), 1))
    b = infsup_constant(*pair(powell_sabin(big), 1))
    assert abs(a - b) < 1e-8


def test_source_consistency():
    r = powell_sabin(generate_jittered(3, seed=0))
    v, q = pair(r, 1)
    tau = np.random.default_rng(1).standard_normal(v.dim)
    m_q = assemble_mass(q).toarray()
    b = assemble_mixed(v, q).toarray()
    f = np.linalg.solve(m_q, b @ tau)  # f = rot tau, which lies in Q_h
    s, u = solve_source(v, q, f)
    d = np.linalg.solve(m_q, b @ s) - f
    assert math.sqrt(d @ m_q @ d) < 1e-10
    mv = assemble_mass(v).toarray()
    np.testing.assert_allclose(mv @ s + b.T @ u, 0, atol=1e-10)


def test_singular_saddle_named():
    mesh = generate_jittered(3, seed=3)
    with pytest.raises(np.linalg.LinAlgError, match="inf-sup"):
        SourceSolver(build_vector_space(mesh, 1), full_dg_space(mesh, 0))


def test_source_power_iteration_matches_eig():
    r = powell_sabin(generate_structured(4))
    v, q = pair(r, 1)
    lam = source_power_iteration(v, q)
    ref, _ = lowest_nonzero(assemble_rot_rot(v), assemble_mass(v), 1, 5.0)
    assert abs(lam - ref[0]) < 1e-8 * ref[0]


def test_source_operator_error_decreases():
    err = source_operator_error([2, 4, 8], samples=20)
    assert err[0] > err[1] > err[2]


def test_edge_duals():
    for length in (1.0, 0.3, 2.5):
        a, b = edge_duals(length)
        assert (a, b) == pytest.approx((4 / length, -2 / length))
        # int psi phi_z = a L/3 + b L/6, int psi phi_y = a L/6 + b L/3
        assert a * length / 3 + b * length / 6 == pytest.approx(1)
        assert a * length / 6 + b * length / 3 == pytest.approx(0, abs=1e-14)


def test_scott_zhang_edge_choice():
    mesh = generate_jittered(3, seed=4)
    ez = scott_zhang_edges(mesh)
    e = mesh.edges
    for z in range(mesh.n_vertices):
        inc = np.flatnonzero((e == z).any(1))
        if mesh.is_boundary_vertex[z]:
            inc = inc[mesh.is_boundary_edge[inc]]
        assert ez[z] == inc.min()


def _in_range(space, full):
    p = space.prolongation.toarray()
    c, *_ = np.linalg.lstsq(p, full, rcond=None)
    return np.abs(p @ c - full).max()


@pytest.mark.parametrize("mesh", [generate_jittered(4, seed=0),
                                  generate_structured(4, domain="L-shape")])
def test_scott_zhang_projection(mesh):
    v = build_vector_space(mesh, 1)
    full = v.expand(np.random.default_rng(0).standard_normal(v.dim)).reshape(-1, 2)
    p = mesh.points

    def tau(x):
        # the P1 field itself, evaluated by barycentric interpolation on the owning triangle
        out = np.zeros_like(x)
        for i, pt in enumerate(x):
            for t, tri in enumerate(mesh.triangles):
                a, b, c = p[tri]
                lam = np.linalg.solve(np.column_stack([b - a, c - a]), pt - a)
                if lam.min() > -1e-12 and lam.sum() < 1 + 1e-12:
                    bary = np.array([1 - lam.sum(), *lam])
                    out[i] = bary @ full[tri]
                    break
        return out

    got = scott_zhang(v, tau, npts=3)
    assert np.abs(got - full.ravel()).max() <= 1e-13 * max(1, np.abs(full).max())
    assert _in_range(v, got) <= 1e-12


def test_scott_zhang_output_has_zero_tangential_trace():
    mesh = generate_structured(4, domain="L-shape")
    v = build_vector_space(mesh, 1)
    # sin y and sin x vanish on every side of the L-shape, so tau . t = 0 there
    out = scott_zhang(v, lambda x: np.column_stack([np.sin(x[:, 1]) * (2 + np.cos(x[:, 0])),
                                                    np.sin(x[:, 0]) * (1 + x[:, 0] * x[:, 1])]))
    assert _in_range(v, out) <= 1e-12


def test_scott_zhang_convergence_slope():
    def tau(x):
        s = np.sin(np.pi * x)
        return np.column_stack([s[:, 1], s[:, 0]])  # tangential trace zero on the unit square

    err, hs = [], []
    for n in (4, 8, 16):
        mesh = generate_jittered(n, seed=1)
        v = build_vector_space(mesh, 1)
        err.append(l2_error(v, scott_zhang(v, tau), tau))
        hs.append(1 / n)
    slope = np.polyfit(np.log(hs), np.log(err), 1)[0]
    assert slope >= 1


def test_scott_zhang_collinear_corner():
    pts = [[0, 0], [1, 0], [2, 0], [1, 1]]
    mesh = Mesh(pts, [[0, 1, 3], [1, 2, 3]], corners=[0, 1, 2, 3])
    v = build_vector_space(mesh, 1, bc="none")
    with pytest.raises(MeshError, match="collinear"):
        scott_zhang(v, lambda x: np.zeros_like(x))


def test_report():
    rep = run_verification(powell_sabin(generate_structured(2)), 1)
    assert rep.exactness_residual < 1e-10
    assert 0 < rep.infsup_beta <= 1.5
    assert rep.kernel_dim > 0
    assert set(rep.to_dict()) >= {"exactness_residual", "infsup_beta", "kernel_dim"}
    assert VerificationReport(0.0, math.nan, -1).to_dict()["infsup_beta"] is None
    with pytest.raises(ValueError):
        VerificationReport(-1.0, 0.5, 0)
