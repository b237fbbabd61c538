import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fan_mesh
from maxlag2d.assemble import rot_matrix
from maxlag2d.fespace import build_vector_space
from maxlag2d.mesh import Mesh, generate_jittered, generate_structured, perturb_vertices, vertex_star
from maxlag2d.refine import powell_sabin
from maxlag2d.singular import alternating_sum, classify, jump_theta, theta, theta_all


def test_crisscross_center_theta():
    assert theta(generate_structured(1, "criss-cross"), 4) == pytest.approx(0, abs=1e-15)


def test_five_triangle_fan():
    angles = [math.pi / 3] * 3 + [math.pi / 2] * 2
    m = fan_mesh(np.concatenate([[0], np.cumsum(angles)[:-1]]))
    expected = max(abs(math.sin(a + b)) for a, b in zip(angles, np.roll(angles, -1)))
    assert expected == pytest.approx(math.sqrt(3) / 2)
    assert theta(m, 0) == pytest.approx(expected, abs=1e-14)


def test_boundary_vertex_with_one_triangle(square2):
    assert theta(square2, 0) == 0.0


def test_boundary_vertex_no_wraparound():
    # boundary vertex with angles pi/4, pi/4: only the inner pair counts
    m = Mesh([[0, 0], [1, 0], [1, 1], [-1, 1]], [[0, 1, 2], [0, 2, 3]])
    star = vertex_star(m, 0)
    assert star.angles.sum() == pytest.approx(math.pi / 4 + math.pi / 2)
    assert theta(m, 0) == pytest.approx(abs(math.sin(star.angles.sum())))


def test_theta_all_matches_pointwise(crisscross6):
    p = perturb_vertices(crisscross6, "singular-vertices", 0.05, seed=3)
    th = theta_all(p)
    for z in range(p.n_vertices):
        assert th[z] == pytest.approx(theta(p, z), abs=1e-14)


def test_crisscross6_classification(crisscross6):
    c = classify(crisscross6)
    assert len(c.singular_interior) == 36
    assert len(c.singular_corner) == 0
    assert c.theta_min > 0


def test_perturbed_crisscross_theta_baseline(crisscross6):
    # regression value from the seeded fixture; it equals 5/13
    p = perturb_vertices(crisscross6, "singular-vertices", 0.1, seed=0, h=1 / 6)
    c = classify(p)
    assert len(c.singular) == 0
    assert c.theta_min == pytest.approx(0.38461538461538414, abs=1e-12)
    assert c.theta_min == pytest.approx(5 / 13, abs=1e-12)


def test_ps_singular_set_is_constructed_plus_corners():
    for mesh in (generate_structured(3), generate_jittered(4, seed=6)):
        r = powell_sabin(mesh)
        c = classify(r.mesh, constructed=r.constructed_singular_points)
        corners = [z for z in r.mesh.corners if r.mesh.valence[z] == 1]
        assert set(c.singular) == set(r.constructed_singular_points) | set(corners)
        numeric = classify(r.mesh)
        assert set(numeric.singular) == set(c.singular)


def test_classification_invariants():
    m = powell_sabin(generate_jittered(4, seed=8)).mesh
    c = classify(m)
    assert set(c.singular_corner) <= set(c.singular_boundary)
    assert (m.valence[c.singular_interior] == 4).all()
    assert np.isin(m.valence[c.singular_boundary], [1, 2]).all()
    assert (m.valence[c.singular_corner] == 1).all()
    assert ((0 <= c.theta) & (c.theta <= 1)).all()


def test_jump_theta():
    assert jump_theta([1, 1, 1, 1]) == 0
    assert jump_theta([3.0, 1.5, 3.0, 1.5]) == pytest.approx(2 * (3.0 - 1.5))
    with pytest.raises(ValueError):
        jump_theta([1, 2, 3])
    with pytest.raises(ValueError):
        alternating_sum([1, 2, 3])


@given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=4),
       st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=4), st.floats(-10, 10))
def test_jump_theta_is_linear(a, b, s):
    lhs = jump_theta(np.add(a, np.multiply(s, b)))
    assert lhs == pytest.approx(jump_theta(a) + s * jump_theta(b), abs=1e-8)


@settings(max_examples=20, deadline=None)
@given(angle=st.floats(0, 2 * math.pi), scale=st.floats(0.01, 100),
       shift=st.tuples(st.floats(-10, 10), st.floats(-10, 10)))
def test_theta_invariant_under_similarity(angle, scale, shift):
    m = generate_jittered(3, seed=5)
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    moved = m.with_points(scale * m.points @ rot.T + np.asarray(shift))
    np.testing.assert_allclose(theta_all(moved), theta_all(m), atol=1e-9)


def test_rot_of_p1_alternates_to_zero_at_ps_points():
    r = powell_sabin(generate_jittered(4, seed=3))
    v = build_vector_space(r, 1)
    rot = rot_matrix(v) @ v.expand(np.random.default_rng(0).standard_normal(v.dim))
    m = r.mesh
    c = classify(m, constructed=r.constructed_singular_points)
    assert len(c.singular_interior) > 0
    for z in c.singular_interior:
        star = vertex_star(m, z)
        assert abs(jump_theta(rot[list(star.triangles)])) < 1e-10
