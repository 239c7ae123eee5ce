"""
Tests for Newton polyhedra, compact faces and joint face cones.

Face enumeration is cross-checked against an independent oracle: every compact
face is the argmin set of some positive weight, so sampling many small weights
must rediscover exactly the enumerated faces (for small supports).
"""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st
from scipy.optimize import linprog

from newton_geom import (
    CompactFace,
    affine_dimension,
    boundary_membership,
    compact_faces,
    enumerate_joint_faces,
    faces_of_points,
    faces_table,
    family_boundary_stable,
    in_newton_polyhedron,
    newton_boundary_equal,
    newton_vertices,
    offending_face,
    vertices_of,
)
from poly_core import (
    AmbientMismatchError,
    Polynomial,
    ScalarDomainError,
    ZeroPolynomialError,
    pairing,
    parse_polynomial,
)


def argmin_set(points, w):
    d = min(pairing(w, p) for p in points)
    return tuple(sorted(p for p in points if pairing(w, p) == d))


def sampled_faces(points, bound=12):
    n = len(next(iter(points)))
    return {argmin_set(points, w) for w in itertools.product(range(1, bound + 1), repeat=n)}


# ============================================================================
# VERTICES
# ============================================================================

def test_brieskorn_vertices():
    f = parse_polynomial("z1^2 + z2^3 + z3^5 + z1*z2*z3", 3)
    assert newton_vertices(f).vertices == ((0, 0, 5), (0, 3, 0), (2, 0, 0))


def test_dominated_points_are_not_vertices():
    assert vertices_of([(1, 1), (2, 2), (0, 3), (3, 0)]) == ((0, 3), (1, 1), (3, 0))


def test_membership_by_convex_combination():
    pts = [(2, 0), (0, 2)]
    assert in_newton_polyhedron((1, 1), pts)
    assert not in_newton_polyhedron((0, 1), pts)
    assert in_newton_polyhedron((5, 0), pts)


def dominated(p, others):
    """Float LP: is p in conv(others) + R_+^n?"""
    if not others:
        return False
    q = np.array(others, dtype=float)
    res = linprog(np.zeros(len(others)), A_ub=q.T, b_ub=np.array(p, dtype=float),
                  A_eq=np.ones((1, len(others))), b_eq=[1.0], bounds=(0, None), method="highs")
    return res.status == 0


supports = st.integers(1, 4).flatmap(
    lambda n: st.sets(st.tuples(*[st.integers(0, 6)] * n), min_size=1, max_size=10))


@hsettings(max_examples=200, deadline=None)
@given(supports)
def test_vertices_agree_with_a_floating_point_lp(points):
    pts = sorted(points)
    expected = tuple(p for p in pts if not dominated(p, [q for q in pts if q != p]))
    assert vertices_of(pts) == expected


def test_zero_polynomial_has_no_polyhedron():
    with pytest.raises(ZeroPolynomialError):
        newton_vertices(Polynomial.zero(2))


# ============================================================================
# COMPACT FACES
# ============================================================================

def test_faces_of_a_triangle():
    faces = faces_of_points([(2, 0, 0), (0, 3, 0), (0, 0, 5)])
    assert [f.dim for f in faces] == [0, 0, 0, 1, 1, 1, 2]
    top = faces[-1]
    assert top.witness == (15, 10, 6)
    assert top.level == 30
    assert top.maximal
    assert not any(f.maximal for f in faces[:-1])


def test_face_with_interior_support_point():
    f = parse_polynomial("z1^3 + z2^3 + z3^3 + z1*z2*z3", 3)
    top = compact_faces(f)[-1]
    assert top.dim == 2
    assert (1, 1, 1) in top.points
    assert top.witness == (1, 1, 1)


def test_faces_are_sorted_and_witnessed():
    f = parse_polynomial("z1^4 + z1*z2 + z2^4 + z1^2*z2^2", 2)
    faces = compact_faces(f)
    assert faces == sorted(faces, key=CompactFace.sort_key)
    for face in faces:
        assert all(x >= 1 for x in face.witness)
        assert argmin_set(list({e for e, _ in f.terms()}), face.witness) == face.points
        assert affine_dimension(face.points) == face.dim


point_sets = st.sets(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=6) \
    .filter(lambda s: (0, 0) not in s)


@hsettings(max_examples=200, deadline=None)
@given(point_sets)
def test_faces_match_sampled_weights_in_the_plane(points):
    enumerated = {face.points for face in faces_of_points(points)}
    assert enumerated == sampled_faces(points, bound=20)


supports3 = st.integers(1, 3).flatmap(
    lambda n: st.sets(st.tuples(*[st.integers(0, 6)] * n), min_size=1, max_size=10))


@hsettings(max_examples=200, deadline=None)
@given(supports3)
def test_every_face_is_the_argmin_of_its_witness(points):
    pts = sorted(points)
    faces = faces_of_points(pts)
    assert {face.points[0] for face in faces if face.dim == 0} == set(vertices_of(pts))
    for face in faces:
        assert all(x >= 1 for x in face.witness)
        assert argmin_set(pts, face.witness) == face.points
        assert face.level == pairing(face.witness, face.points[0])
        assert affine_dimension(face.points) == face.dim


def test_faces_match_sampled_weights_in_space():
    points = {(3, 0, 0), (0, 2, 0), (0, 0, 4), (1, 1, 1), (2, 0, 1), (0, 1, 2)}
    enumerated = {face.points for face in faces_of_points(points)}
    assert enumerated == sampled_faces(points, bound=12)


# ============================================================================
# JOINT FACES
# ============================================================================

def test_joint_faces_of_two_lines():
    f1 = parse_polynomial("z1 + z2 + z3", 3)
    f2 = parse_polynomial("z1 + 2*z2 + 3*z3", 3)
    cones = enumerate_joint_faces([f1, f2])
    # identical supports: the joint cones are the diagonal pairs
    assert len(cones) == len(compact_faces(f1))
    for cone in cones:
        assert cone.faces[0].points == cone.faces[1].points
        for face, f in zip(cone.faces, (f1, f2)):
            assert argmin_set(list({e for e, _ in f.terms()}), cone.witness) == face.points


def test_joint_faces_match_sampled_weights():
    f1 = parse_polynomial("z1^2 + z2^3", 2)
    f2 = parse_polynomial("z1^3 + z2^2", 2)
    s1, s2 = [e for e, _ in f1.terms()], [e for e, _ in f2.terms()]
    sampled = {(argmin_set(s1, w), argmin_set(s2, w)) for w in itertools.product(range(1, 25), repeat=2)}
    enumerated = {tuple(face.points for face in cone.faces) for cone in enumerate_joint_faces([f1, f2])}
    assert enumerated == sampled


@hsettings(max_examples=200, deadline=None)
@given(point_sets, point_sets)
def test_joint_faces_match_sampled_weights_for_random_pairs(s1, s2):
    fs = [Polynomial(2, {p: 1 for p in s}) for s in (s1, s2)]
    s1, s2 = sorted(s1), sorted(s2)
    sampled = {(argmin_set(s1, w), argmin_set(s2, w)) for w in itertools.product(range(1, 21), repeat=2)}
    enumerated = {tuple(face.points for face in cone.faces) for cone in enumerate_joint_faces(fs)}
    assert enumerated == sampled


def test_joint_faces_are_deterministic():
    fs = [parse_polynomial("z1^2 + z2^2 + z3^3", 3), parse_polynomial("z1*z2 + z3^2", 3)]
    assert enumerate_joint_faces(fs) == enumerate_joint_faces(list(fs))


def test_joint_faces_reject_mixed_ambients():
    with pytest.raises(AmbientMismatchError):
        enumerate_joint_faces([parse_polynomial("z1", 1), parse_polynomial("z1", 2)])


# ============================================================================
# BOUNDARY COMPARISONS
# ============================================================================

def test_boundary_equality_ignores_terms_above_it():
    f = parse_polynomial("z1^2 + z2^3 + z3^5 + z1*z2*z3", 3)
    g = parse_polynomial("2*z1^2 + 3*z2^3 + 5*z3^5", 3)
    assert newton_boundary_equal(f, g)
    assert not newton_boundary_equal(f, parse_polynomial("z1^2 + z2^3 + z3^4", 3))


def test_boundary_membership():
    f = parse_polynomial("z1^2 + z2^2", 2)
    assert boundary_membership((1, 1), f)
    assert boundary_membership((2, 0), f)
    assert not boundary_membership((2, 1), f)
    assert not boundary_membership((0, 1), f)


@hsettings(max_examples=200, deadline=None)
@given(supports3)
def test_boundary_membership_of_support_points_matches_the_faces(points):
    f = Polynomial(len(next(iter(points))), {p: 1 for p in points})
    on_faces = set().union(*(face.points for face in compact_faces(f)))
    for p in points:
        assert boundary_membership(p, f) == (p in on_faces)


def test_family_boundary_stability():
    stable = family_boundary_stable(parse_polynomial("z1^3 + z2^3 + z3^3 + t*z1*z2*z3", 3))
    assert stable.stable
    unstable = family_boundary_stable(parse_polynomial("t*z1 + z2^2", 2))
    assert not unstable.stable
    assert unstable.offending == ((1, 0),)
    assert unstable.at_zero_vertices == ((0, 2),)


def test_family_boundary_stability_needs_parametric_input():
    with pytest.raises(ScalarDomainError):
        family_boundary_stable(parse_polynomial("z1 + z2", 2))


def test_offending_face_is_a_vertex_cone():
    cone = offending_face((1, 0), [(1, 0), (0, 2)])
    assert cone.faces[0].points == ((1, 0),)
    assert cone.faces[0].dim == 0


def test_faces_table_columns():
    table = faces_table(compact_faces(parse_polynomial("z1^2 + z2^3", 2)))
    assert list(table.columns) == ["dim", "level", "witness", "points", "maximal"]
    assert len(table) == 3
    assert table["maximal"].sum() == 1
