"""
Tests for Buchberger's algorithm, torus emptiness and Jacobian minors.
"""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings as hsettings, strategies as st

import cache_manager
import settings
from groebner_kernel import (
    GREVLEX,
    LEX,
    JacobianShapeError,
    MonomialOrder,
    ResourceExhausted,
    bareiss_determinant,
    buchberger,
    divide_exact,
    is_unit_ideal,
    jacobian_minors,
    normal_form,
    s_polynomial,
    torus_emptiness,
)
from poly_core import Polynomial, parse_polynomial, specialize_parameter


def P(text, n=3):
    return parse_polynomial(text, n)


@pytest.fixture(autouse=True)
def no_verdict_cache(monkeypatch):
    monkeypatch.setattr(settings, "VERDICT_CACHE_ENABLED", False)


def is_groebner(basis, order):
    gens = list(basis.generators)
    for f, g in itertools.combinations(gens, 2):
        if not normal_form(s_polynomial(f, g, order), gens, order).is_zero:
            return False
    return True


# ============================================================================
# ORDERS
# ============================================================================

def test_grevlex_ordering():
    key = GREVLEX.key
    # same degree: the monomial with the smaller last exponent is larger
    assert key((1, 1, 0)) > key((1, 0, 1))
    assert key((0, 2, 0)) > key((1, 0, 1))
    assert key((0, 0, 3)) > key((2, 0, 0))


def test_unknown_order_kind():
    with pytest.raises(ValueError):
        MonomialOrder("deglex")


# ============================================================================
# BUCHBERGER
# ============================================================================

def test_reduced_basis_of_twisted_cubic():
    basis = buchberger([P("z1^2 - z2"), P("z1^3 - z3")], GREVLEX)
    assert is_groebner(basis, GREVLEX)
    assert set(basis.generators) == {P("z1^2 - z2"), P("z1*z2 - z3"), P("z2^2 - z1*z3")}


def test_lex_basis_eliminates():
    basis = buchberger([P("z1^2 + z2^2 - 1", 2), P("z1 - z2", 2)], LEX)
    assert is_groebner(basis, LEX)
    assert P("z2^2 - 1/2", 2) in basis.generators


def test_constant_generator_gives_unit_ideal():
    basis = buchberger([P("z1*z2"), P("3")])
    assert is_unit_ideal(basis)


def test_unit_ideal_detected_during_the_loop():
    basis = buchberger([P("z1*z2 - 1", 2), P("z1", 2)])
    assert is_unit_ideal(basis)


def test_parametric_coefficients():
    basis = buchberger([P("t*z1 - 1", 1), P("z1^2 - 1", 1)])
    # generically in t the two conditions are incompatible
    assert is_unit_ideal(basis)


def test_budget_is_enforced():
    # singular Hesse cubic, its partials and the torus condition with u = z4
    gens = [P(text, 4) for text in ("z1^3 + z2^3 + z3^3 - 3*z1*z2*z3", "z1^2 - z2*z3", "z2^2 - z1*z3",
                                    "z3^2 - z1*z2", "1 - z1*z2*z3*z4")]
    basis = buchberger(gens, GREVLEX)
    assert not is_unit_ideal(basis)
    assert basis.steps > 1
    assert buchberger(gens, GREVLEX, step_budget=basis.steps).steps == basis.steps
    with pytest.raises(ResourceExhausted) as excinfo:
        buchberger(gens, GREVLEX, step_budget=basis.steps - 1)
    assert excinfo.value.budget == basis.steps - 1
    assert excinfo.value.steps == basis.steps


@hsettings(max_examples=60, deadline=None)
@given(st.lists(
    st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), st.integers(-3, 3), min_size=1, max_size=3),
    min_size=1, max_size=3,
))
def test_buchberger_output_is_a_groebner_basis(term_maps):
    gens = [Polynomial(2, m) for m in term_maps]
    gens = [g for g in gens if not g.is_zero] or [P("z1", 2)]
    basis = buchberger(gens, GREVLEX)
    assert is_groebner(basis, GREVLEX)
    for g in gens:
        assert normal_form(g, basis.generators).is_zero


term_maps2 = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), st.integers(-3, 3),
                             min_size=1, max_size=3)


@hsettings(max_examples=60, deadline=None)
@given(term_maps2, term_maps2, term_maps2)
def test_multiples_of_a_generator_reduce_to_zero(p_terms, q_terms, r_terms):
    p, q, r = (Polynomial(2, m) for m in (p_terms, q_terms, r_terms))
    if p.is_zero:
        return
    gens = [p] + ([] if r.is_zero else [r])
    basis = buchberger(gens, GREVLEX)
    assert normal_form(p * q, basis.generators).is_zero


# ============================================================================
# TORUS EMPTINESS
# ============================================================================

def test_line_meets_the_torus():
    f = P("z1 + z2", 2)
    assert not torus_emptiness([f])


def test_monomial_avoids_the_torus():
    assert torus_emptiness([P("z1*z2^2", 2)])


def test_critical_locus_of_squared_line_is_in_the_torus():
    f = P("z1^2 + 2*z1*z2 + z2^2", 2)
    assert not torus_emptiness([f] + jacobian_minors([f]))


def test_fermat_cubic_is_smooth_in_the_torus():
    f = P("z1^3 + z2^3 + z3^3")
    assert torus_emptiness([f] + jacobian_minors([f]))


def test_hesse_pencil_is_generically_smooth():
    f = P("z1^3 + z2^3 + z3^3 + t*z1*z2*z3")
    assert torus_emptiness([f] + jacobian_minors([f]))


@pytest.mark.parametrize("t0", [1, -2, Fraction(5, 3), 7, Fraction(-1, 2)])
def test_hesse_pencil_specialises_to_smooth_members(t0):
    f = P("z1^3 + z2^3 + z3^3 + t*z1*z2*z3")
    system = [specialize_parameter(p, t0) for p in [f] + jacobian_minors([f])]
    assert torus_emptiness(system)


def test_hesse_pencil_is_singular_at_minus_three():
    f = P("z1^3 + z2^3 + z3^3 + t*z1*z2*z3")
    system = [specialize_parameter(p, -3) for p in [f] + jacobian_minors([f])]
    assert not torus_emptiness(system)


@pytest.mark.parametrize("t0,empty", [(0, True), (1, True), (3, True), (Fraction(1, 2), True),
                                      (2, False), (-2, False)])
def test_generic_verdict_fails_only_at_finitely_many_values(t0, empty):
    f = P("z1^2 + t*z1*z2 + z2^2", 2)
    system = [f] + jacobian_minors([f])
    assert torus_emptiness(system)
    assert torus_emptiness([specialize_parameter(p, t0) for p in system]) == empty


def test_verdicts_round_trip_through_the_cache(monkeypatch, tmp_path):
    monkeypatch.setattr(settings, "VERDICT_CACHE_ENABLED", True)
    monkeypatch.setattr(settings, "CACHE_DIR", tmp_path)
    polys = [P("z1 + z2", 2)]
    assert not torus_emptiness(polys, 1000)
    key = cache_manager.verdict_key(["z1 + z2"], 1000)
    assert cache_manager.get_cached_verdict(key) is False
    cache_manager.set_cached_verdict(key, True)
    # the cached verdict wins over recomputation
    assert torus_emptiness(polys, 1000)


# ============================================================================
# MINORS
# ============================================================================

def test_divide_exact():
    p = P("z1^2 - z2^2", 2)
    assert divide_exact(p, P("z1 - z2", 2)) == P("z1 + z2", 2)
    with pytest.raises(ArithmeticError):
        divide_exact(p, P("z1 + 2*z2", 2))


def test_bareiss_matches_expansion():
    z1, z2, z3 = (Polynomial.variable(3, i) for i in (1, 2, 3))
    m = [[z1, z2, z3], [z2, z3, z1], [z3, z1, z2]]
    expected = (z1 * (z3 * z2 - z1 * z1) - z2 * (z2 * z2 - z1 * z3) + z3 * (z2 * z1 - z3 * z3))
    assert bareiss_determinant(m) == expected


def test_bareiss_with_zero_pivot():
    one, zero = Polynomial.constant(1, 1), Polynomial.zero(1)
    z = Polynomial.variable(1, 1)
    assert bareiss_determinant([[zero, one], [z, zero]]) == -z


def test_minors_in_column_order():
    f1 = P("z1 + z2 + z3")
    f2 = P("z1 + 2*z2 + 3*z3")
    assert jacobian_minors([f1, f2]) == [P("1"), P("2"), P("1")]


def test_single_polynomial_minors_are_partials():
    f = P("z1^2*z2 + z3")
    assert jacobian_minors([f]) == [P("2*z1*z2"), P("z1^2"), P("1")]


def test_too_many_polynomials():
    with pytest.raises(JacobianShapeError):
        jacobian_minors([P("z1", 1), P("z1^2", 1)])
