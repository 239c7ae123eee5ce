"""
Tests for the exact two-phase simplex.
"""

from fractions import Fraction

import pytest

from rational_lp import (
    Constraint,
    InfeasibleError,
    UnboundedError,
    clear_lp_cache,
    eq,
    feasible_point,
    ge,
    is_feasible,
    le,
    solve,
)


@pytest.fixture(autouse=True)
def fresh_cache():
    clear_lp_cache()
    yield
    clear_lp_cache()


def test_optimum_is_exact():
    # min -x - y  s.t. x + 2y <= 4, 3x + y <= 6
    x = solve([le((1, 2), 4), le((3, 1), 6)], 2, objective=(-1, -1))
    assert x == [Fraction(8, 5), Fraction(6, 5)]


def test_equality_and_lower_bounds():
    x = solve([eq((1, 1, 1), 1), ge((1, 0, 0), Fraction(1, 3))], 3, objective=(1, 0, 0))
    assert x[0] == Fraction(1, 3)
    assert sum(x) == 1


def test_negative_right_hand_side():
    # x - y = -2 forces y = x + 2
    x = solve([eq((1, -1), -2)], 2, objective=(1, 1))
    assert x == [0, 2]


def test_infeasible_system():
    with pytest.raises(InfeasibleError):
        solve([le((1, 1), 1), ge((1, 1), 2)], 2)
    assert not is_feasible([le((1, 1), 1), ge((1, 1), 2)], 2)


def test_unbounded_objective():
    with pytest.raises(UnboundedError):
        solve([ge((1, -1), 0)], 2, objective=(-1, 0))


def test_unbounded_objective_falls_back_to_a_vertex():
    point = feasible_point((ge((1, -1), 0),), 2, (-1, 0))
    assert point is not None
    assert point[0] - point[1] >= 0


def test_redundant_equalities():
    x = solve([eq((1, 1), 2), eq((2, 2), 4), eq((1, 0), 1)], 2)
    assert x == [1, 1]


def test_empty_system_has_the_origin():
    assert feasible_point((), 3, (1, 1, 1)) == (0, 0, 0)


def test_degenerate_cycling_example_terminates():
    # Beale's example cycles under the textbook pivot rule
    cons = [
        le((Fraction(1, 4), -8, -1, 9), 0),
        le((Fraction(1, 2), -12, Fraction(-1, 2), 3), 0),
        le((0, 0, 1, 0), 1),
    ]
    x = solve(cons, 4, objective=(Fraction(-3, 4), 20, Fraction(-1, 2), 6))
    assert x == [1, 0, 1, 0]


def test_bad_sense_and_width():
    with pytest.raises(ValueError):
        Constraint((1,), "<", 0)
    with pytest.raises(ValueError):
        solve([le((1, 2), 1)], 3)


def test_feasibility_queries_are_memoised():
    cons = (le((1, 1), 1),)
    first = feasible_point(cons, 2)
    assert feasible_point(cons, 2) is first
