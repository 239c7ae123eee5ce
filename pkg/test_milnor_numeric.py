"""
Tests for the numeric transversality checks.
These are heuristics, so assertions compare magnitudes rather than exact values.
"""

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

import milnor_numeric
from milnor_numeric import (
    LemmaCandidate,
    NoSurvivorsError,
    ScanConfig,
    ShapeError,
    ZeroVectorError,
    gradient_check,
    lemma_condition_residual,
    milnor_residual,
    search_lemma_candidate,
    transversality_scan,
)
from poly_core import ScalarDomainError, ZeroPolynomialError, parse_polynomial


def P(text, n=2):
    return parse_polynomial(text, n)


SQUARED_LINE = P("z1^2 + 2*z1*z2 + z2^2")
SPHERE = P("z1^2 + z2^2 + z3^2", 3)


# ============================================================================
# RESIDUALS
# ============================================================================

def test_residual_vanishes_for_radial_gradient():
    # df = 2z, and at a real point 2z is a multiple of conj(z)
    assert milnor_residual(SPHERE, [0.3, -0.2, 0.1]) == pytest.approx(0.0, abs=1e-12)


def test_residual_is_positive_off_the_radial_line():
    assert milnor_residual(P("z1 + z2^2"), [0.5, 0.5j]) > 0.1


parts = st.floats(min_value=-2, max_value=2, allow_nan=False, allow_infinity=False)
points2 = st.tuples(parts, parts, parts, parts).map(lambda x: (complex(x[0], x[1]), complex(x[2], x[3])))


@hsettings(max_examples=200, deadline=None)
@given(points2)
def test_residual_never_exceeds_the_squared_gradient(z):
    # f = z1^3 + z1*z2^2, grad f = (3*z1^2 + z2^2, 2*z1*z2)
    z1, z2 = z
    if abs(z1) ** 2 + abs(z2) ** 2 < 1e-6:
        return
    gradient_sq = abs(3 * z1 ** 2 + z2 ** 2) ** 2 + abs(2 * z1 * z2) ** 2
    residual = milnor_residual(P("z1^3 + z1*z2^2"), [z1, z2])
    assert -1e-9 * (1 + gradient_sq) <= residual <= gradient_sq * (1 + 1e-9) + 1e-12


def test_residual_rejects_origin_and_bad_shapes():
    with pytest.raises(ZeroVectorError):
        milnor_residual(SPHERE, [0, 0, 0])
    with pytest.raises(ShapeError):
        milnor_residual(SPHERE, [1, 2])


def test_parametric_polynomials_are_rejected():
    with pytest.raises(ScalarDomainError):
        milnor_residual(P("t*z1 + z2"), [1, 1])


def test_lemma_residual_at_an_exact_solution():
    a = (1 / np.sqrt(2), -1 / np.sqrt(2))
    cand = LemmaCandidate(point=a, weight=(1, 1), subset=frozenset({1, 2}), multipliers=(1.0,))
    assert lemma_condition_residual([SQUARED_LINE], cand) == pytest.approx(0.0, abs=1e-20)


def test_lemma_residual_validation():
    cand = LemmaCandidate(point=(1, 0), weight=(1, 1), subset=frozenset({1, 2}), multipliers=(2.0,))
    with pytest.raises(ShapeError):
        lemma_condition_residual([SQUARED_LINE], cand)
    cand = LemmaCandidate(point=(1, 0), weight=(1, 1), subset=frozenset({2}), multipliers=(1.0,))
    with pytest.raises(ZeroPolynomialError):
        lemma_condition_residual([P("z1^2 + z1*z2")], cand)


def test_gradient_check_agrees_with_finite_differences():
    points = [np.array([0.3 + 0.1j, -0.2 + 0.4j, 0.5]), np.array([1.0, 1.0j, -1.0])]
    assert gradient_check(P("z1^3 + z2^2*z3 - 2*z1*z3^4", 3), points) < 1e-6


# ============================================================================
# SCANS
# ============================================================================

def test_scan_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(eps1=0.5, eps2=0.1)
    with pytest.raises(ValueError):
        ScanConfig(eta=0)
    with pytest.raises(ValueError):
        ScanConfig(samples=0)


def test_degenerate_germ_scans_far_lower_than_a_nondegenerate_one():
    """
    (z1 + z2)^2 never scans below an absolute tolerance like 1e-9: on the fibre
    |f| = eta its residual is about 8*eta. So the degenerate germ is judged
    against a smooth one scanned with the same settings.
    """
    cfg = ScanConfig(samples=60, seed=7)
    degenerate = transversality_scan(SQUARED_LINE, cfg)
    smooth = transversality_scan(P("z1^2 + z2^2"), cfg)
    assert degenerate.points_tested > 0
    assert smooth.points_tested > 0
    assert degenerate.min_residual < smooth.min_residual / 10
    assert not smooth.below_tolerance


def test_scan_points_lie_on_the_fibre():
    cfg = ScanConfig(samples=20, seed=3)
    report = transversality_scan(SPHERE, cfg)
    z = np.array(report.argmin_point)
    value = abs(np.sum(z * z))
    assert abs(value - cfg.eta) <= 0.1 * cfg.eta + 1e-15
    assert cfg.eps1 <= np.linalg.norm(z) <= cfg.eps2


def test_scan_is_reproducible_across_workers():
    cfg = ScanConfig(samples=30, seed=11)
    serial = transversality_scan(SPHERE, cfg, jobs=1)
    parallel = transversality_scan(SPHERE, cfg, jobs=4)
    assert serial.to_dict() == parallel.to_dict()


def test_scan_requires_a_germ():
    with pytest.raises(ValueError):
        transversality_scan(P("z1 + 1"), ScanConfig(samples=5))


def test_scan_reports_no_survivors_when_the_fibre_is_out_of_reach():
    # |z1*z2| <= 1/2 on the unit sphere, so |f| = 1 is out of reach
    cfg = ScanConfig(eps1=1.0, eps2=1.0, eta=1.0, samples=3, seed=1)
    with pytest.raises(NoSurvivorsError) as excinfo:
        transversality_scan(P("z1*z2"), cfg)
    assert excinfo.value.discarded == 3


# ============================================================================
# LEMMA SEARCH
# ============================================================================

def test_lemma_search_finds_the_degenerate_direction():
    cand, residual = search_lemma_candidate([SQUARED_LINE], (1, 1), (1, 2), ScanConfig(seed=5), starts=5)
    assert residual < 1e-8
    a = np.array(cand.point)
    assert abs(a[0] + a[1]) < 1e-4


def test_lemma_search_defaults_to_one_start_per_sample(monkeypatch):
    calls = []
    real = milnor_numeric.least_squares

    def counting(*args, **kwargs):
        calls.append(1)
        return real(*args, **kwargs)

    monkeypatch.setattr(milnor_numeric, "least_squares", counting)
    search_lemma_candidate([SQUARED_LINE], (1, 1), (1, 2), ScanConfig(samples=25, seed=5))
    assert len(calls) == 25


def test_lemma_search_stays_away_from_zero_for_smooth_faces():
    _, residual = search_lemma_candidate([P("z1^2 + z2^2")], (1, 1), (1, 2), ScanConfig(seed=5), starts=5)
    assert residual > 1e-3
