"""
Floating-point checks of the transversality conditions behind stable radii.

Heuristic only: nothing here feeds a certificate verdict. Reports attach to
certificate documents as annotations.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

import settings
from poly_core import (
    Polynomial,
    ScalarDomainError,
    ZeroPolynomialError,
    constant_term,
    evaluate_complex,
    face_function,
    gradient,
    restrict_to_subspace,
)

logger = logging.getLogger(__name__)

MAX_PROJECTION_STEPS = 50
FIBRE_TOLERANCE = 0.10        # survivors satisfy | |f| - eta | <= 10% of eta
MAX_HALVINGS = 12
FD_STEP = 1e-5


class NoSurvivorsError(RuntimeError):
    """No sample reached the target fibre."""

    def __init__(self, discarded: int):
        super().__init__(f"no sample reached the fibre ({discarded} discarded)")
        self.discarded = discarded


class ShapeError(ValueError):
    """Vector lengths do not match the polynomial data."""


class ZeroVectorError(ValueError):
    """Residual requested at the origin."""


@dataclass(frozen=True)
class ScanConfig:
    eps1: float = 0.1
    eps2: float = 0.5
    eta: float = 1e-4
    samples: int = 500
    seed: int = settings.DEFAULT_SEED
    tolerance: float = settings.DEFAULT_TOLERANCE

    def __post_init__(self):
        if not 0 < self.eps1 <= self.eps2:
            raise ValueError(f"need 0 < eps1 <= eps2, got eps1={self.eps1}, eps2={self.eps2}")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.samples < 1:
            raise ValueError(f"samples must be at least 1, got {self.samples}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")

    def to_dict(self) -> dict:
        return {
            "eps1": self.eps1,
            "eps2": self.eps2,
            "eta": self.eta,
            "samples": self.samples,
            "seed": self.seed,
            "tolerance": self.tolerance,
        }


def _complex_list(z) -> List[List[float]]:
    return [[float(np.real(x)), float(np.imag(x))] for x in z]


@dataclass(frozen=True)
class ResidualReport:
    min_residual: float
    argmin_point: Tuple[complex, ...]
    points_tested: int
    below_tolerance: bool
    discarded: int = 0

    def to_dict(self) -> dict:
        return {
            "min_residual": self.min_residual,
            "argmin_point": _complex_list(self.argmin_point),
            "points_tested": self.points_tested,
            "discarded": self.discarded,
            "below_tolerance": self.below_tolerance,
        }


@dataclass(frozen=True)
class LemmaCandidate:
    point: Tuple[complex, ...]
    weight: Tuple[int, ...]
    subset: FrozenSet[int]
    multipliers: Tuple[complex, ...]
    lam: complex = 0j

    def to_dict(self) -> dict:
        return {
            "point": _complex_list(self.point),
            "weight": list(self.weight),
            "subset": sorted(self.subset),
            "multipliers": _complex_list(self.multipliers),
            "lambda": _complex_list([self.lam])[0],
        }


# ============================================================================
# RESIDUALS
# ============================================================================

class _Evaluator:
    """f and its formal gradient, evaluated in floating point."""

    def __init__(self, f: Polynomial):
        if f.is_parametric:
            raise ScalarDomainError("numeric probing needs a polynomial over Q")
        self.f = f
        self.grad = gradient(f)

    def value(self, z) -> complex:
        return evaluate_complex(self.f, z)

    def gradient(self, z) -> np.ndarray:
        return np.array([evaluate_complex(g, z) for g in self.grad], dtype=complex)


def _milnor_residual(ev: _Evaluator, z: np.ndarray) -> float:
    norm2 = float(np.vdot(z, z).real)
    if norm2 == 0.0:
        raise ZeroVectorError("Milnor residual at the origin")
    g = ev.gradient(z)
    pairing = complex(np.sum(g * z))
    return max(0.0, float(np.vdot(g, g).real) - abs(pairing) ** 2 / norm2)


def milnor_residual(f: Polynomial, z: Sequence[complex]) -> float:
    """
    Squared distance from grad f(z) to the line C*conj(z); zero exactly when
    df/dz_i(z) = lambda * conj(z_i) for some lambda.
    """
    z = np.asarray(z, dtype=complex)
    if z.shape != (f.ambient_n,):
        raise ShapeError(f"point has shape {z.shape}, expected ({f.ambient_n},)")
    return _milnor_residual(_Evaluator(f), z)


def lemma_condition_residual(fs: Sequence[Polynomial], cand: LemmaCandidate) -> float:
    """
    |f^I_w(a)|^2 summed over members, plus the misalignment of the multiplier
    combination of gradients: against lambda*conj(a_i) on I ∩ I(w), against zero on I \\ I(w).
    """
    if not fs:
        raise ShapeError("no polynomials given")
    n = fs[0].ambient_n
    a = np.asarray(cand.point, dtype=complex)
    if a.shape != (n,):
        raise ShapeError(f"point has shape {a.shape}, expected ({n},)")
    if len(cand.weight) != n:
        raise ShapeError(f"weight has length {len(cand.weight)}, expected {n}")
    mu = np.asarray(cand.multipliers, dtype=complex)
    if mu.shape != (len(fs),):
        raise ShapeError(f"{mu.shape[0] if mu.ndim else 0} multipliers for {len(fs)} polynomials")
    if abs(np.linalg.norm(mu) - 1.0) > 1e-9:
        raise ShapeError("multipliers must have unit norm")
    subset = sorted(cand.subset)
    if not subset or not all(1 <= i <= n for i in subset):
        raise ShapeError(f"subset {subset} is not inside 1..{n}")

    face_fns = []
    for f in fs:
        f_i = restrict_to_subspace(f, subset)
        if f_i.is_zero:
            raise ZeroPolynomialError("restriction to the coordinate subspace is identically zero")
        face_fns.append(face_function(f_i, cand.weight))

    evaluators = [_Evaluator(g) for g in face_fns]
    total = sum(abs(ev.value(a)) ** 2 for ev in evaluators)
    combined = sum(m * ev.gradient(a) for m, ev in zip(mu, evaluators))
    for i in subset:
        target = cand.lam * np.conj(a[i - 1]) if cand.weight[i - 1] == 0 else 0j
        total += abs(combined[i - 1] - target) ** 2
    return float(total)


# ============================================================================
# TRANSVERSALITY SCAN
# ============================================================================

def _project_to_fibre(ev: _Evaluator, z: np.ndarray, radius: float, eta: float) -> Optional[np.ndarray]:
    """
    Damped Newton toward |f| = eta on the sphere of the given radius: minimal-norm
    holomorphic step, then rescale back to the sphere. None when the step cap is hit.
    """
    value = ev.value(z)
    target = eta * value / abs(value) if value != 0 else complex(eta)
    for _ in range(MAX_PROJECTION_STEPS):
        value = ev.value(z)
        if abs(abs(value) - eta) <= FIBRE_TOLERANCE * eta:
            return z
        g = ev.gradient(z)
        gnorm2 = float(np.vdot(g, g).real)
        if gnorm2 == 0.0:
            return None
        step = -(value - target) * np.conj(g) / gnorm2
        error = abs(value - target)
        scale = 1.0
        for _ in range(MAX_HALVINGS):
            trial = z + scale * step
            trial = trial * (radius / np.linalg.norm(trial))
            if abs(ev.value(trial) - target) < error:
                z = trial
                break
            scale /= 2
        else:
            return None
    value = ev.value(z)
    return z if abs(abs(value) - eta) <= FIBRE_TOLERANCE * eta else None


def _scan_sample(ev: _Evaluator, cfg: ScanConfig, index: int) -> Optional[Tuple[float, np.ndarray]]:
    rng = np.random.default_rng([cfg.seed, index])
    n = ev.f.ambient_n
    direction = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    direction /= np.linalg.norm(direction)
    radius = rng.uniform(cfg.eps1, cfg.eps2)
    z = _project_to_fibre(ev, radius * direction, radius, cfg.eta)
    if z is None:
        return None
    return _milnor_residual(ev, z), z


def transversality_scan(f: Polynomial, cfg: ScanConfig, jobs: int = 1) -> ResidualReport:
    """
    Sample points of the fibre |f| = eta on spheres of radius in [eps1, eps2] and
    report the smallest Milnor residual. A residual below tolerance is evidence
    against the radius range being stable.
    """
    if f.is_zero:
        raise ZeroPolynomialError("transversality scan of the zero polynomial")
    if constant_term(f):
        raise ValueError("transversality scan needs f(0) = 0")
    ev = _Evaluator(f)
    indices = list(range(cfg.samples))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(lambda i: _scan_sample(ev, cfg, i), indices))
    else:
        results = [_scan_sample(ev, cfg, i) for i in indices]

    survivors = [r for r in results if r is not None]
    discarded = len(results) - len(survivors)
    if discarded:
        logger.info(f"{discarded} of {cfg.samples} samples did not reach the fibre")
    if not survivors:
        raise NoSurvivorsError(discarded)
    best_residual, best_point = min(survivors, key=lambda r: r[0])
    return ResidualReport(
        min_residual=best_residual,
        argmin_point=tuple(complex(x) for x in best_point),
        points_tested=len(survivors),
        below_tolerance=best_residual < cfg.tolerance,
        discarded=discarded,
    )


# ============================================================================
# LEMMA CANDIDATE SEARCH
# ============================================================================

def search_lemma_candidate(fs: Sequence[Polynomial], weight: Sequence[int], subset: Sequence[int],
                           cfg: ScanConfig, starts: Optional[int] = None) -> Tuple[LemmaCandidate, float]:
    """
    Least-squares search for a point a, unit multipliers and lambda driving the
    lemma residual to zero. The point is kept on the unit sphere of C^I, which
    rules out the trivial solution a = 0.
    """
    if not fs:
        raise ShapeError("no polynomials given")
    n = fs[0].ambient_n
    weight = tuple(int(x) for x in weight)
    coords = sorted(set(subset))
    m, k = len(fs), len(coords)
    starts = cfg.samples if starts is None else starts

    def unpack(x):
        raw = x[:k] + 1j * x[k:2 * k]
        size = np.linalg.norm(raw)
        a = np.zeros(n, dtype=complex)
        a[[i - 1 for i in coords]] = raw / size if size > 0 else np.eye(k, dtype=complex)[0]
        mu = x[2 * k:2 * k + m] + 1j * x[2 * k + m:2 * k + 2 * m]
        norm = np.linalg.norm(mu)
        mu = mu / norm if norm > 0 else np.eye(m, dtype=complex)[0]
        lam = complex(x[-2], x[-1])
        return a, mu, lam, size

    face_fns = [face_function(restrict_to_subspace(f, coords), weight) for f in fs]
    evaluators = [_Evaluator(g) for g in face_fns]

    def residuals(x):
        a, mu, lam, size = unpack(x)
        parts = [ev.value(a) for ev in evaluators]
        combined = sum(mu_j * ev.gradient(a) for mu_j, ev in zip(mu, evaluators))
        for i in coords:
            target = lam * np.conj(a[i - 1]) if weight[i - 1] == 0 else 0j
            parts.append(combined[i - 1] - target)
        # pins the scale of the raw point; a itself is normalised
        parts.append(size ** 2 - 1.0)
        parts = np.asarray(parts, dtype=complex)
        return np.concatenate([parts.real, parts.imag])

    best = None
    for s in range(starts):
        rng = np.random.default_rng([cfg.seed, s])
        x0 = rng.standard_normal(2 * k + 2 * m + 2)
        # as many residual components as unknowns, so Levenberg-Marquardt applies
        fit = least_squares(residuals, x0, method="lm")
        if best is None or fit.cost < best.cost:
            best = fit

    a, mu, lam, _ = unpack(best.x)
    cand = LemmaCandidate(tuple(complex(x) for x in a), weight, frozenset(coords),
                          tuple(complex(x) for x in mu), lam)
    return cand, lemma_condition_residual(fs, cand)


def gradient_check(f: Polynomial, points: Sequence[Sequence[complex]], h: float = FD_STEP) -> float:
    """Largest relative gap between formal partials and central differences."""
    ev = _Evaluator(f)
    worst = 0.0
    for z in points:
        z = np.asarray(z, dtype=complex)
        exact = ev.gradient(z)
        for i in range(f.ambient_n):
            e = np.zeros(f.ambient_n, dtype=complex)
            e[i] = h
            approx = (ev.value(z + e) - ev.value(z - e)) / (2 * h)
            worst = max(worst, abs(approx - exact[i]) / max(abs(exact[i]), 1.0))
    return worst
