"""
Hypothesis checks and certificates for products, families and pairs of germs.

Every check reduces to torus emptiness of face systems, one system per joint
face cone. Checks are evaluated in a fixed order (subsets by size then
lexicographically, cones by face dimension then points) and a certificate lists
its verdicts up to and including the first failure. A Gröbner budget overrun is
reported as resource-exhausted and never turned into pass or fail.
"""

import hashlib
import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import settings
from groebner_kernel import ResourceExhausted, jacobian_minors, torus_emptiness
from newton_geom import (
    JointFaceCone,
    boundary_membership,
    compact_faces,
    enumerate_joint_faces,
    family_boundary_stable,
    newton_boundary_equal,
    newton_vertices,
    offending_face,
)
from poly_core import (
    PARAMETRIC,
    T,
    Polynomial,
    coefficients_polynomial_in_t,
    constant_term,
    evaluate_rational,
    face_function,
    is_convenient,
    is_monomial,
    nonvanishing_subsets,
    product,
    restrict_to_subspace,
    specialize_parameter,
    support,
    to_parametric,
    to_text,
)

logger = logging.getLogger(__name__)


class HypothesisInputError(ValueError):
    """Input does not meet the preconditions of a check (not a failed hypothesis)."""


class VerdictStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    EXHAUSTED = "resource-exhausted"


class Conclusion(str, Enum):
    STABLE_RADIUS = "stable-radius-exists"
    FAMILY_UNIFORMLY_STABLE = "family-uniformly-stable"
    FIBRATIONS_FAMILY = "fibrations-isomorphic-family"
    FIBRATIONS_PAIR = "fibrations-isomorphic-pair"
    DEGENERATE = "degenerate"
    NONDEGENERATE = "nondegenerate"


class CertificateStatus(str, Enum):
    ISSUED = "issued"
    FAILED = "hypotheses-failed"
    EXHAUSTED = "resource-exhausted"


# Statements each conclusion relies on
THEOREM_ANCHORS = {
    Conclusion.NONDEGENERATE: "reduced, non-singular, hypersurface in the complex torus",
    Conclusion.STABLE_RADIUS: "is a stable radius for the Milnor",
    Conclusion.FIBRATIONS_FAMILY: "are isomorphic for all",
    Conclusion.FAMILY_UNIFORMLY_STABLE: "uniformly stable family with uniform stable radius",
    Conclusion.FIBRATIONS_PAIR: "Milnor fibrations of f and g at 0 are isomorphic",
}

FAMILY_REDUCTION = (
    "Every non-degeneracy check passed over Q(t), so each fails for at most finitely many t; "
    "the same checks pass at t = 0 and the Newton boundary of every member is the same at t = 0 "
    "as for generic t. Hence some tau0 > 0 makes the assumptions hold for all |t| <= tau0."
)

STABLE_RADIUS_NOTE = (
    "Existence only: the stable radius comes from a non-constructive argument and is not computed."
)


# ============================================================================
# VALUE TYPES
# ============================================================================

@dataclass(frozen=True)
class Verdict:
    check: str
    status: VerdictStatus
    failing_subset: Optional[Tuple[int, ...]] = None
    failing_cone: Optional[JointFaceCone] = None
    detail: str = ""
    witness_point: Optional[Tuple[int, ...]] = None

    @property
    def passed(self) -> bool:
        return self.status == VerdictStatus.PASS

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "status": self.status.value,
            "failing_subset": None if self.failing_subset is None else list(self.failing_subset),
            "failing_cone": None if self.failing_cone is None else self.failing_cone.to_dict(),
            "detail": self.detail,
            "witness_point": None if self.witness_point is None else list(self.witness_point),
        }


@dataclass(frozen=True)
class Certificate:
    status: CertificateStatus
    conclusion: Optional[Conclusion]
    theorem_anchor: str
    inputs_digest: str
    checks: Tuple[Verdict, ...]
    audits: Tuple[Verdict, ...] = ()
    implied: Tuple[Conclusion, ...] = ()
    reduction: str = ""
    annotations: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "conclusion": None if self.conclusion is None else self.conclusion.value,
            "theorem_anchor": self.theorem_anchor,
            "inputs_digest": self.inputs_digest,
            "checks": [v.to_dict() for v in self.checks],
            "audits": [v.to_dict() for v in self.audits],
            "implied_conclusions": [c.value for c in self.implied],
            "reduction": self.reduction,
            "annotations": self.annotations,
        }


@dataclass(frozen=True)
class FamilyInput:
    """Members f^k(t, z) with coefficients polynomial in t and f^k(t, 0) = 0."""
    members: Tuple[Polynomial, ...]

    @classmethod
    def from_polynomials(cls, members: Sequence[Polynomial]) -> "FamilyInput":
        if not members:
            raise HypothesisInputError("a family needs at least one member")
        n = members[0].ambient_n
        lifted = []
        for k, f in enumerate(members, start=1):
            if f.ambient_n != n:
                raise HypothesisInputError(f"member {k} lives in n={f.ambient_n}, expected n={n}")
            f = to_parametric(f)
            if f.is_zero:
                raise HypothesisInputError(f"member {k} is identically zero")
            if not coefficients_polynomial_in_t(f):
                raise HypothesisInputError(f"member {k} has a coefficient that is not polynomial in t")
            if constant_term(f):
                raise HypothesisInputError(f"member {k} does not vanish at z = 0 for all t")
            lifted.append(f)
        return cls(tuple(lifted))

    def at(self, t0) -> List[Polynomial]:
        return [specialize_parameter(f, t0) for f in self.members]


# ============================================================================
# HELPERS
# ============================================================================

def inputs_digest(kind: str, *groups: Sequence[Polynomial]) -> str:
    """sha256 over the canonical printed inputs."""
    payload = json.dumps(
        {"kind": kind, "inputs": [[to_text(f) for f in group] for group in groups]},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _validate_germs(fs: Sequence[Polynomial], what: str = "member"):
    if not fs:
        raise HypothesisInputError("at least one polynomial is required")
    n = fs[0].ambient_n
    for k, f in enumerate(fs, start=1):
        if f.ambient_n != n:
            raise HypothesisInputError(f"{what} {k} lives in n={f.ambient_n}, expected n={n}")
        if f.is_zero:
            raise HypothesisInputError(f"{what} {k} is the zero polynomial")
        if constant_term(f):
            raise HypothesisInputError(f"{what} {k} does not vanish at the origin")


def ordered_subsets(k0: int) -> List[Tuple[int, ...]]:
    """Nonempty subsets of {1..k0}, by size then lexicographically."""
    return [c for size in range(1, k0 + 1) for c in itertools.combinations(range(1, k0 + 1), size)]


def _map_tasks(fn: Callable, items: Sequence, jobs: int) -> List:
    """Order-preserving map, threaded when jobs > 1."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(fn, items))


def find_torus_witness(polys: Sequence[Polynomial]) -> Optional[Tuple[int, ...]]:
    """
    Small-integer common zero with all coordinates nonzero, or None.
    Deterministic: candidates in itertools.product order over WITNESS_SEARCH_VALUES.
    """
    if not polys or any(p.is_parametric for p in polys):
        return None
    n = polys[0].ambient_n
    candidates = itertools.product(settings.WITNESS_SEARCH_VALUES, repeat=n)
    for z in itertools.islice(candidates, settings.WITNESS_SEARCH_LIMIT):
        if all(evaluate_rational(p, z) == 0 for p in polys):
            return tuple(z)
    return None


def _aggregate(check: str, verdicts: Sequence[Verdict]) -> Verdict:
    """fail beats resource-exhausted beats pass."""
    for v in verdicts:
        if v.status == VerdictStatus.FAIL:
            return Verdict(check, VerdictStatus.FAIL, v.failing_subset, v.failing_cone, v.detail, v.witness_point)
    exhausted = [v for v in verdicts if v.status == VerdictStatus.EXHAUSTED]
    if exhausted:
        return Verdict(check, VerdictStatus.EXHAUSTED, detail=exhausted[0].detail)
    return Verdict(check, VerdictStatus.PASS, detail=f"{len(verdicts)} checks passed")


def _truncate(verdicts: Sequence[Verdict]) -> List[Verdict]:
    out = []
    for v in verdicts:
        out.append(v)
        if v.status == VerdictStatus.FAIL:
            break
    return out


def _certificate_status(checks: Sequence[Verdict]) -> CertificateStatus:
    if any(v.status == VerdictStatus.FAIL for v in checks):
        return CertificateStatus.FAILED
    if any(v.status == VerdictStatus.EXHAUSTED for v in checks):
        return CertificateStatus.EXHAUSTED
    return CertificateStatus.ISSUED


# ============================================================================
# FACE SYSTEMS
# ============================================================================

def face_system(fs: Sequence[Polynomial], weight: Sequence[int]) -> Optional[List[Polynomial]]:
    """
    The polynomials whose torus emptiness is the non-degeneracy condition at this
    weight; None when some face function is a monomial (nothing can vanish there).
    """
    face_fns = [face_function(f, weight) for f in fs]
    if any(is_monomial(g) for g in face_fns):
        return None
    n = fs[0].ambient_n
    if len(face_fns) <= n:
        return face_fns + jacobian_minors(face_fns)
    # more differentials than variables: the wedge vanishes identically, V* itself must be empty
    return face_fns


def _cone_verdict(fs: Sequence[Polynomial], cone: JointFaceCone, label: str,
                  subset: Tuple[int, ...], step_budget: Optional[int]) -> Verdict:
    system = face_system(fs, cone.witness)
    if system is None:
        return Verdict(label, VerdictStatus.PASS, detail="monomial face")
    try:
        empty = torus_emptiness(system, step_budget)
    except ResourceExhausted as e:
        return Verdict(label, VerdictStatus.EXHAUSTED, detail=f"{e} at weight {list(cone.witness)}")
    if empty:
        return Verdict(label, VerdictStatus.PASS)
    witness = find_torus_witness(system)
    detail = f"face system at weight {list(cone.witness)} has a common zero in the torus"
    return Verdict(label, VerdictStatus.FAIL, failing_subset=subset, failing_cone=cone,
                   detail=detail, witness_point=witness)


def _ndci(fs: Sequence[Polynomial], label: str, subset: Tuple[int, ...],
          jobs: int, step_budget: Optional[int]) -> Verdict:
    cones = enumerate_joint_faces(fs)
    results = _map_tasks(lambda cone: _cone_verdict(fs, cone, label, subset, step_budget), cones, jobs)
    verdict = _aggregate(label, results)
    if verdict.passed:
        verdict = Verdict(label, VerdictStatus.PASS, detail=f"{len(cones)} joint face cones")
    logger.debug(f"{label}: {verdict.status.value} over {len(cones)} cones")
    return verdict


# ============================================================================
# DEFINITION-LEVEL CHECKS
# ============================================================================

def check_hypersurface_nondegenerate(f: Polynomial, jobs: int = settings.DEFAULT_JOBS,
                                     step_budget: Optional[int] = None) -> Verdict:
    """Every compact face function has no critical point on its zero set in the torus."""
    _validate_germs([f], "polynomial")
    if f.is_parametric:
        raise HypothesisInputError("the hypersurface check takes a polynomial over Q")
    return _ndci([f], "nondegenerate", (1,), jobs, step_budget)


def check_ndci(fs: Sequence[Polynomial], jobs: int = settings.DEFAULT_JOBS,
               step_budget: Optional[int] = None) -> Verdict:
    """Non-degenerate complete intersection test over every joint face cone."""
    _validate_germs(fs)
    return _ndci(list(fs), "ndci", tuple(range(1, len(fs) + 1)), jobs, step_budget)


def _subset_checks(fs: Sequence[Polynomial], prefix: str, jobs: int,
                   step_budget: Optional[int]) -> List[Verdict]:
    """check_ndci on every nonempty subset of distinct indices, stopping after a failure."""
    verdicts = []
    for subset in ordered_subsets(len(fs)):
        label = f"{prefix}{list(subset)}"
        v = _ndci([fs[k - 1] for k in subset], label, subset, jobs, step_budget)
        verdicts.append(v)
        if v.status == VerdictStatus.FAIL:
            break
    return verdicts


def check_assumptions_product(fs: Sequence[Polynomial], jobs: int = settings.DEFAULT_JOBS,
                              step_budget: Optional[int] = None) -> Verdict:
    _validate_germs(fs)
    return _aggregate("assumptions-product", _subset_checks(fs, "ndci", jobs, step_budget))


def check_restrictions(fs: Sequence[Polynomial], jobs: int = settings.DEFAULT_JOBS,
                       step_budget: Optional[int] = None) -> Verdict:
    """
    Audit: re-run the subset checks on every proper coordinate subspace C^I on which
    all members of the subset survive, in the induced ambient C^I.
    """
    _validate_germs(fs)
    n = fs[0].ambient_n
    verdicts = []
    for subset in ordered_subsets(len(fs)):
        members = [fs[k - 1] for k in subset]
        common = set(nonvanishing_subsets(members[0]))
        for f in members[1:]:
            common &= set(nonvanishing_subsets(f))
        for coords in sorted(common, key=lambda s: (len(s), sorted(s))):
            if len(coords) == n:
                continue
            restricted = [_induced(f, coords) for f in members]
            label = f"restriction{list(subset)}@{sorted(coords)}"
            verdicts.append(_ndci(restricted, label, subset, jobs, step_budget))
            if verdicts[-1].status == VerdictStatus.FAIL:
                return _aggregate("restriction-audit", verdicts)
    return _aggregate("restriction-audit", verdicts)


def _induced(f: Polynomial, coords) -> Polynomial:
    """f^I written in the variables of C^I only."""
    keep = sorted(coords)
    g = restrict_to_subspace(f, keep)
    terms = {tuple(e[i - 1] for i in keep): c for e, c in g.terms()}
    return Polynomial(len(keep), terms, f.scalar_domain)


# ============================================================================
# CERTIFICATES
# ============================================================================

def product_degeneracy_report(fs: Sequence[Polynomial], jobs: int = settings.DEFAULT_JOBS,
                              step_budget: Optional[int] = None) -> dict:
    """
    For k0 >= 2: check the product f1*...*fk0 as a single hypersurface. Products of
    non-monomial germs sharing a torus zero are never Newton non-degenerate.
    """
    if len(fs) < 2:
        return {"applies": False}
    f = product(list(fs))
    verdict = check_hypersurface_nondegenerate(f, jobs, step_budget)
    if verdict.status == VerdictStatus.FAIL:
        statement = "hypotheses hold, yet the product is Newton-degenerate"
    elif verdict.status == VerdictStatus.PASS:
        statement = "the product is Newton non-degenerate"
    else:
        statement = "product check exhausted its budget"
    return {
        "applies": True,
        "product": to_text(f),
        "convenient": is_convenient(f),
        "branch": "convenient" if is_convenient(f) else "non-convenient",
        "product_verdict": verdict.to_dict(),
        "statement": statement,
    }


def certify_hypersurface(f: Polynomial, jobs: int = settings.DEFAULT_JOBS,
                         step_budget: Optional[int] = None) -> Certificate:
    verdict = check_hypersurface_nondegenerate(f, jobs, step_budget)
    status = _certificate_status([verdict])
    conclusion = {
        CertificateStatus.ISSUED: Conclusion.NONDEGENERATE,
        CertificateStatus.FAILED: Conclusion.DEGENERATE,
    }.get(status)
    return Certificate(
        status=status,
        conclusion=conclusion,
        theorem_anchor=THEOREM_ANCHORS[Conclusion.NONDEGENERATE],
        inputs_digest=inputs_digest("single", [f]),
        checks=(verdict,),
    )


def certify_stable_radius(fs: Sequence[Polynomial], jobs: int = settings.DEFAULT_JOBS,
                          step_budget: Optional[int] = None, audit_restrictions: bool = False) -> Certificate:
    """Stable radius for the product f1*...*fk0 once every subset is NDCI."""
    _validate_germs(fs)
    checks = _subset_checks(fs, "ndci", jobs, step_budget)
    status = _certificate_status(checks)
    audits = []
    annotations: Dict[str, Any] = {}
    if status == CertificateStatus.ISSUED:
        if audit_restrictions:
            audits.append(check_restrictions(fs, jobs, step_budget))
        if len(fs) >= 2:
            annotations["product_degeneracy"] = product_degeneracy_report(fs, jobs, step_budget)
    conclusion = {
        CertificateStatus.ISSUED: Conclusion.STABLE_RADIUS,
        CertificateStatus.FAILED: Conclusion.DEGENERATE,
    }.get(status)
    return Certificate(
        status=status,
        conclusion=conclusion,
        theorem_anchor=THEOREM_ANCHORS[Conclusion.STABLE_RADIUS],
        inputs_digest=inputs_digest("product", fs),
        checks=tuple(checks),
        audits=tuple(audits),
        reduction=STABLE_RADIUS_NOTE if status == CertificateStatus.ISSUED else "",
        annotations=annotations,
    )


def _boundary_stability_verdicts(family: FamilyInput) -> List[Verdict]:
    verdicts = []
    for k, f in enumerate(family.members, start=1):
        report = family_boundary_stable(f)
        label = f"boundary-stable[{k}]"
        if report.stable:
            verdicts.append(Verdict(label, VerdictStatus.PASS))
            continue
        vertex = report.offending[0]
        if vertex in report.generic_vertices:
            points = list(support(f))
            detail = f"vertex {list(vertex)} is lost at t = 0"
        else:
            points = [e for e in support(f) if specialize_parameter(f, 0).coefficient(e)]
            detail = f"vertex {list(vertex)} appears only at t = 0"
        verdicts.append(Verdict(label, VerdictStatus.FAIL, failing_subset=(k,),
                                failing_cone=offending_face(vertex, points), detail=detail))
    return verdicts


def check_family(family: FamilyInput, jobs: int = settings.DEFAULT_JOBS,
                 step_budget: Optional[int] = None) -> Certificate:
    """Boundary stability, generic-t non-degeneracy and t = 0 non-degeneracy of every subset."""
    if not isinstance(family, FamilyInput):
        raise HypothesisInputError("check_family takes a FamilyInput")
    checks: List[Verdict] = []
    stages = (
        lambda: _boundary_stability_verdicts(family),
        lambda: _subset_checks(list(family.members), "ndci-generic", jobs, step_budget),
        lambda: _subset_checks(family.at(0), "ndci-t0", jobs, step_budget),
    )
    for stage in stages:
        checks.extend(stage())
        checks = _truncate(checks)
        if checks and checks[-1].status == VerdictStatus.FAIL:
            break
    status = _certificate_status(checks)
    issued = status == CertificateStatus.ISSUED
    return Certificate(
        status=status,
        conclusion=Conclusion.FIBRATIONS_FAMILY if issued else None,
        theorem_anchor=THEOREM_ANCHORS[Conclusion.FIBRATIONS_FAMILY],
        inputs_digest=inputs_digest("family", family.members),
        checks=tuple(checks),
        implied=(Conclusion.FAMILY_UNIFORMLY_STABLE, Conclusion.STABLE_RADIUS) if issued else (),
        reduction=FAMILY_REDUCTION if issued else "",
    )


def newton_principal_part(f: Polynomial) -> Polynomial:
    """The terms of f whose exponents lie on the Newton boundary."""
    if f.is_zero:
        raise HypothesisInputError("principal part of the zero polynomial")
    terms = {e: c for e, c in f.terms() if boundary_membership(e, f)}
    return Polynomial(f.ambient_n, terms, f.scalar_domain)


def build_principal_homotopy(fs: Sequence[Polynomial]) -> FamilyInput:
    """Members (1 - t) f^k + t F^k with F^k the Newton principal part of f^k."""
    _validate_germs(fs)
    n = fs[0].ambient_n
    t = Polynomial.constant(n, T, PARAMETRIC)
    members = [(1 - t) * f + t * newton_principal_part(f) for f in fs]
    return FamilyInput.from_polynomials(members)


def _audit_verdict(label: str, cert: Certificate) -> Verdict:
    if cert.status == CertificateStatus.ISSUED:
        return Verdict(label, VerdictStatus.PASS, detail="principal homotopy family certified")
    failing = next((v for v in cert.checks if v.status == VerdictStatus.FAIL), None)
    if failing is not None:
        return Verdict(label, VerdictStatus.FAIL, failing.failing_subset, failing.failing_cone,
                       f"{failing.check}: {failing.detail}", failing.witness_point)
    return Verdict(label, VerdictStatus.EXHAUSTED, detail="principal homotopy audit exhausted its budget")


def certify_pair(fs: Sequence[Polynomial], gs: Sequence[Polynomial], jobs: int = settings.DEFAULT_JOBS,
                 step_budget: Optional[int] = None) -> Certificate:
    """Isomorphic Milnor fibrations of f1*...*fk0 and g1*...*gk0."""
    if len(fs) != len(gs):
        raise HypothesisInputError(f"pair lists differ in length: {len(fs)} vs {len(gs)}")
    _validate_germs(fs, "f member")
    _validate_germs(gs, "g member")
    if fs[0].ambient_n != gs[0].ambient_n:
        raise HypothesisInputError("f and g members live in different ambient spaces")

    checks: List[Verdict] = []
    for k, (f, g) in enumerate(zip(fs, gs), start=1):
        label = f"boundary-equal[{k}]"
        if newton_boundary_equal(f, g):
            checks.append(Verdict(label, VerdictStatus.PASS))
            continue
        fv, gv = set(newton_vertices(f).vertices), set(newton_vertices(g).vertices)
        vertex = sorted(fv ^ gv)[0]
        owner = f if vertex in fv else g
        checks.append(Verdict(label, VerdictStatus.FAIL, failing_subset=(k,),
                              failing_cone=offending_face(vertex, support(owner)),
                              detail=f"vertex {list(vertex)} is on only one of the two Newton boundaries"))
        break

    if checks[-1].passed:
        checks.extend(_subset_checks(fs, "ndci-f", jobs, step_budget))
        checks = _truncate(checks)
    if checks[-1].status != VerdictStatus.FAIL:
        checks.extend(_subset_checks(gs, "ndci-g", jobs, step_budget))
        checks = _truncate(checks)

    status = _certificate_status(checks)
    audits = []
    if status == CertificateStatus.ISSUED:
        audits.append(_audit_verdict("homotopy-audit-f", check_family(build_principal_homotopy(fs), jobs, step_budget)))
        audits.append(_audit_verdict("homotopy-audit-g", check_family(build_principal_homotopy(gs), jobs, step_budget)))
        if not all(a.passed for a in audits):
            logger.warning("⚠️ Principal homotopy audit did not pass although the pair hypotheses hold")
    return Certificate(
        status=status,
        conclusion=Conclusion.FIBRATIONS_PAIR if status == CertificateStatus.ISSUED else None,
        theorem_anchor=THEOREM_ANCHORS[Conclusion.FIBRATIONS_PAIR],
        inputs_digest=inputs_digest("pair", fs, gs),
        checks=tuple(checks),
        audits=tuple(audits),
    )
