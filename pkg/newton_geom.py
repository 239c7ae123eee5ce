"""
Newton polyhedra and their compact faces, decided by exact rational LP.

Weights are handled through the shift w = w' + 1 with w' >= 0, so every LP here
lives in the nonnegative orthant the simplex expects. Strict off-face inequalities
are written as <w, beta> >= d + 1, valid after integer scaling of the open cone.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from poly_core import (
    AmbientMismatchError,
    Exponent,
    Polynomial,
    ScalarDomainError,
    ZeroPolynomialError,
    coefficients_polynomial_in_t,
    evaluate_scalar,
    pairing,
    support,
)
from rational_lp import Constraint, eq, feasible_point, ge, is_feasible, le

logger = logging.getLogger(__name__)


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class NewtonPolyhedron:
    """Vertex presentation: Gamma_+ = conv(vertices) + R_+^n."""
    ambient_n: int
    vertices: Tuple[Exponent, ...]


@dataclass(frozen=True)
class CompactFace:
    """A compact face, identified by the support points lying on it."""
    points: Tuple[Exponent, ...]
    witness: Tuple[int, ...] = field(compare=False)
    level: int = field(compare=False)
    dim: int = 0
    maximal: bool = field(default=False, compare=False)

    def sort_key(self):
        return (self.dim, self.points)

    def to_dict(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "witness": list(self.witness),
            "level": self.level,
            "dim": self.dim,
            "maximal": self.maximal,
        }


@dataclass(frozen=True)
class JointFaceCone:
    """One face per polynomial, realised simultaneously by one positive weight."""
    faces: Tuple[CompactFace, ...]
    witness: Tuple[int, ...] = field(compare=False)

    def sort_key(self):
        return tuple(f.sort_key() for f in self.faces)

    def to_dict(self) -> dict:
        return {"faces": [f.to_dict() for f in self.faces], "witness": list(self.witness)}


@dataclass(frozen=True)
class BoundaryStabilityReport:
    stable: bool
    generic_vertices: Tuple[Exponent, ...]
    at_zero_vertices: Tuple[Exponent, ...]
    offending: Tuple[Exponent, ...]

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "generic_vertices": [list(v) for v in self.generic_vertices],
            "at_zero_vertices": [list(v) for v in self.at_zero_vertices],
            "offending": [list(v) for v in self.offending],
        }


# ============================================================================
# LP BUILDING BLOCKS
# ============================================================================

def _diff(a: Exponent, b: Exponent) -> Tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


def _weight_eq(v: Sequence[int]) -> Constraint:
    """<w, v> = 0 in the shifted variables w' = w - 1."""
    return eq(v, -sum(v))


def _weight_ge(v: Sequence[int], bound: int) -> Constraint:
    """<w, v> >= bound in the shifted variables."""
    return ge(v, bound - sum(v))


def _face_system(on: Sequence[Exponent], off: Iterable[Exponent], strict: bool = True) -> List[Constraint]:
    """
    Constraints for a positive weight whose argmin over on+off contains `on`
    (strict: equals `on`). The level d is eliminated through the anchor on[0].
    """
    anchor = on[0]
    cons = [_weight_eq(_diff(p, anchor)) for p in on[1:]]
    bound = 1 if strict else 0
    cons.extend(_weight_ge(_diff(b, anchor), bound) for b in off)
    return cons


def _integer_witness(shifted: Sequence[Fraction]) -> Tuple[int, ...]:
    """Scale w = w' + 1 to a primitive positive integer vector."""
    w = [Fraction(x) + 1 for x in shifted]
    scale = math.lcm(*(x.denominator for x in w))
    ints = [int(x * scale) for x in w]
    g = math.gcd(*ints)
    return tuple(x // g for x in ints)


def _solve_witness(cons: List[Constraint], n: int) -> Optional[Tuple[int, ...]]:
    point = feasible_point(tuple(cons), n, objective=(1,) * n)
    if point is None:
        return None
    return _integer_witness(point)


def _rank(vectors: Sequence[Sequence[int]]) -> int:
    if not vectors:
        return 0
    return DomainMatrix.from_list([list(v) for v in vectors], QQ).rank()


def affine_dimension(points: Sequence[Exponent]) -> int:
    if not points:
        return -1
    anchor = points[0]
    return _rank([_diff(p, anchor) for p in points[1:]])


def _in_affine_hull(p: Exponent, basis_points: Sequence[Exponent], basis_rank: int) -> bool:
    anchor = basis_points[0]
    vectors = [_diff(b, anchor) for b in basis_points[1:]] + [_diff(p, anchor)]
    return _rank(vectors) == basis_rank


# ============================================================================
# VERTICES
# ============================================================================

def in_newton_polyhedron(alpha: Exponent, points: Iterable[Exponent]) -> bool:
    """alpha in conv(points) + R_+^n, by exact LP over convex multipliers."""
    pts = sorted(set(points))
    if not pts:
        return False
    if any(all(x <= a for x, a in zip(p, alpha)) for p in pts):
        return True
    m = len(pts)
    cons = [eq([1] * m, 1)]
    cons.extend(le([p[i] for p in pts], alpha[i]) for i in range(len(alpha)))
    return is_feasible(cons, m)


def vertices_of(points: Iterable[Exponent]) -> Tuple[Exponent, ...]:
    """Vertices of conv(points) + R_+^n, sorted."""
    pts = sorted(set(points))
    return tuple(p for p in pts if not in_newton_polyhedron(p, [q for q in pts if q != p]))


def newton_vertices(f: Polynomial) -> NewtonPolyhedron:
    if f.is_zero:
        raise ZeroPolynomialError("Newton polyhedron of the zero polynomial")
    return NewtonPolyhedron(f.ambient_n, vertices_of(support(f)))


# ============================================================================
# COMPACT FACES
# ============================================================================

def face_of_points(on: Sequence[Exponent], points: Sequence[Exponent]) -> Optional[CompactFace]:
    """The compact face with exactly these support points, or None when `on` is not a face."""
    on = tuple(sorted(set(on)))
    off = [p for p in points if p not in set(on)]
    n = len(on[0])
    witness = _solve_witness(_face_system(on, off, strict=True), n)
    if witness is None:
        return None
    return CompactFace(points=on, witness=witness, level=pairing(witness, on[0]), dim=affine_dimension(on))


def faces_of_points(points: Iterable[Exponent]) -> List[CompactFace]:
    """
    Every compact face of conv(points) + R_+^n, sorted by (dim, points).

    Candidates are S ∩ aff(B) for affinely independent vertex sets B that lie on a
    common compact face; B grows one vertex at a time, which is enough because
    lying on a common face is inherited by subsets.
    """
    pts = sorted(set(points))
    verts = vertices_of(pts)
    n = len(pts[0])
    found: Dict[Tuple[Exponent, ...], CompactFace] = {}
    seen = set()

    frontier = [(i,) for i in range(len(verts))]
    while frontier:
        next_frontier = []
        for combo in frontier:
            basis = [verts[i] for i in combo]
            rank = len(combo) - 1
            candidate = tuple(p for p in pts if _in_affine_hull(p, basis, rank)) if rank else (basis[0],)
            if candidate not in seen:
                seen.add(candidate)
                face = face_of_points(candidate, pts)
                if face is not None:
                    found[face.points] = face
            if len(combo) == n:
                continue
            for j in range(combo[-1] + 1, len(verts)):
                grown = basis + [verts[j]]
                if affine_dimension(grown) != len(grown) - 1:
                    continue
                if is_feasible(_face_system(grown, pts, strict=False), n):
                    next_frontier.append(combo + (j,))
        frontier = next_frontier

    faces = list(found.values())
    point_sets = [set(f.points) for f in faces]
    result = []
    for f, s in zip(faces, point_sets):
        maximal = not any(s < other for other in point_sets)
        result.append(CompactFace(f.points, f.witness, f.level, f.dim, maximal))
    result.sort(key=CompactFace.sort_key)
    logger.debug(f"{len(result)} compact faces over {len(pts)} support points")
    return result


def compact_faces(f: Polynomial) -> List[CompactFace]:
    if f.is_zero:
        raise ZeroPolynomialError("compact faces of the zero polynomial")
    return faces_of_points(support(f))


def enumerate_joint_faces(fs: Sequence[Polynomial]) -> List[JointFaceCone]:
    """
    The common refinement of the positive parts of the normal fans: one cone per
    jointly realisable tuple of compact faces, with a positive integer witness.
    """
    if not fs:
        return []
    n = fs[0].ambient_n
    for f in fs:
        if f.ambient_n != n:
            raise AmbientMismatchError(f"ambient mismatch: n={n} vs n={f.ambient_n}")
        if f.is_zero:
            raise ZeroPolynomialError("joint faces of a list containing the zero polynomial")

    face_lists = [compact_faces(f) for f in fs]
    supports = [sorted(support(f)) for f in fs]
    cones: List[JointFaceCone] = []

    def extend(k: int, chosen: List[CompactFace], cons: List[Constraint]):
        if k == len(fs):
            witness = _solve_witness(cons, n)
            if witness is not None:
                cones.append(JointFaceCone(tuple(chosen), witness))
            return
        for face in face_lists[k]:
            on = set(face.points)
            grown = cons + _face_system(face.points, [b for b in supports[k] if b not in on], strict=True)
            if k == 0 or is_feasible(grown, n):
                extend(k + 1, chosen + [face], grown)

    extend(0, [], [])
    cones.sort(key=JointFaceCone.sort_key)
    return cones


# ============================================================================
# BOUNDARY COMPARISONS
# ============================================================================

def newton_boundary_equal(f: Polynomial, g: Polynomial) -> bool:
    """Gamma(f) = Gamma(g), tested as equality of Gamma_+ vertex sets."""
    if f.ambient_n != g.ambient_n:
        raise AmbientMismatchError(f"ambient mismatch: n={f.ambient_n} vs n={g.ambient_n}")
    return newton_vertices(f).vertices == newton_vertices(g).vertices


def boundary_membership(alpha: Exponent, f: Polynomial) -> bool:
    """True iff alpha lies on a compact face of Gamma_+(f)."""
    if f.is_zero:
        raise ZeroPolynomialError("boundary of the zero polynomial")
    alpha = tuple(alpha)
    if len(alpha) != f.ambient_n:
        raise AmbientMismatchError(f"point {alpha} has length {len(alpha)}, expected {f.ambient_n}")
    pts = sorted(support(f))
    if not in_newton_polyhedron(alpha, pts):
        return False
    return is_feasible([_weight_ge(_diff(b, alpha), 0) for b in pts], f.ambient_n)


def family_boundary_stable(f: Polynomial) -> BoundaryStabilityReport:
    """Compare the Gamma_+ vertices of the generic support and of the t = 0 support."""
    if not f.is_parametric:
        raise ScalarDomainError("boundary stability needs a Q(t) polynomial")
    if not coefficients_polynomial_in_t(f):
        raise ScalarDomainError("family coefficients must be polynomial in t")
    generic = [e for e, _ in f.terms()]
    at_zero = [e for e, c in f.terms() if evaluate_scalar(c, 0) != 0]
    generic_vertices = vertices_of(generic) if generic else ()
    at_zero_vertices = vertices_of(at_zero) if at_zero else ()
    offending = tuple(sorted(set(generic_vertices) ^ set(at_zero_vertices)))
    return BoundaryStabilityReport(
        stable=not offending,
        generic_vertices=generic_vertices,
        at_zero_vertices=at_zero_vertices,
        offending=offending,
    )


def offending_face(vertex: Exponent, points: Iterable[Exponent]) -> JointFaceCone:
    """A 0-dimensional face cone at a vertex, used as the witness of a boundary failure."""
    pts = sorted(set(points))
    face = face_of_points([tuple(vertex)], pts)
    if face is None:
        raise ValueError(f"{vertex} is not a vertex of the given point set")
    return JointFaceCone((face,), face.witness)


def faces_table(faces: Sequence[CompactFace]) -> pd.DataFrame:
    """Tabular view of compact faces for human summaries."""
    rows = [
        {
            "dim": f.dim,
            "level": f.level,
            "witness": ",".join(str(x) for x in f.witness),
            "points": " ".join("(" + ",".join(str(x) for x in p) + ")" for p in f.points),
            "maximal": f.maximal,
        }
        for f in faces
    ]
    return pd.DataFrame(rows, columns=["dim", "level", "witness", "points", "maximal"])
