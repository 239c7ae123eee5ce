"""
Exact ideal-theoretic decisions: multivariate division, Buchberger's algorithm over
Q and Q(t), unit-ideal tests, torus emptiness by the Rabinowitsch trick, and
Jacobian maximal minors.

Internally polynomials are plain {exponent: coefficient} dicts so the basis loop
can count reduction steps against a budget; the public functions take and return
poly_core.Polynomial.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import settings
from cache_manager import get_cached_verdict, set_cached_verdict, verdict_key
from poly_core import (
    AmbientMismatchError,
    Exponent,
    Polynomial,
    lift,
    partial_derivative,
    to_text,
    unify_all,
)

logger = logging.getLogger(__name__)

Terms = Dict[Exponent, object]


class ResourceExhausted(RuntimeError):
    """The reduction-step budget ran out before a basis was reached."""

    def __init__(self, steps: int, budget: int):
        super().__init__(f"Gröbner step budget exhausted ({steps} of {budget} steps)")
        self.steps = steps
        self.budget = budget


class JacobianShapeError(ValueError):
    """More polynomials than variables: there are no maximal minors."""


@dataclass(frozen=True)
class MonomialOrder:
    """grevlex (default) or lex, optionally over a permutation of the variables."""
    kind: str = "grevlex"
    permutation: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in ("grevlex", "lex"):
            raise ValueError(f"unknown monomial order {self.kind!r}")

    def key(self, exp: Exponent):
        if self.permutation is not None:
            exp = tuple(exp[i] for i in self.permutation)
        if self.kind == "lex":
            return exp
        return (sum(exp), tuple(-a for a in reversed(exp)))


GREVLEX = MonomialOrder("grevlex")
LEX = MonomialOrder("lex")


@dataclass(frozen=True)
class GroebnerBasis:
    order: MonomialOrder
    generators: Tuple[Polynomial, ...]
    steps: int = field(default=0, compare=False)


class _StepCounter:
    def __init__(self, budget: Optional[int]):
        self.budget = settings.STEP_BUDGET if budget is None else budget
        self.steps = 0

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            logger.warning(f"⚠️ Gröbner step budget of {self.budget} exhausted")
            raise ResourceExhausted(self.steps, self.budget)


# ============================================================================
# MONOMIAL AND TERM HELPERS
# ============================================================================

def _lcm(a: Exponent, b: Exponent) -> Exponent:
    return tuple(max(x, y) for x, y in zip(a, b))


def _mul(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


def _divides(a: Exponent, b: Exponent) -> bool:
    """a | b."""
    return all(x <= y for x, y in zip(a, b))


def _quotient(b: Exponent, a: Exponent) -> Exponent:
    return tuple(y - x for x, y in zip(a, b))


def _leading(p: Terms, order: MonomialOrder) -> Exponent:
    return max(p, key=order.key)


def _monic(p: Terms, order: MonomialOrder) -> Terms:
    lc = p[_leading(p, order)]
    if lc == 1:
        return dict(p)
    return {e: c / lc for e, c in p.items()}


def _sub_scaled(p: Terms, factor, shift: Exponent, g: Terms):
    """p -= factor * x^shift * g, in place."""
    for e, c in g.items():
        e2 = _mul(e, shift)
        v = p.get(e2)
        v = -factor * c if v is None else v - factor * c
        if v:
            p[e2] = v
        else:
            p.pop(e2, None)


def spoly(f: Terms, g: Terms, order: MonomialOrder) -> Terms:
    """S-polynomial of two monic polynomials."""
    lmf, lmg = _leading(f, order), _leading(g, order)
    lcm = _lcm(lmf, lmg)
    s = {_mul(e, _quotient(lcm, lmf)): c for e, c in f.items()}
    _sub_scaled(s, 1, _quotient(lcm, lmg), g)
    return s


def _reduce(p: Terms, basis: Sequence[Terms], order: MonomialOrder, counter: Optional[_StepCounter]) -> Terms:
    """Full remainder of p on division by basis (every term reduced)."""
    heads = [(_leading(g, order), g) for g in basis if g]
    heads = [(lm, g[lm], g) for lm, g in heads]
    p = dict(p)
    remainder: Terms = {}
    while p:
        lm = _leading(p, order)
        lc = p[lm]
        for hlm, hlc, g in heads:
            if _divides(hlm, lm):
                _sub_scaled(p, lc / hlc, _quotient(lm, hlm), g)
                if counter is not None:
                    counter.tick()
                break
        else:
            remainder[lm] = lc
            del p[lm]
    return remainder


# ============================================================================
# BUCHBERGER
# ============================================================================

def select(G: List[Terms], lmG: List[Exponent], P: Set[Tuple[int, int]], order: MonomialOrder):
    """Normal selection strategy: the pair with the smallest lcm, ties by index."""
    return min(P, key=lambda p: (order.key(_lcm(lmG[p[0]], lmG[p[1]])), p))


def update(G: List[Terms], lmG: List[Exponent], P: Set[Tuple[int, int]], f: Terms, order: MonomialOrder):
    """Add f to the basis, pruning pairs with the Gebauer-Moeller criteria."""
    lmf = _leading(f, order)
    P = {p for p in P if (not _divides(lmf, _lcm(lmG[p[0]], lmG[p[1]])) or
                          _lcm(lmG[p[0]], lmG[p[1]]) == _lcm(lmG[p[0]], lmf) or
                          _lcm(lmG[p[0]], lmG[p[1]]) == _lcm(lmG[p[1]], lmf))}
    lcm_dict: Dict[Exponent, List[int]] = {}
    for i in range(len(G)):
        lcm_dict.setdefault(_lcm(lmG[i], lmf), []).append(i)
    minimalized_lcms: List[Exponent] = []
    for L in sorted(lcm_dict, key=order.key):
        if all(not _divides(L_, L) for L_ in minimalized_lcms):
            minimalized_lcms.append(L)
    P_ = set()
    for L in minimalized_lcms:
        # coprime leading monomials: the S-polynomial reduces to zero
        if not any(_lcm(lmG[i], lmf) == _mul(lmG[i], lmf) for i in lcm_dict[L]):
            P_.add((min(lcm_dict[L]), len(G)))
    return G + [f], lmG + [lmf], P | P_


def minimalize(G: List[Terms], order: MonomialOrder) -> List[Terms]:
    Gmin: List[Terms] = []
    for f in sorted(G, key=lambda h: order.key(_leading(h, order))):
        lm = _leading(f, order)
        if all(not _divides(_leading(g, order), lm) for g in Gmin):
            Gmin.append(f)
    return Gmin


def interreduce(G: List[Terms], order: MonomialOrder, counter: Optional[_StepCounter]) -> List[Terms]:
    Gred = []
    for i in range(len(G)):
        g = _reduce(G[i], G[:i] + G[i + 1:], order, counter)
        Gred.append(_monic(g, order))
    return Gred


def _is_constant(p: Terms) -> bool:
    return len(p) == 1 and not any(next(iter(p)))


def buchberger(gens: Sequence[Polynomial], order: MonomialOrder = GREVLEX,
               step_budget: Optional[int] = None) -> GroebnerBasis:
    """
    Reduced Gröbner basis of the ideal generated by gens.

    Raises ResourceExhausted when more than step_budget reduction steps are needed.
    """
    if not gens:
        raise ValueError("buchberger needs at least one generator")
    gens = unify_all(list(gens))
    n, domain = gens[0].ambient_n, gens[0].scalar_domain
    counter = _StepCounter(step_budget)

    def finish(terms: List[Terms]) -> GroebnerBasis:
        polys = [Polynomial(n, g, domain) for g in terms]
        polys.sort(key=lambda p: order.key(_leading(dict(p.terms()), order)))
        logger.debug(f"Gröbner basis: {len(polys)} generators after {counter.steps} steps")
        return GroebnerBasis(order, tuple(polys), counter.steps)

    unit = [{(0,) * n: 1}]
    G: List[Terms] = []
    lmG: List[Exponent] = []
    P: Set[Tuple[int, int]] = set()
    for f in gens:
        terms = dict(f.terms())
        if not terms:
            continue
        if _is_constant(terms):
            return finish(unit)
        G, lmG, P = update(G, lmG, P, _monic(terms, order), order)

    while P:
        i, j = select(G, lmG, P, order)
        P.remove((i, j))
        r = _reduce(spoly(G[i], G[j], order), G, order, counter)
        if r:
            if _is_constant(r):
                return finish(unit)
            G, lmG, P = update(G, lmG, P, _monic(r, order), order)

    if not G:
        return finish([])
    return finish(interreduce(minimalize(G, order), order, counter))


def normal_form(p: Polynomial, basis: Sequence[Polynomial], order: MonomialOrder = GREVLEX) -> Polynomial:
    """Remainder of p on multivariate division by basis."""
    polys = unify_all([p] + list(basis))
    p, basis = polys[0], polys[1:]
    r = _reduce(dict(p.terms()), [dict(g.terms()) for g in basis], order, None)
    return Polynomial(p.ambient_n, r, p.scalar_domain)


def s_polynomial(f: Polynomial, g: Polynomial, order: MonomialOrder = GREVLEX) -> Polynomial:
    f, g = unify_all([f, g])
    s = spoly(_monic(dict(f.terms()), order), _monic(dict(g.terms()), order), order)
    return Polynomial(f.ambient_n, s, f.scalar_domain)


def is_unit_ideal(gb: GroebnerBasis) -> bool:
    gens = gb.generators
    return len(gens) == 1 and _is_constant(dict(gens[0].terms()))


# ============================================================================
# TORUS EMPTINESS
# ============================================================================

def torus_emptiness(polys: Sequence[Polynomial], step_budget: Optional[int] = None) -> bool:
    """
    True iff the system has no common zero with every coordinate nonzero.

    Adjoins u (last in grevlex) and tests whether polys + {1 - u*z1*...*zn}
    generate the unit ideal. Over Q(t) the verdict is generic in t.
    """
    if not polys:
        raise ValueError("torus emptiness of an empty system")
    polys = unify_all(list(polys))
    n, domain = polys[0].ambient_n, polys[0].scalar_domain
    budget = settings.STEP_BUDGET if step_budget is None else step_budget

    key = verdict_key([to_text(p) for p in polys], budget)
    cached = get_cached_verdict(key)
    if cached is not None:
        logger.debug("Torus verdict served from cache")
        return cached

    rabinowitsch = Polynomial(n + 1, {(0,) * (n + 1): 1, (1,) * (n + 1): -1}, domain)
    gb = buchberger([lift(p, 1) for p in polys] + [rabinowitsch], GREVLEX, budget)
    empty = is_unit_ideal(gb)
    set_cached_verdict(key, empty)
    return empty


# ============================================================================
# JACOBIAN MINORS
# ============================================================================

def divide_exact(p: Polynomial, q: Polynomial) -> Polynomial:
    """p / q when q divides p exactly; raises ArithmeticError otherwise."""
    p, q = unify_all([p, q])
    if q.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    order = GREVLEX
    qt = dict(q.terms())
    qlm = _leading(qt, order)
    qlc = qt[qlm]
    rest = dict(p.terms())
    quotient: Terms = {}
    while rest:
        lm = _leading(rest, order)
        if not _divides(qlm, lm):
            raise ArithmeticError(f"{to_text(q)} does not divide the dividend exactly")
        shift = _quotient(lm, qlm)
        c = rest[lm] / qlc
        quotient[shift] = c
        _sub_scaled(rest, c, shift, qt)
    return Polynomial(p.ambient_n, quotient, p.scalar_domain)


def bareiss_determinant(matrix: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Fraction-free determinant of a square polynomial matrix."""
    m = len(matrix)
    M = [list(row) for row in matrix]
    n = M[0][0].ambient_n
    domain = M[0][0].scalar_domain
    sign = 1
    prev = Polynomial.constant(n, 1, domain)
    for k in range(m - 1):
        if M[k][k].is_zero:
            swap = next((i for i in range(k + 1, m) if not M[i][k].is_zero), None)
            if swap is None:
                return Polynomial.zero(n, domain)
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                M[i][j] = divide_exact(M[i][j] * M[k][k] - M[i][k] * M[k][j], prev)
        prev = M[k][k]
    det = M[m - 1][m - 1]
    return det if sign == 1 else -det


def jacobian_minors(polys: Sequence[Polynomial]) -> List[Polynomial]:
    """All maximal minors of the m x n Jacobian, columns in lexicographic order."""
    polys = unify_all(list(polys))
    m = len(polys)
    if m == 0:
        raise JacobianShapeError("Jacobian of an empty system")
    n = polys[0].ambient_n
    if m > n:
        raise JacobianShapeError(f"{m} polynomials in {n} variables have no maximal minors")
    for p in polys:
        if p.ambient_n != n:
            raise AmbientMismatchError(f"ambient mismatch: n={n} vs n={p.ambient_n}")
    jac = [[partial_derivative(p, i) for i in range(1, n + 1)] for p in polys]
    minors = []
    for cols in itertools.combinations(range(n), m):
        minors.append(bareiss_determinant([[row[c] for c in cols] for row in jac]))
    return minors
