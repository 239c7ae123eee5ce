"""
Exact rational linear programming.

Two-phase tableau simplex over fractions.Fraction with Bland's anti-cycling rule.
All variables are nonnegative; constraints are (coefficients, sense, rhs) rows with
sense in {"==", "<=", ">="}. Feasibility queries are memoised in an LRU cache since
face enumeration asks the same small systems many times.
"""

import logging
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from cachetools import LRUCache, cached
from cachetools.keys import hashkey

import settings

logger = logging.getLogger(__name__)

SENSES = ("==", "<=", ">=")


class UnboundedError(Exception):
    "Raised when the objective is unbounded below on the feasible region."
    pass


class InfeasibleError(Exception):
    "Raised when the constraint system has no nonnegative solution."
    pass


@dataclass(frozen=True)
class Constraint:
    coefficients: Tuple[Fraction, ...]
    sense: str
    rhs: Fraction

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValueError(f"unknown constraint sense {self.sense!r}")
        object.__setattr__(self, "coefficients", tuple(Fraction(a) for a in self.coefficients))
        object.__setattr__(self, "rhs", Fraction(self.rhs))


def eq(coefficients: Sequence, rhs=0) -> Constraint:
    return Constraint(tuple(coefficients), "==", rhs)


def le(coefficients: Sequence, rhs=0) -> Constraint:
    return Constraint(tuple(coefficients), "<=", rhs)


def ge(coefficients: Sequence, rhs=0) -> Constraint:
    return Constraint(tuple(coefficients), ">=", rhs)


class _Tableau:
    """Dense simplex tableau; the last column holds the right-hand side."""

    def __init__(self, constraints: Sequence[Constraint], num_vars: int):
        slack_count = sum(1 for c in constraints if c.sense != "==")
        self.num_vars = num_vars
        self.first_artificial = num_vars + slack_count
        width = self.first_artificial + len(constraints)
        self.rows: List[List[Fraction]] = []
        self.basis: List[int] = []

        slack = num_vars
        for i, con in enumerate(constraints):
            if len(con.coefficients) != num_vars:
                raise ValueError(f"constraint {i} has {len(con.coefficients)} coefficients, expected {num_vars}")
            row = [Fraction(0)] * (width + 1)
            row[:num_vars] = con.coefficients
            if con.sense == "<=":
                row[slack] = Fraction(1)
                slack += 1
            elif con.sense == ">=":
                row[slack] = Fraction(-1)
                slack += 1
            row[-1] = con.rhs
            if row[-1] < 0:
                row = [-x for x in row]
            row[self.first_artificial + i] = Fraction(1)
            self.rows.append(row)
            self.basis.append(self.first_artificial + i)
        self.width = width

    def pivot(self, r: int, col: int):
        prow = self.rows[r]
        p = prow[col]
        if p != 1:
            prow = [x / p for x in prow]
            self.rows[r] = prow
        for i, row in enumerate(self.rows):
            if i != r and row[col]:
                factor = row[col]
                self.rows[i] = [a - factor * b for a, b in zip(row, prow)]
        self.basis[r] = col

    def reduced_costs(self, cost: Sequence[Fraction], allowed: int) -> List[Fraction]:
        costs = []
        for j in range(allowed):
            r = cost[j] - sum((cost[b] * row[j] for b, row in zip(self.basis, self.rows) if cost[b]), Fraction(0))
            costs.append(r)
        return costs

    def run(self, cost: Sequence[Fraction], allowed: int):
        """Minimise cost over columns < allowed with Bland's rule."""
        while True:
            reduced = self.reduced_costs(cost, allowed)
            entering = next((j for j, r in enumerate(reduced) if r < 0), None)
            if entering is None:
                return
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise UnboundedError(f"objective unbounded along column {entering}")
            self.pivot(best[1], entering)

    def drive_out_artificials(self):
        """Pivot zero-level artificials out of the basis; drop redundant rows."""
        r = 0
        while r < len(self.rows):
            if self.basis[r] >= self.first_artificial:
                row = self.rows[r]
                col = next((j for j in range(self.first_artificial) if row[j] != 0), None)
                if col is None:
                    del self.rows[r]
                    del self.basis[r]
                    continue
                self.pivot(r, col)
            r += 1

    def solution(self) -> List[Fraction]:
        x = [Fraction(0)] * self.num_vars
        for b, row in zip(self.basis, self.rows):
            if b < self.num_vars:
                x[b] = row[-1]
        return x


def solve(constraints: Sequence[Constraint], num_vars: int,
          objective: Optional[Sequence] = None) -> List[Fraction]:
    """
    Return an optimal vertex x >= 0 of min objective.x subject to constraints
    (any feasible vertex when objective is None).

    Raises InfeasibleError or UnboundedError.
    """
    tableau = _Tableau(constraints, num_vars)
    width = tableau.width

    phase_one = [Fraction(0)] * tableau.first_artificial + [Fraction(1)] * (width - tableau.first_artificial)
    tableau.run(phase_one, width)
    infeasibility = sum((row[-1] for b, row in zip(tableau.basis, tableau.rows) if b >= tableau.first_artificial),
                        Fraction(0))
    if infeasibility > 0:
        raise InfeasibleError("phase one ended with positive artificial sum")
    tableau.drive_out_artificials()

    if objective is not None:
        if len(objective) != num_vars:
            raise ValueError(f"objective has {len(objective)} entries, expected {num_vars}")
        cost = [Fraction(c) for c in objective] + [Fraction(0)] * (width - num_vars)
        tableau.run(cost, tableau.first_artificial)
    return tableau.solution()


_lp_cache = LRUCache(maxsize=settings.LP_CACHE_SIZE)
_lp_lock = threading.Lock()


def _feasible_key(constraints, num_vars, objective=None):
    return hashkey(tuple(constraints), num_vars, None if objective is None else tuple(Fraction(c) for c in objective))


@cached(cache=_lp_cache, key=_feasible_key, lock=_lp_lock)
def feasible_point(constraints: Tuple[Constraint, ...], num_vars: int,
                   objective: Optional[Tuple] = None) -> Optional[Tuple[Fraction, ...]]:
    """
    Feasibility query: a feasible (optionally objective-minimal) point, or None when
    the system is infeasible. An unbounded objective falls back to any feasible vertex.
    """
    try:
        return tuple(solve(constraints, num_vars, objective))
    except InfeasibleError:
        return None
    except UnboundedError:
        logger.debug("Objective unbounded; returning a phase-one vertex")
        return tuple(solve(constraints, num_vars))


def is_feasible(constraints: Sequence[Constraint], num_vars: int) -> bool:
    return feasible_point(tuple(constraints), num_vars) is not None


def clear_lp_cache():
    with _lp_lock:
        _lp_cache.clear()
