"""
Exact sparse multivariate polynomials over Q and over the rational-function field Q(t).

Coefficients are fractions.Fraction (rational domain) or sympy FracElement of
T_FIELD = Q(t) (parametric domain). A Polynomial is immutable; its terms iterate
in graded-lexicographic order (highest total degree first), which fixes every
printed form and every report downstream.

Support-level Newton operations that need no convex hull (d(w;f), face functions,
convenience, coordinate restrictions) live here as well.
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import QQ
from sympy.polys.fields import FracElement, field

import settings

logger = logging.getLogger(__name__)

T_FIELD, T = field("t", QQ)

RATIONAL = "rational"
PARAMETRIC = "parametric"

Exponent = Tuple[int, ...]
SubsetI = FrozenSet[int]          # 1-based coordinate indices
WeightVector = Tuple[int, ...]
Scalar = Union[Fraction, FracElement]


# ============================================================================
# ERRORS
# ============================================================================

class PolynomialError(ValueError):
    """Base class for polynomial construction and arithmetic errors."""

    def __init__(self, message: str, position: Optional[int] = None):
        super().__init__(message)
        self.position = position


class PolynomialSyntaxError(PolynomialError):
    """Text does not follow the polynomial grammar."""


class AmbientMismatchError(PolynomialError):
    """Operands live in different ambient spaces."""


class ZeroPolynomialError(PolynomialError):
    """Operation needs a nonzero polynomial."""


class ExponentCapError(PolynomialError):
    """An exponent entry or the variable count exceeds the desk-scale caps."""


class VariableIndexError(PolynomialError):
    """Variable index outside 1..n."""


class PoleError(PolynomialError):
    """A coefficient denominator vanishes at the requested parameter value."""


class ScalarDomainError(PolynomialError):
    """Operation is not defined for this scalar domain."""


# ============================================================================
# SCALARS
# ============================================================================

def to_param_scalar(c) -> FracElement:
    """Embed an int, Fraction or Q(t) element into T_FIELD."""
    if isinstance(c, FracElement):
        return c
    c = Fraction(c)
    return T_FIELD(QQ(c.numerator, c.denominator))


def qq_to_fraction(c) -> Fraction:
    """Convert a sympy QQ element to fractions.Fraction."""
    return Fraction(int(c.numerator), int(c.denominator))


def is_polynomial_in_t(c: Scalar) -> bool:
    """True when the scalar has no t in its denominator."""
    if not isinstance(c, FracElement):
        return True
    return c.denom.is_ground


def t_coefficients(c: Scalar) -> Dict[int, Fraction]:
    """
    Coefficients {k: a_k} of a scalar that is polynomial in t (a rational scalar
    gives {0: c}). Raises ScalarDomainError when t occurs in the denominator.
    """
    if not isinstance(c, FracElement):
        return {0: Fraction(c)} if c else {}
    if not c.denom.is_ground:
        raise ScalarDomainError(f"coefficient {format_scalar(c)} is not polynomial in t")
    scale = qq_to_fraction(c.denom.LC)
    return {k[0]: qq_to_fraction(a) / scale for k, a in c.numer.items()}


def _eval_univariate(poly, t0: Fraction) -> Fraction:
    return sum((qq_to_fraction(a) * t0 ** k[0] for k, a in poly.items()), Fraction(0))


def evaluate_scalar(c: Scalar, t0) -> Fraction:
    """Value of a scalar at t = t0 (exact)."""
    if not isinstance(c, FracElement):
        return Fraction(c)
    t0 = Fraction(t0)
    den = _eval_univariate(c.denom, t0)
    if den == 0:
        raise PoleError(f"coefficient {format_scalar(c)} has a pole at t = {t0}")
    return _eval_univariate(c.numer, t0) / den


def _t_poly_text(coeffs: Mapping[int, Fraction]) -> str:
    parts = []
    for k in sorted(coeffs, reverse=True):
        a = coeffs[k]
        mag = abs(a)
        if k == 0:
            body = str(mag)
        else:
            power = "t" if k == 1 else f"t^{k}"
            body = power if mag == 1 else f"{mag}*{power}"
        parts.append(("-" if a < 0 else "+", body))
    return _join_signed(parts) if parts else "0"


def format_scalar(c: Scalar) -> str:
    """Human-readable scalar; general Q(t) values print as (num)/(den)."""
    if not isinstance(c, FracElement):
        return str(Fraction(c))
    if c.denom.is_ground:
        return _t_poly_text(t_coefficients(c))
    num = {k[0]: qq_to_fraction(a) for k, a in c.numer.items()}
    den = {k[0]: qq_to_fraction(a) for k, a in c.denom.items()}
    return f"({_t_poly_text(num)})/({_t_poly_text(den)})"


def _join_signed(parts: Sequence[Tuple[str, str]]) -> str:
    out = []
    for i, (sign, body) in enumerate(parts):
        if i == 0:
            out.append(f"-{body}" if sign == "-" else body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


# ============================================================================
# POLYNOMIAL
# ============================================================================

def grlex_key(exp: Exponent) -> Tuple[int, Exponent]:
    return (sum(exp), exp)


class Polynomial:
    """Immutable sparse polynomial in z1..zn with exact coefficients."""

    __slots__ = ("ambient_n", "scalar_domain", "_terms", "_hash")

    def __init__(self, ambient_n: int, terms: Optional[Mapping[Exponent, object]] = None,
                 scalar_domain: Optional[str] = None):
        if ambient_n < 1:
            raise PolynomialError(f"ambient dimension must be positive, got {ambient_n}")
        terms = dict(terms or {})
        parametric = scalar_domain == PARAMETRIC or any(isinstance(c, FracElement) for c in terms.values())
        if scalar_domain == RATIONAL and parametric:
            raise ScalarDomainError("rational polynomial given a Q(t) coefficient")

        clean: Dict[Exponent, Scalar] = {}
        for exp, c in terms.items():
            exp = tuple(int(a) for a in exp)
            if len(exp) != ambient_n:
                raise AmbientMismatchError(f"exponent {exp} has length {len(exp)}, expected {ambient_n}")
            if any(a < 0 for a in exp):
                raise PolynomialError(f"negative exponent {exp}")
            if any(a > settings.MAX_EXPONENT for a in exp):
                raise ExponentCapError(f"exponent {exp} exceeds the cap {settings.MAX_EXPONENT}")
            c = to_param_scalar(c) if parametric else Fraction(c)
            if c:
                clean[exp] = c

        self.ambient_n = ambient_n
        self.scalar_domain = PARAMETRIC if parametric else RATIONAL
        self._terms = {e: clean[e] for e in sorted(clean, key=grlex_key, reverse=True)}
        self._hash = None

    # ---- construction helpers ------------------------------------------------

    @classmethod
    def zero(cls, n: int, scalar_domain: str = RATIONAL) -> "Polynomial":
        return cls(n, {}, scalar_domain)

    @classmethod
    def constant(cls, n: int, c, scalar_domain: Optional[str] = None) -> "Polynomial":
        return cls(n, {(0,) * n: c}, scalar_domain)

    @classmethod
    def monomial(cls, exp: Exponent, c=1, scalar_domain: Optional[str] = None) -> "Polynomial":
        return cls(len(exp), {tuple(exp): c}, scalar_domain)

    @classmethod
    def variable(cls, n: int, i: int) -> "Polynomial":
        """The coordinate z_i (1-based)."""
        if not 1 <= i <= n:
            raise VariableIndexError(f"variable z{i} outside 1..{n}")
        exp = [0] * n
        exp[i - 1] = 1
        return cls(n, {tuple(exp): 1})

    # ---- accessors ---------------------------------------------------------------

    def terms(self) -> Iterator[Tuple[Exponent, Scalar]]:
        """(exponent, coefficient) pairs in graded-lex order."""
        return iter(self._terms.items())

    def coefficient(self, exp: Exponent) -> Scalar:
        exp = tuple(exp)
        if exp in self._terms:
            return self._terms[exp]
        return to_param_scalar(0) if self.is_parametric else Fraction(0)

    @property
    def is_parametric(self) -> bool:
        return self.scalar_domain == PARAMETRIC

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.ambient_n, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        if self.ambient_n != other.ambient_n:
            return False
        if self.scalar_domain != other.scalar_domain:
            a, b = _unify(self, other)
            return a._terms == b._terms
        return self._terms == other._terms

    def __hash__(self) -> int:
        # t-free Q(t) coefficients hash like their rational values so that == stays hash-consistent
        if self._hash is None:
            self._hash = hash((self.ambient_n, tuple((e, _hashable(c)) for e, c in self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial(n={self.ambient_n}, {self.scalar_domain}, {to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)

    # ---- arithmetic --------------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction, FracElement)):
            return Polynomial.constant(self.ambient_n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = _unify(self, other)
        terms = dict(a._terms)
        for e, c in b._terms.items():
            terms[e] = terms[e] + c if e in terms else c
        return Polynomial(a.ambient_n, terms, a.scalar_domain)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ambient_n, {e: -c for e, c in self._terms.items()}, self.scalar_domain)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return multiply(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise PolynomialError(f"power must be a nonnegative integer, got {k!r}")
        result = Polynomial.constant(self.ambient_n, 1, self.scalar_domain)
        base = self
        while k:
            if k & 1:
                result = multiply(result, base)
            k >>= 1
            if k:
                base = multiply(base, base)
        return result


def _hashable(c: Scalar):
    if isinstance(c, FracElement) and c.numer.is_ground and c.denom.is_ground:
        return evaluate_scalar(c, 0)
    return c


def _unify(a: Polynomial, b: Polynomial) -> Tuple[Polynomial, Polynomial]:
    """Check ambients and lift both operands into a common scalar domain."""
    if a.ambient_n != b.ambient_n:
        raise AmbientMismatchError(f"ambient mismatch: n={a.ambient_n} vs n={b.ambient_n}")
    if a.scalar_domain == b.scalar_domain:
        return a, b
    return to_parametric(a), to_parametric(b)


def to_parametric(f: Polynomial) -> Polynomial:
    """Embed a rational polynomial into Q(t)[z]."""
    if f.is_parametric:
        return f
    return Polynomial(f.ambient_n, dict(f.terms()), PARAMETRIC)


def unify_all(polys: Sequence[Polynomial]) -> List[Polynomial]:
    """Common ambient and scalar domain for a list (rational embeds into parametric)."""
    if not polys:
        return []
    n = polys[0].ambient_n
    for p in polys:
        if p.ambient_n != n:
            raise AmbientMismatchError(f"ambient mismatch: n={n} vs n={p.ambient_n}")
    if any(p.is_parametric for p in polys):
        return [to_parametric(p) for p in polys]
    return list(polys)


# ============================================================================
# OPERATIONS
# ============================================================================

def multiply(a: Polynomial, b: Polynomial) -> Polynomial:
    """Exact product of two polynomials in the same ambient space."""
    a, b = _unify(a, b)
    terms: Dict[Exponent, Scalar] = {}
    for ea, ca in a.terms():
        for eb, cb in b.terms():
            e = tuple(x + y for x, y in zip(ea, eb))
            c = ca * cb
            terms[e] = terms[e] + c if e in terms else c
    return Polynomial(a.ambient_n, terms, a.scalar_domain)


def product(fs: Sequence[Polynomial]) -> Polynomial:
    """f1*...*fk; the empty product needs at least one factor to fix n."""
    if not fs:
        raise PolynomialError("product of an empty list")
    result = fs[0]
    for f in fs[1:]:
        result = multiply(result, f)
    return result


def partial_derivative(f: Polynomial, i: int) -> Polynomial:
    """Formal partial derivative with respect to z_i (1-based)."""
    if not 1 <= i <= f.ambient_n:
        raise VariableIndexError(f"derivative index {i} outside 1..{f.ambient_n}")
    k = i - 1
    terms = {}
    for e, c in f.terms():
        if e[k]:
            d = list(e)
            d[k] -= 1
            terms[tuple(d)] = c * e[k]
    return Polynomial(f.ambient_n, terms, f.scalar_domain)


def gradient(f: Polynomial) -> List[Polynomial]:
    return [partial_derivative(f, i) for i in range(1, f.ambient_n + 1)]


def restrict_to_subspace(f: Polynomial, subset: Iterable[int]) -> Polynomial:
    """f^I: drop every term that involves a variable outside I."""
    keep = frozenset(subset)
    outside = [i for i in range(f.ambient_n) if (i + 1) not in keep]
    terms = {e: c for e, c in f.terms() if all(e[i] == 0 for i in outside)}
    return Polynomial(f.ambient_n, terms, f.scalar_domain)


def support(f: Polynomial) -> FrozenSet[Exponent]:
    return frozenset(e for e, _ in f.terms())


def _check_weight(f: Polynomial, w: Sequence[int]) -> Tuple[int, ...]:
    w = tuple(int(x) for x in w)
    if len(w) != f.ambient_n:
        raise AmbientMismatchError(f"weight {w} has length {len(w)}, expected {f.ambient_n}")
    if any(x < 0 for x in w):
        raise PolynomialError(f"weight {w} has a negative entry")
    return w


def pairing(w: Sequence[int], exp: Exponent) -> int:
    return sum(a * b for a, b in zip(w, exp))


def d_of_w(f: Polynomial, w: Sequence[int]) -> int:
    """d(w;f): minimum of <w, alpha> over the support of f."""
    if f.is_zero:
        raise ZeroPolynomialError("d(w;f) of the zero polynomial")
    w = _check_weight(f, w)
    return min(pairing(w, e) for e, _ in f.terms())


def face_function(f: Polynomial, w: Sequence[int]) -> Polynomial:
    """f_w: the terms of f on which <w, .> attains d(w;f)."""
    d = d_of_w(f, w)
    terms = {e: c for e, c in f.terms() if pairing(w, e) == d}
    return Polynomial(f.ambient_n, terms, f.scalar_domain)


def is_convenient(f: Polynomial) -> bool:
    """True when the support meets every coordinate axis away from the origin."""
    if f.is_zero:
        raise ZeroPolynomialError("convenience of the zero polynomial")
    axes = set()
    for e, _ in f.terms():
        nonzero = [i for i, a in enumerate(e) if a]
        if len(nonzero) == 1:
            axes.add(nonzero[0])
    return len(axes) == f.ambient_n


def is_monomial(f: Polynomial) -> bool:
    return len(f) == 1


def constant_term(f: Polynomial) -> Scalar:
    return f.coefficient((0,) * f.ambient_n)


def total_degree(f: Polynomial) -> int:
    """Total degree; -1 for the zero polynomial."""
    return max((sum(e) for e, _ in f.terms()), default=-1)


def nonvanishing_subsets(f: Polynomial) -> List[SubsetI]:
    """
    All nonempty I in {1..n} with f^I not identically zero, by size then lexicographically.
    I qualifies exactly when some support point has its nonzero entries inside I.
    """
    supports = {frozenset(i + 1 for i, a in enumerate(e) if a) for e, _ in f.terms()}
    result = []
    indices = range(1, f.ambient_n + 1)
    for size in range(1, f.ambient_n + 1):
        for combo in itertools.combinations(indices, size):
            subset = frozenset(combo)
            if any(s <= subset for s in supports):
                result.append(subset)
    return result


def specialize_parameter(f: Polynomial, t0) -> Polynomial:
    """Evaluate every coefficient at t = t0; the result is a rational polynomial."""
    if not f.is_parametric:
        return f
    t0 = Fraction(t0)
    return Polynomial(f.ambient_n, {e: evaluate_scalar(c, t0) for e, c in f.terms()}, RATIONAL)


def coefficients_polynomial_in_t(f: Polynomial) -> bool:
    return all(is_polynomial_in_t(c) for _, c in f.terms())


def evaluate_rational(f: Polynomial, z: Sequence) -> Fraction:
    """Exact value at a rational point."""
    if f.is_parametric:
        raise ScalarDomainError("evaluate_rational needs a rational polynomial")
    if len(z) != f.ambient_n:
        raise AmbientMismatchError(f"point has {len(z)} coordinates, expected {f.ambient_n}")
    z = [Fraction(x) for x in z]
    total = Fraction(0)
    for e, c in f.terms():
        total += c * math.prod(x ** a for x, a in zip(z, e) if a)
    return total


def evaluate_complex(f: Polynomial, z: Sequence[complex]) -> complex:
    """
    Floating evaluation as a direct sum of monomials (approximate).
    Only defined over Q.
    """
    if f.is_parametric:
        raise ScalarDomainError("evaluate_complex needs a rational polynomial")
    if len(z) != f.ambient_n:
        raise AmbientMismatchError(f"point has {len(z)} coordinates, expected {f.ambient_n}")
    total = 0j
    for e, c in f.terms():
        term = complex(float(c))
        for x, a in zip(z, e):
            if a:
                term *= complex(x) ** a
        total += term
    return total


def lift(f: Polynomial, extra: int) -> Polynomial:
    """Embed f into n + extra variables (new variables appended last)."""
    pad = (0,) * extra
    return Polynomial(f.ambient_n + extra, {e + pad: c for e, c in f.terms()}, f.scalar_domain)


# ============================================================================
# PRINTING
# ============================================================================

def _monomial_text(exp: Exponent) -> str:
    parts = []
    for i, a in enumerate(exp, start=1):
        if a == 1:
            parts.append(f"z{i}")
        elif a > 1:
            parts.append(f"z{i}^{a}")
    return "*".join(parts)


def _term_parts(exp: Exponent, c: Scalar) -> Tuple[str, str]:
    mono = _monomial_text(exp)
    if isinstance(c, FracElement):
        if not c.denom.is_ground:
            body = format_scalar(c)
            return "+", f"{body}*{mono}" if mono else body
        coeffs = t_coefficients(c)
        if len(coeffs) == 1:
            (k, a), = coeffs.items()
            factors = []
            if abs(a) != 1 or (k == 0 and not mono):
                factors.append(str(abs(a)))
            if k:
                factors.append("t" if k == 1 else f"t^{k}")
            if mono:
                factors.append(mono)
            return ("-" if a < 0 else "+"), "*".join(factors)
        lead = coeffs[max(coeffs)]
        sign = "-" if lead < 0 else "+"
        if lead < 0:
            coeffs = {k: -a for k, a in coeffs.items()}
        body = f"({_t_poly_text(coeffs)})"
        return sign, f"{body}*{mono}" if mono else body
    mag = abs(c)
    if not mono:
        body = str(mag)
    elif mag == 1:
        body = mono
    else:
        body = f"{mag}*{mono}"
    return ("-" if c < 0 else "+"), body


def to_text(f: Polynomial) -> str:
    """Canonical text in the input grammar; parse(to_text(f)) == f."""
    if f.is_zero:
        return "0"
    return _join_signed([_term_parts(e, c) for e, c in f.terms()])


# ============================================================================
# PARSER
# ============================================================================

class _Parser:
    """
    Recursive descent over
        expr   := ['+'|'-'] term (('+'|'-') term)*
        term   := factor ('*' factor)*
        factor := primary ['^' uint]
        primary:= int ['/' uint] | 'z' uint | 't' | '(' expr ')'
    """

    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.pos = 0

    def error(self, message: str, position: Optional[int] = None):
        pos = self.pos if position is None else position
        raise PolynomialSyntaxError(f"{message} at offset {pos}", position=pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def uint(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an unsigned integer")
        return int(self.text[start:self.pos])

    def parse(self) -> Polynomial:
        if not self.text.strip():
            self.error("empty polynomial", 0)
        result = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return result

    def expr(self) -> Polynomial:
        sign = self.peek()
        negate = False
        if sign in "+-" and sign:
            self.pos += 1
            negate = sign == "-"
        result = self.term()
        if negate:
            result = -result
        while self.peek() in ("+", "-") and self.peek():
            op = self.peek()
            self.pos += 1
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def term(self) -> Polynomial:
        result = self.factor()
        while self.peek() == "*":
            self.pos += 1
            result = multiply(result, self.factor())
        return result

    def factor(self) -> Polynomial:
        base = self.primary()
        if self.peek() == "^":
            self.pos += 1
            at = self.pos
            k = self.uint()
            if k > settings.MAX_EXPONENT:
                raise ExponentCapError(f"exponent {k} exceeds the cap {settings.MAX_EXPONENT} at offset {at}",
                                       position=at)
            base = base ** k
        return base

    def primary(self) -> Polynomial:
        ch = self.peek()
        start = self.pos
        if ch.isdigit():
            num = self.uint()
            if self.peek() == "/":
                self.pos += 1
                den = self.uint()
                if den == 0:
                    self.error("zero denominator", start)
                return Polynomial.constant(self.n, Fraction(num, den))
            return Polynomial.constant(self.n, num)
        if ch == "z":
            self.pos += 1
            if not (self.pos < len(self.text) and self.text[self.pos].isdigit()):
                self.error("variable name needs an index", start)
            i = self.uint()
            if not 1 <= i <= self.n:
                raise VariableIndexError(f"variable z{i} outside 1..{self.n} at offset {start}", position=start)
            return Polynomial.variable(self.n, i)
        if ch == "t":
            self.pos += 1
            return Polynomial.constant(self.n, T)
        if ch == "(":
            self.pos += 1
            inner = self.expr()
            self.take(")")
            return inner
        if not ch:
            self.error("unexpected end of input")
        self.error(f"unexpected {ch!r}")


def parse_polynomial(text: str, n: int) -> Polynomial:
    """Parse polynomial text in z1..zn (and optionally t) into canonical form."""
    if not 1 <= n <= settings.MAX_VARIABLES:
        raise ExponentCapError(f"ambient dimension {n} outside 1..{settings.MAX_VARIABLES}")
    f = _Parser(text, n).parse()
    if "t" in text and not f.is_parametric:
        f = to_parametric(f)
    return f
