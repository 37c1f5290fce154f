"""Harmonic polynomial background potentials.

Polynomials are stored as a map from exponent triples ``(a, b, c)`` to exact
rational coefficients, so the harmonicity check is an exact identity on
coefficients.  Evaluation converts the coefficients to doubles once.
"""

import math
import re
from fractions import Fraction

import numpy as np

from ._validation import check_points
from .errors import NonHarmonic, ParseError

MAX_DEGREE = 12
VARIABLES = ("x", "y", "z")


def _clean(terms):
    return {k: v for k, v in terms.items() if v != 0}


def _add(a, b, sign=1):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + sign * v
    return _clean(out)


def _mul(a, b):
    out = {}
    for (a1, b1, c1), u in a.items():
        for (a2, b2, c2), v in b.items():
            k = (a1 + a2, b1 + b2, c1 + c2)
            out[k] = out.get(k, 0) + u * v
    return _clean(out)


def _degree(terms):
    return max((sum(k) for k in terms), default=0)


def _laplacian_terms(terms):
    out = {}
    for (a, b, c), v in terms.items():
        if a >= 2:
            k = (a - 2, b, c)
            out[k] = out.get(k, 0) + a * (a - 1) * v
        if b >= 2:
            k = (a, b - 2, c)
            out[k] = out.get(k, 0) + b * (b - 1) * v
        if c >= 2:
            k = (a, b, c - 2)
            out[k] = out.get(k, 0) + c * (c - 1) * v
    return _clean(out)


def _grlex_key(k):
    return (-sum(k), tuple(-e for e in k))


def _format_coefficient(v):
    """Exact decimal text for a rational with a terminating expansion."""
    v = Fraction(v)
    den = v.denominator
    k = 0
    while den % 2 == 0 or den % 5 == 0:
        if den % 2 == 0:
            den //= 2
        if den % 5 == 0:
            den //= 5
        k += 1
    if den != 1:
        # no finite decimal; keep it exact as a parenthesized ratio
        return f"({abs(v.numerator)}/{v.denominator})" if v > 0 else f"-({-v.numerator}/{v.denominator})"
    scaled = v * 10**k
    assert scaled.denominator == 1
    digits = str(abs(scaled.numerator)).rjust(k + 1, "0")
    text = digits if k == 0 else digits[:-k] + "." + digits[-k:]
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return ("-" if v < 0 else "") + text


def _format_monomial(k):
    parts = []
    for name, e in zip(VARIABLES, k):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_terms(terms):
    if not terms:
        return "0"
    out = []
    for k in sorted(terms, key=_grlex_key):
        v = Fraction(terms[k])
        mono = _format_monomial(k)
        mag = _format_coefficient(abs(v))
        if mono and mag == "1":
            body = mono
        elif mono:
            body = f"{mag}*{mono}"
        else:
            body = mag
        if not out:
            out.append(("-" if v < 0 else "") + body)
        else:
            out.append(("- " if v < 0 else "+ ") + body)
    return " ".join(out)


class Polynomial:
    """Plain (not necessarily harmonic) polynomial in x, y, z."""

    def __init__(self, terms):
        terms = {tuple(int(e) for e in k): Fraction(v) for k, v in dict(terms).items()}
        for k in terms:
            if len(k) != 3 or min(k) < 0:
                raise ValueError(f"bad exponent triple {k}")
        self.terms = _clean(terms)

    @property
    def degree(self):
        return _degree(self.terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __str__(self):
        return format_terms(self.terms)

    def __repr__(self):
        return f"{type(self).__name__}({str(self)!r})"


def poly_laplacian(poly):
    """Exact Laplacian via coefficient shifts."""
    terms = poly.terms if isinstance(poly, Polynomial) else dict(poly)
    return Polynomial(_laplacian_terms({k: Fraction(v) for k, v in terms.items()}))


class HarmonicPolynomial(Polynomial):
    """Polynomial with identically vanishing Laplacian.

    Construction fails with :class:`NonHarmonic` otherwise.
    """

    def __init__(self, terms):
        super().__init__(terms)
        if self.degree > MAX_DEGREE:
            raise ValueError(f"degree {self.degree} exceeds the maximum {MAX_DEGREE}")
        lap = poly_laplacian(self)
        if not lap.is_zero():
            raise NonHarmonic(lap)
        keys = sorted(self.terms, key=_grlex_key)
        self._exponents = np.array(keys, dtype=int).reshape(-1, 3)
        self._coeffs = np.array([float(self.terms[k]) for k in keys])

    @classmethod
    def parse(cls, text):
        return parse_polynomial(text)

    def __call__(self, X):
        return eval_H(self, X)

    def __add__(self, other):
        return HarmonicPolynomial(_add(self.terms, other.terms))

    def __sub__(self, other):
        return HarmonicPolynomial(_add(self.terms, other.terms, sign=-1))

    def __mul__(self, scalar):
        s = Fraction(scalar)
        return HarmonicPolynomial({k: v * s for k, v in self.terms.items()})

    __rmul__ = __mul__

    def axis_coefficients(self):
        """Coefficients ``a_k`` of ``t -> H(t, 0, 0) = sum_k a_k t^k`` (as floats)."""
        out = np.zeros(self.degree + 1)
        for (a, b, c), v in self.terms.items():
            if b == 0 and c == 0:
                out[a] += float(v)
        return out

    def odd_axis_coefficients(self):
        a = self.axis_coefficients()
        a[0::2] = 0.0
        return a

    def substitute_affine(self, scale=1.0, shift=(0.0, 0.0, 0.0)):
        """Return ``x -> H(scale * x + shift)``; harmonicity is preserved."""
        s = Fraction(scale)
        shift = [Fraction(v) for v in shift]
        lin = []
        for i in range(3):
            e = [0, 0, 0]
            e[i] = 1
            lin.append(_clean({tuple(e): s, (0, 0, 0): shift[i]}))
        out = {}
        for (a, b, c), v in self.terms.items():
            term = {(0, 0, 0): v}
            for factor, power in zip(lin, (a, b, c)):
                for _ in range(power):
                    term = _mul(term, factor)
            out = _add(out, term)
        return HarmonicPolynomial(out)


def _power_tables(X, degree):
    # P[i][k] = X[:, i] ** k, k = 0..degree
    n = X.shape[0]
    P = np.empty((3, degree + 1, n))
    P[:, 0, :] = 1.0
    for k in range(1, degree + 1):
        P[:, k, :] = P[:, k - 1, :] * X.T
    return P


def eval_H(poly, X):
    """Evaluate at a point (returns float) or at an (n, 3) array of points."""
    single = np.ndim(X) == 1
    X = check_points(X)
    if not poly.terms:
        out = np.zeros(X.shape[0])
    else:
        P = _power_tables(X, poly.degree)
        e = poly._exponents
        mono = P[0, e[:, 0]] * P[1, e[:, 1]] * P[2, e[:, 2]]
        out = poly._coeffs @ mono
    return float(out[0]) if single else out


def grad_H(poly, X):
    """Analytic gradient; shape (3,) for one point or (n, 3)."""
    single = np.ndim(X) == 1
    X = check_points(X)
    G = np.zeros_like(X)
    if poly.terms:
        P = _power_tables(X, poly.degree)
        e = poly._exponents
        c = poly._coeffs
        for i in range(3):
            mask = e[:, i] > 0
            if not mask.any():
                continue
            ee = e[mask].copy()
            cc = c[mask] * ee[:, i]
            ee[:, i] -= 1
            mono = P[0, ee[:, 0]] * P[1, ee[:, 1]] * P[2, ee[:, 2]]
            G[:, i] = cc @ mono
    return G[0] if single else G


# --- parser -------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<var>[xyz])|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].strip()[:1]!r} at position {pos}")
        kind = m.lastgroup
        val = m.group(kind)
        if kind == "op" and val == "**":
            val = "^"
        tokens.append((kind, val, m.start(kind)))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    # expr   := term (('+'|'-') term)*
    # term   := unary (('*'|'/') unary)*   divisors must be nonzero constants
    # unary  := ('+'|'-') unary | power
    # power  := atom ('^' integer)?
    # atom   := number | variable | '(' expr ')'

    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg):
        pos = self.peek()[2]
        raise ParseError(f"{msg} at position {pos} in {self.text!r}")

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        out = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return out

    def expr(self):
        acc = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            acc = _add(acc, rhs, sign=1 if op == "+" else -1)
        return acc

    def term(self):
        acc = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            if op == "/":
                if any(k != (0, 0, 0) for k in rhs):
                    self.fail("divisor must be a constant")
                if not rhs:
                    self.fail("division by zero")
                rhs = {(0, 0, 0): 1 / rhs[(0, 0, 0)]}
            acc = _mul(acc, rhs)
            if _degree(acc) > MAX_DEGREE:
                self.fail(f"degree exceeds {MAX_DEGREE}")
        return acc

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            val = self.unary()
            return val if op == "+" else {k: -v for k, v in val.items()}
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, val, _ = self.peek()
            if kind != "num" or not val.isdigit():
                self.fail("exponent must be a non-negative integer literal")
            self.take()
            n = int(val)
            if n * _degree(base) > MAX_DEGREE:
                self.fail(f"degree exceeds {MAX_DEGREE}")
            out = {(0, 0, 0): Fraction(1)}
            for _ in range(n):
                out = _mul(out, base)
            return out
        return base

    def atom(self):
        kind, val, _ = self.peek()
        if kind == "num":
            self.take()
            return _clean({(0, 0, 0): Fraction(val)})
        if kind == "var":
            self.take()
            e = [0, 0, 0]
            e[VARIABLES.index(val)] = 1
            return {tuple(e): Fraction(1)}
        if kind == "op" and val == "(":
            self.take()
            inner = self.expr()
            if self.peek()[1] != ")":
                self.fail("missing ')'")
            self.take()
            return inner
        if kind == "end":
            self.fail("unexpected end of expression")
        self.fail(f"unexpected {val!r}")


def parse_expression(text):
    """Parse and expand ``text`` without the harmonicity gate."""
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}")
    return Polynomial(_Parser(text).parse())


def parse_polynomial(text):
    """Parse ``text`` into a :class:`HarmonicPolynomial`.

    >>> str(parse_polynomial("x^3 - 3*x*y^2"))
    'x^3 - 3*x*y^2'
    """
    return HarmonicPolynomial(parse_expression(text).terms)


def format_polynomial(poly):
    """Canonical text in graded lexicographic monomial order."""
    return format_terms(poly.terms)


def lipschitz_on_axis(poly, half_width, odd_only=False):
    """Bound on ``|d/dt H(t,0,0)|`` for ``|t| <= half_width``.

    With ``odd_only`` the bound covers just the odd part of the axis trace.
    """
    a = poly.odd_axis_coefficients() if odd_only else poly.axis_coefficients()
    k = np.arange(len(a))
    return float(np.sum(np.abs(a[1:]) * k[1:] * half_width ** (k[1:] - 1))) if len(a) > 1 else 0.0


def harmonic_basis(degree):
    """Real and imaginary parts of ``(x + i y)^k``-type harmonics up to ``degree``.

    Integer-coefficient harmonic polynomials, useful for building random
    backgrounds with exact coefficients.
    """
    out = []
    for k in range(1, degree + 1):
        # (x + i y)^k, (x + i z)^k, (y + i z)^k
        for u, v in ((0, 1), (0, 2), (1, 2)):
            re_t, im_t = {}, {}
            for j in range(k + 1):
                e = [0, 0, 0]
                e[u] = k - j
                e[v] = j
                coef = math.comb(k, j)
                # i^j
                if j % 4 == 0:
                    re_t[tuple(e)] = coef
                elif j % 4 == 1:
                    im_t[tuple(e)] = coef
                elif j % 4 == 2:
                    re_t[tuple(e)] = -coef
                else:
                    im_t[tuple(e)] = -coef
            for t in (re_t, im_t):
                if t:
                    hp = HarmonicPolynomial(t)
                    if hp not in out:
                        out.append(hp)
    return out
