"""Exact polynomial and rational-function arithmetic over the rationals."""

import logging
from dataclasses import dataclass
from enum import IntEnum, auto
from typing import List, NamedTuple, Sequence, Tuple, Union

import sympy
from sympy import QQ, Poly, Rational

logger = logging.getLogger(__name__)

X, Y = sympy.symbols("x y")

Scalar = Union[int, Rational]


class AlgebraError(ValueError):
    """Base class for errors raised by the exact arithmetic layer."""


class BothZero(AlgebraError):
    """The GCD of two zero polynomials is undefined."""


class ZeroPolynomial(AlgebraError):
    """An operation that requires a nonzero polynomial received zero."""


class UnsupportedReason(IntEnum):
    """
    UnsupportedReason explains why a logarithmic-derivative split was refused.

    Attributes
    ----------
    NON_INTEGER_RESIDUE : Int
        A residue is rational but not an integer, so exp of the integral is
        algebraic rather than rational.
    NON_RATIONAL_RESIDUE : Int
        A residue lies outside the rationals.
    HIGHER_ORDER_POLE : Int
        A pole of order two or more gives a non-polynomial exponent.
    """

    NON_INTEGER_RESIDUE = auto()
    NON_RATIONAL_RESIDUE = auto()
    HIGHER_ORDER_POLE = auto()


class Unsupported(AlgebraError):
    """The input lies outside the hyperexponential class handled here."""

    def __init__(self, reason: UnsupportedReason, detail: str):
        super().__init__(f"{reason.name}: {detail}")
        self.reason = reason
        self.detail = detail


def poly(value) -> Poly:
    """Coerce a sympy expression, number or Poly into a Poly in x over QQ."""
    if isinstance(value, Poly):
        if value.gens == (X,) and value.domain == QQ:
            return value
        value = value.as_expr()
    return Poly(value, X, domain=QQ)


def poly2(value) -> Poly:
    """Coerce a sympy expression, number or Poly into a Poly in (x, y) over QQ."""
    if isinstance(value, Poly):
        if value.gens == (X, Y) and value.domain == QQ:
            return value
        value = value.as_expr()
    return Poly(value, X, Y, domain=QQ)


def to_rational(value) -> Rational:
    """Convert an int, Fraction, domain element or sympy number to a Rational."""
    if isinstance(value, sympy.Basic):
        return Rational(value)
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Rational(int(value.numerator), int(value.denominator))
    return Rational(value)


def leading_coefficient(p: Poly) -> Rational:
    return p.domain.to_sympy(p.LC())


@dataclass(frozen=True, init=False)
class RatFun:
    """
    A univariate rational function num/den in lowest terms.

    The constructor normalizes its arguments: gcd(num, den) = 1 and den is
    monic. A zero numerator is stored as 0/1.
    """

    num: Poly
    den: Poly

    def __init__(self, num, den=1):
        num, den = poly(num), poly(den)
        if den.is_zero:
            raise ZeroPolynomial("rational function with zero denominator")
        common = num.gcd(den)
        if not common.is_one:
            num, den = num.exquo(common), den.exquo(common)
        lc = den.LC()
        if lc != den.domain.one:
            num, den = num.quo_ground(lc), den.monic()
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def of(cls, value) -> "RatFun":
        if isinstance(value, RatFun):
            return value
        return cls(value)

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_polynomial(self) -> bool:
        return self.den.is_one

    def __add__(self, other):
        other = RatFun.of(other)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RatFun.of(other))

    def __rsub__(self, other):
        return RatFun.of(other) - self

    def __mul__(self, other):
        other = RatFun.of(other)
        return RatFun(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RatFun.of(other)
        if other.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFun(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return RatFun.of(other) / self

    def __pow__(self, exponent: int):
        if exponent < 0:
            return RatFun(1) / RatFun(self.num**-exponent, self.den**-exponent)
        return RatFun(self.num**exponent, self.den**exponent)

    def diff(self) -> "RatFun":
        return RatFun(
            self.num.diff(X) * self.den - self.num * self.den.diff(X), self.den**2
        )

    def __call__(self, value) -> Rational:
        return self.num.eval(value) / self.den.eval(value)

    def as_expr(self):
        return self.num.as_expr() / self.den.as_expr()


class SquarefreeFactorization(NamedTuple):
    """p = unit * prod(f**m for f, m in factors)."""

    unit: Rational
    factors: List[Tuple[Poly, int]]


class LogDerivSplit(NamedTuple):
    """
    beta = g' + sum(n * f'/f for f, n in factors).

    Attributes
    ----------
    g : Poly
        Antiderivative of the polynomial part, with zero constant term.
    factors : tuple of (Poly, int)
        Monic squarefree factors with their nonzero integer residues.
    """

    g: Poly
    factors: Tuple[Tuple[Poly, int], ...]


def derivative(p: Poly, var="x") -> Poly:
    """
    Formal partial derivative of a bivariate polynomial.

    Parameters
    ----------
    p : Poly
        Polynomial in (x, y).
    var : {"x", "y"} or Symbol
        Differentiation variable.
    """
    symbol = {"x": X, "y": Y}.get(var, var)
    if symbol not in (X, Y):
        raise ValueError(f"unknown differentiation variable {var!r}")
    return poly2(p).diff(symbol)


def substitute_y(p: Poly, value: Scalar) -> Poly:
    """Exact restriction p(x, value) as a univariate polynomial in x."""
    return poly(poly2(p).as_expr().subs(Y, to_rational(value)))


def gcd(a: Poly, b: Poly) -> Poly:
    """Monic greatest common divisor of two univariate polynomials."""
    a, b = poly(a), poly(b)
    if a.is_zero and b.is_zero:
        raise BothZero("gcd(0, 0) is undefined")
    return a.gcd(b).monic()


def squarefree_factorization(p: Poly) -> SquarefreeFactorization:
    """
    Squarefree decomposition with monic, pairwise coprime factors.

    Multiplicities are strictly increasing and the leading coefficient is
    returned separately as the unit.
    """
    p = poly(p)
    if p.is_zero:
        raise ZeroPolynomial("squarefree factorization of the zero polynomial")
    coeff, pieces = p.sqf_list()
    unit = p.domain.to_sympy(coeff)
    factors = []
    for factor, multiplicity in pieces:
        lc = leading_coefficient(factor)
        unit *= lc**multiplicity
        factors.append((poly(factor.monic()), multiplicity))
    factors.sort(key=lambda item: item[1])
    return SquarefreeFactorization(unit, factors)


def rational_roots(p: Poly) -> Tuple[List[Rational], int]:
    """
    Distinct rational roots of a nonzero univariate polynomial.

    Returns
    -------
    roots : list of Rational
        Sorted rational roots.
    unresolved : int
        Total degree of the irreducible factors with no rational root.
    """
    if p.is_zero:
        raise ZeroPolynomial("roots of the zero polynomial")
    roots, unresolved = set(), 0
    for factor, _ in p.factor_list()[1]:
        if factor.degree() == 1:
            a, b = factor.all_coeffs()
            roots.add(-Rational(b) / Rational(a))
        else:
            unresolved += factor.degree()
    return sorted(roots), unresolved


def _split_coprime(numerator: Poly, parts: Sequence[Poly]) -> List[Poly]:
    """Numerators r_i with numerator/prod(parts) = sum r_i/parts[i], deg r_i < deg parts[i]."""
    if len(parts) == 1:
        return [numerator.rem(parts[0])]
    head, rest = parts[0], parts[1:]
    tail = rest[0]
    for part in rest[1:]:
        tail = tail * part
    # s*head + t*tail = 1
    s, t, h = head.gcdex(tail)
    if not h.is_one:
        raise AlgebraError("partial fraction split over non-coprime factors")
    head_num = (numerator * t).rem(head)
    tail_num = (numerator * s).rem(tail)
    return [head_num] + _split_coprime(tail_num, rest)


def partial_fractions(f: RatFun) -> Tuple[Poly, List[Tuple[Poly, int, Poly]]]:
    """
    Squarefree partial-fraction expansion.

    Parameters
    ----------
    f : RatFun
        The rational function to expand.

    Returns
    -------
    polynomial_part : Poly
    terms : list of (factor, order, numerator)
        f = polynomial_part + sum(numerator / factor**order) with
        deg numerator < deg factor. Zero numerators are omitted.
    """
    f = RatFun.of(f)
    quotient, remainder = f.num.div(f.den)
    if f.den.is_one or remainder.is_zero:
        return quotient, []
    _, factors = squarefree_factorization(f.den)
    powers = [factor**order for factor, order in factors]
    numerators = _split_coprime(remainder, powers)
    terms = []
    for (factor, order), numerator in zip(factors, numerators):
        # f-adic expansion: numerator = sum_j c_j factor**j
        digits = []
        for _ in range(order):
            numerator, digit = numerator.div(factor)
            digits.append(digit)
        for j, digit in enumerate(digits):
            if not digit.is_zero:
                terms.append((factor, order - j, digit))
    terms.sort(key=lambda term: (term[1], str(term[0].as_expr())))
    return quotient, terms


def recombine(polynomial_part: Poly, terms: Sequence[Tuple[Poly, int, Poly]]) -> RatFun:
    """Inverse of partial_fractions."""
    total = RatFun(polynomial_part)
    for factor, order, numerator in terms:
        total = total + RatFun(numerator, factor**order)
    return total


def _residues(factor: Poly, numerator: Poly) -> List[Tuple[Rational, Poly]]:
    """Residues of numerator/factor at the roots of a squarefree factor."""
    dfactor = factor.diff(X)
    if factor.degree() == 1:
        return [(leading_coefficient(numerator) / leading_coefficient(dfactor), factor)]
    z = sympy.Dummy("z")
    resultant = sympy.resultant(
        factor.as_expr(), numerator.as_expr() - z * dfactor.as_expr(), X
    )
    resultant = Poly(resultant, z, domain=QQ)
    roots, unresolved = rational_roots(resultant)
    if unresolved:
        raise Unsupported(
            UnsupportedReason.NON_RATIONAL_RESIDUE,
            f"residues of {numerator.as_expr()}/({factor.as_expr()}) are not all rational",
        )
    pieces = []
    for root in roots:
        piece = gcd(factor, numerator - dfactor.mul_ground(root))
        if piece.degree() > 0:
            pieces.append((root, piece))
    return pieces


def logderiv_split(beta: RatFun) -> LogDerivSplit:
    """
    Write beta as g' + sum n_i f_i'/f_i with g polynomial and integers n_i.

    Raises
    ------
    Unsupported
        When beta has a pole of order two or more, or a residue that is not
        an integer.
    """
    beta = RatFun.of(beta)
    polynomial_part, terms = partial_fractions(beta)
    factors = []
    for factor, order, numerator in terms:
        if order > 1:
            raise Unsupported(
                UnsupportedReason.HIGHER_ORDER_POLE,
                f"pole of order {order} at the roots of {factor.as_expr()}",
            )
        for residue, piece in _residues(factor, numerator):
            if not residue.is_integer:
                raise Unsupported(
                    UnsupportedReason.NON_INTEGER_RESIDUE,
                    f"residue {residue} at the roots of {piece.as_expr()}",
                )
            factors.append((piece, int(residue)))
    g = polynomial_part.integrate()
    logger.debug("log-derivative split: g=%s factors=%s", g.as_expr(), factors)
    return LogDerivSplit(poly(g), tuple(factors))


def laurent_coefficients(f: RatFun, alpha: Scalar, count: int) -> Tuple[int, List[Rational]]:
    """
    Leading Laurent coefficients of f at a rational point.

    Returns
    -------
    valuation : int
        Order of f at alpha (negative for a pole).
    coefficients : list of Rational
        c_v, c_{v+1}, ..., count values, with f = sum c_k (x - alpha)**k.
    """
    f = RatFun.of(f)
    if f.is_zero:
        raise ZeroPolynomial("Laurent expansion of zero")
    alpha = to_rational(alpha)

    def low_first(p):
        coeffs = [Rational(c) for c in reversed(p.shift(alpha).all_coeffs())]
        order = next(i for i, c in enumerate(coeffs) if c != 0)
        return order, coeffs[order:]

    num_order, num = low_first(f.num)
    den_order, den = low_first(f.den)
    series = []
    for k in range(count):
        acc = num[k] if k < len(num) else Rational(0)
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * series[k - j]
        series.append(acc / den[0])
    return num_order - den_order, series


def laurent_principal_part(f: RatFun, alpha: Scalar, order: int) -> List[Rational]:
    """
    Coefficients of (x - alpha)**-order, ..., (x - alpha)**-1 in the Laurent
    expansion of f at alpha; zero where f has a pole of lower order.
    """
    if order < 1:
        raise ValueError(f"order must be at least 1, got {order}")
    valuation, coefficients = laurent_coefficients(f, alpha, order)
    part = []
    for exponent in range(-order, 0):
        k = exponent - valuation
        part.append(coefficients[k] if 0 <= k < order else Rational(0))
    return part
