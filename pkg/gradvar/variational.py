"""Invariant lines of planar polynomial fields and the variational equations along them."""

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple, Union

import sympy
from sympy import QQ, Poly, Rational, groebner

from gradvar.algebra import (
    X,
    Y,
    RatFun,
    derivative,
    gcd,
    poly,
    poly2,
    rational_roots,
    substitute_y,
    to_rational,
)
from gradvar.expr import ExpressionError, ExpressionSyntaxError, format_canonical, parse_polynomial

logger = logging.getLogger(__name__)


class FieldError(ValueError):
    """Base class for errors about planar fields and their invariant lines."""


class ConstantPotential(FieldError):
    """A constant potential has a vanishing gradient."""


class NotInvariant(FieldError):
    """The line is not invariant under the field."""


class LineOfCriticalPoints(FieldError):
    """The field vanishes identically along the line."""


class InfiniteFamily(FieldError):
    """Infinitely many invariant lines exist."""

    def __init__(self, message: str, family: str = ""):
        super().__init__(message)
        self.family = family


class NoInvariantLine(FieldError):
    """No invariant line with rational coefficients was found."""


@dataclass(frozen=True)
class PlanarField:
    """
    The polynomial vector field x' = P(x, y), y' = Q(x, y).

    Attributes
    ----------
    P : Poly
        First component, a polynomial in (x, y).
    Q : Poly
        Second component, a polynomial in (x, y).
    """

    P: Poly
    Q: Poly

    def __post_init__(self):
        object.__setattr__(self, "P", poly2(self.P))
        object.__setattr__(self, "Q", poly2(self.Q))
        if self.P.is_zero and self.Q.is_zero:
            raise FieldError("the zero field has no dynamics")

    @property
    def is_degenerate(self) -> bool:
        """True when one component vanishes, so every parallel line is invariant."""
        return self.P.is_zero or self.Q.is_zero

    def __str__(self):
        return f"({format_canonical(self.P)}, {format_canonical(self.Q)})"


@dataclass(frozen=True, order=True)
class InvariantLine:
    """
    The line a*x + b*y + c = 0, normalized so the first nonzero of (a, b) is 1.
    """

    a: Rational
    b: Rational
    c: Rational

    def __post_init__(self):
        a, b, c = (to_rational(v) for v in (self.a, self.b, self.c))
        if a == 0 and b == 0:
            raise ValueError("a line needs (a, b) != (0, 0)")
        scale = a if a != 0 else b
        object.__setattr__(self, "a", a / scale)
        object.__setattr__(self, "b", b / scale)
        object.__setattr__(self, "c", c / scale)

    def polynomial(self) -> Poly:
        return poly2(self.a * X + self.b * Y + self.c)

    def __str__(self):
        return f"{format_canonical(self.polynomial())}=0"

    def to_dict(self) -> dict:
        return {
            "a": str(self.a),
            "b": str(self.b),
            "c": str(self.c),
            "equation": str(self),
        }


Y_ZERO_LINE = InvariantLine(0, 1, 0)


@dataclass(frozen=True)
class VariationalSystem:
    """Coefficients of the first and second variational equations along a line."""

    line: InvariantLine
    beta1: RatFun
    beta2: RatFun


@dataclass(frozen=True)
class LVE2System:
    """
    The triangular system chi1' = a*chi1, chi2' = b*chi2 + c*chi1.

    Primes are d/dx along the foliation dy/dx = Q/P.
    """

    chi1_coefficient: RatFun
    chi2_coefficient: RatFun
    coupling: RatFun

    def matrix(self) -> Tuple[Tuple[RatFun, RatFun], Tuple[RatFun, RatFun]]:
        zero = RatFun(0)
        return (
            (self.chi1_coefficient, zero),
            (self.coupling, self.chi2_coefficient),
        )

    def __str__(self):
        def product(coefficient, name):
            if coefficient.is_zero:
                return "0"
            return f"({format_canonical(coefficient)})*{name}"

        second = [
            part
            for part in (
                product(self.chi2_coefficient, "chi2"),
                product(self.coupling, "chi1"),
            )
            if part != "0"
        ]
        return (
            f"chi1' = {product(self.chi1_coefficient, 'chi1')}; "
            f"chi2' = {' + '.join(second) or '0'}"
        )


class LineSearch(NamedTuple):
    """
    Result of the invariant-line search.

    Attributes
    ----------
    lines : list of InvariantLine
        Lines with rational coefficients, sorted.
    unresolved : int
        Degree count of solutions that are not rational.
    infinite : bool
        True when a positive-dimensional family of lines is invariant.
    family : str
        Description of the infinite family, if any.
    """

    lines: List[InvariantLine]
    unresolved: int = 0
    infinite: bool = False
    family: str = ""


def gradient_field(F: Poly) -> PlanarField:
    """(P, Q) = (dF/dx, dF/dy); raises ConstantPotential for constant F."""
    F = poly2(F)
    if F.total_degree() <= 0:
        raise ConstantPotential("the potential is constant")
    return PlanarField(derivative(F, "x"), derivative(F, "y"))


def parse_field(text: Union[str, bytes]) -> PlanarField:
    """
    Parse "P;Q" into a PlanarField.

    Error offsets refer to the whole text, so an error in Q is shifted by
    len(P) + 1.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ExpressionSyntaxError("invalid UTF-8", e.start) from None
    parts = text.split(";")
    if len(parts) != 2:
        offset = len(text) if len(parts) < 2 else len(parts[0]) + len(parts[1]) + 1
        raise ExpressionSyntaxError("a field is written as 'P;Q'", offset)
    components, shift = [], 0
    for part in parts:
        try:
            components.append(parse_polynomial(part))
        except ExpressionError as e:
            offset = None if e.offset is None else e.offset + shift
            raise type(e)(e.message, offset) from None
        shift += len(part) + 1
    return PlanarField(*components)


def foliation_slope(field: PlanarField) -> Tuple[Poly, Poly]:
    """Numerator and denominator of dy/dx = Q/P."""
    return field.Q, field.P


def invariance_remainder(field: PlanarField, line: InvariantLine) -> Poly:
    """
    a*P + b*Q reduced modulo the line polynomial.

    The result is zero exactly when the line is invariant.
    """
    combination = field.P * line.a + field.Q * line.b
    expr = combination.as_expr()
    if line.a != 0:
        expr = expr.subs(X, -line.b * Y - line.c)
    else:
        expr = expr.subs(Y, -line.c)
    return poly2(sympy.expand(expr))


def _vertical_lines(field: PlanarField) -> Tuple[List[InvariantLine], int, bool]:
    # x + c = 0 is invariant iff P(-c, y) vanishes identically
    coefficients = [
        poly(coefficient)
        for coefficient in Poly(field.P.as_expr(), Y).all_coeffs()
        if coefficient != 0
    ]
    if not coefficients:
        return [], 0, True
    common = coefficients[0]
    for coefficient in coefficients[1:]:
        common = gcd(common, coefficient)
    if common.degree() <= 0:
        return [], 0, False
    roots, unresolved = rational_roots(common)
    return [InvariantLine(1, 0, -root) for root in roots], unresolved, False


def _slanted_lines(field: PlanarField) -> Tuple[List[InvariantLine], int, bool]:
    # a*x + y + c = 0 is invariant iff (a*P + Q)(x, -a*x - c) vanishes in x
    A, C = sympy.symbols("A C")
    restricted = sympy.expand(
        (A * field.P.as_expr() + field.Q.as_expr()).subs(Y, -A * X - C)
    )
    conditions = [
        condition
        for condition in Poly(restricted, X).all_coeffs()
        if sympy.expand(condition) != 0
    ]
    if not conditions:
        return [], 0, True
    basis = groebner(conditions, A, C, order="lex", domain=QQ)
    if basis.exprs == [1]:
        return [], 0, False
    if not basis.is_zero_dimensional:
        return [], 0, True

    eliminated = [p for p in basis.polys if p.degree(A) <= 0]
    c_poly = Poly(eliminated[0].as_expr(), C, domain=QQ)
    for p in eliminated[1:]:
        c_poly = c_poly.gcd(Poly(p.as_expr(), C, domain=QQ))
    c_roots, unresolved = rational_roots(c_poly)

    lines = []
    for c0 in c_roots:
        candidates = [
            Poly(p.as_expr().subs(C, c0), A, domain=QQ) for p in basis.polys
        ]
        candidates = [p for p in candidates if not p.is_zero]
        if not candidates:
            continue
        a_poly = candidates[0]
        for p in candidates[1:]:
            a_poly = a_poly.gcd(p)
        a_roots, a_unresolved = rational_roots(a_poly)
        unresolved += a_unresolved
        lines.extend(InvariantLine(a0, 1, c0) for a0 in a_roots)
    return lines, unresolved, False


def find_invariant_lines(field: PlanarField) -> LineSearch:
    """
    All invariant lines with rational coefficients.

    Vertical lines come from the common rational roots of the x-coefficients
    of P viewed as a polynomial in y. The remaining lines y = -a*x - c come
    from a lex Groebner basis of the conditions on (a, c).
    """
    vertical, vertical_unresolved, vertical_infinite = _vertical_lines(field)
    slanted, slanted_unresolved, slanted_infinite = _slanted_lines(field)
    if vertical_infinite or slanted_infinite:
        family = "vertical lines" if vertical_infinite else "non-vertical lines"
        return LineSearch([], 0, True, family)
    lines = sorted(set(vertical) | set(slanted))
    for line in lines:
        if not invariance_remainder(field, line).is_zero:
            raise AssertionError(f"line {line} failed the invariance check")
    logger.debug("invariant lines of %s: %s", field, [str(line) for line in lines])
    return LineSearch(lines, vertical_unresolved + slanted_unresolved)


def invariant_lines(field: PlanarField) -> List[InvariantLine]:
    """
    Invariant lines with rational coefficients.

    Raises
    ------
    InfiniteFamily
        When infinitely many lines are invariant, e.g. for radial fields.
    """
    search = find_invariant_lines(field)
    if search.infinite:
        raise InfiniteFamily(
            f"infinitely many invariant lines for {field} ({search.family})",
            search.family,
        )
    if search.unresolved:
        logger.info(
            "%d invariant-line condition(s) have no rational solution", search.unresolved
        )
    return search.lines


def normalize_to_y0(field: PlanarField, line: InvariantLine) -> PlanarField:
    """
    Push the field forward by a rational affine map taking the line to y = 0.

    For b != 0 the map is (u, v) = (x, (a*x + c)/b + y); for vertical lines it is
    (u, v) = (y, x + c), which swaps coordinates and components.
    """
    if not invariance_remainder(field, line).is_zero:
        raise NotInvariant(f"{line} is not invariant for {field}")
    P, Q = field.P.as_expr(), field.Q.as_expr()
    if line.b != 0:
        slope, offset = line.a / line.b, line.c / line.b
        substitution = {Y: Y - slope * X - offset}
        new_P = P.subs(substitution, simultaneous=True)
        new_Q = (slope * P + Q).subs(substitution, simultaneous=True)
    else:
        substitution = {X: Y - line.c, Y: X}
        new_P = Q.subs(substitution, simultaneous=True)
        new_Q = P.subs(substitution, simultaneous=True)
    return PlanarField(poly2(sympy.expand(new_P)), poly2(sympy.expand(new_Q)))


def variational_coefficients(
    field: PlanarField, line: Optional[InvariantLine] = None
) -> VariationalSystem:
    """
    Coefficients of the variational equations of dy/dx = Q/P along y = 0.

    Parameters
    ----------
    field : PlanarField
        A field with Q(x, 0) = 0 and P(x, 0) != 0.
    line : InvariantLine, optional
        The original line, recorded on the result; defaults to y = 0.

    Returns
    -------
    VariationalSystem
        beta1 = Q_y/P and beta2 = (Q_yy - 2*Q_y*P_y/P)/P, restricted to y = 0.
    """
    if not substitute_y(field.Q, 0).is_zero:
        raise NotInvariant("Q(x, 0) does not vanish")
    p0 = substitute_y(field.P, 0)
    if p0.is_zero:
        raise LineOfCriticalPoints("P(x, 0) vanishes: y = 0 consists of critical points")
    q_y = derivative(field.Q, "y")
    q_y0 = substitute_y(q_y, 0)
    q_yy0 = substitute_y(derivative(q_y, "y"), 0)
    p_y0 = substitute_y(derivative(field.P, "y"), 0)
    beta1 = RatFun(q_y0, p0)
    beta2 = (RatFun(q_yy0) - RatFun(q_y0 * p_y0, p0) * 2) / RatFun(p0)
    return VariationalSystem(line or Y_ZERO_LINE, beta1, beta2)


def lve1_system(vs: VariationalSystem) -> RatFun:
    """Coefficient of the first variational equation xi' = beta1*xi."""
    return vs.beta1


def lve2_system(vs: VariationalSystem) -> LVE2System:
    return LVE2System(vs.beta1 * 2, vs.beta1, vs.beta2)
