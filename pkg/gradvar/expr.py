"""Textual front end: parse polynomial expressions in x, y and print canonical forms.

Grammar (whitespace-insensitive, ASCII tokens)::

    expr   := [sign] term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' natural)?
    base   := integer | 'x' | 'y' | '(' expr ')'

A '*' is implied between an integer or ')' and a following variable or '('.
"""

import logging
from dataclasses import dataclass, field
from enum import IntEnum, auto
from math import comb
from typing import List, Optional, Tuple, Union

from sympy import Poly, Rational

from gradvar.algebra import X, Y, RatFun, leading_coefficient, poly2, squarefree_factorization

logger = logging.getLogger(__name__)

MAX_NESTING = 100
MAX_EXPONENT = 1000
MAX_DEGREE = 512
MAX_TERMS = 10_000
MAX_COEFFICIENT_BITS = 1 << 20
MAX_LITERAL_DIGITS = 4000


class ExpressionError(ValueError):
    """Base class for expression errors, optionally positioned at a byte offset."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.message = message
        self.offset = offset
        if offset is not None:
            message = f"{message} at column {offset + 1}"
        super().__init__(message)

    @property
    def column(self) -> Optional[int]:
        return None if self.offset is None else self.offset + 1


class ExpressionSyntaxError(ExpressionError):
    """The text does not match the grammar."""


class UnknownSymbol(ExpressionError):
    """An identifier other than x or y."""


class NotPolynomial(ExpressionError):
    """A variable occurs in a denominator."""


class DivisionByZero(ExpressionError):
    """A constant denominator evaluates to zero."""


class NodeKind(IntEnum):
    CONSTANT = auto()
    VARIABLE = auto()
    ADD = auto()
    SUB = auto()
    MUL = auto()
    DIV = auto()
    POW = auto()


@dataclass(frozen=True)
class ExprAst:
    """
    Expression tree node.

    ADD and MUL nodes are n-ary. A SUB node has one child and stands for its
    negation inside an ADD (or a leading minus). A DIV node has one child and
    stands for its reciprocal inside a MUL.

    Attributes
    ----------
    kind : NodeKind
    children : tuple of ExprAst
    value : Rational, optional
        Literal value of a CONSTANT node.
    name : str, optional
        Variable name of a VARIABLE node.
    exponent : int, optional
        Natural exponent of a POW node.
    offset : int
        Byte offset of the node's first token; ignored by equality.
    """

    kind: NodeKind
    children: Tuple["ExprAst", ...] = ()
    value: Optional[Rational] = None
    name: Optional[str] = None
    exponent: Optional[int] = None
    offset: int = field(default=0, compare=False)

    def summands(self) -> Tuple["ExprAst", ...]:
        """Top-level summands, with subtracted terms kept as SUB nodes."""
        if self.kind == NodeKind.ADD:
            return self.children
        return (self,)


class _Tok(IntEnum):
    NUMBER = auto()
    IDENT = auto()
    PLUS = auto()
    MINUS = auto()
    STAR = auto()
    SLASH = auto()
    CARET = auto()
    LPAREN = auto()
    RPAREN = auto()
    END = auto()


_PUNCTUATION = {
    "+": _Tok.PLUS,
    "-": _Tok.MINUS,
    "*": _Tok.STAR,
    "/": _Tok.SLASH,
    "^": _Tok.CARET,
    "(": _Tok.LPAREN,
    ")": _Tok.RPAREN,
}


@dataclass(frozen=True)
class _Token:
    kind: _Tok
    text: str
    offset: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        start = i
        if ch.isascii() and ch.isdigit():
            while i < n and text[i].isascii() and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                raise ExpressionSyntaxError("decimal literals are not supported", i)
            if i - start > MAX_LITERAL_DIGITS:
                raise ExpressionSyntaxError("integer literal too long", start)
            token = _Token(_Tok.NUMBER, text[start:i], start)
        elif ch.isascii() and (ch.isalpha() or ch == "_"):
            while i < n and text[i].isascii() and (text[i].isalnum() or text[i] == "_"):
                i += 1
            token = _Token(_Tok.IDENT, text[start:i], start)
        elif ch in _PUNCTUATION:
            i += 1
            token = _Token(_PUNCTUATION[ch], ch, start)
        elif ch == ".":
            raise ExpressionSyntaxError("decimal literals are not supported", i)
        else:
            raise ExpressionSyntaxError(f"unexpected character {ch!r}", i)
        if (
            tokens
            and tokens[-1].kind in (_Tok.NUMBER, _Tok.RPAREN)
            and token.kind in (_Tok.IDENT, _Tok.LPAREN)
        ):
            tokens.append(_Token(_Tok.STAR, "", start))
        tokens.append(token)
    tokens.append(_Token(_Tok.END, "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: List[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: _Tok, what: str) -> _Token:
        if self.current.kind != kind:
            raise ExpressionSyntaxError(f"expected {what}", self.current.offset)
        return self.advance()

    def parse(self) -> ExprAst:
        node = self.expr()
        if self.current.kind != _Tok.END:
            raise ExpressionSyntaxError(
                f"unexpected {self.current.text!r}", self.current.offset
            )
        return node

    def expr(self) -> ExprAst:
        start = self.current.offset
        children = []
        if self.current.kind in (_Tok.PLUS, _Tok.MINUS):
            sign = self.advance()
            term = self.term()
            children.append(
                ExprAst(NodeKind.SUB, (term,), offset=sign.offset)
                if sign.kind == _Tok.MINUS
                else term
            )
        else:
            children.append(self.term())
        while self.current.kind in (_Tok.PLUS, _Tok.MINUS):
            sign = self.advance()
            term = self.term()
            if sign.kind == _Tok.MINUS:
                term = ExprAst(NodeKind.SUB, (term,), offset=sign.offset)
            children.append(term)
        if len(children) == 1:
            return children[0]
        return ExprAst(NodeKind.ADD, tuple(children), offset=start)

    def term(self) -> ExprAst:
        start = self.current.offset
        children = [self.factor()]
        while self.current.kind in (_Tok.STAR, _Tok.SLASH):
            operator = self.advance()
            operand = self.factor()
            if operator.kind == _Tok.SLASH:
                if operand.kind == NodeKind.CONSTANT and operand.value == 0:
                    raise ExpressionSyntaxError("division by a zero literal", operand.offset)
                operand = ExprAst(NodeKind.DIV, (operand,), offset=operand.offset)
            children.append(operand)
        if len(children) == 1:
            return children[0]
        return ExprAst(NodeKind.MUL, tuple(children), offset=start)

    def factor(self) -> ExprAst:
        base = self.base()
        if self.current.kind != _Tok.CARET:
            return base
        self.advance()
        token = self.expect(_Tok.NUMBER, "a natural-number exponent")
        exponent = int(token.text)
        if exponent > MAX_EXPONENT:
            raise ExpressionSyntaxError(
                f"exponent exceeds {MAX_EXPONENT}", token.offset
            )
        return ExprAst(NodeKind.POW, (base,), exponent=exponent, offset=base.offset)

    def base(self) -> ExprAst:
        token = self.current
        if token.kind == _Tok.NUMBER:
            self.advance()
            return ExprAst(NodeKind.CONSTANT, value=Rational(int(token.text)), offset=token.offset)
        if token.kind == _Tok.IDENT:
            self.advance()
            if token.text not in ("x", "y"):
                raise UnknownSymbol(f"unknown symbol {token.text!r}", token.offset)
            return ExprAst(NodeKind.VARIABLE, name=token.text, offset=token.offset)
        if token.kind == _Tok.LPAREN:
            self.advance()
            self.depth += 1
            if self.depth > MAX_NESTING:
                raise ExpressionSyntaxError("parentheses nested too deeply", token.offset)
            node = self.expr()
            self.expect(_Tok.RPAREN, "')'")
            self.depth -= 1
            return node
        if token.kind == _Tok.END:
            raise ExpressionSyntaxError("unexpected end of input", token.offset)
        raise ExpressionSyntaxError(f"unexpected {token.text!r}", token.offset)


def parse_expression(text: Union[str, bytes]) -> ExprAst:
    """
    Parse an expression in x and y.

    Parameters
    ----------
    text : str or bytes
        Source text; bytes are decoded as UTF-8.

    Returns
    -------
    ExprAst
        Tree faithful to the source structure.

    Raises
    ------
    ExpressionSyntaxError
        With the 0-based offset of the offending token. Tokens are ASCII and
        the first other character is an error, so the offset counts bytes.
    UnknownSymbol
        For identifiers other than x and y.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ExpressionSyntaxError("invalid UTF-8", e.start) from None
    return _Parser(_tokenize(text)).parse()


def _degree_bound(node: ExprAst) -> int:
    if node.kind == NodeKind.CONSTANT:
        return 0
    if node.kind == NodeKind.VARIABLE:
        return 1
    if node.kind == NodeKind.ADD:
        return max(_degree_bound(child) for child in node.children)
    if node.kind == NodeKind.MUL:
        return sum(_degree_bound(child) for child in node.children)
    if node.kind == NodeKind.SUB:
        return _degree_bound(node.children[0])
    if node.kind == NodeKind.DIV:
        return 0
    return node.exponent * _degree_bound(node.children[0])


def _has_variable(node: ExprAst) -> bool:
    return node.kind == NodeKind.VARIABLE or any(_has_variable(c) for c in node.children)


def _total_degree(p: Poly) -> int:
    return 0 if p.is_zero else p.total_degree()


def _term_bound(terms: int, degree: int, exponent: int) -> int:
    """Monomials of (a polynomial with the given terms and total degree)**exponent."""
    if terms <= 1:
        return terms
    return min(comb(terms + exponent - 1, exponent), comb(degree * exponent + 2, 2))


def _check_terms(p: Poly, offset: Optional[int]) -> Poly:
    if len(p.terms()) > MAX_TERMS:
        raise ExpressionError(f"expansion exceeds {MAX_TERMS} terms", offset)
    return p


def _evaluate(node: ExprAst) -> Poly:
    if node.kind == NodeKind.CONSTANT:
        return poly2(node.value)
    if node.kind == NodeKind.VARIABLE:
        return poly2(X if node.name == "x" else Y)
    if node.kind == NodeKind.ADD:
        total = poly2(0)
        for child in node.children:
            total = total + _evaluate(child)
        return total
    if node.kind == NodeKind.SUB:
        return -_evaluate(node.children[0])
    if node.kind == NodeKind.MUL:
        product = poly2(1)
        for child in node.children:
            factor = _evaluate(child)
            bound = min(
                len(product.terms()) * len(factor.terms()),
                comb(_total_degree(product) + _total_degree(factor) + 2, 2),
            )
            if bound > MAX_TERMS:
                raise ExpressionError(f"expansion exceeds {MAX_TERMS} terms", node.offset)
            product = product * factor
        return _check_terms(product, node.offset)
    if node.kind == NodeKind.DIV:
        denominator = node.children[0]
        if _has_variable(denominator):
            raise NotPolynomial("variable in a denominator", denominator.offset)
        value = _evaluate(denominator)
        if value.is_zero:
            raise DivisionByZero("denominator evaluates to zero", denominator.offset)
        return poly2(1 / leading_coefficient(value))
    base = _evaluate(node.children[0])
    if node.exponent > 1 and not base.is_zero:
        bits = max(
            abs(c.p).bit_length() + c.q.bit_length() for c in map(Rational, base.coeffs())
        )
        if bits * node.exponent > MAX_COEFFICIENT_BITS:
            raise ExpressionError("coefficients too large", node.offset)
        if _term_bound(len(base.terms()), _total_degree(base), node.exponent) > MAX_TERMS:
            raise ExpressionError(f"expansion exceeds {MAX_TERMS} terms", node.offset)
    return _check_terms(base**node.exponent, node.offset)


def to_polynomial(ast: ExprAst) -> Poly:
    """
    Expand an expression tree into an exact polynomial in (x, y).

    Raises
    ------
    NotPolynomial
        When a variable occurs in a denominator.
    DivisionByZero
        When a constant denominator is zero.
    ExpressionError
        When the degree bound exceeds MAX_DEGREE or an expansion would
        exceed MAX_TERMS monomials.
    """
    degree = _degree_bound(ast)
    if degree > MAX_DEGREE:
        raise ExpressionError(f"degree bound {degree} exceeds {MAX_DEGREE}", ast.offset)
    return _evaluate(ast)


def parse_polynomial(text: Union[str, bytes]) -> Poly:
    return to_polynomial(parse_expression(text))


def _format_rational(value: Rational) -> str:
    if value.q == 1:
        return str(value.p)
    return f"{value.p}/{value.q}"


def _format_monomial(gens, monom) -> str:
    parts = []
    for gen, power in zip(gens, monom):
        if power == 1:
            parts.append(str(gen))
        elif power > 1:
            parts.append(f"{gen}^{power}")
    return "*".join(parts)


def _format_poly(p: Poly) -> str:
    if p.is_zero:
        return "0"
    pieces = []
    for monom, coeff in p.terms(order="grlex"):
        coeff = p.domain.to_sympy(coeff)
        monomial = _format_monomial(p.gens, monom)
        if not monomial:
            piece = _format_rational(coeff)
        elif coeff == 1:
            piece = monomial
        elif coeff == -1:
            piece = "-" + monomial
        else:
            piece = f"{_format_rational(coeff)}*{monomial}"
        if pieces and not piece.startswith("-"):
            piece = "+" + piece
        pieces.append(piece)
    return "".join(pieces)


def _format_denominator(den: Poly) -> str:
    factors = []
    for factor, multiplicity in squarefree_factorization(den).factors:
        text = _format_poly(factor)
        if len(factor.terms()) > 1:
            text = f"({text})"
        if multiplicity > 1:
            text = f"{text}^{multiplicity}"
        factors.append(text)
    if len(factors) > 1:
        return "(" + "*".join(factors) + ")"
    return factors[0]


def format_canonical(p: Union[Poly, RatFun]) -> str:
    """
    Deterministic text for a polynomial or rational function.

    Monomials are printed in descending graded-lexicographic order over the
    polynomial's generators (x before y). Rational functions print the
    numerator over the squarefree-factored denominator, e.g. "2*x/(x+1)".
    """
    if isinstance(p, RatFun):
        numerator = _format_poly(p.num)
        if p.den.is_one:
            return numerator
        if len(p.num.terms()) > 1:
            numerator = f"({numerator})"
        return f"{numerator}/{_format_denominator(p.den)}"
    return _format_poly(p)
