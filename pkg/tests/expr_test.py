import numpy as np
import pytest
from sympy import Rational

from gradvar.algebra import X, Y, RatFun, poly2
from gradvar.expr import (
    DivisionByZero,
    ExpressionError,
    ExpressionSyntaxError,
    NodeKind,
    NotPolynomial,
    UnknownSymbol,
    format_canonical,
    parse_expression,
    parse_polynomial,
    to_polynomial,
)

EXAMPLE = "1/3*x^3+1/2*x^2+(x+y)^2*y^2+1/4*y^4"

rng = np.random.default_rng(20240611)


def random_poly2(degree=4, terms=5):
    p = 0
    for _ in range(terms):
        i, j = rng.integers(0, degree + 1, size=2)
        numerator = int(rng.integers(-20, 21))
        denominator = int(rng.integers(1, 7))
        p += Rational(numerator, denominator) * X**i * Y**j
    return poly2(p)


def test_example_has_four_summands():
    ast = parse_expression(EXAMPLE)
    assert ast.kind == NodeKind.ADD
    assert len(ast.summands()) == 4


def test_zero_constant():
    ast = parse_expression("0")
    assert ast.kind == NodeKind.CONSTANT
    assert ast.value == 0
    assert to_polynomial(ast).is_zero


def test_unbalanced_exponent_is_positioned():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("x^(2")
    assert info.value.offset == 2
    assert info.value.column == 3


def test_example_expands():
    expected = poly2(
        Rational(1, 3) * X**3
        + Rational(1, 2) * X**2
        + X**2 * Y**2
        + 2 * X * Y**3
        + Rational(5, 4) * Y**4
    )
    assert parse_polynomial(EXAMPLE) == expected


def test_identity_expands_to_zero():
    assert parse_polynomial("(x+y)^2 - x^2 - 2*x*y - y^2").is_zero


def test_variable_in_denominator():
    with pytest.raises(NotPolynomial):
        parse_polynomial("1/x")
    with pytest.raises(NotPolynomial):
        parse_polynomial("x/(y-y)")


def test_constant_denominators():
    assert parse_polynomial("x/(2*3)") == poly2(X / 6)
    assert parse_polynomial("x/2/3") == poly2(X / 6)
    with pytest.raises(DivisionByZero):
        parse_polynomial("x/(1-1)")
    with pytest.raises(ExpressionSyntaxError):
        parse_polynomial("x/0")


def test_implicit_multiplication():
    assert parse_polynomial("2x") == poly2(2 * X)
    assert parse_polynomial("(x+y)y") == poly2((X + Y) * Y)
    assert parse_polynomial("3(x+1)(x-1)") == poly2(3 * X**2 - 3)


def test_leading_sign_and_whitespace():
    assert parse_polynomial(" -x^2 +\ty\n") == poly2(-(X**2) + Y)
    assert parse_polynomial("+x") == poly2(X)


def test_rejected_inputs():
    cases = {
        "x^(-1)": ExpressionSyntaxError,
        "1.5*x": ExpressionSyntaxError,
        "z+1": UnknownSymbol,
        "x+": ExpressionSyntaxError,
        "(x+1": ExpressionSyntaxError,
        "x)": ExpressionSyntaxError,
        "x**2": ExpressionSyntaxError,
        "": ExpressionSyntaxError,
        "x²": ExpressionSyntaxError,
    }
    for text, error in cases.items():
        with pytest.raises(error):
            parse_polynomial(text)


def test_unknown_symbol_offset():
    with pytest.raises(UnknownSymbol) as info:
        parse_expression("x + sin")
    assert info.value.offset == 4


def test_bytes_input():
    assert parse_polynomial(b"x^2+y") == poly2(X**2 + Y)
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(b"x+\xff")
    assert info.value.offset == 2


def test_offsets_count_bytes():
    cases = {"x+é": 2, "x+é".encode("utf-8"): 2, "x*y+−y": 4, "x^(2é": 4}
    for source, offset in cases.items():
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_expression(source)
        assert info.value.offset == offset


def test_guards():
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("(" * 200 + "x" + ")" * 200)
    with pytest.raises(ExpressionError):
        parse_polynomial("(x+y)^1000")
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("x^1001")


def test_expansion_size_guard():
    with pytest.raises(ExpressionError) as info:
        parse_polynomial("(x+y+1)^512")
    assert "terms" in info.value.message
    with pytest.raises(ExpressionError):
        parse_polynomial("(x+y+1)^80*(x+y+1)^80")
    assert len(parse_polynomial("(x+1)^500").terms()) == 501
    assert len(parse_polynomial("x^300*y^200").terms()) == 1
    assert len(parse_polynomial("(x+y+1)^60").terms()) == 1891


def test_format_canonical_examples():
    assert format_canonical(poly2(0)) == "0"
    assert format_canonical(poly2(X**2 * Y**2 + 2 * X * Y**3)) == "x^2*y^2+2*x*y^3"
    assert format_canonical(RatFun(2 * X, X + 1)) == "2*x/(x+1)"
    assert format_canonical(RatFun(1, (X + 1) ** 2)) == "1/(x+1)^2"
    assert format_canonical(RatFun(12, X + 1)) == "12/(x+1)"
    assert format_canonical(poly2(-X + Rational(1, 2))) == "-x+1/2"


def test_round_trip():
    for _ in range(1000):
        p = random_poly2()
        assert parse_polynomial(format_canonical(p)) == p


def test_parser_totality_on_fuzzed_text():
    alphabet = np.array(list("xy0123456789+-*/^() \tz."))
    for _ in range(500):
        length = int(rng.integers(0, 80))
        text = "".join(rng.choice(alphabet, size=length))
        try:
            parse_polynomial(text)
        except ExpressionError as e:
            assert e.offset is None or 0 <= e.offset <= len(text)


def test_parser_totality_on_large_inputs():
    blob = bytes(rng.integers(0, 256, size=64 * 1024, dtype=np.uint8))
    with pytest.raises(ExpressionError):
        parse_polynomial(blob)
    long_sum = "+".join(["x*y"] * 8000)
    assert parse_polynomial(long_sum) == poly2(8000 * X * Y)
