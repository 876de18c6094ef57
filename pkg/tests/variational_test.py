import pytest
from sympy import Rational

from gradvar.algebra import X, Y, RatFun, poly2
from gradvar.expr import ExpressionSyntaxError, UnknownSymbol, parse_polynomial
from gradvar.variational import (
    ConstantPotential,
    FieldError,
    InfiniteFamily,
    InvariantLine,
    LineOfCriticalPoints,
    NotInvariant,
    PlanarField,
    Y_ZERO_LINE,
    find_invariant_lines,
    foliation_slope,
    gradient_field,
    invariance_remainder,
    invariant_lines,
    lve1_system,
    lve2_system,
    normalize_to_y0,
    parse_field,
    variational_coefficients,
)


def test_gradient_field(example_field):
    assert example_field.P == poly2(X**2 + X + 2 * X * Y**2 + 2 * Y**3)
    assert example_field.Q == poly2(2 * X**2 * Y + 6 * X * Y**2 + 5 * Y**3)
    with pytest.raises(ConstantPotential):
        gradient_field(parse_polynomial("5"))


def test_zero_field_rejected():
    with pytest.raises(FieldError):
        PlanarField(0, 0)


def test_invariant_line_normalization():
    line = InvariantLine(2, 4, 6)
    assert (line.a, line.b, line.c) == (1, 2, 3)
    assert str(line) == "x+2*y+3=0"
    assert InvariantLine(0, -3, 3) == InvariantLine(0, 1, -1)
    with pytest.raises(ValueError):
        InvariantLine(0, 0, 1)


def test_example_has_only_the_horizontal_axis(example_field):
    search = find_invariant_lines(example_field)
    assert search.lines == [Y_ZERO_LINE]
    assert not search.infinite
    assert invariant_lines(example_field) == [Y_ZERO_LINE]


def test_invariance_remainder(example_field):
    assert invariance_remainder(example_field, Y_ZERO_LINE).is_zero
    assert not invariance_remainder(example_field, InvariantLine(1, 0, -1)).is_zero


def test_radial_field_is_an_infinite_family():
    field = gradient_field(parse_polynomial("(x^2+y^2)/2"))
    assert find_invariant_lines(field).infinite
    with pytest.raises(InfiniteFamily):
        invariant_lines(field)


def test_rotation_has_no_rational_line():
    search = find_invariant_lines(PlanarField(Y, -X))
    assert search.lines == []
    assert search.unresolved == 2


def test_vertical_line_and_irrational_slopes():
    search = find_invariant_lines(PlanarField(2 * X * Y, X**2))
    assert search.lines == [InvariantLine(1, 0, 0)]
    assert search.unresolved == 2


def test_normalize_slanted_line():
    normalized = normalize_to_y0(PlanarField(1, 1), InvariantLine(1, -1, 0))
    assert normalized == PlanarField(1, 0)
    shifted = normalize_to_y0(PlanarField(X, Y - 1), InvariantLine(0, 1, -1))
    assert shifted == PlanarField(X, Y)


def test_normalize_vertical_line():
    normalized = normalize_to_y0(PlanarField(2 * X * Y, X**2), InvariantLine(1, 0, 0))
    assert normalized == PlanarField(Y**2, 2 * X * Y)
    with pytest.raises(LineOfCriticalPoints):
        variational_coefficients(normalized)


def test_normalize_rejects_non_invariant_line(example_field):
    with pytest.raises(NotInvariant):
        normalize_to_y0(example_field, InvariantLine(1, 0, -1))


def test_variational_coefficients(example_field):
    vs = variational_coefficients(normalize_to_y0(example_field, Y_ZERO_LINE))
    assert vs.beta1 == RatFun(2 * X, X + 1)
    assert vs.beta2 == RatFun(12, X + 1)
    assert vs.line == Y_ZERO_LINE
    assert lve1_system(vs) == vs.beta1


def test_saddle_coefficients():
    field = gradient_field(parse_polynomial("x^2/2-y^2/2"))
    assert field == PlanarField(X, -Y)
    vs = variational_coefficients(normalize_to_y0(field, Y_ZERO_LINE))
    assert vs.beta1 == RatFun(-1, X)
    assert vs.beta2.is_zero


def test_constant_beta1_coefficients():
    field = gradient_field(parse_polynomial("x^2/2+x*y^2+y^3/3"))
    assert field == PlanarField(X + Y**2, 2 * X * Y + Y**2)
    assert invariant_lines(field) == [Y_ZERO_LINE]
    vs = variational_coefficients(normalize_to_y0(field, Y_ZERO_LINE))
    assert vs.beta1 == RatFun(2)
    assert vs.beta2 == RatFun(2, X)


def test_no_horizontal_line_for_x2y():
    field = gradient_field(parse_polynomial("x^2*y"))
    assert field == PlanarField(2 * X * Y, X**2)
    assert all(line.a != 0 for line in invariant_lines(field))
    for k in (0, 1, -2, Rational(1, 3)):
        assert not invariance_remainder(field, InvariantLine(0, 1, -k)).is_zero


def test_lve2_system(example_field):
    system = lve2_system(variational_coefficients(example_field))
    assert system.chi1_coefficient == RatFun(4 * X, X + 1)
    assert system.coupling == RatFun(12, X + 1)
    assert str(system) == (
        "chi1' = (4*x/(x+1))*chi1; chi2' = (2*x/(x+1))*chi2 + (12/(x+1))*chi1"
    )


def test_variational_coefficients_need_invariance():
    with pytest.raises(NotInvariant):
        variational_coefficients(PlanarField(X, X))


def test_foliation_slope(example_field):
    numerator, denominator = foliation_slope(example_field)
    assert numerator == example_field.Q and denominator == example_field.P


def test_parse_field():
    assert parse_field("2*x*y;x^2") == PlanarField(2 * X * Y, X**2)
    assert parse_field(b"1;0") == PlanarField(1, 0)
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_field("x;y^(")
    assert info.value.offset == 4
    with pytest.raises(UnknownSymbol) as info:
        parse_field("x+1;z")
    assert info.value.offset == 4
    with pytest.raises(ExpressionSyntaxError):
        parse_field("x")
    with pytest.raises(ExpressionSyntaxError):
        parse_field("x;y;1")


def test_field_string():
    assert str(PlanarField(Rational(1, 2) * X, -Y)) == "(1/2*x, -y)"
