import numpy as np
import pytest
from sympy import Rational

from gradvar.algebra import (
    X,
    Y,
    BothZero,
    RatFun,
    Unsupported,
    UnsupportedReason,
    ZeroPolynomial,
    derivative,
    gcd,
    laurent_coefficients,
    laurent_principal_part,
    logderiv_split,
    partial_fractions,
    poly,
    poly2,
    rational_roots,
    recombine,
    squarefree_factorization,
    substitute_y,
)

rng = np.random.default_rng(7)


def random_poly(degree=4, var=X):
    coefficients = [Rational(int(rng.integers(-9, 10)), int(rng.integers(1, 5))) for _ in range(degree + 1)]
    return poly(sum(c * var**k for k, c in enumerate(coefficients)))


def random_poly2(degree=3):
    p = 0
    for _ in range(5):
        i, j = rng.integers(0, degree + 1, size=2)
        p += Rational(int(rng.integers(-9, 10)), int(rng.integers(1, 5))) * X**i * Y**j
    return poly2(p)


def random_ratfun():
    den = random_poly(int(rng.integers(0, 4)))
    while den.is_zero:
        den = random_poly(int(rng.integers(0, 4)))
    return RatFun(random_poly(int(rng.integers(0, 5))), den)


def is_normalized(r: RatFun) -> bool:
    return r.num.gcd(r.den).is_one and r.den.LC() == 1


def test_derivative(example_potential):
    assert derivative(example_potential, "x") == poly2(X**2 + X + 2 * (X + Y) * Y**2)
    assert derivative(example_potential, "y") == poly2(
        2 * (X + Y) * Y**2 + 2 * (X + Y) ** 2 * Y + Y**3
    )
    assert derivative(poly2(7), "x").is_zero
    with pytest.raises(ValueError):
        derivative(poly2(X), "z")


def test_leibniz():
    for _ in range(50):
        p, q = random_poly2(), random_poly2()
        for var in ("x", "y"):
            assert derivative(p * q, var) == p * derivative(q, var) + q * derivative(p, var)


def test_substitute_y(example_field):
    assert substitute_y(example_field.Q, 0).is_zero
    assert substitute_y(example_field.P, 0) == poly(X**2 + X)
    assert substitute_y(poly2(Y), 0).is_zero
    assert substitute_y(poly2(X * Y + Y**2), Rational(1, 2)) == poly(X / 2 + Rational(1, 4))


def test_gcd():
    assert gcd(poly(X**2 + X), poly(2 * X**2)) == poly(X)
    assert gcd(poly(3 * X + 6), poly(0)) == poly(X + 2)
    assert gcd(poly(X + 1), poly(X + 2)) == poly(1)
    with pytest.raises(BothZero):
        gcd(poly(0), poly(0))


def test_squarefree_factorization():
    result = squarefree_factorization(poly((X + 1) ** 3 * X))
    assert result.factors == [(poly(X), 1), (poly(X + 1), 3)]
    assert result.unit == 1
    assert squarefree_factorization(poly(X**2 + 1)).factors == [(poly(X**2 + 1), 1)]
    constant = squarefree_factorization(poly(5))
    assert constant.factors == [] and constant.unit == 5
    with pytest.raises(ZeroPolynomial):
        squarefree_factorization(poly(0))


def test_squarefree_factorization_reconstructs():
    for _ in range(100):
        p = random_poly(3) * random_poly(2) ** 2
        if p.is_zero:
            continue
        result = squarefree_factorization(p)
        product = poly(result.unit)
        for factor, multiplicity in result.factors:
            assert factor.LC() == 1
            product = product * factor**multiplicity
        assert product == p
        multiplicities = [m for _, m in result.factors]
        assert multiplicities == sorted(set(multiplicities))


def test_partial_fractions():
    assert partial_fractions(RatFun(2 * X, X + 1)) == (poly(2), [(poly(X + 1), 1, poly(-2))])
    assert partial_fractions(RatFun(12, (X + 1) ** 3)) == (poly(0), [(poly(X + 1), 3, poly(12))])
    assert partial_fractions(RatFun(X**2 + 1)) == (poly(X**2 + 1), [])


def test_partial_fractions_round_trip():
    for _ in range(300):
        f = random_ratfun()
        polynomial_part, terms = partial_fractions(f)
        for factor, order, numerator in terms:
            assert numerator.degree() < factor.degree()
        assert recombine(polynomial_part, terms) == f


def test_normalization():
    for _ in range(1000):
        a, b = random_ratfun(), random_ratfun()
        results = [a + b, a - b, a * b, a.diff(), a**2]
        if not b.is_zero:
            results.append(a / b)
        assert all(is_normalized(r) for r in results)


def test_logderiv_split_example():
    split = logderiv_split(RatFun(2 * X, X + 1))
    assert split.g == poly(2 * X)
    assert split.factors == ((poly(X + 1), -2),)


def test_logderiv_split_constant():
    split = logderiv_split(RatFun(3))
    assert split.g == poly(3 * X)
    assert split.factors == ()


def test_logderiv_split_rejections():
    with pytest.raises(Unsupported) as info:
        logderiv_split(RatFun(1, 2 * X))
    assert info.value.reason == UnsupportedReason.NON_INTEGER_RESIDUE
    with pytest.raises(Unsupported) as info:
        logderiv_split(RatFun(1, X**2))
    assert info.value.reason == UnsupportedReason.HIGHER_ORDER_POLE
    with pytest.raises(Unsupported) as info:
        logderiv_split(RatFun(1, X**2 - 2))
    assert info.value.reason == UnsupportedReason.NON_RATIONAL_RESIDUE


def test_logderiv_split_irreducible_factor():
    # 2x/(x^2+1) = (x^2+1)'/(x^2+1)
    split = logderiv_split(RatFun(2 * X + 1, X**2 + 1) - RatFun(1, X**2 + 1))
    assert split.factors == ((poly(X**2 + 1), 1),)


def test_logderiv_split_soundness():
    for _ in range(100):
        factors = [(poly(X - int(rng.integers(-5, 6))), int(rng.integers(-3, 4))) for _ in range(3)]
        g = random_poly(2)
        beta = RatFun(g.diff(X))
        for factor, n in factors:
            beta = beta + RatFun(factor.diff(X) * n, factor)
        split = logderiv_split(beta)
        rebuilt = RatFun(split.g.diff(X))
        for factor, n in split.factors:
            assert n != 0
            rebuilt = rebuilt + RatFun(factor.diff(X) * n, factor)
        assert rebuilt == beta


def test_rational_roots():
    assert rational_roots(poly((X - Rational(1, 2)) * (X + 3) * (X**2 + 1))) == (
        [Rational(-3), Rational(1, 2)],
        2,
    )
    with pytest.raises(ZeroPolynomial):
        rational_roots(poly(0))


def test_laurent_coefficients():
    valuation, coefficients = laurent_coefficients(RatFun(12, (X + 1) ** 3), -1, 3)
    assert valuation == -3
    assert coefficients == [12, 0, 0]
    valuation, coefficients = laurent_coefficients(RatFun(2 * X, X + 1), -1, 2)
    assert valuation == -1
    assert coefficients == [-2, 2]


def test_laurent_principal_part():
    assert laurent_principal_part(RatFun(12, (X + 1) ** 3), -1, 3) == [12, 0, 0]
    assert laurent_principal_part(RatFun(2 * X, X + 1), -1, 2) == [0, -2]
    assert laurent_principal_part(RatFun(1, X**2 + 1), 0, 1) == [0]
    with pytest.raises(ValueError):
        laurent_principal_part(RatFun(1, X), 0, 0)


def test_ratfun_evaluation():
    r = RatFun(2 * X, X + 1)
    assert r(1) == 1
    assert r(Rational(1, 2)) == Rational(2, 3)
    assert r.is_polynomial is False
    assert RatFun(X**2 - 1, X - 1) == RatFun(X + 1)
