"""Rational solutions of the Risch differential equation y' + g'*y = r.

With g a polynomial, integral(r*exp(g)) is elementary over the field generated
by x and exp(g) exactly when y' + g'*y = r has a rational solution y, and then
integral(r*exp(g)) = y*exp(g).
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from sympy import QQ, Poly, Rational
from sympy.polys.matrices import DomainMatrix

from gradvar.algebra import (
    X,
    RatFun,
    gcd,
    laurent_principal_part,
    poly,
    rational_roots,
    squarefree_factorization,
)
from gradvar.expr import format_canonical

logger = logging.getLogger(__name__)


class UnsupportedExponent(ValueError):
    """The exponent derivative is not a nonzero polynomial."""


@dataclass(frozen=True)
class RischProblem:
    """
    Find a rational y with y' + gprime*y = rhs.

    Attributes
    ----------
    gprime : Poly
        Derivative of the exponent; a nonzero polynomial in x.
    rhs : RatFun
    """

    gprime: Poly
    rhs: RatFun

    def __post_init__(self):
        gprime = self.gprime
        if isinstance(gprime, RatFun):
            if not gprime.is_polynomial:
                raise UnsupportedExponent(
                    f"exponent derivative {format_canonical(gprime)} is not a polynomial"
                )
            gprime = gprime.num
        gprime = poly(gprime)
        if gprime.is_zero:
            raise UnsupportedExponent("exponent derivative is zero")
        object.__setattr__(self, "gprime", gprime)
        object.__setattr__(self, "rhs", RatFun.of(self.rhs))

    def residual(self, y: RatFun) -> RatFun:
        """y' + gprime*y - rhs; zero for a solution."""
        return y.diff() + y * RatFun(self.gprime) - self.rhs


@dataclass(frozen=True)
class PoleWitness:
    """
    Local refutation at the roots of a denominator factor.

    A simple pole of rhs can never be matched, since y' has no simple poles
    and gprime*y has no pole where y is regular. For a rational pole alpha of
    order k >= 2 the ansatz y = sum c_j (x - alpha)**-j, j < k, must match the
    principal part of rhs; ``matrix`` and ``target`` hold that linear system,
    with row s the coefficient of (x - alpha)**-(s + 1).
    """

    factor: Poly
    order: int
    point: Optional[Rational] = None
    matrix: Tuple[Tuple[Rational, ...], ...] = ()
    target: Tuple[Rational, ...] = ()

    @property
    def kind(self) -> str:
        return "simple_pole" if self.order == 1 else "inconsistent_principal_part"

    def equations(self) -> List[str]:
        rows = []
        for row, value in zip(self.matrix, self.target):
            terms = [
                f"{coefficient}*c{j + 1}"
                for j, coefficient in enumerate(row)
                if coefficient != 0
            ]
            rows.append(f"{' + '.join(terms) or '0'} = {value}")
        return rows

    def to_dict(self) -> dict:
        return {
            "type": "pole",
            "kind": self.kind,
            "factor": format_canonical(self.factor),
            "point": None if self.point is None else str(self.point),
            "order": self.order,
            "unknowns": [f"c{j + 1}" for j in range(self.order - 1)],
            "matrix": [[str(v) for v in row] for row in self.matrix],
            "target": [str(v) for v in self.target],
            "equations": self.equations(),
        }


@dataclass(frozen=True)
class LinearSystemWitness:
    """
    Global refutation: with y = N/D, D fixed and deg N <= numerator_degree,
    the linear system over QQ for the coefficients of N is inconsistent.
    """

    denominator: Poly
    numerator_degree: int
    rows: int
    columns: int
    rank: int
    augmented_rank: int

    def to_dict(self) -> dict:
        return {
            "type": "linear_system",
            "denominator": format_canonical(self.denominator),
            "numerator_degree": self.numerator_degree,
            "rows": self.rows,
            "columns": self.columns,
            "rank": self.rank,
            "augmented_rank": self.augmented_rank,
        }


@dataclass(frozen=True)
class RischSolution:
    y: RatFun

    kind = "solution"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "solution": format_canonical(self.y)}


@dataclass(frozen=True)
class RischRefutation:
    witness: Union[PoleWitness, LinearSystemWitness]

    kind = "no_solution"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "witness": self.witness.to_dict()}


RischOutcome = Union[RischSolution, RischRefutation]


def _principal_part_system(
    problem: RischProblem, alpha: Rational, order: int
) -> Tuple[List[List[Rational]], List[Rational]]:
    rhs_coefficients = laurent_principal_part(problem.rhs, alpha, order)
    # Taylor coefficients of gprime at alpha, low order first
    g_coefficients = [Rational(c) for c in reversed(problem.gprime.shift(alpha).all_coeffs())]
    g_coefficients += [Rational(0)] * order
    matrix, target = [], []
    for s in range(1, order + 1):
        row = []
        for j in range(1, order):
            entry = Rational(0)
            if s == j + 1:
                entry -= j
            if j >= s:
                entry += g_coefficients[j - s]
            row.append(entry)
        matrix.append(row)
        # rhs_coefficients[0] multiplies (x - alpha)**-order
        target.append(rhs_coefficients[order - s])
    return matrix, target


def _solve(matrix: Sequence[Sequence[Rational]], target: Sequence[Rational]):
    """Solve matrix @ c = target exactly; returns (solution or None, rank, augmented rank)."""
    rows = len(target)
    columns = len(matrix[0]) if rows else 0
    augmented = DomainMatrix(
        [[QQ.convert(v) for v in list(row) + [t]] for row, t in zip(matrix, target)],
        (rows, columns + 1),
        QQ,
    )
    reduced, pivots = augmented.rref()
    rank = len([p for p in pivots if p < columns])
    augmented_rank = len(pivots)
    if augmented_rank > rank:
        return None, rank, augmented_rank
    entries = reduced.to_Matrix()
    solution = [Rational(0)] * columns
    for i, p in enumerate(pivots):
        solution[p] = Rational(entries[i, columns])
    return solution, rank, augmented_rank


def _local_refutation(problem: RischProblem) -> Optional[PoleWitness]:
    for factor, order in squarefree_factorization(problem.rhs.den).factors:
        if order == 1:
            return PoleWitness(factor, 1)
        roots, _ = rational_roots(factor)
        for alpha in roots:
            matrix, target = _principal_part_system(problem, alpha, order)
            solution, _, _ = _solve(matrix, target)
            if solution is None:
                return PoleWitness(
                    poly(X - alpha),
                    order,
                    alpha,
                    tuple(tuple(row) for row in matrix),
                    tuple(target),
                )
    return None


def _coefficient_system(
    problem: RischProblem, denominator: Poly, degree: int
) -> Tuple[List[List[Rational]], List[Rational]]:
    # b*(N'*D - N*D' + gprime*N*D) = a*D**2 with rhs = a/b
    a, b = problem.rhs.num, problem.rhs.den
    d_prime = denominator.diff(X)
    images = []
    for j in range(degree + 1):
        basis = poly(X**j)
        image = b * (basis.diff(X) * denominator - basis * d_prime + problem.gprime * basis * denominator)
        images.append(image)
    target = a * denominator**2
    size = 1 + max([target.degree()] + [image.degree() for image in images if not image.is_zero])

    def low_first(p: Poly) -> List[Rational]:
        coefficients = [Rational(c) for c in reversed(p.all_coeffs())] if not p.is_zero else []
        return coefficients + [Rational(0)] * (size - len(coefficients))

    columns = [low_first(image) for image in images]
    matrix = [[column[i] for column in columns] for i in range(size)]
    return matrix, low_first(target)


def solve_with_denominator(
    problem: RischProblem, denominator: Poly, degree: int
) -> Tuple[Optional[RatFun], Tuple[int, int, int, int]]:
    """
    Look for y = N/denominator with deg N <= degree.

    Returns the solution (or None) and (rows, columns, rank, augmented rank).
    """
    matrix, target = _coefficient_system(problem, denominator, degree)
    solution, rank, augmented_rank = _solve(matrix, target)
    dims = (len(target), degree + 1, rank, augmented_rank)
    if solution is None:
        return None, dims
    numerator = poly(sum(c * X**j for j, c in enumerate(solution)))
    return RatFun(numerator, denominator), dims


def risch_de_solve(problem: RischProblem) -> RischOutcome:
    """
    Decide whether y' + gprime*y = rhs has a rational solution.

    Poles are checked locally first. Then the denominator of y is bounded by
    gcd(den(rhs), den(rhs)') and the numerator degree by
    deg num(rhs) - deg den(rhs) + deg D - deg gprime, and the remaining
    linear system over QQ is solved exactly.

    Returns
    -------
    RischSolution
        Verified by substitution.
    RischRefutation
        With a PoleWitness or LinearSystemWitness that can be re-checked.
    """
    if problem.rhs.is_zero:
        return RischSolution(RatFun(0))
    witness = _local_refutation(problem)
    if witness is not None:
        logger.debug("Risch refutation at %s: %s", format_canonical(witness.factor), witness.kind)
        return RischRefutation(witness)

    rhs = problem.rhs
    denominator = gcd(rhs.den, rhs.den.diff(X))
    degree = (
        rhs.num.degree() - rhs.den.degree() + denominator.degree() - problem.gprime.degree()
    )
    if degree < 0:
        return RischRefutation(LinearSystemWitness(denominator, degree, 0, 0, 0, 1))
    y, (rows, columns, rank, augmented_rank) = solve_with_denominator(
        problem, denominator, degree
    )
    if y is None:
        return RischRefutation(
            LinearSystemWitness(denominator, degree, rows, columns, rank, augmented_rank)
        )
    if not problem.residual(y).is_zero:
        raise AssertionError("Risch solution failed verification")
    return RischSolution(y)


def ansatz_search(
    problem: RischProblem, max_pole_order: int = 8, max_numerator_degree: int = 8
) -> Optional[RatFun]:
    """
    Brute-force search for a rational solution.

    Tries every denominator prod(f_i**k_i) over the squarefree factors f_i of
    den(rhs) with 0 <= k_i <= max_pole_order, each with a numerator of degree
    at most max_numerator_degree. Independent of the degree bounds used by
    risch_de_solve.
    """
    factors = [factor for factor, _ in squarefree_factorization(problem.rhs.den).factors]
    for exponents in itertools.product(range(max_pole_order + 1), repeat=len(factors)):
        denominator = poly(1)
        for factor, k in zip(factors, exponents):
            denominator = denominator * factor**k
        y, _ = solve_with_denominator(problem, denominator, max_numerator_degree)
        if y is not None and problem.residual(y).is_zero:
            return y
    return None
