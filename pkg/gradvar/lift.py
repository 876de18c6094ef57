"""Cotangent lift of a planar field: f(p) = <p, X(x)> and its Hamiltonian field."""

import logging
from dataclasses import dataclass
from typing import Tuple

import sympy
from sympy import QQ, Poly

from gradvar.algebra import X, Y
from gradvar.expr import format_canonical
from gradvar.variational import PlanarField

logger = logging.getLogger(__name__)

P1, P2 = sympy.symbols("p1 p2")
LIFT_GENS = (X, Y, P1, P2)


class NotMomentumLinear(ValueError):
    """The Hamiltonian is not homogeneous of degree one in (p1, p2)."""


def poly4(value) -> Poly:
    """Coerce into a Poly in (x, y, p1, p2) over QQ."""
    if isinstance(value, Poly):
        if value.gens == LIFT_GENS and value.domain == QQ:
            return value
        value = value.as_expr()
    return Poly(value, *LIFT_GENS, domain=QQ)


@dataclass(frozen=True)
class LiftedHamiltonian:
    """f(x, y, p1, p2), linear and homogeneous in the momenta."""

    f: Poly

    def __post_init__(self):
        object.__setattr__(self, "f", poly4(self.f))

    def is_momentum_linear(self) -> bool:
        return all(monom[2] + monom[3] == 1 for monom in self.f.monoms()) and not self.f.is_zero

    def __str__(self):
        return format_canonical(self.f)


@dataclass(frozen=True)
class LiftedField:
    """Components (x', y', p1', p2') of the lifted field."""

    components: Tuple[Poly, Poly, Poly, Poly]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(poly4(c) for c in self.components))

    def base_components(self) -> Tuple[Poly, Poly]:
        return self.components[0], self.components[1]

    def __str__(self):
        return "(" + ", ".join(format_canonical(c) for c in self.components) + ")"


def cotangent_lift(field: PlanarField) -> LiftedHamiltonian:
    """f = p1*P + p2*Q."""
    return LiftedHamiltonian(poly4(P1 * field.P.as_expr() + P2 * field.Q.as_expr()))


def hamiltonian_field(h: LiftedHamiltonian) -> LiftedField:
    """
    X_f = (df/dp1, df/dp2, -df/dx, -df/dy).

    Raises
    ------
    NotMomentumLinear
        When f is not linear in (p1, p2).
    """
    if not h.is_momentum_linear():
        raise NotMomentumLinear(f"{h} is not linear homogeneous in (p1, p2)")
    f = h.f
    return LiftedField((f.diff(P1), f.diff(P2), -f.diff(X), -f.diff(Y)))


def verify_projection(lifted: LiftedField, base: PlanarField) -> bool:
    """True iff the first two components of the lift equal (P, Q)."""
    x_dot, y_dot = lifted.base_components()
    return x_dot == poly4(base.P) and y_dot == poly4(base.Q)


def conservation_residual(h: LiftedHamiltonian, lifted: LiftedField) -> Poly:
    """Derivative of f along the lifted field; zero for a first integral."""
    gradient = [h.f.diff(gen) for gen in LIFT_GENS]
    total = poly4(0)
    for partial, component in zip(gradient, lifted.components):
        total = total + partial * component
    return total


def format_lift(h: LiftedHamiltonian, lifted: LiftedField) -> str:
    return f"f = {h}\nX_f = {lifted}"
