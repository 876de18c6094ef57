"""Non-integrability verdicts from the second variational equation along invariant lines.

Along y = 0 the second variational system is triangular. Its Galois group is
generated by the multiplicative action on omega = exp(integral(beta1)) and the
additive action on theta = integral(beta2*omega). The identity component is
non-commutative exactly when omega is transcendental over C(x) and theta is
not in the field C(x, omega); the second condition is decided by a Risch
differential equation.
"""

import logging
from dataclasses import dataclass, field
from enum import IntEnum, auto
from typing import Dict, List, Optional, Tuple

from sympy import Poly, Rational

from gradvar.algebra import X, RatFun, Unsupported, logderiv_split, poly, to_rational
from gradvar.expr import format_canonical
from gradvar.risch import (
    RischOutcome,
    RischProblem,
    RischRefutation,
    ansatz_search,
    risch_de_solve,
)
from gradvar.solver_log import certificate_log
from gradvar.utils import TimingData, time_code
from gradvar.variational import (
    InfiniteFamily,
    InvariantLine,
    LineOfCriticalPoints,
    NoInvariantLine,
    PlanarField,
    VariationalSystem,
    Y_ZERO_LINE,
    find_invariant_lines,
    gradient_field,
    lve2_system,
    normalize_to_y0,
    variational_coefficients,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

CITATIONS = (
    "Ayoul and Zung (2010): a vector field that is meromorphically integrable "
    "in the broad sense has a meromorphically Liouville-integrable cotangent lift "
    "f(p) = <p, X(x)>.",
    "Morales-Ruiz, Ramis and Simo (2007): if a Hamiltonian system is "
    "meromorphically Liouville integrable, the identity component of the "
    "differential Galois group of the variational equations of any order along "
    "an integral curve is Abelian.",
    "Combined: if the vector field is meromorphically integrable in the broad "
    "sense, the identity component of the differential Galois group of its "
    "variational equations (of any order) along the integral curve is Abelian. "
    "A non-commutative identity component for the second variational equation "
    "therefore rules out broad meromorphic integrability near that curve.",
)


class ZeroBeta2(ValueError):
    """The coupling coefficient beta2 vanishes, so there is no theta integrand."""


class MalformedClosedForm(ValueError):
    """A closed form whose exponential-integral argument is not affine."""


class Verdict(IntEnum):
    """
    Verdict of the analysis along one invariant line.

    Attributes
    ----------
    NON_INTEGRABLE : Int
        The identity component of the LVE2 Galois group is non-commutative.
    INCONCLUSIVE : Int
        No obstruction at order two; never a claim of integrability.
    UNSUPPORTED : Int
        The input left the hyperexponential class handled here.
    """

    NON_INTEGRABLE = auto()
    INCONCLUSIVE = auto()
    UNSUPPORTED = auto()


@dataclass(frozen=True)
class HyperExp:
    """
    A(x) * exp(g(x)) with A rational and g polynomial.

    ``beta`` is the logarithmic derivative the value was built from, kept for
    auditing and ignored by equality.
    """

    A: RatFun
    g: Poly
    beta: Optional[RatFun] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "A", RatFun.of(self.A))
        object.__setattr__(self, "g", poly(self.g))
        if self.A.is_zero:
            raise ValueError("a hyperexponential term needs A != 0")

    def logarithmic_derivative(self) -> RatFun:
        return self.A.diff() / self.A + RatFun(self.g.diff(X))

    def derivative_coefficient(self) -> RatFun:
        """B with d/dx(A*exp(g)) = B*exp(g)."""
        return self.A.diff() + self.A * RatFun(self.g.diff(X))

    def to_dict(self) -> dict:
        return {"A": format_canonical(self.A), "g": format_canonical(self.g)}

    def __str__(self):
        return f"({format_canonical(self.A)})*exp({format_canonical(self.g)})"


@dataclass(frozen=True)
class SpecialClosedForm:
    """
    sum(terms) + ei_coefficient * exp(ei_shift) * Ei1(ei_argument).

    Ei1 is the exponential integral E1 with d/dx Ei1(u) = -exp(-u)*u'/u.

    Attributes
    ----------
    terms : tuple of HyperExp
        The elementary part.
    ei_coefficient : Rational
    ei_shift : Rational
        Constant exponent of the prefactor, e.g. -2 for exp(-2).
    ei_argument : Poly
        Affine argument u(x).
    """

    terms: Tuple[HyperExp, ...] = ()
    ei_coefficient: Rational = Rational(0)
    ei_shift: Rational = Rational(0)
    ei_argument: Poly = field(default_factory=lambda: poly(X))

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "ei_coefficient", to_rational(self.ei_coefficient))
        object.__setattr__(self, "ei_shift", to_rational(self.ei_shift))
        object.__setattr__(self, "ei_argument", poly(self.ei_argument))


@dataclass
class Certificate:
    """
    Outcome of the analysis along one invariant line.

    Attributes
    ----------
    source : str
        Input text, or the canonical form of the input.
    kind : str
        "potential" or "field".
    field : PlanarField
        The analyzed field before normalization.
    line : InvariantLine
    verdict : Verdict
    reason : str
        Short explanation of the verdict.
    """

    source: str
    kind: str
    field: PlanarField
    line: Optional[InvariantLine]
    verdict: Verdict
    reason: str
    potential: Optional[Poly] = None
    normalized: Optional[PlanarField] = None
    beta1: Optional[RatFun] = None
    beta2: Optional[RatFun] = None
    omega: Optional[HyperExp] = None
    theta_integrand: Optional[HyperExp] = None
    risch: Optional[RischOutcome] = None
    citations: Tuple[str, ...] = CITATIONS

    @property
    def hypotheses(self) -> Dict[str, Optional[bool]]:
        """H1: omega is transcendental. H2: theta lies outside C(x, omega)."""
        h1 = None if self.omega is None else self.omega.g.degree() >= 1
        h2 = None if self.risch is None else isinstance(self.risch, RischRefutation)
        return {"H1": h1, "H2": h2}

    def to_dict(self) -> dict:
        def text(value):
            return None if value is None else format_canonical(value)

        return {
            "schema_version": SCHEMA_VERSION,
            "input": {
                "kind": self.kind,
                "source": self.source,
                "potential": text(self.potential),
                "P": format_canonical(self.field.P),
                "Q": format_canonical(self.field.Q),
            },
            "line": None if self.line is None else self.line.to_dict(),
            "normalized_field": None
            if self.normalized is None
            else {
                "P": format_canonical(self.normalized.P),
                "Q": format_canonical(self.normalized.Q),
            },
            "beta1": text(self.beta1),
            "beta2": text(self.beta2),
            "omega": None if self.omega is None else self.omega.to_dict(),
            "theta_integrand": None
            if self.theta_integrand is None
            else self.theta_integrand.to_dict(),
            "risch": None if self.risch is None else self.risch.to_dict(),
            "verdict": self.verdict.name,
            "reason": self.reason,
            "hypotheses": self.hypotheses,
            "citations": list(self.citations),
        }


def exponential_solution(beta1: RatFun) -> HyperExp:
    """
    omega = exp(integral(beta1)) as A*exp(g).

    Raises
    ------
    Unsupported
        Propagated from logderiv_split.
    """
    beta1 = RatFun.of(beta1)
    split = logderiv_split(beta1)
    A = RatFun(1)
    for factor, exponent in split.factors:
        A = A * RatFun(factor) ** exponent
    omega = HyperExp(A, split.g, beta1)
    if omega.logarithmic_derivative() != beta1:
        raise AssertionError("omega audit failed: A'/A + g' != beta1")
    return omega


def theta_integrand(beta2: RatFun, omega: HyperExp) -> HyperExp:
    """beta2*omega; raises ZeroBeta2 when beta2 = 0."""
    beta2 = RatFun.of(beta2)
    if beta2.is_zero:
        raise ZeroBeta2("beta2 vanishes")
    return HyperExp(beta2 * omega.A, omega.g)


def abelianity_verdict(
    omega: Optional[HyperExp], beta2: Optional[RatFun], risch: Optional[RischOutcome]
) -> Verdict:
    """
    NON_INTEGRABLE iff g is nonconstant and the Risch equation has no solution.

    A missing omega means its construction failed (UNSUPPORTED). A zero
    beta2, a constant g or a rational theta are INCONCLUSIVE.
    """
    if omega is None:
        return Verdict.UNSUPPORTED
    transcendental = omega.g.degree() >= 1
    refuted = isinstance(risch, RischRefutation)
    if beta2 is None or beta2.is_zero or not transcendental or not refuted:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.NON_INTEGRABLE
    if (verdict == Verdict.NON_INTEGRABLE) != (transcendental and refuted):
        raise AssertionError("verdict gate violated")
    return verdict


def _analyze_line(
    field_: PlanarField,
    line: InvariantLine,
    base: dict,
    cross_check: bool,
) -> Certificate:
    normalized = normalize_to_y0(field_, line)
    base = dict(base, line=line, normalized=normalized)
    try:
        vs: VariationalSystem = variational_coefficients(normalized, line)
    except LineOfCriticalPoints as e:
        return Certificate(**base, verdict=Verdict.UNSUPPORTED, reason=str(e))
    base.update(beta1=vs.beta1, beta2=vs.beta2)
    logger.debug("LVE2 along %s: %s", line, lve2_system(vs))
    try:
        omega = exponential_solution(vs.beta1)
    except Unsupported as e:
        return Certificate(
            **base, verdict=Verdict.UNSUPPORTED, reason=f"omega is not hyperexponential ({e})"
        )
    base.update(omega=omega)
    if vs.beta2.is_zero:
        return Certificate(
            **base,
            verdict=abelianity_verdict(omega, vs.beta2, None),
            reason="beta2 = 0: the second variational equation decouples",
        )
    integrand = theta_integrand(vs.beta2, omega)
    base.update(theta_integrand=integrand)
    if omega.g.degree() < 1:
        return Certificate(
            **base,
            verdict=abelianity_verdict(omega, vs.beta2, None),
            reason="omega is rational: only a unipotent part can occur",
        )
    risch = risch_de_solve(RischProblem(omega.g.diff(X), integrand.A))
    if cross_check and isinstance(risch, RischRefutation):
        found = ansatz_search(RischProblem(omega.g.diff(X), integrand.A))
        if found is not None:
            raise AssertionError(
                f"refutation contradicted by ansatz solution {format_canonical(found)}"
            )
    verdict = abelianity_verdict(omega, vs.beta2, risch)
    if verdict == Verdict.NON_INTEGRABLE:
        reason = "theta is not in C(x, omega): the identity component is non-commutative"
    else:
        reason = "theta is elementary: only an Abelian torus part can occur"
    return Certificate(**base, risch=risch, verdict=verdict, reason=reason)


def analyze_field(
    field_: PlanarField,
    source: Optional[str] = None,
    potential: Optional[Poly] = None,
    cross_check: bool = False,
) -> List[Certificate]:
    """
    One certificate per invariant line of a planar polynomial field.

    Fields with a vanishing component yield a single UNSUPPORTED certificate.

    Raises
    ------
    InfiniteFamily
        When infinitely many lines are invariant.
    NoInvariantLine
        When no line with rational coefficients is invariant.
    """
    timing = TimingData()
    kind = "field" if potential is None else "potential"
    if source is None:
        source = format_canonical(potential) if potential is not None else str(field_)
    base = dict(source=source, kind=kind, field=field_, potential=potential)

    with time_code(timing, "Total analysis time", is_main_timer=True):
        if field_.is_degenerate:
            zero = "Q" if field_.Q.is_zero else "P"
            parallel = "horizontal" if zero == "Q" else "vertical"
            line = Y_ZERO_LINE if zero == "Q" else InvariantLine(1, 0, 0)
            certificates = [
                Certificate(
                    **base,
                    line=line,
                    verdict=Verdict.UNSUPPORTED,
                    reason=f"degenerate field: {zero} vanishes identically, "
                    f"so every {parallel} line is invariant",
                )
            ]
        else:
            with time_code(timing, "Invariant line search"):
                search = find_invariant_lines(field_)
            if search.infinite:
                raise InfiniteFamily(
                    f"infinitely many invariant lines ({search.family}) for {field_}",
                    search.family,
                )
            if not search.lines:
                raise NoInvariantLine(
                    f"no invariant line with rational coefficients for {field_}"
                    f" ({search.unresolved} irrational solution(s) skipped)"
                )
            with time_code(timing, "Variational analysis"):
                certificates = [
                    _analyze_line(field_, line, base, cross_check)
                    for line in search.lines
                ]
    certificate_log(certificates, timing)
    return certificates


def analyze_potential(
    F: Poly, source: Optional[str] = None, cross_check: bool = False
) -> List[Certificate]:
    """
    Run the full pipeline on the gradient field of F.

    gradient_field -> invariant lines -> normalize_to_y0 ->
    variational_coefficients -> exponential_solution -> theta_integrand ->
    risch_de_solve -> abelianity_verdict, once per invariant line.
    """
    return analyze_field(gradient_field(F), source, potential=F, cross_check=cross_check)


def primary_certificate(certificates: List[Certificate]) -> Certificate:
    """The first NON_INTEGRABLE certificate, else the first one."""
    for certificate in certificates:
        if certificate.verdict == Verdict.NON_INTEGRABLE:
            return certificate
    return certificates[0]


def closed_form_derivative(cf: SpecialClosedForm) -> Dict[str, Tuple[Poly, RatFun]]:
    """
    d/dx of a closed form grouped by exponent: {"g": (g, B)} means B*exp(g).

    The exponential-integral term uses d/dx Ei1(u) = -exp(-u)*u'/u, so
    c*exp(s)*Ei1(u) contributes -c*u'/u * exp(s - u).
    """
    grouped: Dict[str, Tuple[Poly, RatFun]] = {}

    def add(g: Poly, coefficient: RatFun):
        key = format_canonical(g)
        _, previous = grouped.get(key, (g, RatFun(0)))
        grouped[key] = (g, previous + coefficient)

    for term in cf.terms:
        add(term.g, term.derivative_coefficient())
    if cf.ei_coefficient != 0:
        u = cf.ei_argument
        if u.degree() != 1:
            raise MalformedClosedForm(
                f"exponential-integral argument {format_canonical(u)} is not affine"
            )
        add(
            poly(cf.ei_shift - u.as_expr()),
            RatFun(u.diff(X) * (-cf.ei_coefficient), u),
        )
    return {key: (g, b) for key, (g, b) in grouped.items() if not b.is_zero}


def verify_closed_form(cf: SpecialClosedForm, integrand: HyperExp) -> bool:
    """True iff d/dx(cf) equals the integrand exactly."""
    derivative = {key: b for key, (_, b) in closed_form_derivative(cf).items()}
    return derivative == {format_canonical(integrand.g): integrand.A}


def example_closed_form() -> SpecialClosedForm:
    """
    -(12x + 18)*exp(2x)/(x + 1)**2 - 24*exp(-2)*Ei1(-2x - 2),
    an antiderivative of 12*exp(2x)/(x + 1)**3.
    """
    return SpecialClosedForm(
        terms=(HyperExp(RatFun(-(12 * X + 18), (X + 1) ** 2), poly(2 * X)),),
        ei_coefficient=Rational(-24),
        ei_shift=Rational(-2),
        ei_argument=poly(-2 * X - 2),
    )
