"""Command-line front end.

Exit codes: 0 success (whatever the verdict), 2 parse or usage error,
3 unsupported or degenerate analysis, 4 numeric failure.
"""

import argparse
import io
import json
import logging
import sys
from typing import Optional, Sequence, Tuple

from gradvar.algebra import X, AlgebraError, RatFun, poly
from gradvar.expr import ExpressionError, format_canonical, parse_polynomial
from gradvar.flow import (
    FlowError,
    FlowOptions,
    StepSizeUnderflow,
    closed_form_value,
    hyperexp_function,
    integrate_flow,
    quadrature,
)
from gradvar.galois import (
    HyperExp,
    SpecialClosedForm,
    Verdict,
    analyze_field,
    analyze_potential,
    example_closed_form,
    primary_certificate,
    verify_closed_form,
)
from gradvar.lift import cotangent_lift, format_lift, hamiltonian_field
from gradvar.solver_log import setup_logger
from gradvar.tame import EXPERIMENT_OPTIONS, finiteness_experiment
from gradvar.utils import Direction
from gradvar.variational import FieldError, parse_field

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNSUPPORTED = 3
EXIT_NUMERIC = 4


def _point(text: str) -> Tuple[float, float]:
    try:
        x, y = (float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return x, y


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _add_flow_options(parser: argparse.ArgumentParser, defaults: FlowOptions):
    group = parser.add_argument_group("integrator options")
    group.add_argument("--rtol", type=float, default=defaults.rtol)
    group.add_argument("--atol", type=float, default=defaults.atol)
    group.add_argument("--critical-threshold", type=float, default=defaults.critical_threshold)
    group.add_argument(
        "--box", type=float, default=defaults.box_half_width, help="box half width"
    )
    group.add_argument("--t-max", type=float, default=defaults.t_max)
    group.add_argument("--max-steps", type=_positive_int, default=defaults.max_steps)


def _flow_options(args) -> FlowOptions:
    return FlowOptions(
        rtol=args.rtol,
        atol=args.atol,
        critical_threshold=args.critical_threshold,
        box_half_width=args.box,
        t_max=args.t_max,
        max_steps=args.max_steps,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradvar",
        description="Non-integrability certificates and gradient-flow numerics "
        "for planar polynomial fields.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log summaries")
    parser.add_argument("--debug", action="store_true", help="log integration steps")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="write a certificate as JSON")
    source = analyze.add_mutually_exclusive_group(required=True)
    source.add_argument("--potential", help='potential F, e.g. "x^3/3+x*y^2"')
    source.add_argument("--field", help='field "P;Q"')
    analyze.add_argument("--out", help="output file (default: stdout)")
    analyze.add_argument(
        "--cross-check",
        action="store_true",
        help="confirm refutations with a bounded ansatz search",
    )

    flow = commands.add_parser("flow", help="write a gradient trajectory as CSV")
    flow.add_argument("--potential", required=True)
    flow.add_argument("--start", type=_point, required=True, help="x,y")
    flow.add_argument(
        "--direction", type=Direction.parse, default=Direction.DESCENT, help="ascent|descent"
    )
    flow.add_argument("--out")
    _add_flow_options(flow, FlowOptions())

    tame = commands.add_parser("tame", help="run a finiteness experiment")
    tame.add_argument("--potential", required=True)
    tame.add_argument("--n-traj", type=_positive_int, default=200)
    tame.add_argument("--n-cuts", type=_positive_int, default=50)
    tame.add_argument("--seed", type=int, default=42)
    tame.add_argument("--out")
    _add_flow_options(tame, EXPERIMENT_OPTIONS)

    lift = commands.add_parser("lift", help="print the cotangent lift of a field")
    lift.add_argument("--field", required=True, help='field "P;Q"')

    commands.add_parser(
        "closed-form", help="check the exponential-integral antiderivative of the example"
    )
    return parser


def _write(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as stream:
            stream.write(text)


def _json(document) -> str:
    """Indented JSON; floats use repr, the shortest decimal that reads back as the same double."""
    return json.dumps(document, indent=2) + "\n"


def _analyze(args) -> int:
    if args.potential is not None:
        F = parse_polynomial(args.potential)
        certificates = analyze_potential(F, source=args.potential, cross_check=args.cross_check)
    else:
        field_ = parse_field(args.field)
        certificates = analyze_field(field_, source=args.field, cross_check=args.cross_check)
    primary = primary_certificate(certificates)
    document = primary.to_dict()
    document["other_lines"] = [c.to_dict() for c in certificates if c is not primary]
    _write(_json(document), args.out)
    if primary.verdict == Verdict.UNSUPPORTED:
        print(f"gradvar: unsupported: {primary.reason}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    return EXIT_OK


def _trajectory_csv(trajectory) -> str:
    buffer = io.StringIO()
    trajectory.to_csv(buffer)
    return buffer.getvalue()


def _flow(args) -> int:
    F = parse_polynomial(args.potential)
    opts = _flow_options(args)
    try:
        trajectory = integrate_flow(F, args.start, args.direction, opts)
    except StepSizeUnderflow as e:
        _write(_trajectory_csv(e.trajectory), args.out)
        raise
    _write(_trajectory_csv(trajectory), args.out)
    logger.info("Termination reason: %s", trajectory.reason.name)
    return EXIT_OK


def _tame(args) -> int:
    F = parse_polynomial(args.potential)
    report = finiteness_experiment(F, args.n_traj, args.n_cuts, args.seed, _flow_options(args))
    _write(_json(report.to_dict()), args.out)
    return EXIT_OK


def _lift(args) -> int:
    h = cotangent_lift(parse_field(args.field))
    _write(format_lift(h, hamiltonian_field(h)) + "\n", None)
    return EXIT_OK


def format_closed_form(cf: SpecialClosedForm) -> str:
    parts = [str(term) for term in cf.terms]
    if cf.ei_coefficient != 0:
        parts.append(
            f"({cf.ei_coefficient})*exp({cf.ei_shift})*Ei1({format_canonical(cf.ei_argument)})"
        )
    return " + ".join(parts)


def _closed_form(args) -> int:
    cf = example_closed_form()
    integrand = HyperExp(RatFun(12, (X + 1) ** 3), poly(2 * X))
    symbolic = verify_closed_form(cf, integrand)
    numeric = quadrature(hyperexp_function(integrand), 0.0, 1.0)
    difference = closed_form_value(cf, 1.0) - closed_form_value(cf, 0.0)
    lines = [
        f"integrand: {integrand}",
        f"antiderivative: {format_closed_form(cf)}",
        f"derivative check: {'passed' if symbolic else 'FAILED'}",
        f"quadrature on [0, 1]: {numeric!r}",
        f"antiderivative difference: {difference!r}",
        f"absolute deviation: {abs(numeric - difference)!r}",
    ]
    _write("\n".join(lines) + "\n", None)
    return EXIT_OK if symbolic else EXIT_NUMERIC


COMMANDS = {
    "analyze": _analyze,
    "flow": _flow,
    "tame": _tame,
    "lift": _lift,
    "closed-form": _closed_form,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    setup_logger(args.verbose, args.debug)
    try:
        return COMMANDS[args.command](args)
    except ExpressionError as e:
        print(f"gradvar: syntax error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FieldError, AlgebraError) as e:
        print(f"gradvar: unsupported: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except FlowError as e:
        print(f"gradvar: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"gradvar: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())
