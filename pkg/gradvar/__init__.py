"""gradvar - Galois obstructions and gradient-flow numerics for planar polynomial fields."""

__version__ = "0.1.0.dev"

from .expr import format_canonical, parse_expression, parse_polynomial
from .flow import FlowOptions, integrate_flow, integrate_flows
from .galois import Verdict, analyze_field, analyze_potential, primary_certificate
from .lift import cotangent_lift, hamiltonian_field
from .tame import count_components, finiteness_experiment, line_intersections, rolle_witness
from .variational import PlanarField, gradient_field, parse_field

__all__ = [
    "FlowOptions",
    "PlanarField",
    "Verdict",
    "analyze_field",
    "analyze_potential",
    "cotangent_lift",
    "count_components",
    "finiteness_experiment",
    "format_canonical",
    "gradient_field",
    "hamiltonian_field",
    "integrate_flow",
    "integrate_flows",
    "line_intersections",
    "parse_expression",
    "parse_field",
    "parse_polynomial",
    "primary_certificate",
    "rolle_witness",
]
