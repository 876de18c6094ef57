import pytest
from jax import config

from gradvar.expr import parse_polynomial
from gradvar.flow import FlowOptions, integrate_flow
from gradvar.utils import Direction
from gradvar.variational import gradient_field

config.update("jax_enable_x64", True)

EXAMPLE_POTENTIAL = "1/3*x^3+1/2*x^2+(x+y)^2*y^2+1/4*y^4"


@pytest.fixture(scope="session")
def example_potential():
    """F = x^3/3 + x^2/2 + (x+y)^2 y^2 + y^4/4."""
    return parse_polynomial(EXAMPLE_POTENTIAL)


@pytest.fixture(scope="session")
def example_field(example_potential):
    return gradient_field(example_potential)


@pytest.fixture(scope="session")
def axis_trajectory(example_potential):
    """Descent from (0.5, 0) along the invariant line y = 0 up to t = 1."""
    return integrate_flow(
        example_potential, (0.5, 0.0), Direction.DESCENT, FlowOptions(t_max=1.0)
    )


@pytest.fixture(scope="session")
def bent_trajectory(example_potential):
    """Descent from (0.5, 0.5), off the invariant line."""
    return integrate_flow(
        example_potential, (0.5, 0.5), Direction.DESCENT, FlowOptions(t_max=2.0)
    )
