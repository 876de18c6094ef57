import jax.numpy as jnp
import pytest
from sympy import Rational

from gradvar.loop_utils import while_loop
from gradvar.utils import Direction, TimingData, rationalize, time_code


def test_direction():
    assert Direction.parse(" Descent ") == Direction.DESCENT
    assert Direction.parse("ascent").sign == 1.0
    assert Direction.DESCENT.sign == -1.0
    with pytest.raises(ValueError):
        Direction.parse("sideways")


def test_rationalize():
    assert rationalize(0.333333, 100) == Rational(1, 3)
    assert rationalize(-1.25) == Rational(-5, 4)


def test_time_code():
    timing = TimingData()
    with pytest.raises(ValueError):
        timing.get_main_elapsed_time()
    with time_code(timing, "total", is_main_timer=True):
        with time_code(timing, "inner"):
            pass
        assert timing.get_main_elapsed_time() >= 0.0
    with time_code(timing, "inner"):
        pass
    assert set(timing) == {"total", "inner"}
    assert timing.get_block_time("inner") >= 0.0
    assert timing.get_block_time("missing") == 0.0


def test_bounded_while_loop():
    """Both implementations stop on the predicate or at the iteration cap."""
    for jit in (True, False):
        iterations, value = while_loop(lambda v: v < 10, lambda v: v + 3, jnp.asarray(0), 100, jit=jit)
        assert int(iterations) == 4 and int(value) == 12
        iterations, value = while_loop(lambda v: v < 10, lambda v: v + 1, jnp.asarray(0), 5, jit=jit)
        assert int(iterations) == 5 and int(value) == 5
