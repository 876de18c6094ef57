import io
import logging

import jax
import numpy as np
import pytest
from scipy import special

from gradvar.algebra import X, RatFun, poly
from gradvar.expr import parse_polynomial
from gradvar.flow import (
    DomainError,
    FlowOptions,
    MaxSubdivisions,
    TerminationReason,
    _compiled,
    closed_form_value,
    exp_integral_e1,
    exp_integral_ei,
    hyperexp_function,
    integrate_flow,
    integrate_flows,
    quadrature,
    real_e1,
)
from gradvar.galois import HyperExp, example_closed_form
from gradvar.utils import Direction

EI_VALUES = {1.0: 1.895117816355937, 2.0: 4.954234356001890}


def axis_solution(t):
    """x(t) of the descent along y = 0 from x = 1/2: x/(x+1) = exp(-t)/3."""
    r = np.exp(-t) / 3
    return r / (1 - r)


def test_descent_along_invariant_line(axis_trajectory):
    assert axis_trajectory.reason == TerminationReason.T_MAX
    assert axis_trajectory.ts[-1] == 1.0
    assert pytest.approx(axis_trajectory.end[0], abs=1e-6) == axis_solution(1.0)
    assert np.max(np.abs(axis_trajectory.zs[:, 1])) < 1e-12
    assert np.all(np.diff(axis_trajectory.ts) > 0)


def test_dense_output(axis_trajectory):
    assert np.allclose(axis_trajectory.evaluate(axis_trajectory.ts), axis_trajectory.zs, atol=1e-14)
    t = np.linspace(0.0, 1.0, 11)
    assert np.allclose(axis_trajectory.evaluate(t)[:, 0], axis_solution(t), atol=1e-6)
    grid_t, grid_z = axis_trajectory.dense_grid(4)
    assert len(grid_t) == 4 * (len(axis_trajectory) - 1) + 1
    assert np.array_equal(grid_z[::4], axis_trajectory.zs)


def test_energy_decreases(example_potential, axis_trajectory, bent_trajectory):
    for trajectory in (axis_trajectory, bent_trajectory):
        energy = trajectory.energy(example_potential)
        assert np.all(np.diff(energy) <= 1e-12)
        assert trajectory.direction == Direction.DESCENT


def test_energy_increases_along_ascent(example_potential):
    trajectory = integrate_flow(
        example_potential, (0.3, 0.2), Direction.ASCENT, FlowOptions(t_max=0.5)
    )
    assert trajectory.direction == Direction.ASCENT
    energy = trajectory.energy(example_potential)
    assert np.all(np.diff(energy) >= -1e-12)
    assert energy[-1] > energy[0]


def test_invariant_line_is_kept(example_potential):
    trajectory = integrate_flow(example_potential, (0.5, 0.0))
    assert trajectory.reason == TerminationReason.T_MAX
    assert trajectory.ts[-1] == 10.0
    assert np.max(np.abs(trajectory.zs[:, 1])) <= 1e-10
    t = np.linspace(0.0, 10.0, 101)
    assert np.max(np.abs(trajectory.evaluate(t)[:, 1])) <= 1e-10


def test_critical_start(example_potential):
    trajectory = integrate_flow(example_potential, (0.0, 0.0))
    assert trajectory.reason == TerminationReason.CRITICAL_POINT
    assert len(trajectory) == 1
    assert trajectory.n_accepted == 0


def test_ascent_leaves_the_box(example_potential):
    # along y = 0 the ascent blows up at t = ln 3
    trajectory = integrate_flow(example_potential, (0.5, 0.0), Direction.ASCENT)
    assert trajectory.reason == TerminationReason.BOX_EXIT
    assert abs(trajectory.end[0]) > 1e6
    assert pytest.approx(trajectory.ts[-1], abs=1e-4) == np.log(3.0)


def test_step_limit(example_potential):
    trajectory = integrate_flow(example_potential, (0.5, 0.5), opts=FlowOptions(max_steps=5))
    assert trajectory.reason == TerminationReason.STEP_LIMIT
    assert trajectory.n_accepted == 5
    assert len(trajectory) == 6


def test_invalid_start(example_potential):
    with pytest.raises(ValueError):
        integrate_flow(example_potential, (np.nan, 0.0))
    with pytest.raises(ValueError):
        integrate_flow(example_potential, (0.0, 0.0, 1.0))


def test_tolerance_halving_converges(example_potential, bent_trajectory):
    opts = FlowOptions(t_max=2.0)
    halved = integrate_flow(example_potential, (0.5, 0.5), opts=opts.halved())
    assert halved.reason == bent_trajectory.reason == TerminationReason.T_MAX
    assert np.max(np.abs(halved.end - bent_trajectory.end)) < 10 * opts.halved().rtol


def test_batch_matches_single(example_potential):
    opts = FlowOptions(t_max=1.0, batch_size=2)
    starts = [(0.5, 0.0), (0.5, 0.5), (-0.3, 0.2)]
    directions = [Direction.DESCENT, Direction.DESCENT, Direction.ASCENT]
    batch = integrate_flows(example_potential, starts, directions, opts)
    assert len(batch) == 3
    for start, direction, trajectory in zip(starts, directions, batch):
        single = integrate_flow(example_potential, start, direction, opts)
        assert trajectory.reason == single.reason
        assert trajectory.direction == direction
        assert np.allclose(trajectory.end, single.end, rtol=1e-7, atol=1e-10)
    with pytest.raises(ValueError):
        integrate_flows(example_potential, starts, directions[:2], opts)


def test_pool_refills_finished_lanes(example_potential):
    opts = FlowOptions(t_max=2.0, batch_size=2, segment_steps=3)
    starts = [(0.0, 0.0), (0.5, 0.5), (0.5, 0.0), (0.5, 0.0), (-0.3, 0.2)]
    directions = [Direction.DESCENT, Direction.DESCENT, Direction.ASCENT, Direction.DESCENT, Direction.DESCENT]
    batch = integrate_flows(example_potential, starts, directions, opts)
    assert [trajectory.reason for trajectory in batch] == [
        TerminationReason.CRITICAL_POINT,
        TerminationReason.T_MAX,
        TerminationReason.BOX_EXIT,
        TerminationReason.T_MAX,
        TerminationReason.T_MAX,
    ]
    for start, direction, trajectory in zip(starts, directions, batch):
        single = integrate_flow(example_potential, start, direction, opts)
        assert trajectory.n_accepted == single.n_accepted
        assert np.allclose(trajectory.ts, single.ts, rtol=1e-7, atol=1e-12)
        assert np.allclose(trajectory.zs, single.zs, rtol=1e-7, atol=1e-10)
    assert integrate_flows(example_potential, np.zeros((0, 2)), opts=opts) == []


def test_debug_logging_enabled_after_first_call(example_potential, caplog):
    opts = FlowOptions(t_max=0.25, display_frequency=1)
    quiet = _compiled(example_potential, opts)
    with caplog.at_level(logging.DEBUG, logger="gradvar.flow"):
        assert _compiled(example_potential, opts) is not quiet
        integrate_flow(example_potential, (0.5, 0.5), opts=opts)
        jax.effects_barrier()
    assert any(record.getMessage().startswith("step") for record in caplog.records)


def test_to_csv(axis_trajectory):
    buffer = io.StringIO()
    axis_trajectory.to_csv(buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "t,x,y"
    assert len(lines) == len(axis_trajectory) + 1
    t, x, y = (float(v) for v in lines[-1].split(","))
    assert t == 1.0 and x == axis_trajectory.end[0] and y == 0.0


def test_flow_options_validation():
    with pytest.raises(ValueError):
        FlowOptions(rtol=0.0)
    with pytest.raises(ValueError):
        FlowOptions(t_max=float("inf"))
    with pytest.raises(ValueError):
        FlowOptions(max_steps=0)
    with pytest.raises(ValueError):
        FlowOptions(segment_steps=0)
    with pytest.raises(ValueError):
        FlowOptions(min_factor=1.5)
    halved = FlowOptions().halved()
    assert halved.rtol == 5e-10 and halved.atol == 5e-13


def test_exp_integral_ei():
    for z, expected in EI_VALUES.items():
        assert pytest.approx(exp_integral_ei(z), rel=1e-14) == expected
    for z in (1e-3, 0.1, 0.5, 3.0, 10.0, 39.9, 40.1, 55.0, 200.0):
        assert pytest.approx(exp_integral_ei(z), rel=1e-12) == special.expi(z)
    with pytest.raises(DomainError):
        exp_integral_ei(0.0)
    with pytest.raises(DomainError):
        exp_integral_ei(-1.0)


def test_exp_integral_e1():
    for z in (1e-3, 0.1, 0.5, 1.0, 1.5, 3.0, 10.0, 50.0, 300.0):
        assert pytest.approx(exp_integral_e1(z), rel=1e-12) == special.exp1(z)
    with pytest.raises(DomainError):
        exp_integral_e1(0.0)
    assert real_e1(-2.0) == -exp_integral_ei(2.0)
    with pytest.raises(DomainError):
        real_e1(0.0)


def test_quadrature_matches_closed_form():
    integrand = HyperExp(RatFun(12, (X + 1) ** 3), poly(2 * X))
    closed_form = example_closed_form()
    for a, b in ((0.0, 1.0), (-0.5, 0.5), (1.0, 3.0)):
        numeric = quadrature(hyperexp_function(integrand), a, b)
        exact = closed_form_value(closed_form, b) - closed_form_value(closed_form, a)
        assert abs(numeric - exact) < 1e-9
    assert pytest.approx(quadrature(hyperexp_function(integrand), 0.0, 1.0), abs=0.02) == 10.25


def test_quadrature_errors():
    with pytest.raises(MaxSubdivisions):
        quadrature(lambda x: np.sin(50 * x), 0.0, 10.0, limit=3)
    with pytest.raises(ValueError):
        quadrature(np.exp, 1.0, 1.0)


def test_parse_then_integrate():
    F = parse_polynomial("x^2+y^2")
    trajectory = integrate_flow(F, (1.0, 1.0), opts=FlowOptions(t_max=1.0))
    assert np.allclose(trajectory.end, np.exp(-2.0), atol=1e-8)
