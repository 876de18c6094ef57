"""Numerics: adaptive gradient-flow integration, exponential integrals and quadrature."""

import functools
import logging
from dataclasses import dataclass, replace
from enum import IntEnum, auto
from typing import Callable, List, NamedTuple, Sequence, Tuple, Union

import chex
import jax
import jax.numpy as jnp
import numpy as np
from jax import config
from scipy import integrate
from sympy import Poly

from gradvar.algebra import X, Y, RatFun, poly2
from gradvar.galois import HyperExp, SpecialClosedForm
from gradvar.loop_utils import while_loop
from gradvar.solver_log import flow_final_log, jax_debug_log
from gradvar.utils import Direction, TimingData, time_code

config.update("jax_enable_x64", True)

logger = logging.getLogger(__name__)


class FlowError(ArithmeticError):
    """Base class for numeric failures."""


class StepSizeUnderflow(FlowError):
    """The step-size controller shrank the step below resolution."""

    def __init__(self, message: str, trajectory: "Trajectory"):
        super().__init__(message)
        self.trajectory = trajectory


class DomainError(FlowError):
    """A special function was evaluated outside its domain."""


class MaxSubdivisions(FlowError):
    """Adaptive quadrature ran out of subdivisions before reaching the tolerance."""


class TerminationReason(IntEnum):
    """
    TerminationReason explains why an integration stopped.

    Attributes
    ----------
    RUNNING : Int
        Internal value while the loop is active.
    CRITICAL_POINT : Int
        The gradient norm fell below the critical-point threshold.
    BOX_EXIT : Int
        The trajectory left the bounding box.
    T_MAX : Int
        The flow parameter reached t_max.
    STEP_LIMIT : Int
        The preallocated step buffer is full.
    STEP_SIZE_UNDERFLOW : Int
        Rejected steps drove the step size below resolution.
    """

    RUNNING = auto()
    CRITICAL_POINT = auto()
    BOX_EXIT = auto()
    T_MAX = auto()
    STEP_LIMIT = auto()
    STEP_SIZE_UNDERFLOW = auto()


@dataclass(frozen=True)
class FlowOptions:
    """
    Tolerances and guards of the gradient-flow integrator.

    Attributes
    ----------
    rtol, atol : float
        Relative and absolute local error tolerances.
    critical_threshold : float
        Stop when the gradient norm drops below this value.
    box_half_width : float
        Stop when max(|x|, |y|) exceeds this value.
    t_max : float
        Final value of the flow parameter.
    max_steps : int
        Capacity of the accepted-step buffer.
    display_frequency : int
        Debug log every this many accepted steps.
    batch_size : int
        Number of lanes of the vmapped integrator.
    segment_steps : int
        Loop iterations a batch runs before finished lanes are swapped for
        pending starts.
    """

    rtol: float = 1e-9
    atol: float = 1e-12
    critical_threshold: float = 1e-10
    box_half_width: float = 1e6
    t_max: float = 10.0
    max_steps: int = 4096
    display_frequency: int = 100
    batch_size: int = 32
    segment_steps: int = 64
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 10.0

    def __post_init__(self):
        for name in ("rtol", "atol", "critical_threshold", "box_half_width", "t_max"):
            value = getattr(self, name)
            if not value > 0 or not np.isfinite(value):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        for name in ("max_steps", "display_frequency", "batch_size", "segment_steps"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")
        if not 0 < self.min_factor < 1 < self.max_factor:
            raise ValueError("step factors must satisfy 0 < min_factor < 1 < max_factor")

    def halved(self) -> "FlowOptions":
        return replace(self, rtol=self.rtol / 2, atol=self.atol / 2)


# Dormand-Prince 5(4) tableau
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)
# continuous extension
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423


def coefficient_grid(p: Poly) -> Tuple[Tuple[float, ...], ...]:
    """Float coefficients c[i][j] of x**i * y**j."""
    p = poly2(p)
    if p.is_zero:
        return ((0.0,),)
    grid = np.zeros((p.degree(X) + 1, p.degree(Y) + 1))
    for (i, j), coefficient in p.terms():
        grid[i, j] = float(coefficient)
    return tuple(tuple(row) for row in grid.tolist())


def _horner(coefficients, t):
    return functools.reduce(lambda acc, c: acc * t + c, reversed(coefficients), 0.0)


def evaluate_grid(grid, x, y):
    """Nested Horner evaluation; works on floats, numpy arrays and jax tracers."""
    return _horner([_horner(row, y) for row in grid], x)


@dataclass(frozen=True)
class CompiledPotential:
    """Horner grids of F and its gradient."""

    value: tuple
    grad_x: tuple
    grad_y: tuple

    def __call__(self, x, y):
        return evaluate_grid(self.value, x, y)

    def gradient(self, x, y):
        return evaluate_grid(self.grad_x, x, y), evaluate_grid(self.grad_y, x, y)


@functools.lru_cache(maxsize=64)
def compile_potential(F: Poly) -> CompiledPotential:
    F = poly2(F)
    return CompiledPotential(
        coefficient_grid(F), coefficient_grid(F.diff(X)), coefficient_grid(F.diff(Y))
    )


@chex.dataclass
class FlowState:
    """
    Carried state of the integration loop.

    Sample k lives at ts[k], zs[k]; dense[k] holds the continuous-extension
    coefficients of the step from sample k to sample k + 1.
    """

    t: jnp.ndarray
    z: jnp.ndarray
    h: jnp.ndarray
    f: jnp.ndarray
    n_accepted: jnp.ndarray
    n_rejected: jnp.ndarray
    reason: jnp.ndarray
    ts: jnp.ndarray
    zs: jnp.ndarray
    dense: jnp.ndarray


def _int(value):
    return jnp.asarray(value, dtype=jnp.int32)


def _float(value):
    return jnp.asarray(value, dtype=jnp.float64)


def _rms(v):
    return jnp.sqrt(jnp.mean(v**2))


class _Integrator(NamedTuple):
    run: Callable
    init_batch: Callable
    advance_batch: Callable
    loop_cap: int


def _compiled(F: Poly, opts: FlowOptions) -> _Integrator:
    return _integrator(poly2(F), opts, logger.isEnabledFor(logging.DEBUG))


@functools.lru_cache(maxsize=32)
def _integrator(F: Poly, opts: FlowOptions, log_steps: bool) -> _Integrator:
    """
    Jitted integrators for (F, opts).

    run integrates one start to termination. init_batch and advance_batch
    work on a vmapped FlowState; advance_batch runs at most segment_steps
    loop iterations per lane. log_steps traces the per-step debug log into
    the loop body.
    """
    potential = compile_potential(F)
    max_steps = int(opts.max_steps)
    loop_cap = 8 * max_steps + 64

    def vector_field(z, sign):
        gx, gy = potential.gradient(z[0], z[1])
        return sign * jnp.stack([_float(gx), _float(gy)])

    def initial_step(z0, f0, sign):
        sk = opts.atol + opts.rtol * jnp.abs(z0)
        d0, d1 = _rms(z0 / sk), _rms(f0 / sk)
        h0 = jnp.where((d0 < 1e-5) | (d1 < 1e-5), 1e-6, 0.01 * d0 / d1)
        f1 = vector_field(z0 + h0 * f0, sign)
        d2 = _rms((f1 - f0) / sk) / h0
        scale = jnp.maximum(d1, d2)
        h1 = jnp.where(
            scale <= 1e-15, jnp.maximum(1e-6, h0 * 1e-3), (0.01 / scale) ** (1 / 5)
        )
        return jnp.minimum(jnp.minimum(100 * h0, h1), opts.t_max)

    def init(z0, sign):
        z0 = _float(z0)
        f0 = vector_field(z0, sign)
        reason = jnp.where(
            jnp.linalg.norm(f0) < opts.critical_threshold,
            int(TerminationReason.CRITICAL_POINT),
            jnp.where(
                jnp.max(jnp.abs(z0)) > opts.box_half_width,
                int(TerminationReason.BOX_EXIT),
                int(TerminationReason.RUNNING),
            ),
        )
        return FlowState(
            t=_float(0.0),
            z=z0,
            h=_float(initial_step(z0, f0, sign)),
            f=f0,
            n_accepted=_int(0),
            n_rejected=_int(0),
            reason=_int(reason),
            ts=jnp.zeros(max_steps + 1),
            zs=jnp.zeros((max_steps + 1, 2)).at[0].set(z0),
            dense=jnp.zeros((max_steps, 5, 2)),
        )

    def step(state: FlowState, sign) -> FlowState:
        final_step = state.h >= opts.t_max - state.t
        h = jnp.minimum(state.h, opts.t_max - state.t)
        z, k1 = state.z, state.f
        k2 = vector_field(z + h * (A21 * k1), sign)
        k3 = vector_field(z + h * (A31 * k1 + A32 * k2), sign)
        k4 = vector_field(z + h * (A41 * k1 + A42 * k2 + A43 * k3), sign)
        k5 = vector_field(z + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), sign)
        k6 = vector_field(
            z + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), sign
        )
        z_new = z + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = vector_field(z_new, sign)

        error = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sk = opts.atol + opts.rtol * jnp.maximum(jnp.abs(z), jnp.abs(z_new))
        err = _rms(error / sk)
        finite = jnp.isfinite(err) & jnp.all(jnp.isfinite(z_new)) & jnp.all(jnp.isfinite(k7))
        err = jnp.where(finite, err, jnp.inf)
        accept = err <= 1.0

        factor = jnp.where(err == 0.0, opts.max_factor, opts.safety * err ** (-1 / 5))
        factor = jnp.clip(factor, opts.min_factor, opts.max_factor)
        factor = jnp.where(accept, factor, jnp.minimum(factor, 1.0))
        h_next = h * factor

        t_new = jnp.where(final_step, opts.t_max, state.t + h)
        ydiff = z_new - z
        bspl = h * k1 - ydiff
        coefficients = jnp.stack(
            [
                z,
                ydiff,
                bspl,
                ydiff - h * k7 - bspl,
                h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
            ]
        )
        # A rejected step writes into the next free slot, which a later step overwrites.
        index = state.n_accepted
        dense = state.dense.at[index].set(coefficients)
        ts = state.ts.at[index + 1].set(t_new)
        zs = state.zs.at[index + 1].set(z_new)

        n_accepted = state.n_accepted + accept.astype(jnp.int32)
        stop = jnp.where(
            jnp.linalg.norm(k7) < opts.critical_threshold,
            int(TerminationReason.CRITICAL_POINT),
            jnp.where(
                jnp.max(jnp.abs(z_new)) > opts.box_half_width,
                int(TerminationReason.BOX_EXIT),
                jnp.where(
                    final_step,
                    int(TerminationReason.T_MAX),
                    jnp.where(
                        n_accepted >= max_steps,
                        int(TerminationReason.STEP_LIMIT),
                        int(TerminationReason.RUNNING),
                    ),
                ),
            ),
        )
        underflow = h_next <= 16 * jnp.finfo(jnp.float64).eps * jnp.maximum(1.0, jnp.abs(state.t))
        reason = jnp.where(
            accept,
            stop,
            jnp.where(
                underflow, int(TerminationReason.STEP_SIZE_UNDERFLOW), int(TerminationReason.RUNNING)
            ),
        )

        if log_steps:
            jax.lax.cond(
                accept & (n_accepted % opts.display_frequency == 0),
                lambda: jax_debug_log(
                    "step {:6d} | t={:.6e} h={:.3e} x={:.10g} y={:.10g}",
                    n_accepted,
                    t_new,
                    h,
                    z_new[0],
                    z_new[1],
                    logger=logger,
                ),
                lambda: None,
            )

        return FlowState(
            t=_float(jnp.where(accept, t_new, state.t)),
            z=jnp.where(accept, z_new, z),
            h=_float(h_next),
            f=jnp.where(accept, k7, k1),
            n_accepted=_int(n_accepted),
            n_rejected=_int(state.n_rejected + (~accept).astype(jnp.int32)),
            reason=_int(reason),
            ts=ts,
            zs=zs,
            dense=dense,
        )

    def advance(state, sign, max_iter):
        _, state = while_loop(
            lambda s: s.reason == int(TerminationReason.RUNNING),
            lambda s: step(s, sign),
            state,
            max_iter,
            jit=True,
        )
        return state

    def run(z0, sign):
        return advance(init(z0, sign), sign, loop_cap)

    def advance_segment(state, sign):
        return advance(state, sign, int(opts.segment_steps))

    return _Integrator(
        run=jax.jit(run),
        init_batch=jax.jit(jax.vmap(init)),
        advance_batch=jax.jit(jax.vmap(advance_segment)),
        loop_cap=loop_cap,
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Samples of one gradient-flow integration with dense output.

    Attributes
    ----------
    direction : Direction
    ts : np.ndarray
        Strictly increasing flow parameter, one entry per accepted step plus
        the start.
    zs : np.ndarray
        Points (x, y), shape (len(ts), 2).
    dense : np.ndarray
        Continuous-extension coefficients, shape (len(ts) - 1, 5, 2).
    reason : TerminationReason
    n_accepted, n_rejected : int
        Step-controller counts.
    """

    direction: Direction
    ts: np.ndarray
    zs: np.ndarray
    dense: np.ndarray
    reason: TerminationReason
    n_accepted: int
    n_rejected: int

    def __len__(self):
        return len(self.ts)

    @property
    def end(self) -> np.ndarray:
        return self.zs[-1]

    def evaluate(self, t):
        """Dense output at parameter values t inside [ts[0], ts[-1]]."""
        t = np.asarray(t, dtype=float)
        if len(self.ts) == 1:
            return np.broadcast_to(self.zs[0], t.shape + (2,)).copy()
        k = np.clip(np.searchsorted(self.ts, t, side="right") - 1, 0, len(self.ts) - 2)
        theta = ((t - self.ts[k]) / (self.ts[k + 1] - self.ts[k]))[..., None]
        theta1 = 1.0 - theta
        c = self.dense[k]
        return c[..., 0, :] + theta * (
            c[..., 1, :] + theta1 * (c[..., 2, :] + theta * (c[..., 3, :] + theta1 * c[..., 4, :]))
        )

    def dense_grid(self, subdivisions: int = 8) -> Tuple[np.ndarray, np.ndarray]:
        """Parameters and points on a uniform sub-grid of every step, samples included."""
        if len(self.ts) == 1:
            return self.ts.copy(), self.zs.copy()
        fractions = np.arange(subdivisions) / subdivisions
        t = (self.ts[:-1, None] + fractions[None, :] * np.diff(self.ts)[:, None]).ravel()
        t = np.append(t, self.ts[-1])
        z = self.evaluate(t)
        z[::subdivisions] = self.zs
        return t, z

    def energy(self, F: Poly) -> np.ndarray:
        """F evaluated at every sample."""
        return np.asarray(compile_potential(poly2(F))(self.zs[:, 0], self.zs[:, 1]))

    def to_csv(self, stream):
        """Header t,x,y and one row per sample at 17 significant digits."""
        np.savetxt(
            stream,
            np.column_stack([self.ts, self.zs]),
            fmt="%.17g",
            delimiter=",",
            header="t,x,y",
            comments="",
        )


def _to_trajectory(state, direction: Direction) -> Trajectory:
    n = int(state.n_accepted)
    reason = TerminationReason(int(state.reason))
    if reason == TerminationReason.RUNNING:
        reason = TerminationReason.STEP_LIMIT
    return Trajectory(
        direction=direction,
        ts=np.asarray(state.ts[: n + 1], dtype=float),
        zs=np.asarray(state.zs[: n + 1], dtype=float),
        dense=np.asarray(state.dense[:n], dtype=float),
        reason=reason,
        n_accepted=n,
        n_rejected=int(state.n_rejected),
    )


def integrate_flow(
    F: Poly,
    start: Sequence[float],
    direction: Direction = Direction.DESCENT,
    opts: FlowOptions = FlowOptions(),
) -> Trajectory:
    """
    Integrate x' = +/- grad F with an adaptive Dormand-Prince 5(4) pair.

    Parameters
    ----------
    F : Poly
        Potential in (x, y).
    start : (float, float)
        Finite starting point.
    direction : Direction
        ASCENT follows grad F, DESCENT follows -grad F.
    opts : FlowOptions

    Returns
    -------
    Trajectory
        Stopped at a critical point, on leaving the box, at t_max, or when the
        step buffer is full.

    Raises
    ------
    StepSizeUnderflow
        Carrying the trajectory up to the last accepted step.
    """
    start = np.asarray(start, dtype=float)
    if start.shape != (2,) or not np.all(np.isfinite(start)):
        raise ValueError(f"start must be a finite point (x, y), got {start}")
    run = _compiled(F, opts).run
    timing = TimingData()
    with time_code(timing, "Integration", is_main_timer=True):
        state = jax.device_get(run(jnp.asarray(start), direction.sign))
    trajectory = _to_trajectory(state, direction)
    flow_final_log(trajectory, timing)
    if trajectory.reason == TerminationReason.STEP_SIZE_UNDERFLOW:
        raise StepSizeUnderflow(
            f"step size underflow at t={trajectory.ts[-1]:.17g}", trajectory
        )
    return trajectory


def integrate_flows(
    F: Poly,
    starts,
    directions: Union[Direction, Sequence[Direction]] = Direction.DESCENT,
    opts: FlowOptions = FlowOptions(),
) -> List[Trajectory]:
    """
    Batched integrate_flow on a fixed pool of vmapped lanes.

    The pool advances segment_steps loop iterations at a time. Lanes that
    stopped are read out and refilled with pending starts, so one slow
    trajectory holds up a single lane rather than a whole batch.

    Failures are not raised; they show up as STEP_SIZE_UNDERFLOW reasons.
    Results are ordered like the starts.
    """
    starts = np.asarray(starts, dtype=float).reshape(-1, 2)
    if isinstance(directions, Direction):
        directions = [directions] * len(starts)
    if len(directions) != len(starts):
        raise ValueError("one direction per start is required")
    if len(starts) == 0:
        return []
    integrator = _compiled(F, opts)
    signs = np.array([direction.sign for direction in directions], dtype=float)
    batch = int(opts.batch_size)
    idle = int(TerminationReason.STEP_LIMIT)

    trajectories: List[Trajectory] = [None] * len(starts)
    pending = list(range(len(starts)))
    owner = [None] * batch
    spent = np.zeros(batch, dtype=int)
    lane_signs = np.ones(batch)
    pool = None
    timing = TimingData()
    with time_code(timing, "Batched integration", is_main_timer=True):
        while True:
            free = [k for k in range(batch) if owner[k] is None]
            if pending and free:
                taken = pending[: len(free)]
                del pending[: len(taken)]
                z0 = np.repeat(starts[taken[:1]], batch, axis=0)
                s0 = np.repeat(signs[taken[:1]], batch)
                z0[: len(taken)], s0[: len(taken)] = starts[taken], signs[taken]
                fresh = _host(integrator.init_batch(jnp.asarray(z0), jnp.asarray(s0)))
                if pool is None:
                    pool = jax.tree_util.tree_map(np.copy, fresh)
                    pool.reason[:] = idle
                for j, (k, i) in enumerate(zip(free, taken)):
                    _set_lane(pool, k, fresh, j)
                    owner[k], spent[k], lane_signs[k] = i, 0, signs[i]
            if all(i is None for i in owner):
                break
            pool = _host(integrator.advance_batch(pool, jnp.asarray(lane_signs)))
            spent += int(opts.segment_steps)
            for k, i in enumerate(owner):
                if i is None:
                    continue
                running = pool.reason[k] == int(TerminationReason.RUNNING)
                if not running or spent[k] >= integrator.loop_cap:
                    lane = jax.tree_util.tree_map(lambda a: np.array(a[k]), pool)
                    trajectories[i] = _to_trajectory(lane, directions[i])
                    owner[k] = None
                    pool.reason[k] = idle
    logger.debug(
        "integrated %d trajectories on %d lanes in %.3f s",
        len(starts),
        batch,
        timing.get_block_time("Batched integration"),
    )
    return trajectories


def _host(state: FlowState) -> FlowState:
    """Writable numpy copy of a device state."""
    return jax.tree_util.tree_map(np.array, jax.device_get(state))


def _set_lane(pool: FlowState, k: int, source: FlowState, j: int):
    for name in FlowState.__dataclass_fields__:
        getattr(pool, name)[k] = getattr(source, name)[j]


def exp_integral_ei(z: float) -> float:
    """
    Real exponential integral Ei(z) for z > 0.

    Power series gamma + ln z + sum z**n/(n*n!) up to z = 40, asymptotic
    series e**z/z * sum n!/z**n above.
    """
    z = float(z)
    if not z > 0:
        raise DomainError(f"Ei is evaluated for z > 0 only, got {z}")
    eps = np.finfo(float).eps
    if z <= 40.0:
        term, total, n = 1.0, 0.0, 1
        while True:
            term *= z / n
            contribution = term / n
            total += contribution
            if contribution < eps * total:
                break
            n += 1
        return float(np.euler_gamma + np.log(z) + total)
    term, total = 1.0, 1.0
    for n in range(1, 100):
        previous = term
        term *= n / z
        if term < eps * total or term > previous:
            break
        total += term
    return float(np.exp(z) / z * total)


def exp_integral_e1(z: float) -> float:
    """
    Exponential integral E1(z) for z > 0.

    Series -gamma - ln z - sum (-z)**n/(n*n!) for z <= 1, Lentz continued
    fraction above.
    """
    z = float(z)
    if not z > 0:
        raise DomainError(f"E1 is evaluated for z > 0 only, got {z}")
    eps = np.finfo(float).eps
    if z <= 1.0:
        term, total = 1.0, 0.0
        for n in range(1, 200):
            term *= -z / n
            contribution = term / n
            total += contribution
            if abs(contribution) < eps * abs(total):
                break
        return float(-np.euler_gamma - np.log(z) - total)
    tiny = np.finfo(float).tiny
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return float(h * np.exp(-z))


def quadrature(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, limit: int = 200) -> float:
    """
    Adaptive Gauss-Kronrod quadrature of f over [a, b].

    Raises
    ------
    MaxSubdivisions
        When the subdivision limit is hit or the error estimate exceeds tol.
    """
    if not a < b:
        raise ValueError(f"quadrature needs a < b, got [{a}, {b}]")
    result = integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=limit, full_output=1)
    value, abserr, info = result[0], result[1], result[2]
    if info["last"] >= limit or abserr > tol:
        message = result[3] if len(result) > 3 else "error estimate above tolerance"
        raise MaxSubdivisions(f"{message} (estimate {abserr:.3e} > {tol:.3e})")
    return float(value)


def ratfun_value(r: RatFun, x: float) -> float:
    num = [float(c) for c in r.num.all_coeffs()]
    den = [float(c) for c in r.den.all_coeffs()]
    return float(np.polyval(num, x) / np.polyval(den, x))


def hyperexp_function(h: HyperExp) -> Callable[[float], float]:
    """Numeric x -> A(x)*exp(g(x))."""
    g = [float(c) for c in h.g.all_coeffs()]
    return lambda x: ratfun_value(h.A, x) * float(np.exp(np.polyval(g, x)))


def real_e1(u: float) -> float:
    """E1 on the real line, taking Re E1(u) = -Ei(-u) for u < 0."""
    if u > 0:
        return exp_integral_e1(u)
    if u < 0:
        return -exp_integral_ei(-u)
    raise DomainError("E1 has a logarithmic singularity at 0")


def closed_form_value(cf: SpecialClosedForm, x: float) -> float:
    """Real value of a SpecialClosedForm at x."""
    total = sum(hyperexp_function(term)(x) for term in cf.terms)
    if cf.ei_coefficient != 0:
        u = float(np.polyval([float(c) for c in cf.ei_argument.all_coeffs()], x))
        total += float(cf.ei_coefficient) * float(np.exp(float(cf.ei_shift))) * real_e1(u)
    return float(total)
