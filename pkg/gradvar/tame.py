"""Empirical tame-topology checks on numerically integrated gradient trajectories.

Everything here is numeric evidence, not a certificate: counts come from
dense output sampled on a sub-grid of every accepted step.
"""

import logging
from dataclasses import dataclass, field
from enum import IntEnum, auto
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from sympy import Poly

from gradvar.algebra import X, Y, poly2, to_rational
from gradvar.expr import format_canonical
from gradvar.flow import (
    FlowOptions,
    TerminationReason,
    Trajectory,
    coefficient_grid,
    compile_potential,
    evaluate_grid,
    integrate_flows,
)
from gradvar.solver_log import experiment_final_log
from gradvar.utils import Direction, TimingData, rationalize, time_code

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
ROOT_XTOL = 1e-12
CONTAINMENT_TOL = 1e-12
TOUCH_TOL = 1e-9
STABILITY_THRESHOLD = 0.99


class EndpointsOffLeaf(ValueError):
    """The endpoints of a Rolle path are not verified on one trajectory."""


class Relation(IntEnum):
    GT = auto()
    LT = auto()
    EQ = auto()

    @property
    def symbol(self) -> str:
        return {Relation.GT: ">", Relation.LT: "<", Relation.EQ: "="}[self]


@dataclass(frozen=True)
class SemialgebraicPredicate:
    """{(x, y) : poly(x, y) relation 0} for a nonzero rational polynomial."""

    poly: Poly
    relation: Relation
    grid: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "poly", poly2(self.poly))
        object.__setattr__(self, "relation", Relation(self.relation))
        if self.poly.is_zero:
            raise ValueError("a semialgebraic cut needs a nonzero polynomial")
        object.__setattr__(self, "grid", coefficient_grid(self.poly))

    @classmethod
    def line(cls, a, b, c, relation: Relation = Relation.EQ) -> "SemialgebraicPredicate":
        """a*x + b*y + c relation 0."""
        a, b, c = (to_rational(v) for v in (a, b, c))
        if a == 0 and b == 0:
            raise ValueError("a line needs (a, b) != (0, 0)")
        return cls(poly2(a * X + b * Y + c), relation)

    def values(self, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=float)
        return np.broadcast_to(evaluate_grid(self.grid, zs[..., 0], zs[..., 1]), zs.shape[:-1])

    def holds(self, values) -> np.ndarray:
        values = np.asarray(values)
        if self.relation == Relation.GT:
            return values > 0
        if self.relation == Relation.LT:
            return values < 0
        return values == 0

    def __str__(self):
        return f"{format_canonical(self.poly)} {self.relation.symbol} 0"


class ComponentCount(NamedTuple):
    """
    Components of a trajectory inside a cut.

    ``tangential`` counts the components, already included in ``count``,
    that come from the trajectory touching the boundary without crossing it.
    """

    count: int
    intervals: Tuple[Tuple[float, float], ...]
    tangential: int = 0


class LineIntersections(NamedTuple):
    """Transversal crossings, tangential touches and the containment flag."""

    count: int
    points: Tuple[Tuple[float, float, float], ...]
    tangential: Tuple[Tuple[float, float, float], ...]
    contained: bool


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Inclusive index ranges of the maximal True runs of mask."""
    padded = np.concatenate([[False], np.asarray(mask, dtype=bool), [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def _touch_candidates(w: np.ndarray, tol: float) -> np.ndarray:
    """
    Interior local minima k of w (w[k-1] > w[k] <= w[k+1]) that may dip to
    tol between samples.

    A quadratic reaching zero between neighbouring samples rises from w[k]
    by at least w[k] on one side, so minima with flatter neighbours are
    skipped unless they are already within tol.
    """
    if len(w) < 3:
        return np.zeros(0, dtype=int)
    mid, left, right = w[1:-1], w[:-2], w[2:]
    rise = np.maximum(left - mid, right - mid)
    inner = (mid < left) & (mid <= right) & ((rise >= mid) | (mid <= tol))
    return np.flatnonzero(inner) + 1


def _phi(traj: Trajectory, cut: SemialgebraicPredicate):
    return lambda t: float(cut.values(traj.evaluate(t)))


def _root(phi, lo: float, hi: float) -> float:
    return float(optimize.brentq(phi, lo, hi, xtol=ROOT_XTOL))


def _minimum(function, lo: float, hi: float) -> Tuple[float, float]:
    result = optimize.minimize_scalar(
        function, bounds=(lo, hi), method="bounded", options={"xatol": ROOT_XTOL}
    )
    return float(result.x), float(result.fun)


def _sample(traj: Trajectory, subdivisions: int, t_range=None, samples=None):
    t, z = traj.dense_grid(subdivisions) if samples is None else samples
    if t_range is not None:
        lo, hi = max(t_range[0], t[0]), min(t_range[1], t[-1])
        if lo > hi:
            return np.zeros(0), np.zeros((0, 2))
        t = np.unique(np.concatenate([[lo], t[(t > lo) & (t < hi)], [hi]]))
        z = traj.evaluate(t)
    return t, z


def _count_on_grid(t: np.ndarray, v: np.ndarray, relation: Relation) -> ComponentCount:
    """Component count from samples only, no refinement."""
    if relation == Relation.EQ:
        sign = np.sign(v)
        intervals = [(t[a], t[b]) for a, b in _runs(sign == 0)]
        for k in np.flatnonzero(sign[:-1] * sign[1:] < 0):
            fraction = v[k] / (v[k] - v[k + 1])
            root = t[k] + fraction * (t[k + 1] - t[k])
            intervals.append((root, root))
    else:
        inside = v > 0 if relation == Relation.GT else v < 0
        intervals = [(t[a], t[b]) for a, b in _runs(inside)]
    intervals = tuple(sorted((float(a), float(b)) for a, b in intervals))
    return ComponentCount(len(intervals), intervals)


def count_components(
    traj: Trajectory,
    cut: SemialgebraicPredicate,
    t_range: Optional[Tuple[float, float]] = None,
    refine: bool = True,
    subdivisions: int = 8,
    samples: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> ComponentCount:
    """
    Maximal parameter intervals on which the trajectory satisfies the cut.

    With refine, crossing parameters are located by Brent's method on the
    dense output, and dips between samples that reach the boundary are
    detected by bounded minimization around local sample minima. Such dips
    split a strict component in two, or add a point component to an
    equality cut, and are tallied in ``tangential``.

    Parameters
    ----------
    traj : Trajectory
    cut : SemialgebraicPredicate
    t_range : (float, float), optional
        Restrict counting to this parameter window.
    refine : bool
    subdivisions : int
        Dense-output samples per accepted step.
    samples : (t, z), optional
        Precomputed ``traj.dense_grid(subdivisions)``.
    """
    t, z = _sample(traj, subdivisions, t_range, samples)
    if len(t) == 0:
        return ComponentCount(0, ())
    v = cut.values(z)
    if not refine or len(t) == 1:
        return _count_on_grid(t, v, cut.relation)
    phi = _phi(traj, cut)
    if cut.relation == Relation.EQ:
        return _count_equality(t, v, phi)
    s = 1.0 if cut.relation == Relation.GT else -1.0
    signed = s * v
    intervals, dips = [], 0
    for a, b in _runs(signed > 0):
        if a == 0:
            start = t[0]
        elif signed[a - 1] == 0:
            start = t[a - 1]
        else:
            start = _root(phi, t[a - 1], t[a])
        pieces = [start]
        for k in _touch_candidates(signed[a : b + 1], 0.0) + a:
            if a < k < b:
                tau, low = _minimum(lambda u: s * phi(u), t[k - 1], t[k + 1])
                if low <= 0:
                    pieces.extend([tau, tau])
                    dips += 1
        if b == len(t) - 1:
            end = t[-1]
        elif signed[b + 1] == 0:
            end = t[b + 1]
        else:
            end = _root(phi, t[b], t[b + 1])
        pieces.append(end)
        intervals.extend(zip(pieces[::2], pieces[1::2]))
    intervals = tuple((float(lo), float(hi)) for lo, hi in intervals)
    return ComponentCount(len(intervals), intervals, dips)


def _count_equality(t: np.ndarray, v: np.ndarray, phi) -> ComponentCount:
    sign = np.sign(v)
    intervals, touches = [], 0
    for a, b in _runs(sign == 0):
        intervals.append((t[a], t[b]))
        if 0 < a and b < len(t) - 1 and sign[a - 1] == sign[b + 1]:
            touches += 1
    for k in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        root = _root(phi, t[k], t[k + 1])
        intervals.append((root, root))
    for k in _touch_candidates(np.abs(v), CONTAINMENT_TOL):
        if sign[k] != 0 and sign[k - 1] == sign[k] == sign[k + 1]:
            tau, low = _minimum(lambda u: abs(phi(u)), t[k - 1], t[k + 1])
            if low <= CONTAINMENT_TOL:
                intervals.append((tau, tau))
                touches += 1
    intervals = tuple(sorted((float(a), float(b)) for a, b in intervals))
    return ComponentCount(len(intervals), intervals, touches)


def line_intersections(
    traj: Trajectory, line: Tuple[float, float, float], subdivisions: int = 8
) -> LineIntersections:
    """
    Crossings of the trajectory with a*x + b*y + c = 0.

    Sign changes of the line function are refined by Brent's method. Local
    minima of its absolute value that come within TOUCH_TOL of zero without a
    sign change are reported as tangential touches. A trajectory on which
    the line function never exceeds CONTAINMENT_TOL lies in the line.
    """
    cut = SemialgebraicPredicate.line(*line)
    t, z = traj.dense_grid(subdivisions)
    v = cut.values(z)
    if np.max(np.abs(v)) <= CONTAINMENT_TOL:
        return LineIntersections(0, (), (), True)
    phi = _phi(traj, cut)

    def at(tau: float) -> Tuple[float, float, float]:
        x, y = traj.evaluate(tau)
        return float(tau), float(x), float(y)

    sign = np.sign(v)
    nonzero = np.flatnonzero(sign)
    points, touches = [], []
    if nonzero[0] > 0:
        points.append(at(t[0]))
    for i, j in zip(nonzero[:-1], nonzero[1:]):
        if j == i + 1:
            if sign[i] != sign[j]:
                points.append(at(_root(phi, t[i], t[j])))
        elif sign[i] != sign[j]:
            points.append(at(t[i + 1]))
        else:
            touches.append(at(t[i + 1]))
    if nonzero[-1] < len(t) - 1:
        points.append(at(t[nonzero[-1] + 1]))
    for k in _touch_candidates(np.abs(v), TOUCH_TOL):
        if sign[k] != 0 and sign[k - 1] == sign[k] == sign[k + 1]:
            tau, low = _minimum(lambda u: abs(phi(u)), t[k - 1], t[k + 1])
            if low < TOUCH_TOL:
                touches.append(at(tau))
    points.sort()
    touches.sort()
    return LineIntersections(len(points), tuple(points), tuple(touches), False)


@dataclass(frozen=True)
class PolygonalPath:
    """
    Piecewise-linear path through vertices, parametrized on [0, 1] with every
    segment taking an equal share of the parameter.
    """

    vertices: np.ndarray

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 2:
            raise ValueError("a path needs at least two planar vertices")
        if not np.all(np.isfinite(vertices)):
            raise ValueError("path vertices must be finite")
        object.__setattr__(self, "vertices", vertices)

    @property
    def n_segments(self) -> int:
        return len(self.vertices) - 1

    @property
    def endpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.vertices[0], self.vertices[-1]

    def segment(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        """Start point and constant velocity of segment i."""
        start = self.vertices[i]
        return start, (self.vertices[i + 1] - start) * self.n_segments

    def point(self, t: float) -> np.ndarray:
        i = min(int(t * self.n_segments), self.n_segments - 1)
        start, velocity = self.segment(i)
        return start + (t - i / self.n_segments) * velocity


class RolleWitness(NamedTuple):
    t: float
    point: Tuple[float, float]
    residual: float


class RolleOutcome(NamedTuple):
    """
    Result of a Rolle check.

    ``applicable`` is False when the path endpoints are not verified on one
    leaf; ``degenerate`` means the tangency function vanishes along the
    whole path.
    """

    applicable: bool
    witnesses: Tuple[RolleWitness, ...]
    degenerate: bool
    reason: str


def distance_to_leaf(point, traj: Trajectory, subdivisions: int = 16) -> float:
    """Distance from a point to the dense output of a trajectory."""
    point = np.asarray(point, dtype=float)
    t, z = traj.dense_grid(subdivisions)
    distances = np.linalg.norm(z - point, axis=1)
    k = int(np.argmin(distances))
    best = float(distances[k])
    if best == 0.0 or len(t) == 1:
        return best
    lo, hi = t[max(k - 1, 0)], t[min(k + 1, len(t) - 1)]
    _, refined = _minimum(lambda u: float(np.linalg.norm(traj.evaluate(u) - point)), lo, hi)
    return min(best, refined)


def tangency_function(F: Poly, start: np.ndarray, step: np.ndarray, velocity: np.ndarray):
    """s(u) = F_y * velocity_x - F_x * velocity_y at start + u * step."""
    potential = compile_potential(poly2(F))

    def s(u):
        gx, gy = potential.gradient(start[0] + u * step[0], start[1] + u * step[1])
        return gy * velocity[0] - gx * velocity[1]

    return s


def rolle_witness(
    path: PolygonalPath,
    F: Poly,
    tol: float = 1e-8,
    leaf: Optional[Trajectory] = None,
    strict: bool = False,
    leaf_tol: float = 1e-6,
    samples_per_segment: int = 256,
) -> RolleOutcome:
    """
    Points of a path tangent to the gradient foliation of F.

    The tangency function s(t) = F_y(path) * path_x' - F_x(path) * path_y'
    is sampled on every segment; sign changes are refined by Brent's method
    and exact zeros are kept. When max |s| <= tol the whole path is tangent
    and the outcome is degenerate.

    Raises
    ------
    EndpointsOffLeaf
        With strict=True, when the endpoints are not within leaf_tol of leaf.
    """
    if leaf is None:
        reason = "no leaf given to verify the path endpoints"
    else:
        distances = [distance_to_leaf(p, leaf) for p in path.endpoints]
        reason = "" if max(distances) <= leaf_tol else (
            f"endpoints are {distances[0]:.3e} and {distances[1]:.3e} away from the leaf"
        )
    if reason:
        if strict:
            raise EndpointsOffLeaf(reason)
        return RolleOutcome(False, (), False, reason)

    n = path.n_segments
    u = np.linspace(0.0, 1.0, samples_per_segment + 1)
    witnesses, largest = [], 0.0
    for i in range(n):
        start, velocity = path.segment(i)
        s = tangency_function(F, start, velocity / n, velocity)
        values = np.asarray(s(u), dtype=float) * np.ones_like(u)
        largest = max(largest, float(np.max(np.abs(values))))
        roots = [u[k] for k in np.flatnonzero(values == 0)]
        for k in np.flatnonzero(values[:-1] * values[1:] < 0):
            roots.append(float(optimize.brentq(s, u[k], u[k + 1], xtol=1e-15)))
        for root in roots:
            t = (i + root) / n
            witnesses.append(
                RolleWitness(float(t), tuple(float(c) for c in path.point(t)), abs(float(s(root))))
            )
    if largest <= tol:
        return RolleOutcome(True, (), True, "the path is tangent to the foliation everywhere")
    witnesses = tuple(sorted((w for w in witnesses if w.residual < tol), key=lambda w: w.t))
    return RolleOutcome(True, witnesses, False, "")


@dataclass
class TamenessReport:
    """
    Component counts of a finiteness experiment.

    ``counts[i][j]`` is the number of components of trajectory i cut by cut
    j, or None when trajectory i failed at either tolerance.
    ``tangential[i][j]`` is how many of those components come from the
    trajectory touching the cut boundary without crossing it.
    """

    potential: str
    seed: int
    n_traj: int
    n_cuts: int
    counts: List[Optional[List[int]]]
    counts_halved: List[Optional[List[int]]]
    b0: int
    stable: bool
    agreement: float
    tangential: List[Optional[List[int]]] = field(default_factory=list)
    disagreements: List[Dict[str, int]] = field(default_factory=list)
    failures: List[Dict] = field(default_factory=list)
    sample_sizes: List[int] = field(default_factory=list)
    cuts: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "potential": self.potential,
            "seed": self.seed,
            "n_traj": self.n_traj,
            "n_cuts": self.n_cuts,
            "cuts": self.cuts,
            "counts": self.counts,
            "counts_halved": self.counts_halved,
            "tangential": self.tangential,
            "b0": self.b0,
            "stable": self.stable,
            "agreement": self.agreement,
            "disagreements": self.disagreements,
            "failures": self.failures,
            "sample_sizes": self.sample_sizes,
            "note": "empirical, not certified",
        }


def random_cuts(rng: np.random.Generator, n_cuts: int, box: float) -> List[SemialgebraicPredicate]:
    """Alternating random lines and half-planes with small-denominator coefficients."""
    cuts = []
    for k in range(n_cuts):
        a, b = (rationalize(v, 100) for v in rng.normal(size=2))
        if a == 0 and b == 0:
            b = 1
        c = rationalize(rng.uniform(-box, box), 100)
        relation = Relation.EQ if k % 2 == 0 else Relation.GT
        cuts.append(SemialgebraicPredicate.line(a, b, c, relation))
    return cuts


# Experiment trajectories stop once max(|x|, |y|) exceeds 100.
EXPERIMENT_OPTIONS = FlowOptions(box_half_width=100.0)


def finiteness_experiment(
    F: Poly,
    n_traj: int,
    n_cuts: int,
    seed: int,
    opts: FlowOptions = EXPERIMENT_OPTIONS,
    start_box: float = 2.0,
    direction: Direction = Direction.DESCENT,
    starts=None,
    cuts: Optional[Sequence[SemialgebraicPredicate]] = None,
    subdivisions: int = 8,
) -> TamenessReport:
    """
    Count components of seeded random trajectories against seeded random cuts.

    Every trajectory gets its own generator spawned from the seed, so the
    report depends only on the inputs. Trajectories are integrated at opts
    and at opts.halved() and counted with count_components, crossings and
    tangential dips refined; the pair agreement decides stability. A
    trajectory whose integration fails at either tolerance is recorded in
    failures and left out of the counts.

    Parameters
    ----------
    F : Poly
    n_traj, n_cuts : int
        At least one each; ignored for the given starts or cuts.
    seed : int
    opts : FlowOptions
        Defaults to EXPERIMENT_OPTIONS.
    start_box : float
        Starts and line offsets are drawn from [-start_box, start_box].
    starts : array, optional
        Explicit start points instead of random ones.
    cuts : sequence of SemialgebraicPredicate, optional
        Explicit cuts instead of random ones.
    """
    if starts is None and n_traj < 1 or cuts is None and n_cuts < 1:
        raise ValueError("n_traj and n_cuts must be at least 1")
    F = poly2(F)
    trajectory_seeds, cut_seed = np.random.SeedSequence(seed).spawn(2)
    if starts is None:
        starts = np.array(
            [
                np.random.default_rng(s).uniform(-start_box, start_box, size=2)
                for s in trajectory_seeds.spawn(n_traj)
            ]
        )
    starts = np.asarray(starts, dtype=float).reshape(-1, 2)
    if cuts is None:
        cuts = random_cuts(np.random.default_rng(cut_seed), n_cuts, start_box)
    cuts = list(cuts)

    timing = TimingData()
    with time_code(timing, "Total experiment time", is_main_timer=True):
        with time_code(timing, "Integration"):
            runs = integrate_flows(F, starts, direction, opts)
            runs_halved = integrate_flows(F, starts, direction, opts.halved())
        counts, counts_halved, tangential = [], [], []
        failures, disagreements, sample_sizes = [], [], []
        agree = compared = 0
        with time_code(timing, "Counting"):
            for i, (traj, traj_halved) in enumerate(zip(runs, runs_halved)):
                sample_sizes.append(len(traj))
                failed = [
                    (label, run)
                    for label, run in (("tol", traj), ("tol/2", traj_halved))
                    if run.reason == TerminationReason.STEP_SIZE_UNDERFLOW
                ]
                if failed:
                    for label, run in failed:
                        failures.append(
                            {
                                "trajectory": i,
                                "tolerance": label,
                                "reason": run.reason.name,
                                "t": float(run.ts[-1]),
                            }
                        )
                    counts.append(None)
                    counts_halved.append(None)
                    tangential.append(None)
                    continue
                row = _count_row(traj, cuts, subdivisions)
                row_halved = _count_row(traj_halved, cuts, subdivisions)
                for j, (a, b) in enumerate(zip(row, row_halved)):
                    compared += 1
                    if a.count == b.count:
                        agree += 1
                    else:
                        disagreements.append(
                            {"trajectory": i, "cut": j, "count": a.count, "count_halved": b.count}
                        )
                counts.append([c.count for c in row])
                counts_halved.append([c.count for c in row_halved])
                tangential.append([c.tangential for c in row])

    recorded = [c for row in counts if row is not None for c in row]
    agreement = agree / compared if compared else 1.0
    report = TamenessReport(
        potential=format_canonical(F),
        seed=int(seed),
        n_traj=len(starts),
        n_cuts=len(cuts),
        counts=counts,
        counts_halved=counts_halved,
        b0=max(recorded, default=0),
        stable=agreement >= STABILITY_THRESHOLD,
        agreement=agreement,
        tangential=tangential,
        disagreements=disagreements,
        failures=failures,
        sample_sizes=sample_sizes,
        cuts=[str(cut) for cut in cuts],
    )
    experiment_final_log(report, timing)
    return report


def _count_row(
    traj: Trajectory, cuts: Sequence[SemialgebraicPredicate], subdivisions: int
) -> List[ComponentCount]:
    samples = traj.dense_grid(subdivisions)
    return [count_components(traj, cut, subdivisions=subdivisions, samples=samples) for cut in cuts]
