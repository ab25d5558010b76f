"""Problem frontends built on the branch-and-bound engine.

Each frontend wires a ProblemInterface out of zonotope propagation plus the
matching subsolver: convex minimization over a network's output set,
polytope containment and reachability verdicts, range projection, two
networks in series with a noise buffer, and the maximum output difference of
two networks on shared inputs.  Maximization problems negate their objective
and flip the reported bounds back, so results always satisfy
lower_bound <= upper_bound in the problem's own orientation.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import bnb
from .bnb import (DEFAULT_MAX_ITERATIONS, DEFAULT_STOP_FREQUENCY, DEFAULT_STOP_GAP,
                  DEFAULT_TIMEOUT)
from .geometry import Hyperrectangle, Polytope, Zonotope, max_hyperrect_distance
from .propagation import propagate
from .subsolvers import (box_ls_lower_bound, max_polytope_violation, min_distance_lp,
                         min_polytope_violation)

# Verdicts are safety claims: "holds" needs the certified max violation below
# this, and counterexample witnesses must exceed it concretely.  Deliberately
# much tighter than the optimality gap, which only governs termination.
VERDICT_TOL = 1e-9

_NORM_ORDERS = (1.0, 2.0, np.inf)


@dataclass(frozen=True)
class AffineObjective:
    """a . y + b over network outputs y."""

    a: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.ndim != 1:
            raise ValueError("objective direction must be a vector")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self):
        return self.a.shape[0]


@dataclass(frozen=True)
class PolytopeViolationObjective:
    """max_i max(a_i . y - b_i, 0): zero exactly on polytope members."""

    polytope: Polytope

    def __post_init__(self):
        if not isinstance(self.polytope, Polytope):
            raise TypeError("expected a Polytope")

    @property
    def dim(self):
        return self.polytope.dim


@dataclass(frozen=True)
class DistanceObjective:
    """||y - target||_p for p in {1, 2, inf}."""

    target: np.ndarray
    order: float = 2.0

    def __post_init__(self):
        target = np.array(self.target, dtype=float)
        if target.ndim != 1:
            raise ValueError("target must be a vector")
        target.setflags(write=False)
        object.__setattr__(self, "target", target)
        order = float(self.order)
        if order not in _NORM_ORDERS and not np.isinf(order):
            raise ValueError("distance order must be 1, 2, or inf")
        object.__setattr__(self, "order", order)

    @property
    def dim(self):
        return self.target.shape[0]


def objective_value(objective, y):
    """Evaluate an objective at a concrete output point."""
    if isinstance(objective, AffineObjective):
        return float(objective.a @ y + objective.b)
    if isinstance(objective, PolytopeViolationObjective):
        return objective.polytope.violation(y)
    if isinstance(objective, DistanceObjective):
        return float(np.linalg.norm(np.asarray(y, dtype=float) - objective.target,
                                    ord=objective.order))
    raise TypeError(f"unknown objective type {type(objective).__name__}")


def _cell_zonotope(cell):
    return cell.to_zonotope() if isinstance(cell, Hyperrectangle) else cell


def _check_sets(net, input_set, objective=None):
    if not isinstance(input_set, (Hyperrectangle, Zonotope)):
        raise TypeError("input set must be a Hyperrectangle or Zonotope")
    if input_set.dim != net.input_dim:
        raise ValueError(
            f"input set dimension {input_set.dim} does not match network input {net.input_dim}")
    if objective is not None and objective.dim != net.output_dim:
        raise ValueError(
            f"objective dimension {objective.dim} does not match network output {net.output_dim}")


class _ConvexMinimize:
    """min objective(net(x)) over a cell: propagate, then bound the convex
    objective over the output zonotope."""

    def __init__(self, net, objective, ls_tol=1e-6):
        self.net = net
        self.objective = objective
        self.ls_tol = ls_tol

    def split(self, cell):
        return cell.split()

    def lower_bound(self, cell):
        zout = propagate(self.net, _cell_zonotope(cell))
        obj = self.objective
        if isinstance(obj, AffineObjective):
            return zout.support_min(obj.a, obj.b)
        if isinstance(obj, PolytopeViolationObjective):
            return min_polytope_violation(zout, obj.polytope, mode="auto").value
        if obj.order == 2.0:
            return box_ls_lower_bound(zout.generators, zout.center, obj.target,
                                      tol=self.ls_tol).lower
        return min_distance_lp(zout, obj.target, obj.order)

    def upper_bound(self, cell):
        x = cell.center
        return objective_value(self.objective, self.net.evaluate(x)), x


class _ViolationMaximize:
    """max violation as minimization of its negation."""

    def __init__(self, net, polytope):
        self.net = net
        self.polytope = polytope

    def split(self, cell):
        return cell.split()

    def lower_bound(self, cell):
        zout = propagate(self.net, _cell_zonotope(cell))
        return -max_polytope_violation(zout, self.polytope)

    def upper_bound(self, cell):
        x = cell.center
        return -self.polytope.violation(self.net.evaluate(x)), x


class _DifferenceMaximize:
    """max ||net1(x) - net2(x)||_p as minimization of its negation.

    The cell bound propagates each network independently and takes the
    analytic maximum distance between the two bounding boxes.
    """

    def __init__(self, spec):
        self.spec = spec

    def split(self, cell):
        return cell.split()

    def lower_bound(self, cell):
        zcell = _cell_zonotope(cell)
        box1 = propagate(self.spec.first, zcell).bounding_box()
        box2 = propagate(self.spec.second, zcell).bounding_box()
        distance, _, _ = max_hyperrect_distance(box1, box2, self.spec.order)
        return -distance

    def upper_bound(self, cell):
        x = cell.center
        diff = self.spec.first.evaluate(x) - self.spec.second.evaluate(x)
        return -float(np.linalg.norm(diff, ord=self.spec.order)), x


@dataclass(frozen=True)
class NoiseBufferProblem:
    """Two networks in series with a perturbation buffer between them.

    The optimized quantity is min over x in the input set and delta in the
    buffer of objective(second(first(x) + delta)).
    """

    first: object
    second: object
    buffer: Zonotope
    objective: object

    def __post_init__(self):
        if not isinstance(self.buffer, Zonotope):
            raise TypeError("buffer must be a Zonotope")
        if self.first.output_dim != self.second.input_dim:
            raise ValueError("first network's outputs must feed the second network")
        if self.buffer.dim != self.first.output_dim:
            raise ValueError("buffer dimension must match the first network's output")
        if self.objective.dim != self.second.output_dim:
            raise ValueError("objective dimension must match the second network's output")


@dataclass(frozen=True)
class NetworkDifferenceProblem:
    """Max output difference of two networks over shared inputs."""

    first: object
    second: object
    order: float = np.inf

    def __post_init__(self):
        if self.first.input_dim != self.second.input_dim:
            raise ValueError("networks must share their input dimension")
        if self.first.output_dim != self.second.output_dim:
            raise ValueError("networks must share their output dimension")
        order = float(self.order)
        if not (order >= 1.0 or np.isinf(order)):
            raise ValueError("norm order must satisfy p >= 1 (inf allowed)")
        object.__setattr__(self, "order", order)


@dataclass(frozen=True)
class NoiseBufferWitness:
    input: np.ndarray
    perturbation: np.ndarray


class _NoiseBufferMinimize:
    """Outer problem over first-network inputs; bounds come from recursive
    exact solves of the second-stage problem over buffered zonotopes."""

    def __init__(self, spec, stop_gap, inner_max_iterations, deadline, ls_tol):
        self.spec = spec
        self.inner_gap = stop_gap / 2.0
        self.inner_max_iterations = inner_max_iterations
        self.deadline = deadline
        self.inner_problem = _ConvexMinimize(spec.second, spec.objective, ls_tol=ls_tol)

    def _remaining(self):
        return max(self.deadline - time.monotonic(), 1e-3)

    def _inner_solve(self, region):
        return bnb.solve(self.inner_problem, region, stop_gap=self.inner_gap,
                         max_iterations=self.inner_max_iterations, timeout=self._remaining())

    def split(self, cell):
        return cell.split()

    def lower_bound(self, cell):
        first_out = propagate(self.spec.first, _cell_zonotope(cell))
        buffered = first_out.minkowski_sum(self.spec.buffer)
        # Valid even when the inner solve exhausts its budget: best_lower
        # underestimates the minimum over a superset of the reachable points.
        return self._inner_solve(buffered).best_lower

    def upper_bound(self, cell):
        x = cell.center
        mid = self.spec.first.evaluate(x)
        inner = self._inner_solve(self.spec.buffer.translate(mid))
        witness = NoiseBufferWitness(x, np.asarray(inner.witness, dtype=float) - mid)
        return inner.best_upper, witness


@dataclass
class QueryResult:
    """Uniform result record for every problem kind.

    Bounds are reported in the problem's own orientation (for maximization
    problems lower_bound is the best value attained and upper_bound the
    certified bound).  `value` is the objective value attained by
    witness_input; at optimal status it is within the gap of the optimum.
    """

    kind: str
    status: str  # "optimal" | "timeout" | "max_iter"
    lower_bound: float
    upper_bound: float
    value: float
    witness_input: np.ndarray | None
    witness_output: np.ndarray | None
    iterations: int
    subproblems_expanded: int
    wall_time_seconds: float
    verdict: str | None = None
    witness_perturbation: np.ndarray | None = None

    @property
    def gap(self):
        return self.upper_bound - self.lower_bound


def _budget_kwargs(stop_gap, stop_frequency, max_iterations, timeout, callback):
    return dict(stop_gap=stop_gap, stop_frequency=stop_frequency,
                max_iterations=max_iterations, timeout=timeout, callback=callback)


def minimize_convex(net, input_set, objective, *, stop_gap=DEFAULT_STOP_GAP,
                    stop_frequency=DEFAULT_STOP_FREQUENCY,
                    max_iterations=DEFAULT_MAX_ITERATIONS, timeout=DEFAULT_TIMEOUT,
                    callback=None, kind="min-convex"):
    """Certified minimum of a convex objective over the network's output set."""
    _check_sets(net, input_set, objective)
    problem = _ConvexMinimize(net, objective, ls_tol=min(stop_gap / 4.0, 1e-6))
    st = bnb.solve(problem, input_set,
                   **_budget_kwargs(stop_gap, stop_frequency, max_iterations, timeout, callback))
    witness = np.asarray(st.witness, dtype=float)
    return QueryResult(kind, st.status, st.best_lower, st.best_upper, st.best_upper,
                       witness, net.evaluate(witness), st.iterations, st.expansions,
                       st.wall_time)


def lower_bound_convex(net, cell, objective, *, ls_tol=1e-6):
    """Sound lower bound of the objective over one cell (propagate + subsolver)."""
    _check_sets(net, cell, objective)
    return float(_ConvexMinimize(net, objective, ls_tol=ls_tol).lower_bound(cell))


def upper_bound_center(net, cell, objective):
    """Objective value at the cell center plus the center itself."""
    _check_sets(net, cell, objective)
    value, x = _ConvexMinimize(net, objective).upper_bound(cell)
    return float(value), x


def project_onto_range(net, input_set, target, order=2.0, *, stop_gap=DEFAULT_STOP_GAP,
                       stop_frequency=DEFAULT_STOP_FREQUENCY,
                       max_iterations=DEFAULT_MAX_ITERATIONS, timeout=DEFAULT_TIMEOUT,
                       callback=None):
    """Distance from a target point to the network's reachable output set."""
    return minimize_convex(net, input_set, DistanceObjective(target, order),
                           stop_gap=stop_gap, stop_frequency=stop_frequency,
                           max_iterations=max_iterations, timeout=timeout,
                           callback=callback, kind="project")


def check_containment(net, input_set, polytope, *, stop_gap=DEFAULT_STOP_GAP,
                      stop_frequency=DEFAULT_STOP_FREQUENCY,
                      max_iterations=DEFAULT_MAX_ITERATIONS, timeout=DEFAULT_TIMEOUT,
                      callback=None):
    """Is every reachable output inside the polytope?

    Maximizes the violation.  "holds" requires the certified maximum
    violation below VERDICT_TOL (not merely below stop_gap); "violated"
    requires a concrete witness whose violation exceeds VERDICT_TOL.  The
    solve stops as soon as either side is decided.
    """
    _check_sets(net, input_set)
    if polytope.dim != net.output_dim:
        raise ValueError("polytope dimension must match the network output")
    problem = _ViolationMaximize(net, polytope)
    st = bnb.solve(problem, input_set, stop_gap=min(stop_gap, VERDICT_TOL / 2.0),
                   stop_frequency=stop_frequency, max_iterations=max_iterations,
                   timeout=timeout, callback=callback,
                   stop_upper_at=-VERDICT_TOL, stop_lower_at=-VERDICT_TOL)
    achieved = -st.best_upper
    certified = -st.best_lower
    witness = np.asarray(st.witness, dtype=float)
    if achieved >= VERDICT_TOL:
        verdict, status = "violated", "optimal"
        witness_input = witness
    elif certified < VERDICT_TOL:
        verdict, status = "holds", "optimal"
        witness_input = None
    else:
        verdict = "unknown"
        status = st.status if st.status in ("timeout", "max_iter") else "optimal"
        witness_input = witness
    output = net.evaluate(witness_input) if witness_input is not None else None
    return QueryResult("polytope-contained", status, achieved, certified, achieved,
                       witness_input, output, st.iterations, st.expansions, st.wall_time,
                       verdict=verdict)


def check_reachability(net, input_set, polytope, *, stop_gap=DEFAULT_STOP_GAP,
                       stop_frequency=DEFAULT_STOP_FREQUENCY,
                       max_iterations=DEFAULT_MAX_ITERATIONS, timeout=DEFAULT_TIMEOUT,
                       callback=None):
    """Does some reachable output land inside the polytope?

    Minimizes the violation.  "reachable" needs a concrete input whose output
    violation is zero at tolerance VERDICT_TOL (the witness is returned);
    "unreachable" needs the certified minimum violation strictly above it.
    """
    _check_sets(net, input_set)
    if polytope.dim != net.output_dim:
        raise ValueError("polytope dimension must match the network output")
    problem = _ConvexMinimize(net, PolytopeViolationObjective(polytope))
    st = bnb.solve(problem, input_set, stop_gap=min(stop_gap, VERDICT_TOL / 2.0),
                   stop_frequency=stop_frequency, max_iterations=max_iterations,
                   timeout=timeout, callback=callback,
                   stop_upper_at=VERDICT_TOL, stop_lower_at=VERDICT_TOL)
    witness = np.asarray(st.witness, dtype=float)
    if st.best_upper <= VERDICT_TOL:
        verdict, status = "reachable", "optimal"
        witness_input = witness
    elif st.best_lower > VERDICT_TOL:
        verdict, status = "unreachable", "optimal"
        witness_input = None
    else:
        verdict = "unknown"
        status = st.status if st.status in ("timeout", "max_iter") else "optimal"
        witness_input = witness
    output = net.evaluate(witness_input) if witness_input is not None else None
    return QueryResult("polytope-reach", status, st.best_lower, st.best_upper, st.best_upper,
                       witness_input, output, st.iterations, st.expansions, st.wall_time,
                       verdict=verdict)


def solve_noise_buffer(problem, input_set, *, stop_gap=DEFAULT_STOP_GAP,
                       stop_frequency=DEFAULT_STOP_FREQUENCY,
                       max_iterations=DEFAULT_MAX_ITERATIONS, timeout=DEFAULT_TIMEOUT,
                       inner_max_iterations=5000, callback=None):
    """Certified minimum for two networks in series with a noise buffer.

    Cell lower bounds solve the second stage over the Minkowski sum of the
    first network's propagated output set and the buffer; upper bounds hold
    the first-stage input at the cell center and optimize the perturbation
    exactly.  Inner solves run at stop_gap / 2 so point cells close the outer
    gap.
    """
    if not isinstance(problem, NoiseBufferProblem):
        raise TypeError("expected a NoiseBufferProblem")
    _check_sets(problem.first, input_set)
    deadline = time.monotonic() + timeout
    inner = _NoiseBufferMinimize(problem, stop_gap, inner_max_iterations, deadline,
                                 ls_tol=min(stop_gap / 8.0, 1e-6))
    st = bnb.solve(inner, input_set,
                   **_budget_kwargs(stop_gap, stop_frequency, max_iterations, timeout, callback))
    witness = st.witness
    output = problem.second.evaluate(
        problem.first.evaluate(witness.input) + witness.perturbation)
    return QueryResult("noise-buffer", st.status, st.best_lower, st.best_upper, st.best_upper,
                       witness.input, output, st.iterations, st.expansions, st.wall_time,
                       witness_perturbation=witness.perturbation)


def max_network_difference(problem, input_set, *, stop_gap=DEFAULT_STOP_GAP,
                           stop_frequency=DEFAULT_STOP_FREQUENCY,
                           max_iterations=DEFAULT_MAX_ITERATIONS, timeout=DEFAULT_TIMEOUT,
                           callback=None):
    """Certified maximum p-norm difference of two networks on shared inputs."""
    if not isinstance(problem, NetworkDifferenceProblem):
        raise TypeError("expected a NetworkDifferenceProblem")
    _check_sets(problem.first, input_set)
    engine = _DifferenceMaximize(problem)
    st = bnb.solve(engine, input_set,
                   **_budget_kwargs(stop_gap, stop_frequency, max_iterations, timeout, callback))
    witness = np.asarray(st.witness, dtype=float)
    achieved = -st.best_upper
    certified = -st.best_lower
    diff = problem.first.evaluate(witness) - problem.second.evaluate(witness)
    return QueryResult("net-diff", st.status, achieved, certified, achieved,
                       witness, diff, st.iterations, st.expansions, st.wall_time)
