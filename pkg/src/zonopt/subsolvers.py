"""Bound computations used inside branch-and-bound cells.

Everything here works on the reframed problem over zonotope coefficients:
a point of the output set is G @ x + c with x in the unit box, so convex
objectives over the output set become small box-constrained programs.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import Polytope, Zonotope
from .simplex import LinearProgram, LpSolution, simplex_lp  # noqa: F401  (re-exported)


@dataclass(frozen=True)
class BoxLsResult:
    """Certified bracket for min ||G x + c - target||_2 over the unit box."""

    lower: float
    upper: float
    coefficients: np.ndarray
    converged: bool
    iterations: int


def _spectral_sq_upper(matrix):
    """Cheap rigorous upper bound on the squared spectral norm."""
    if matrix.size == 0:
        return 0.0
    return min(
        float(np.square(matrix).sum()),
        float(np.abs(matrix).sum(axis=0).max() * np.abs(matrix).sum(axis=1).max()),
    )


def _power_iteration_sq(matrix, steps=100, seed=7):
    """Estimate the squared spectral norm by power iteration on G^T G."""
    k = matrix.shape[1]
    if k == 0 or matrix.size == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(k)
    vec /= np.linalg.norm(vec)
    gram = matrix.T @ matrix
    estimate = float(vec @ gram @ vec)
    for _ in range(steps):
        nxt = gram @ vec
        norm = np.linalg.norm(nxt)
        if norm <= 0.0:
            return 0.0
        vec = nxt / norm
        estimate = float(vec @ gram @ vec)
    return estimate


def box_ls_lower_bound(generators, center, target, tol=1e-8, max_iterations=500):
    """Bracket the minimum Euclidean distance from a zonotope to a point.

    Projected gradient descent on f(x) = 0.5 ||G x + c - target||^2 over the
    unit box, starting at x = 0 with step 1/L.  Each iterate yields a valid
    upper bound (a feasible point) and, through first-order convexity, a valid
    lower bound

        f(x) >= f(xh) + grad(xh) . (x - xh)

    whose box minimum is a support-function evaluation.  Both bounds are
    therefore sound even when the iteration cap is hit; `converged` reports
    whether the bracket closed to tol.
    """
    generators = np.asarray(generators, dtype=float)
    center = np.asarray(center, dtype=float)
    target = np.asarray(target, dtype=float)
    if generators.ndim != 2 or generators.shape[0] != center.shape[0]:
        raise ValueError("generators must have one row per center entry")
    if target.shape != center.shape:
        raise ValueError("target dimension mismatch")

    lipschitz = max(min(_power_iteration_sq(generators) * (1.0 + 1e-6),
                        _spectral_sq_upper(generators)), 1e-30)
    step = 1.0 / lipschitz
    x = np.zeros(generators.shape[1])
    best_lower = 0.0
    best_upper = np.inf
    best_x = x.copy()
    iterations = 0
    converged = False
    for iterations in range(1, max_iterations + 1):
        misfit = generators @ x + center - target
        value = 0.5 * float(misfit @ misfit)
        grad = generators.T @ misfit
        # Box minimum of the tangent plane at x: value - grad.x - ||grad||_1.
        tangent_min = value - float(grad @ x) - float(np.abs(grad).sum())
        lower = float(np.sqrt(max(2.0 * tangent_min, 0.0)))
        upper = float(np.sqrt(2.0 * value))
        if lower > best_lower:
            best_lower = lower
        if upper < best_upper:
            best_upper = upper
            best_x = x.copy()
        if best_upper - best_lower <= tol:
            converged = True
            break
        x = np.clip(x - step * grad, -1.0, 1.0)
    best_lower = min(best_lower, best_upper)
    return BoxLsResult(best_lower, best_upper, best_x, converged, iterations)


@dataclass(frozen=True)
class ViolationBound:
    """Lower bound on min-over-zonotope polytope violation.

    `quick` is the analytic bound from per-halfspace supports; `exact` is the
    LP optimum over the zonotope, computed per the requested mode.
    """

    quick: float
    exact: float | None

    @property
    def value(self):
        return self.quick if self.exact is None else self.exact


def _check_pair(zono, poly):
    if not isinstance(zono, Zonotope):
        raise TypeError("expected a Zonotope")
    if not isinstance(poly, Polytope):
        raise TypeError("expected a Polytope")
    if zono.dim != poly.dim:
        raise ValueError("zonotope and polytope dimension mismatch")


def min_polytope_violation(zono, poly, mode="auto"):
    """Bound min over the zonotope of max_i max(a_i . z - b_i, 0).

    The quick bound maximizes, over halfspaces, the support minimum of the
    violated direction: if some halfspace is violated by every member, the
    minimum violation is at least that margin.  A quick bound of 0 is
    inconclusive (members may violate different halfspaces), so mode "auto"
    then solves the exact epigraph LP; "exact" always solves it; "quick"
    never does.
    """
    _check_pair(zono, poly)
    if mode not in ("auto", "quick", "exact"):
        raise ValueError("mode must be auto, quick, or exact")
    margins = poly.A @ zono.center - np.abs(zono.generators.T @ poly.A.T).sum(axis=0) - poly.b
    quick = float(max(np.max(margins), 0.0))
    if mode == "quick" or (mode == "auto" and quick > 0.0):
        return ViolationBound(quick, None)

    k = zono.n_generators
    m = poly.n_halfspaces
    # Variables (x, t): minimize t with t >= a_i . (G x + c) - b_i and t >= 0.
    matrix = np.hstack([poly.A @ zono.generators, -np.ones((m, 1))])
    rhs = poly.b - poly.A @ zono.center
    objective = np.zeros(k + 1)
    objective[-1] = 1.0
    lower = np.concatenate([-np.ones(k), [0.0]])
    upper = np.concatenate([np.ones(k), [np.inf]])
    sol = simplex_lp(LinearProgram(objective, matrix, rhs, lower, upper))
    if sol.status != "optimal":  # pragma: no cover - the epigraph LP is always feasible
        raise RuntimeError(f"violation LP returned {sol.status}")
    return ViolationBound(quick, max(float(sol.value), 0.0))


def max_polytope_violation(zono, poly):
    """Exact max over the zonotope of max_i max(a_i . z - b_i, 0).

    The maximum commutes with the outer max over halfspaces, so one analytic
    support evaluation per halfspace suffices.
    """
    _check_pair(zono, poly)
    margins = poly.A @ zono.center + np.abs(zono.generators.T @ poly.A.T).sum(axis=0) - poly.b
    return float(max(np.max(margins), 0.0))


def min_distance_lp(zono, target, order):
    """Minimum l1 or linf distance from a zonotope to a point, by epigraph LP."""
    if not isinstance(zono, Zonotope):
        raise TypeError("expected a Zonotope")
    target = np.asarray(target, dtype=float)
    if target.shape != (zono.dim,):
        raise ValueError("target dimension mismatch")
    n, k = zono.dim, zono.n_generators
    gens = zono.generators
    gap = target - zono.center
    if order == 1:
        # Variables (x, s): minimize sum(s) with s >= +-(G x + c - target).
        matrix = np.block([[gens, -np.eye(n)], [-gens, -np.eye(n)]])
        rhs = np.concatenate([gap, -gap])
        objective = np.concatenate([np.zeros(k), np.ones(n)])
        lower = np.concatenate([-np.ones(k), np.zeros(n)])
        upper = np.concatenate([np.ones(k), np.full(n, np.inf)])
    elif np.isinf(order):
        ones = np.ones((n, 1))
        matrix = np.block([[gens, -ones], [-gens, -ones]])
        rhs = np.concatenate([gap, -gap])
        objective = np.zeros(k + 1)
        objective[-1] = 1.0
        lower = np.concatenate([-np.ones(k), [0.0]])
        upper = np.concatenate([np.ones(k), [np.inf]])
    else:
        raise ValueError("order must be 1 or inf")
    sol = simplex_lp(LinearProgram(objective, matrix, rhs, lower, upper))
    if sol.status != "optimal":  # pragma: no cover - the epigraph LP is always feasible
        raise RuntimeError(f"distance LP returned {sol.status}")
    return max(float(sol.value), 0.0)
