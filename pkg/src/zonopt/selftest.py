"""Built-in correctness checks, runnable anywhere the package is installed.

Every check compares library results against an independent small-scale
oracle computed right here (corner enumeration, dense grids, active-set
vertex enumeration), so a miscompiled or patched install fails loudly.  All
randomness flows from the single seed argument and output contains no
timings, so two runs with the same seed print identical text.
"""

from itertools import combinations, product

import numpy as np

from . import propagation
from .bnb import solve
from .geometry import Hyperrectangle, Polytope, Zonotope, max_hyperrect_distance
from .network import AffineLayer, FeedForwardNetwork
from .problems import (AffineObjective, DistanceObjective, PolytopeViolationObjective,
                       minimize_convex)
from .simplex import LinearProgram, simplex_lp
from .subsolvers import box_ls_lower_bound, max_polytope_violation, min_polytope_violation

DEFAULT_SEED = 0


def _random_zonotope(rng, dim, n_gen):
    return Zonotope(rng.normal(size=dim), rng.normal(size=(dim, n_gen)))


def _random_network(rng, sizes):
    layers = []
    for i in range(len(sizes) - 1):
        activation = "identity" if i == len(sizes) - 2 else "relu"
        layers.append(AffineLayer(rng.normal(size=(sizes[i + 1], sizes[i])),
                                  rng.normal(size=sizes[i + 1]), activation))
    return FeedForwardNetwork(layers)


def _box_corners(center, radius):
    center = np.asarray(center, dtype=float)
    radius = np.asarray(radius, dtype=float)
    signs = np.array(list(product((-1.0, 1.0), repeat=center.size)))
    return center + signs * radius


def _lp_vertex_minimum(objective, rows, rhs):
    """Brute-force LP oracle: enumerate basic points of {x : rows x <= rhs}.

    Returns the minimum objective value over all feasible intersection
    points, or None when no vertex is feasible.
    """
    n = len(objective)
    best = None
    for picks in combinations(range(len(rows)), n):
        square = rows[list(picks)]
        if abs(np.linalg.det(square)) < 1e-10:
            continue
        point = np.linalg.solve(square, rhs[list(picks)])
        if np.all(rows @ point <= rhs + 1e-8):
            value = float(objective @ point)
            if best is None or value < best:
                best = value
    return best


def _check_support_vs_lp(rng):
    for _ in range(20):
        dim = rng.integers(1, 4)
        z = _random_zonotope(rng, dim, int(rng.integers(1, 6)))
        a = rng.normal(size=dim)
        k = z.generators.shape[1]
        sol = simplex_lp(LinearProgram(-(z.generators.T @ a), np.zeros((0, k)),
                                       np.zeros(0), -np.ones(k), np.ones(k)))
        lp_max = float(a @ z.center) - sol.value
        if abs(z.support_max(a) - lp_max) > 1e-8:
            return f"support_max disagrees with LP by {abs(z.support_max(a) - lp_max):.2e}"
    return None


def _check_support_identities(rng):
    for _ in range(30):
        dim = rng.integers(1, 5)
        z1 = _random_zonotope(rng, dim, int(rng.integers(1, 5)))
        z2 = _random_zonotope(rng, dim, int(rng.integers(1, 5)))
        a = rng.normal(size=dim)
        if abs(z1.support_max(a) + z1.support_min(-a)) > 1e-10:
            return "support_max(a) != -support_min(-a)"
        total = z1.minkowski_sum(z2)
        parts = z1.support_max(a) + z2.support_max(a)
        if abs(total.support_max(a) - parts) > 1e-9:
            return "Minkowski sum support is not additive"
        shift = rng.normal(size=dim)
        moved = z1.translate(shift)
        if abs(moved.support_max(a) - z1.support_max(a) - float(a @ shift)) > 1e-9:
            return "translate does not shift the support linearly"
    return None


def _check_split_containment(rng):
    for _ in range(15):
        dim = rng.integers(1, 4)
        z = _random_zonotope(rng, dim, int(rng.integers(2, 5)))
        left, right = z.split()
        points = z.sample(rng, 40)
        inside = left.contains_points(points) | right.contains_points(points)
        if not inside.all():
            return "zonotope split children do not cover sampled parent points"
        box = Hyperrectangle(rng.normal(size=dim), rng.uniform(0.1, 2.0, size=dim))
        lo, hi = box.split()
        if abs(lo.volume() + hi.volume() - box.volume()) > 1e-9 * box.volume():
            return "hyperrectangle split does not partition the volume"
        corner_union = np.vstack([_box_corners(lo.center, lo.radius),
                                  _box_corners(hi.center, hi.radius)])
        if not box.contains_points(corner_union.T).all():
            return "hyperrectangle children leave the parent"
    return None


def _check_propagation_soundness(rng):
    for _ in range(10):
        sizes = [int(rng.integers(1, 4)), int(rng.integers(2, 6)),
                 int(rng.integers(2, 6)), int(rng.integers(1, 4))]
        net = _random_network(rng, sizes)
        box = Hyperrectangle(rng.normal(size=sizes[0]), rng.uniform(0.2, 1.5, size=sizes[0]))
        zout = propagation.propagate(net, box.to_zonotope())
        ys = net.evaluate_batch(box.sample(rng, 60))
        if not zout.contains_points(ys, tol=1e-7).all():
            return "a sampled network output escaped the propagated zonotope"
        box_out = zout.bounding_box()
        if not box_out.contains_points(ys, tol=1e-7).all():
            return "a sampled output escaped the propagated bounding box"
    return None


def _check_relu_transform(rng):
    z = Zonotope([0.0], [[1.0]])
    out = propagation.relu_transform(z)
    if not (np.allclose(out.center, [0.25]) and np.allclose(out.generators, [[0.5, 0.25]])):
        return "unstable single-neuron rectification gave unexpected coefficients"
    stable = Zonotope([3.0, -3.0], [[1.0, 0.0], [0.0, 1.0]])
    out = propagation.relu_transform(stable)
    if not (np.allclose(out.center, [3.0, 0.0])
            and np.allclose(out.generators, [[1.0, 0.0], [0.0, 0.0]])):
        return "stable neurons must pass through unchanged / zero out"
    return None


def _check_box_distance(rng):
    for _ in range(40):
        dim = rng.integers(1, 4)
        first = Hyperrectangle(rng.normal(size=dim), rng.uniform(0, 1.5, size=dim))
        second = Hyperrectangle(rng.normal(size=dim), rng.uniform(0, 1.5, size=dim))
        order = [1.0, 2.0, np.inf][int(rng.integers(3))]
        distance, far_first, far_second = max_hyperrect_distance(first, second, order)
        brute = max(float(np.linalg.norm(p - q, ord=order))
                    for p in _box_corners(first.center, first.radius)
                    for q in _box_corners(second.center, second.radius))
        if abs(distance - brute) > 1e-9:
            return f"analytic box distance {distance:.6g} != corner maximum {brute:.6g}"
        if abs(float(np.linalg.norm(far_first - far_second, ord=order)) - distance) > 1e-9:
            return "reported far points do not attain the distance"
    return None


def _check_simplex_vs_vertices(rng):
    for _ in range(25):
        n = int(rng.integers(2, 4))
        m = int(rng.integers(1, 4))
        objective = rng.normal(size=n)
        a = rng.normal(size=(m, n))
        b = rng.uniform(0.5, 2.0, size=m)
        lower = -np.ones(n)
        upper = np.ones(n)
        solution = simplex_lp(LinearProgram(objective, a, b, lower, upper))
        rows = np.vstack([a, np.eye(n), -np.eye(n)])
        rhs = np.concatenate([b, upper, -lower])
        brute = _lp_vertex_minimum(objective, rows, rhs)
        if solution.status == "optimal":
            if brute is None or abs(solution.value - brute) > 1e-7:
                return f"simplex value {solution.value:.9g} != vertex oracle {brute}"
        elif solution.status == "infeasible" and brute is not None:
            return "simplex reported infeasible on a feasible program"
    return None


def _check_violation_bounds(rng):
    for _ in range(20):
        dim = rng.integers(1, 4)
        z = _random_zonotope(rng, dim, int(rng.integers(1, 5)))
        m = int(rng.integers(1, 4))
        poly = Polytope(rng.normal(size=(m, dim)), rng.normal(size=m))
        values = [poly.violation(p) for p in z.sample(rng, 80).T]
        high = max_polytope_violation(z, poly)
        low = min_polytope_violation(z, poly, mode="exact").value
        if max(values) > high + 1e-9:
            return "a sampled violation exceeded the certified maximum"
        if min(values) < low - 1e-9:
            return "a sampled violation undercut the certified minimum"
    return None


def _check_box_ls(rng):
    for _ in range(15):
        dim = rng.integers(1, 4)
        z = _random_zonotope(rng, dim, int(rng.integers(1, 5)))
        target = rng.normal(size=dim)
        res = box_ls_lower_bound(z.generators, z.center, target)
        sampled = min(float(np.linalg.norm(p - target)) for p in z.sample(rng, 200).T)
        if res.lower > sampled + 1e-9:
            return "least-squares lower bound exceeded a sampled distance"
        if res.lower > res.upper + 1e-12:
            return "least-squares bracket is inverted"
    return None


def _check_end_to_end(rng):
    for _ in range(6):
        input_dim = int(rng.integers(1, 3))
        net = _random_network(rng, [input_dim, 4, 3, 2])
        box = Hyperrectangle(rng.normal(size=input_dim) * 0.3,
                             rng.uniform(0.3, 0.8, size=input_dim))
        objective = AffineObjective(rng.normal(size=2), float(rng.normal()))
        result = minimize_convex(net, box, objective, stop_gap=1e-5, timeout=30.0)
        axes = [np.linspace(lo, hi, 41) for lo, hi in zip(box.lower, box.upper)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, input_dim)
        values = objective.a @ net.evaluate_batch(grid.T) + objective.b
        grid_min = float(values.min())
        if result.lower_bound > grid_min + 1e-9:
            return f"certified lower bound {result.lower_bound:.9g} exceeds a grid value " \
                   f"{grid_min:.9g}"
        if result.status == "optimal" and result.upper_bound - result.lower_bound > 1e-5 + 1e-12:
            return "optimal status reported with an open gap"
        if result.upper_bound < grid_min - 1.0:
            return "upper bound implausibly far below the grid minimum"
    return None


def _check_worked_examples(rng):
    z = Zonotope([0.0], [[3.0, -1.0]])
    if abs(z.support_max(np.array([2.0]), offset=1.0) - 9.0) > 1e-12:
        return "frozen support example gave the wrong value"
    axis = Zonotope([1.0, 2.0], [[1.0, 0.0], [0.0, 1.0]])
    if abs(axis.support_max(np.array([1.0, 0.0])) - 2.0) > 1e-12:
        return "axis support example gave the wrong value"
    wide = Zonotope([0.0, 0.0], [[2.0, 0.0], [0.0, 1.0]])
    left, right = wide.split()
    if not (np.allclose(left.center, [-1.0, 0.0]) and np.allclose(right.center, [1.0, 0.0])):
        return "frozen split example produced unexpected child centers"
    first = Hyperrectangle([0.0], [1.0])
    second = Hyperrectangle([3.0], [1.0])
    distance, far_first, far_second = max_hyperrect_distance(first, second, 2.0)
    if abs(distance - 5.0) > 1e-12 or far_first[0] != -1.0 or far_second[0] != 4.0:
        return "frozen distance example disagrees"
    same = Hyperrectangle([0.0, 0.0], [1.0, 1.0])
    distance, _, _ = max_hyperrect_distance(same, same, np.inf)
    if abs(distance - 2.0) > 1e-12:
        return "identical-box distance example disagrees"
    point = Zonotope([2.0], np.zeros((1, 0)))
    poly = Polytope([[1.0]], [1.0])
    if abs(max_polytope_violation(point, poly) - 1.0) > 1e-12:
        return "point-zonotope violation example disagrees"
    return None


_CHECKS = (
    ("support_vs_lp", _check_support_vs_lp),
    ("support_identities", _check_support_identities),
    ("split_containment", _check_split_containment),
    ("propagation_soundness", _check_propagation_soundness),
    ("relu_transform", _check_relu_transform),
    ("box_distance", _check_box_distance),
    ("simplex_vs_vertices", _check_simplex_vs_vertices),
    ("violation_bounds", _check_violation_bounds),
    ("box_ls_bracket", _check_box_ls),
    ("end_to_end_minimize", _check_end_to_end),
    ("worked_examples", _check_worked_examples),
)


def run_selftest(seed=DEFAULT_SEED, out=print):
    """Run every check, print one PASS/FAIL line each, return overall success."""
    all_ok = True
    for index, (name, check) in enumerate(_CHECKS):
        rng = np.random.default_rng([int(seed), index])
        try:
            failure = check(rng)
        except Exception as exc:  # a crash is a failure, not an abort
            failure = f"raised {type(exc).__name__}: {exc}"
        if failure is None:
            out(f"PASS {name}")
        else:
            out(f"FAIL {name}: {failure}")
            all_ok = False
    return all_ok
