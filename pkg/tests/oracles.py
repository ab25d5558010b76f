"""Independent reference implementations used to validate the solver.

Everything here recomputes ground truth from first principles with scipy's
LP solver and brute-force enumeration, sharing no bounding or propagation
code with the library: networks are piecewise affine, so exact optima come
from enumerating activation-pattern regions and solving one small convex
program per region.
"""

from itertools import product

import numpy as np
from scipy.optimize import linprog

from zonopt import AffineLayer, FeedForwardNetwork


def random_network(rng, sizes):
    layers = []
    for i in range(len(sizes) - 1):
        activation = "identity" if i == len(sizes) - 2 else "relu"
        layers.append(AffineLayer(rng.normal(size=(sizes[i + 1], sizes[i])),
                                  rng.normal(size=sizes[i + 1]) * 0.5, activation))
    return FeedForwardNetwork(layers)


def identity_net(dim):
    return FeedForwardNetwork([AffineLayer(np.eye(dim), np.zeros(dim), "identity")])


def affine_net(weights, bias):
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    return FeedForwardNetwork([AffineLayer(weights, bias, "identity")])


def stack_networks(net1, net2):
    """One network computing [net1(x); net2(x)] for equal-depth inputs."""
    assert len(net1.layers) == len(net2.layers), "stacking needs equal depth"
    layers = []
    for index, (l1, l2) in enumerate(zip(net1.layers, net2.layers)):
        if index == 0:
            weights = np.vstack([l1.weights, l2.weights])
        else:
            weights = np.zeros((l1.n_outputs + l2.n_outputs, l1.n_inputs + l2.n_inputs))
            weights[:l1.n_outputs, :l1.n_inputs] = l1.weights
            weights[l1.n_outputs:, l1.n_inputs:] = l2.weights
        layers.append(AffineLayer(weights, np.concatenate([l1.bias, l2.bias]),
                                  l1.activation))
    return FeedForwardNetwork(layers)


class Region:
    """Subset of the input box (A x <= b) where the network is x -> W x + c."""

    def __init__(self, A, b, W, c, point):
        self.A = A
        self.b = b
        self.W = W
        self.c = c
        self.point = point


def _interior_point(A, b, bounds):
    """Feasible point maximizing a uniform slack; None when infeasible."""
    n = len(bounds)
    objective = np.zeros(n + 1)
    objective[-1] = -1.0
    a_ub = np.hstack([A, np.ones((A.shape[0], 1))])
    res = linprog(objective, A_ub=a_ub, b_ub=b, bounds=bounds + [(0.0, 1.0)],
                  method="highs")
    if res.status != 0:
        return None
    return res.x[:-1]


def enumerate_regions(net, box):
    """All activation-pattern regions of the network over an input box.

    Closed regions, so neighbors share boundary faces; their union is the
    whole box.  Each recursion step seeds child regions with a feasible
    point, falling back to an LP only when the parent's point violates the
    new halfspace, which keeps the LP count near the region count.
    """
    dim = box.dim
    bounds = [(float(lo), float(hi)) for lo, hi in zip(box.lower, box.upper)]
    regions = []

    def finish(W, c, A, b, point):
        final = net.layers[-1]
        regions.append(Region(np.array(A).reshape(len(A), dim), np.array(b, dtype=float),
                              final.weights @ W, final.weights @ c + final.bias, point))

    def recurse(layer_idx, W, c, A, b, point):
        if layer_idx == len(net.layers) - 1:
            finish(W, c, A, b, point)
            return
        layer = net.layers[layer_idx]
        pre_w = layer.weights @ W
        pre_c = layer.weights @ c + layer.bias

        def branch(row, A, b, point, signs):
            if row == pre_c.shape[0]:
                scale = np.array(signs)
                recurse(layer_idx + 1, scale[:, None] * pre_w, scale * pre_c, A, b, point)
                return
            w, ci = pre_w[row], pre_c[row]
            spread = float(np.abs(w) @ box.radius)
            mid = float(w @ box.center + ci)
            if mid - spread >= 0.0:
                branch(row + 1, A, b, point, signs + [1.0])
                return
            if mid + spread <= 0.0:
                branch(row + 1, A, b, point, signs + [0.0])
                return
            for sign, face, offset in ((1.0, -w, ci), (0.0, w, -ci)):
                new_a, new_b = A + [face], b + [offset]
                seed = point
                if float(face @ point) > offset - 1e-9:
                    seed = _interior_point(np.array(new_a), np.array(new_b), bounds)
                    if seed is None:
                        continue
                branch(row + 1, new_a, new_b, seed, signs + [sign])

        branch(0, A, b, point, [])

    recurse(0, np.eye(dim), np.zeros(dim), [], [], box.center.copy())
    return regions


def _region_rows(region, box):
    """Region constraints plus box faces as one A x <= b system."""
    dim = box.dim
    eye = np.eye(dim)
    rows = np.vstack([region.A, eye, -eye])
    rhs = np.concatenate([region.b, box.upper, -box.lower])
    return rows, rhs


def region_containing(regions, box, x):
    rows_cache = [(_region_rows(r, box)) for r in regions]
    best, best_slack = None, -np.inf
    for region, (rows, rhs) in zip(regions, rows_cache):
        slack = float(np.min(rhs - rows @ x))
        if slack > best_slack:
            best, best_slack = region, slack
    return best if best_slack >= -1e-9 else None


def _lp_min(objective, rows, rhs, bounds):
    res = linprog(objective, A_ub=rows if len(rows) else None,
                  b_ub=rhs if len(rows) else None, bounds=bounds, method="highs")
    if res.status != 0:
        return None, None
    return float(res.fun), res.x


def min_affine(net, box, a, b0=0.0):
    """Exact min of a . net(x) + b0 over the box, with an argmin."""
    best, best_x = np.inf, None
    bounds = [(float(lo), float(hi)) for lo, hi in zip(box.lower, box.upper)]
    for region in enumerate_regions(net, box):
        value, x = _lp_min(region.W.T @ a, region.A, region.b, bounds)
        if value is None:
            continue
        value += float(a @ region.c + b0)
        if value < best:
            best, best_x = value, x
    return best, best_x


def max_affine(net, box, a, b0=0.0):
    value, x = min_affine(net, box, -np.asarray(a, dtype=float), -b0)
    return -value, x


def min_distance(net, box, target, order):
    """Exact min over the box of ||net(x) - target||_p for p in {1, 2, inf}."""
    target = np.asarray(target, dtype=float)
    best = np.inf
    for region in enumerate_regions(net, box):
        if order == 2.0:
            value = _region_min_l2(region, box, target)
        else:
            value = _region_min_lp_norm(region, box, target, order)
        if value is not None:
            best = min(best, value)
    return best


def _region_min_lp_norm(region, box, target, order):
    """Epigraph LP for the l1 / linf distance over one region."""
    dim = box.dim
    m = region.W.shape[0]
    n_extra = 1 if order == np.inf else m
    shift = region.c - target
    top = np.hstack([region.A, np.zeros((region.A.shape[0], n_extra))])
    blocks = [top]
    rhs = [region.b]
    for i in range(m):
        cover = np.zeros(n_extra)
        cover[0 if order == np.inf else i] = -1.0
        blocks.append(np.concatenate([region.W[i], cover])[None, :])
        rhs.append(np.array([-shift[i]]))
        blocks.append(np.concatenate([-region.W[i], cover])[None, :])
        rhs.append(np.array([shift[i]]))
    objective = np.concatenate([np.zeros(dim), np.ones(n_extra)])
    bounds = [(float(lo), float(hi)) for lo, hi in zip(box.lower, box.upper)]
    bounds += [(0.0, None)] * n_extra
    value, _ = _lp_min(objective, np.vstack(blocks), np.concatenate(rhs), bounds)
    return value


def _region_min_l2(region, box, target):
    """Exact l2 distance minimum over one region (inputs of dim 1 or 2).

    The squared distance is a convex quadratic, so the minimum is the
    unconstrained one if feasible, else it lies on an active facet: check
    every line restriction and every vertex.
    """
    dim = box.dim
    assert dim <= 2, "analytic l2 oracle covers input dims 1 and 2"
    rows, rhs = _region_rows(region, box)
    shift = region.c - target
    candidates = []
    x0, *_ = np.linalg.lstsq(region.W, -shift, rcond=None)
    if np.all(rows @ x0 <= rhs + 1e-9):
        candidates.append(x0)
    if dim == 1:
        upper = rhs[rows[:, 0] > 1e-12] / rows[rows[:, 0] > 1e-12, 0]
        lower = rhs[rows[:, 0] < -1e-12] / rows[rows[:, 0] < -1e-12, 0]
        if upper.size and lower.size and lower.max() <= upper.min() + 1e-12:
            candidates += [np.array([lower.max()]), np.array([upper.min()])]
    else:
        for i in range(rows.shape[0]):
            line_min = _quadratic_on_line(region.W, shift, rows[i], rhs[i])
            if line_min is not None and np.all(rows @ line_min <= rhs + 1e-7):
                candidates.append(line_min)
        candidates += list(polygon_vertices(rows, rhs))
    if not candidates:
        return None
    return min(float(np.linalg.norm(region.W @ x + shift)) for x in candidates)


def _quadratic_on_line(W, shift, normal, offset):
    """Minimize ||W x + shift||^2 on the line normal . x = offset (2-D x)."""
    scale = float(np.linalg.norm(normal))
    if scale < 1e-12:
        return None
    base = normal * (offset / scale ** 2)
    direction = np.array([-normal[1], normal[0]]) / scale
    wd = W @ direction
    denom = float(wd @ wd)
    if denom < 1e-14:
        return base
    t = -float(wd @ (W @ base + shift)) / denom
    return base + t * direction


def polygon_vertices(rows, rhs, tol=1e-7):
    """Vertices of {x in R^2 : rows x <= rhs}, by pairwise intersection."""
    m = rows.shape[0]
    ii, jj = np.triu_indices(m, k=1)
    a11, a12 = rows[ii, 0], rows[ii, 1]
    a21, a22 = rows[jj, 0], rows[jj, 1]
    b1, b2 = rhs[ii], rhs[jj]
    dets = a11 * a22 - a12 * a21
    keep = np.abs(dets) > 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = (b1 * a22 - a12 * b2) / dets
        ys = (a11 * b2 - b1 * a21) / dets
    points = np.stack([xs, ys], axis=1)[keep]
    if not points.size:
        return np.zeros((0, 2))
    feasible = np.all(rows @ points.T <= rhs[:, None] + tol, axis=0)
    return points[feasible]


def interval_endpoints(rows, rhs):
    """Endpoints of {x in R : rows x <= rhs}, or None when empty."""
    pos = rows[:, 0] > 1e-12
    neg = rows[:, 0] < -1e-12
    hi = (rhs[pos] / rows[pos, 0]).min() if pos.any() else np.inf
    lo = (rhs[neg] / rows[neg, 0]).max() if neg.any() else -np.inf
    if lo > hi + 1e-12:
        return None
    return lo, hi


def max_violation(net, box, poly):
    """Exact max over the box of the polytope violation of net(x)."""
    best = 0.0
    bounds = [(float(lo), float(hi)) for lo, hi in zip(box.lower, box.upper)]
    for region in enumerate_regions(net, box):
        for a, b in zip(poly.A, poly.b):
            value, _ = _lp_min(-(region.W.T @ a), region.A, region.b, bounds)
            if value is not None:
                best = max(best, -value + float(a @ region.c) - b)
    return best


def min_violation(net, box, poly):
    """Exact min over the box of the polytope violation of net(x)."""
    dim = box.dim
    m = poly.A.shape[0]
    best = np.inf
    bounds = [(float(lo), float(hi)) for lo, hi in zip(box.lower, box.upper)]
    bounds_t = bounds + [(0.0, None)]
    for region in enumerate_regions(net, box):
        top = np.hstack([region.A, np.zeros((region.A.shape[0], 1))])
        mid = np.hstack([poly.A @ region.W, -np.ones((m, 1))])
        rows = np.vstack([top, mid])
        rhs = np.concatenate([region.b, poly.b - poly.A @ region.c])
        objective = np.zeros(dim + 1)
        objective[-1] = 1.0
        value, _ = _lp_min(objective, rows, rhs, bounds_t)
        if value is not None:
            best = min(best, value)
    return best


def signed_max_margin(net, box, poly):
    """Max over the box of max_i (a_i . net(x) - b_i), without the clamp.

    Positive: some output leaves the polytope by that distance; negative:
    every output keeps at least that slack inside."""
    best = -np.inf
    bounds = [(float(lo), float(hi)) for lo, hi in zip(box.lower, box.upper)]
    for region in enumerate_regions(net, box):
        for a, b in zip(poly.A, poly.b):
            value, _ = _lp_min(-(region.W.T @ a), region.A, region.b, bounds)
            if value is not None:
                best = max(best, -value + float(a @ region.c) - b)
    return best


def signed_min_margin(net, box, poly):
    """Min over the box of max_i (a_i . net(x) - b_i), without the clamp.

    Negative: some output sits strictly inside the polytope by that depth;
    positive: every output violates some halfspace by at least that much."""
    dim = box.dim
    m = poly.A.shape[0]
    best = np.inf
    bounds = [(float(lo), float(hi)) for lo, hi in zip(box.lower, box.upper)]
    bounds_t = bounds + [(None, None)]
    for region in enumerate_regions(net, box):
        top = np.hstack([region.A, np.zeros((region.A.shape[0], 1))])
        mid = np.hstack([poly.A @ region.W, -np.ones((m, 1))])
        rows = np.vstack([top, mid])
        rhs = np.concatenate([region.b, poly.b - poly.A @ region.c])
        objective = np.zeros(dim + 1)
        objective[-1] = 1.0
        value, _ = _lp_min(objective, rows, rhs, bounds_t)
        if value is not None:
            best = min(best, value)
    return best


def max_difference(net1, net2, box, order):
    """Exact max over the box of ||net1(x) - net2(x)||_p (input dims 1-2).

    Enumerates the joint activation regions via a stacked network; on each
    region the difference is affine, and a norm of an affine map is convex,
    so the maximum over the region polytope sits at a vertex.
    """
    stacked = stack_networks(net1, net2)
    out1 = net1.output_dim
    best = 0.0
    for region in enumerate_regions(stacked, box):
        W = region.W[:out1] - region.W[out1:]
        c = region.c[:out1] - region.c[out1:]
        rows, rhs = _region_rows(region, box)
        if box.dim == 1:
            ends = interval_endpoints(rows, rhs)
            if ends is None:
                continue
            points = np.array([[ends[0]], [ends[1]]])
        else:
            points = polygon_vertices(rows, rhs)
        for x in points:
            best = max(best, float(np.linalg.norm(W @ x + c, ord=order)))
    return best


def grid_points(lower, upper, count):
    """Regular grid over a box, one row per point."""
    axes = [np.linspace(lo, hi, count) for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, len(axes))


def lipschitz_upper(net):
    """Product of layer infinity-norm bounds: a valid Lipschitz constant."""
    bound = 1.0
    for layer in net.layers:
        bound *= float(np.abs(layer.weights).sum(axis=1).max())
    return bound


def box_corners(center, radius):
    center = np.asarray(center, dtype=float)
    radius = np.asarray(radius, dtype=float)
    signs = np.array(list(product((-1.0, 1.0), repeat=center.size)))
    return center + signs * radius
