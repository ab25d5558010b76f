"""Set representations used by the solver.

A zonotope is the affine image of a coefficient box,

    Z = { G @ x + c : x in [-1, 1]^k },

stored as a center vector ``c`` (n,) and a generator matrix ``G`` (n, k).
Hyperrectangles are axis-aligned boxes stored as center and per-axis radius;
polytopes are intersections of halfspaces ``A @ y <= b``.  All three are
immutable after construction so they can be shared freely across subproblems.
"""

import numpy as np

from .errors import DegenerateSplitError
from .simplex import LinearProgram, simplex_lp

MEMBERSHIP_TOL = 1e-9

_LS_REFINE_STEPS = 60


def _vector(values, name):
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector")
    return arr


def _sign_nonneg(values):
    """Sign with the tie rule sign(0) = +1."""
    return np.where(values >= 0.0, 1.0, -1.0)


class Zonotope:
    __slots__ = ("center", "generators")

    def __init__(self, center, generators):
        center = _vector(center, "center")
        generators = np.array(generators, dtype=float)
        if generators.ndim != 2:
            raise ValueError("generators must be a 2-D matrix (one row per dimension)")
        if generators.shape[0] != center.shape[0]:
            raise ValueError(
                f"generator matrix has {generators.shape[0]} rows, center has {center.shape[0]}"
            )
        center.setflags(write=False)
        generators.setflags(write=False)
        self.center = center
        self.generators = generators

    @classmethod
    def from_point(cls, point):
        point = _vector(point, "point")
        return cls(point, np.zeros((point.shape[0], 0)))

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def n_generators(self):
        return self.generators.shape[1]

    def __repr__(self):
        return f"Zonotope(dim={self.dim}, n_generators={self.n_generators})"

    def support_max(self, direction, offset=0.0):
        """Max of direction . z + offset over the zonotope (analytic)."""
        direction = _vector(direction, "direction")
        if direction.shape[0] != self.dim:
            raise ValueError("direction dimension mismatch")
        return float(direction @ self.center
                     + np.abs(self.generators.T @ direction).sum() + offset)

    def support_min(self, direction, offset=0.0):
        """Min of direction . z + offset over the zonotope (analytic)."""
        direction = _vector(direction, "direction")
        if direction.shape[0] != self.dim:
            raise ValueError("direction dimension mismatch")
        return float(direction @ self.center
                     - np.abs(self.generators.T @ direction).sum() + offset)

    def bounding_box(self):
        """Tightest axis-aligned box: radius_i = sum_j |G_ij|."""
        return Hyperrectangle(self.center, np.abs(self.generators).sum(axis=1))

    def minkowski_sum(self, other):
        if not isinstance(other, Zonotope):
            raise TypeError("minkowski_sum expects a Zonotope")
        if other.dim != self.dim:
            raise ValueError("dimension mismatch in Minkowski sum")
        return Zonotope(self.center + other.center,
                        np.hstack([self.generators, other.generators]))

    def translate(self, vector):
        vector = _vector(vector, "vector")
        if vector.shape[0] != self.dim:
            raise ValueError("translation dimension mismatch")
        return Zonotope(self.center + vector, self.generators)

    def split(self):
        """Halve along the generator with the largest Euclidean norm.

        Ties pick the lowest index.  The two children cover the parent (their
        union is a superset; they may overlap) and each child is a subset.
        """
        if self.n_generators == 0:
            raise DegenerateSplitError("zonotope has no generators to split")
        norms = np.linalg.norm(self.generators, axis=0)
        j = int(np.argmax(norms))
        if norms[j] <= 0.0:
            raise DegenerateSplitError("all generators are zero")
        half = self.generators.copy()
        half[:, j] *= 0.5
        shift = half[:, j]
        return (Zonotope(self.center - shift, half),
                Zonotope(self.center + shift, half))

    def sample(self, rng, count):
        """Sample points via uniform coefficients; returns (dim, count)."""
        coeffs = rng.uniform(-1.0, 1.0, size=(self.n_generators, count))
        return self.generators @ coeffs + self.center[:, None]

    def contains(self, point, tol=MEMBERSHIP_TOL):
        point = _vector(point, "point")
        if point.shape[0] != self.dim:
            raise ValueError("point dimension mismatch")
        return bool(self.contains_points(point[:, None], tol=tol)[0])

    def contains_points(self, points, tol=MEMBERSHIP_TOL):
        """Vectorized membership for points of shape (dim, count).

        A point is a member when some coefficient vector in the unit box
        reproduces it to infinity-norm slack tol.  A constructive
        least-squares certificate decides most points; the rest fall back to
        the exact LP feasibility program, so decisions match the LP.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[0] != self.dim:
            raise ValueError("points must have shape (dim, count)")
        residuals = points - self.center[:, None]
        if self.n_generators == 0:
            return np.abs(residuals).max(axis=0) <= tol if self.dim else \
                np.ones(points.shape[1], dtype=bool)
        coeffs = np.clip(np.linalg.pinv(self.generators) @ residuals, -1.0, 1.0)
        gram_step = _safe_step(self.generators)
        gt = self.generators.T
        for _ in range(_LS_REFINE_STEPS):
            misfit = self.generators @ coeffs - residuals
            coeffs = np.clip(coeffs - gram_step * (gt @ misfit), -1.0, 1.0)
        ok = np.abs(self.generators @ coeffs - residuals).max(axis=0) <= tol
        for idx in np.where(~ok)[0]:
            ok[idx] = self._contains_lp(points[:, idx], tol)
        return ok

    def _contains_lp(self, point, tol):
        """Exact membership: minimize the infinity-norm fit error by LP."""
        n, k = self.dim, self.n_generators
        ones = np.ones((n, 1))
        matrix = np.block([[self.generators, -ones], [-self.generators, -ones]])
        rhs = np.concatenate([point - self.center, self.center - point])
        objective = np.zeros(k + 1)
        objective[-1] = 1.0
        lower = np.concatenate([-np.ones(k), [0.0]])
        upper = np.concatenate([np.ones(k), [np.inf]])
        sol = simplex_lp(LinearProgram(objective, matrix, rhs, lower, upper))
        return sol.status == "optimal" and sol.value <= tol


def _safe_step(generators):
    """Step size 1/L with L an upper bound on the squared spectral norm."""
    norm_sq = min(
        float(np.square(generators).sum()),
        float(np.abs(generators).sum(axis=0).max() * np.abs(generators).sum(axis=1).max()),
    )
    return 1.0 / max(norm_sq, 1e-30)


class Hyperrectangle:
    __slots__ = ("center", "radius")

    def __init__(self, center, radius):
        center = _vector(center, "center")
        radius = _vector(radius, "radius")
        if radius.shape != center.shape:
            raise ValueError("center and radius must have the same length")
        if np.any(radius < 0.0):
            raise ValueError("radius entries must be nonnegative")
        center.setflags(write=False)
        radius.setflags(write=False)
        self.center = center
        self.radius = radius

    @classmethod
    def from_bounds(cls, lower, upper):
        lower = _vector(lower, "lower")
        upper = _vector(upper, "upper")
        if lower.shape != upper.shape:
            raise ValueError("lower and upper must have the same length")
        if np.any(lower > upper):
            raise ValueError("lower bounds must not exceed upper bounds")
        return cls((lower + upper) / 2.0, (upper - lower) / 2.0)

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def lower(self):
        return self.center - self.radius

    @property
    def upper(self):
        return self.center + self.radius

    def __repr__(self):
        return f"Hyperrectangle(dim={self.dim})"

    def volume(self):
        return float(np.prod(2.0 * self.radius))

    def to_zonotope(self):
        """One axis-aligned generator per dimension (zero-radius axes included)."""
        return Zonotope(self.center, np.diag(self.radius))

    def split(self):
        """Halve along the largest-radius dimension (ties pick the lowest index)."""
        i = int(np.argmax(self.radius))
        if self.radius[i] <= 0.0:
            raise DegenerateSplitError("hyperrectangle has zero radius in every dimension")
        child_radius = self.radius.copy()
        child_radius[i] *= 0.5
        shift = np.zeros(self.dim)
        shift[i] = child_radius[i]
        return (Hyperrectangle(self.center - shift, child_radius),
                Hyperrectangle(self.center + shift, child_radius))

    def contains(self, point, tol=MEMBERSHIP_TOL):
        point = _vector(point, "point")
        if point.shape[0] != self.dim:
            raise ValueError("point dimension mismatch")
        return bool(np.all(np.abs(point - self.center) <= self.radius + tol))

    def contains_points(self, points, tol=MEMBERSHIP_TOL):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(np.abs(points - self.center[:, None]) <= self.radius[:, None] + tol,
                      axis=0)

    def sample(self, rng, count):
        offsets = rng.uniform(-1.0, 1.0, size=(self.dim, count))
        return self.center[:, None] + self.radius[:, None] * offsets


class Polytope:
    """Halfspace intersection A @ y <= b."""

    __slots__ = ("A", "b")

    def __init__(self, A, b):
        A = np.atleast_2d(np.array(A, dtype=float))
        b = _vector(b, "b")
        if A.shape[0] != b.shape[0]:
            raise ValueError("A and b must have the same number of rows")
        if A.shape[0] == 0:
            raise ValueError("polytope needs at least one halfspace")
        A.setflags(write=False)
        b.setflags(write=False)
        self.A = A
        self.b = b

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def n_halfspaces(self):
        return self.A.shape[0]

    def contains(self, point, tol=MEMBERSHIP_TOL):
        point = _vector(point, "point")
        if point.shape[0] != self.dim:
            raise ValueError("point dimension mismatch")
        return bool(np.all(self.A @ point <= self.b + tol))

    def violation(self, point):
        """max_i max(a_i . y - b_i, 0): zero exactly on members."""
        point = _vector(point, "point")
        if point.shape[0] != self.dim:
            raise ValueError("point dimension mismatch")
        return float(max(np.max(self.A @ point - self.b), 0.0))


def max_hyperrect_distance(first, second, order):
    """Maximum p-norm distance between points of two boxes, analytically.

    Per coordinate the maximizing pair pushes the two boxes apart along the
    direction of their center difference; ties (equal centers) send the first
    box to its upper face and the second to its lower face.  Returns
    (distance, point_in_first, point_in_second).
    """
    if not isinstance(first, Hyperrectangle) or not isinstance(second, Hyperrectangle):
        raise TypeError("max_hyperrect_distance expects two Hyperrectangles")
    if first.dim != second.dim:
        raise ValueError("dimension mismatch")
    order = float(order)
    if not (order >= 1.0 or np.isinf(order)):
        raise ValueError("norm order must satisfy p >= 1 (np.inf allowed)")
    signs = _sign_nonneg(first.center - second.center)
    far_first = first.center + signs * first.radius
    far_second = second.center - signs * second.radius
    distance = float(np.linalg.norm(far_first - far_second, ord=order))
    return distance, far_first, far_second
