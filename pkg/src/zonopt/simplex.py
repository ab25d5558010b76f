"""Dense simplex solver for small linear programs.

Problems are stated over bounded or unbounded variables as

    minimize    objective . v
    subject to  constraint_matrix @ v <= rhs,   lower <= v <= upper.

The solver runs a two-phase tableau simplex with Bland's rule for both the
entering and the leaving variable, which guarantees termination without
anti-cycling perturbations.  The tableau is recomputed from the current basis
by a partial-pivoting solve every 50 pivots to keep accumulated round-off in
check; a basis whose condition estimate blows up raises SolverFailureError,
which is distinct from an ordinary infeasible or unbounded outcome.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SolverFailureError

FEASIBILITY_TOL = 1e-8
OPTIMALITY_TOL = 1e-8

_PIVOT_TOL = 1e-11
_REFACTOR_EVERY = 50
_CONDITION_LIMIT = 1e13


class LinearProgram:
    """Immutable LP data: minimize objective over an inequality polytope plus box bounds."""

    __slots__ = ("objective", "constraint_matrix", "rhs", "lower", "upper")

    def __init__(self, objective, constraint_matrix, rhs, lower=None, upper=None):
        objective = np.array(objective, dtype=float)
        constraint_matrix = np.atleast_2d(np.array(constraint_matrix, dtype=float))
        rhs = np.array(rhs, dtype=float)
        if objective.ndim != 1:
            raise ValueError("objective must be a vector")
        n = objective.shape[0]
        if constraint_matrix.size == 0:
            constraint_matrix = constraint_matrix.reshape(0, n)
        if constraint_matrix.shape[1] != n:
            raise ValueError(
                f"constraint matrix has {constraint_matrix.shape[1]} columns, expected {n}"
            )
        if rhs.shape != (constraint_matrix.shape[0],):
            raise ValueError("rhs length must match the number of constraint rows")
        lower = np.full(n, -np.inf) if lower is None else np.array(lower, dtype=float)
        upper = np.full(n, np.inf) if upper is None else np.array(upper, dtype=float)
        if lower.shape != (n,) or upper.shape != (n,):
            raise ValueError("bounds must match the number of variables")
        if not (np.all(np.isfinite(objective)) and np.all(np.isfinite(constraint_matrix))
                and np.all(np.isfinite(rhs))):
            raise ValueError("objective, constraint matrix, and rhs must be finite")
        if np.any(lower > upper):
            raise ValueError("lower bounds must not exceed upper bounds")
        for arr in (objective, constraint_matrix, rhs, lower, upper):
            arr.setflags(write=False)
        self.objective = objective
        self.constraint_matrix = constraint_matrix
        self.rhs = rhs
        self.lower = lower
        self.upper = upper

    @property
    def n_variables(self):
        return self.objective.shape[0]

    @property
    def n_constraints(self):
        return self.constraint_matrix.shape[0]


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float | None
    point: np.ndarray | None


def _pivot(tableau, row, col):
    piv = tableau[row, col]
    if abs(piv) < _PIVOT_TOL:
        raise SolverFailureError("pivot element vanished")
    tableau[row] /= piv
    column = tableau[:, col].copy()
    column[row] = 0.0
    tableau -= np.outer(column, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0


def _refactor(original, basis):
    """Rebuild the tableau from the original data and the current basis."""
    if original.shape[0] == 0:
        return original.copy()
    base = original[:, basis]
    try:
        cond = np.linalg.cond(base)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy never raises here
        raise SolverFailureError("basis condition estimate failed") from exc
    if not np.isfinite(cond) or cond > _CONDITION_LIMIT:
        raise SolverFailureError(f"basis condition estimate {cond:.3e} exceeded limit")
    try:
        return np.linalg.solve(base, original)
    except np.linalg.LinAlgError as exc:
        raise SolverFailureError("singular basis during refactorization") from exc


def _bland_loop(tableau, original, basis, is_basic, cost, banned, opt_tol, max_pivots, pivots_done):
    """Run Bland-rule pivoting until optimal or unbounded.

    Returns (outcome, tableau, pivots_done) with outcome "optimal" or "unbounded".
    """
    n_cols = tableau.shape[1] - 1
    while True:
        reduced = cost - cost[basis] @ tableau[:, :n_cols] if len(basis) else cost.copy()
        eligible = (reduced < -opt_tol) & ~banned & ~is_basic
        if not eligible.any():
            return "optimal", tableau, pivots_done
        enter = int(np.argmax(eligible))
        column = tableau[:, enter]
        positive = column > _PIVOT_TOL
        if not positive.any():
            return "unbounded", tableau, pivots_done
        rows = np.where(positive)[0]
        ratios = np.maximum(tableau[rows, -1], 0.0) / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12]
        leave_row = min(ties, key=lambda i: basis[i])
        is_basic[basis[leave_row]] = False
        _pivot(tableau, leave_row, enter)
        basis[leave_row] = enter
        is_basic[enter] = True
        pivots_done += 1
        if pivots_done >= max_pivots:
            raise SolverFailureError(f"pivot limit {max_pivots} exceeded")
        if pivots_done % _REFACTOR_EVERY == 0:
            tableau = _refactor(original, basis)


def _solve_standard(matrix, rhs, cost, feas_tol, opt_tol, max_pivots):
    """Two-phase simplex for min cost.x s.t. matrix @ x <= rhs, x >= 0.

    Returns (status, x) with status "optimal" | "infeasible" | "unbounded".
    """
    m, n = matrix.shape
    flip = rhs < 0
    n_art = int(flip.sum())
    n_cols = n + m + n_art
    original = np.zeros((m, n_cols + 1))
    original[:, :n] = matrix
    original[:, n:n + m] = np.eye(m)
    original[:, -1] = rhs
    original[flip, :] *= -1.0
    basis = list(range(n, n + m))
    for k, i in enumerate(np.where(flip)[0]):
        original[i, n + m + k] = 1.0
        basis[i] = n + m + k
    tableau = original.copy()
    is_basic = np.zeros(n_cols, dtype=bool)
    is_basic[basis] = True
    art_mask = np.zeros(n_cols, dtype=bool)
    art_mask[n + m:] = True
    pivots = 0

    if n_art:
        cost1 = art_mask.astype(float)
        outcome, tableau, pivots = _bland_loop(
            tableau, original, basis, is_basic, cost1,
            np.zeros(n_cols, dtype=bool), opt_tol, max_pivots, pivots,
        )
        if outcome != "optimal":  # pragma: no cover - phase 1 is always bounded
            raise SolverFailureError("phase 1 reported unbounded")
        if cost1[basis] @ tableau[:, -1] > feas_tol:
            return "infeasible", None
        # Drive leftover artificials out of the basis where possible.
        for row, var in enumerate(basis):
            if art_mask[var]:
                candidates = np.where(np.abs(tableau[row, :n + m]) > 1e-9)[0]
                if candidates.size:
                    is_basic[var] = False
                    _pivot(tableau, row, int(candidates[0]))
                    basis[row] = int(candidates[0])
                    is_basic[basis[row]] = True

    cost2 = np.concatenate([cost, np.zeros(m + n_art)])
    outcome, tableau, pivots = _bland_loop(
        tableau, original, basis, is_basic, cost2, art_mask, opt_tol, max_pivots, pivots,
    )
    if outcome == "unbounded":
        return "unbounded", None
    tableau = _refactor(original, basis)
    x = np.zeros(n_cols)
    x[basis] = np.maximum(tableau[:, -1], 0.0)
    return "optimal", x[:n]


def simplex_lp(lp, *, feas_tol=FEASIBILITY_TOL, opt_tol=OPTIMALITY_TOL, max_pivots=None):
    """Solve a LinearProgram, returning an LpSolution.

    Deterministic: Bland's rule picks the lowest-index entering column and the
    lowest-index basic variable among tied leaving rows.  Numerical breakdown
    (tiny pivots, ill-conditioned or singular basis, pivot-limit hit) raises
    SolverFailureError instead of returning a wrong status.
    """
    if not isinstance(lp, LinearProgram):
        raise TypeError("simplex_lp expects a LinearProgram")
    n = lp.n_variables
    if n == 0:
        if np.all(lp.rhs >= -feas_tol):
            return LpSolution("optimal", 0.0, np.zeros(0))
        return LpSolution("infeasible", None, None)

    # Shift/split variables so every standard-form variable is >= 0.
    offsets = np.zeros(n)
    col_var = []
    col_sign = []
    bound_rows = []  # (standard column, width) for two-sided bounds
    for j in range(n):
        low, high = lp.lower[j], lp.upper[j]
        if np.isfinite(low):
            offsets[j] = low
            col_var.append(j)
            col_sign.append(1.0)
            if np.isfinite(high):
                bound_rows.append((len(col_var) - 1, high - low))
        elif np.isfinite(high):
            offsets[j] = high
            col_var.append(j)
            col_sign.append(-1.0)
        else:
            col_var.append(j)
            col_sign.append(1.0)
            col_var.append(j)
            col_sign.append(-1.0)
    col_var = np.array(col_var, dtype=int)
    col_sign = np.array(col_sign)
    n_std = col_var.size

    body = lp.constraint_matrix[:, col_var] * col_sign
    rhs = lp.rhs - lp.constraint_matrix @ offsets
    if bound_rows:
        extra = np.zeros((len(bound_rows), n_std))
        extra_rhs = np.empty(len(bound_rows))
        for i, (col, width) in enumerate(bound_rows):
            extra[i, col] = 1.0
            extra_rhs[i] = width
        body = np.vstack([body, extra])
        rhs = np.concatenate([rhs, extra_rhs])
    cost = lp.objective[col_var] * col_sign

    if max_pivots is None:
        max_pivots = 1000 + 200 * (n_std + body.shape[0])
    status, x_std = _solve_standard(body, rhs, cost, feas_tol, opt_tol, max_pivots)
    if status != "optimal":
        return LpSolution(status, None, None)
    point = offsets.copy()
    np.add.at(point, col_var, col_sign * x_std)
    point = np.clip(point, lp.lower, lp.upper)
    return LpSolution("optimal", float(lp.objective @ point), point)
