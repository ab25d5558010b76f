"""Best-first branch and bound over input-space cells.

The queue is a binary heap keyed by cell lower bound with FIFO tie-breaking,
so the popped cell always carries the global lower bound.  The gap between
the lowest upper bound seen and that global lower bound is checked every
`stop_frequency` iterations, including once before the first split.
Maximization problems are run by negating the objective inside the problem
object; the engine always minimizes.
"""

import heapq
import time
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from .errors import DegenerateSplitError, InternalSolverError

DEFAULT_STOP_GAP = 1e-4
DEFAULT_STOP_FREQUENCY = 1
DEFAULT_MAX_ITERATIONS = 1_000_000
DEFAULT_TIMEOUT = 300.0


class ProblemInterface(Protocol):
    """What the engine needs from a problem definition."""

    def split(self, cell) -> tuple:
        """Cover the cell with child cells (children are subsets of the cell)."""

    def lower_bound(self, cell) -> float:
        """Sound lower bound on the objective minimum over the cell."""

    def upper_bound(self, cell) -> tuple[float, Any]:
        """Achievable objective value in the cell plus the witness attaining it."""


@dataclass
class Subproblem:
    cell: Any
    lower_bound: float
    depth: int


@dataclass
class SolveStatus:
    """Outcome of a solve.

    status is "optimal" (gap closed to stop_gap), "timeout", "max_iter", or
    "target" (an early-stop threshold fired).  Bounds are always honest:
    best_lower <= optimum <= best_upper, and the witness evaluates to
    best_upper through the problem's upper-bound machinery.
    """

    status: str
    best_lower: float
    best_upper: float
    witness: Any
    iterations: int
    expansions: int
    wall_time: float

    @property
    def gap(self):
        return self.best_upper - self.best_lower


def solve(problem, root, *, stop_gap=DEFAULT_STOP_GAP, stop_frequency=DEFAULT_STOP_FREQUENCY,
          max_iterations=DEFAULT_MAX_ITERATIONS, timeout=DEFAULT_TIMEOUT, callback=None,
          stop_upper_at=None, stop_lower_at=None, tie_seed=None):
    """Minimize a problem over the root cell to within stop_gap.

    Optional early stops: `stop_upper_at` returns status "target" once
    best_upper <= stop_upper_at (a good-enough point was found);
    `stop_lower_at` does so once the global lower bound strictly exceeds it
    (the optimum is certified above a threshold).  `callback(iteration,
    best_lower, best_upper, queue_size)` fires at every gap check.
    `tie_seed` randomizes heap tie-breaking (testing hook); by default ties
    pop in insertion order.
    """
    if stop_gap <= 0.0:
        raise ValueError("stop_gap must be positive")
    if stop_frequency < 1:
        raise ValueError("stop_frequency must be at least 1")
    start = time.monotonic()
    tie_rng = None if tie_seed is None else np.random.default_rng(tie_seed)
    counter = 0

    def tie_key():
        nonlocal counter
        counter += 1
        return int(tie_rng.integers(1 << 62)) if tie_rng is not None else counter

    root_lower = float(problem.lower_bound(root))
    best_upper, witness = problem.upper_bound(root)
    best_upper = float(best_upper)
    heap = [(root_lower, tie_key(), Subproblem(root, root_lower, 0))]
    finalized_lower = np.inf
    iterations = 0
    expansions = 0

    def status(kind, lower):
        return SolveStatus(kind, lower, best_upper, witness, iterations, expansions,
                           time.monotonic() - start)

    while True:
        queue_lower = heap[0][0] if heap else np.inf
        global_lower = min(queue_lower, finalized_lower)
        if iterations % stop_frequency == 0:
            if callback is not None:
                callback(iterations, global_lower, best_upper, len(heap))
            if best_upper - global_lower <= stop_gap:
                if not heap and np.isinf(global_lower):
                    # Nothing queued and nothing finalized: a split dropped
                    # its region, so the "closed" gap is vacuous.
                    raise InternalSolverError(
                        "queue exhausted without finalizing any cell; a split "
                        "returned no children"
                    )
                return status("optimal", global_lower)
            if stop_upper_at is not None and best_upper <= stop_upper_at:
                return status("target", global_lower)
            if stop_lower_at is not None and global_lower > stop_lower_at:
                return status("target", global_lower)
        if time.monotonic() - start > timeout:
            return status("timeout", global_lower)
        if iterations >= max_iterations:
            return status("max_iter", global_lower)
        if not heap:
            raise InternalSolverError(
                "queue exhausted with the optimality gap still open; some bound is unsound"
            )
        _, _, sub = heapq.heappop(heap)
        iterations += 1
        try:
            children = problem.split(sub.cell)
        except DegenerateSplitError:
            # Point-like cell: the center evaluation is the exact cell optimum.
            value, point = problem.upper_bound(sub.cell)
            value = float(value)
            finalized_lower = min(finalized_lower, value)
            if value < best_upper:
                best_upper, witness = value, point
            continue
        expansions += 1
        for child in children:
            # The parent bound stays valid on subsets; clamping keeps the
            # global lower bound monotone under overlapping splits.
            child_lower = max(float(problem.lower_bound(child)), sub.lower_bound)
            value, point = problem.upper_bound(child)
            value = float(value)
            if value < best_upper:
                best_upper, witness = value, point
            heapq.heappush(heap, (child_lower, tie_key(),
                                  Subproblem(child, child_lower, sub.depth + 1)))
