"""Command-line front end: solve one query, sweep a 2-D input grid, selftest.

Exit codes: 0 when the run finished decisively (gap closed or verdict
reached), 2 when a budget ran out first, 1 on bad input or internal errors.
"""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .errors import ZonoptError
from .geometry import Hyperrectangle
from .io import (denormalize_input, load_network, normalize_input_set, read_query,
                 write_result)
from .problems import (NetworkDifferenceProblem, NoiseBufferProblem, check_containment,
                       check_reachability, max_network_difference, minimize_convex,
                       project_onto_range, solve_noise_buffer)

_SWEEP_HEADER = "dim1_lo,dim1_hi,dim2_lo,dim2_hi,value,status"


def _load_networks(spec, base_dir):
    loaded = []
    for path in spec.networks:
        resolved = path if os.path.isabs(path) else os.path.join(base_dir, path)
        loaded.append(load_network(resolved))
    return loaded


def execute_query(spec, base_dir=".", callback=None):
    """Run a parsed QuerySpec and return its QueryResult."""
    networks = _load_networks(spec, base_dir)
    net, meta = networks[0]
    input_set = spec.input_set
    if spec.apply_normalization:
        input_set = normalize_input_set(meta, input_set)
    budgets = dict(stop_gap=spec.stop_gap, stop_frequency=spec.stop_frequency,
                   max_iterations=spec.max_iterations, timeout=spec.timeout_seconds,
                   callback=callback)

    if spec.kind == "min-convex":
        result = minimize_convex(net, input_set, spec.payload, **budgets)
    elif spec.kind == "polytope-contained":
        result = check_containment(net, input_set, spec.payload, **budgets)
    elif spec.kind == "polytope-reach":
        result = check_reachability(net, input_set, spec.payload, **budgets)
    elif spec.kind == "project":
        result = project_onto_range(net, input_set, spec.payload.target,
                                    spec.payload.order, **budgets)
    elif spec.kind == "noise-buffer":
        buffer_obj, objective = spec.payload
        second, _ = networks[1]
        problem = NoiseBufferProblem(net, second, buffer_obj, objective)
        result = solve_noise_buffer(problem, input_set, **budgets)
    elif spec.kind == "net-diff":
        second, _ = networks[1]
        problem = NetworkDifferenceProblem(net, second, spec.payload)
        result = max_network_difference(problem, input_set, **budgets)
    else:
        raise ZonoptError(f"unhandled query kind {spec.kind!r}")

    if spec.apply_normalization and result.witness_input is not None:
        result.witness_input = denormalize_input(meta, result.witness_input)
    return result


def _read_query_file(path):
    with open(path, "r", encoding="utf-8") as handle:
        return read_query(handle.read())


def _exit_code(result):
    if result.verdict == "unknown" or result.status in ("timeout", "max_iter"):
        return 2
    return 0


def _cmd_solve(args):
    spec = _read_query_file(args.query)
    callback = None
    if args.trace:
        def callback(iteration, lower, upper, queue_size):
            print(f"{iteration},{lower:.17g},{upper:.17g},{upper - lower:.17g},{queue_size}")
    result = execute_query(spec, base_dir=os.path.dirname(os.path.abspath(args.query)),
                           callback=callback)
    text = write_result(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return _exit_code(result)


def _grid_cells(grid):
    """Cell bound pairs per dimension, iterated in row-major order."""
    edges1 = np.linspace(grid.lower[0], grid.upper[0], grid.cells[0] + 1)
    edges2 = np.linspace(grid.lower[1], grid.upper[1], grid.cells[1] + 1)
    for i in range(grid.cells[0]):
        for j in range(grid.cells[1]):
            yield (edges1[i], edges1[i + 1]), (edges2[j], edges2[j + 1])


def _cell_key(bounds1, bounds2):
    return ",".join(f"{v:.17g}" for v in (bounds1[0], bounds1[1], bounds2[0], bounds2[1]))


def _read_existing_rows(path):
    rows = {}
    if not os.path.exists(path):
        return rows
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle if line.strip()]
    for line in lines:
        if line == _SWEEP_HEADER:
            continue
        parts = line.split(",")
        if len(parts) == 6:
            rows[",".join(parts[:4])] = line
    return rows


def _cmd_sweep(args):
    spec = _read_query_file(args.query)
    if spec.grid is None:
        print("sweep requires a query with a 'grid' block", file=sys.stderr)
        return 1
    if not isinstance(spec.input_set, Hyperrectangle):
        print("sweep requires a hyperrectangle input set", file=sys.stderr)
        return 1
    grid = spec.grid
    if max(grid.dims) >= spec.input_set.dim:
        print("grid dimensions exceed the input set dimension", file=sys.stderr)
        return 1

    base_dir = os.path.dirname(os.path.abspath(args.query))
    existing = _read_existing_rows(args.out)
    lower = spec.input_set.lower.copy()
    upper = spec.input_set.upper.copy()
    incomplete = False
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(_SWEEP_HEADER + "\n")
        for bounds1, bounds2 in _grid_cells(grid):
            key = _cell_key(bounds1, bounds2)
            if key in existing:
                handle.write(existing[key] + "\n")
                handle.flush()
                continue
            lower[grid.dims[0]], upper[grid.dims[0]] = bounds1
            lower[grid.dims[1]], upper[grid.dims[1]] = bounds2
            cell_spec = _replace_input(spec, Hyperrectangle.from_bounds(lower, upper))
            try:
                result = execute_query(cell_spec, base_dir=base_dir)
                value = result.value
                status = result.verdict if result.verdict is not None else result.status
                if status in ("timeout", "max_iter", "unknown"):
                    incomplete = True
            except (ZonoptError, ValueError, OSError) as exc:
                print(f"cell {key}: {exc}", file=sys.stderr)
                value, status = float("nan"), "error"
                incomplete = True
            handle.write(f"{key},{value:.17g},{status}\n")
            handle.flush()
    return 2 if incomplete else 0


def _replace_input(spec, input_set):
    return replace(spec, input_set=input_set, grid=None)


def _cmd_selftest(args):
    from .selftest import run_selftest
    return 0 if run_selftest(seed=args.seed) else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="zonopt",
        description="Certified optimization over ReLU network outputs.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one query and write its result JSON")
    solve.add_argument("--query", required=True, help="path to the query JSON file")
    solve.add_argument("--out", help="result path (stdout when omitted)")
    solve.add_argument("--trace", action="store_true",
                       help="print iteration,lower,upper,gap,queue_size lines")
    solve.set_defaults(handler=_cmd_solve)

    sweep = sub.add_parser("sweep", help="solve a query over a 2-D grid of input boxes")
    sweep.add_argument("--query", required=True, help="query JSON with a 'grid' block")
    sweep.add_argument("--out", required=True,
                       help="CSV output path; existing rows are kept and reused")
    sweep.set_defaults(handler=_cmd_sweep)

    selftest = sub.add_parser("selftest", help="run the built-in correctness checks")
    selftest.add_argument("--seed", type=int, default=0)
    selftest.set_defaults(handler=_cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ZonoptError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
