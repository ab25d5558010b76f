"""Certified global optimization of convex objectives over ReLU network outputs.

The solver branches on the (low-dimensional) input set, propagates each piece
through the network as a zonotope, and bounds the convex objective over the
propagated set, driving the certified gap below a requested tolerance.
"""

from .bnb import SolveStatus, Subproblem, solve
from .errors import (DegenerateSplitError, InternalSolverError, ParseError,
                     SolverFailureError, ZonoptError)
from .geometry import Hyperrectangle, Polytope, Zonotope, max_hyperrect_distance
from .io import (QUERY_KINDS, GridSpec, NNetMetadata, QuerySpec, denormalize_input,
                 denormalize_output, load_network, normalize_input, normalize_input_set,
                 parse_network_json, parse_nnet, read_query, read_result, save_network,
                 serialize_network_json, serialize_nnet, write_query, write_result)
from .network import AffineLayer, FeedForwardNetwork, compose
from .problems import (AffineObjective, DistanceObjective, NetworkDifferenceProblem,
                       NoiseBufferProblem, PolytopeViolationObjective, QueryResult,
                       check_containment, check_reachability, lower_bound_convex,
                       max_network_difference, minimize_convex, objective_value,
                       project_onto_range, solve_noise_buffer, upper_bound_center)
from .propagation import affine_transform, propagate, propagate_with_bounds, relu_transform
from .selftest import run_selftest
from .simplex import LinearProgram, LpSolution, simplex_lp
from .subsolvers import (box_ls_lower_bound, max_polytope_violation, min_distance_lp,
                         min_polytope_violation)

__version__ = "0.1.0"

__all__ = [
    "AffineLayer", "AffineObjective", "DegenerateSplitError", "DistanceObjective",
    "FeedForwardNetwork", "GridSpec", "Hyperrectangle", "InternalSolverError",
    "LinearProgram", "LpSolution", "NNetMetadata", "NetworkDifferenceProblem",
    "NoiseBufferProblem", "ParseError", "Polytope", "PolytopeViolationObjective",
    "QUERY_KINDS", "QueryResult", "QuerySpec", "SolveStatus", "SolverFailureError",
    "Subproblem", "Zonotope", "ZonoptError",
    "affine_transform", "box_ls_lower_bound", "check_containment", "check_reachability",
    "compose", "denormalize_input", "denormalize_output", "load_network",
    "lower_bound_convex", "max_hyperrect_distance", "max_network_difference",
    "max_polytope_violation", "min_distance_lp", "min_polytope_violation",
    "minimize_convex", "normalize_input", "normalize_input_set", "objective_value",
    "parse_network_json", "parse_nnet", "project_onto_range", "propagate",
    "propagate_with_bounds", "read_query", "read_result", "relu_transform",
    "run_selftest", "save_network", "serialize_network_json", "serialize_nnet",
    "simplex_lp", "solve", "solve_noise_buffer", "upper_bound_center", "write_query",
    "write_result",
]
