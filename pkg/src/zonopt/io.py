"""File formats: NNet text networks, JSON networks, query and result JSON.

The NNet reader accepts // comments on any line, tolerates trailing commas,
and reports malformed input with 1-based line numbers.  Input normalization
metadata is parsed and carried along but only applied when a query opts in.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .geometry import Hyperrectangle, Polytope, Zonotope
from .network import AffineLayer, FeedForwardNetwork
from .problems import (AffineObjective, DistanceObjective, PolytopeViolationObjective,
                       QueryResult)

_NORM_BY_NAME = {"l1": 1.0, "l2": 2.0, "linf": np.inf}
_NAME_BY_NORM = {1.0: "l1", 2.0: "l2", np.inf: "linf"}

# Wide default bounds: clamping against them never changes an input.
_UNBOUNDED = 1e30


@dataclass(frozen=True)
class NNetMetadata:
    """Per-input bounds and affine normalization constants.

    means and ranges carry one trailing entry for the outputs.  Normalization
    clamps each input into [mins, maxes] and then maps it to
    (x - means[:-1]) / ranges[:-1]; outputs denormalize through the last
    mean/range pair.
    """

    input_mins: np.ndarray
    input_maxes: np.ndarray
    means: np.ndarray
    ranges: np.ndarray

    def __post_init__(self):
        mins = np.array(self.input_mins, dtype=float)
        maxes = np.array(self.input_maxes, dtype=float)
        means = np.array(self.means, dtype=float)
        ranges = np.array(self.ranges, dtype=float)
        if mins.ndim != 1 or maxes.shape != mins.shape:
            raise ValueError("input bounds must be equal-length vectors")
        if means.shape != (mins.shape[0] + 1,) or ranges.shape != means.shape:
            raise ValueError("means and ranges need one entry per input plus one for outputs")
        if np.any(maxes < mins):
            raise ValueError("each input max must be >= its min")
        if np.any(ranges <= 0):
            raise ValueError("ranges must be positive")
        for name, arr in (("input_mins", mins), ("input_maxes", maxes),
                          ("means", means), ("ranges", ranges)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def input_dim(self):
        return self.input_mins.shape[0]

    @classmethod
    def identity(cls, input_dim):
        """No-op metadata: unbounded inputs, zero shift, unit scale."""
        return cls(np.full(input_dim, -_UNBOUNDED), np.full(input_dim, _UNBOUNDED),
                   np.zeros(input_dim + 1), np.ones(input_dim + 1))


def normalize_input(meta, x):
    x = np.clip(np.asarray(x, dtype=float), meta.input_mins, meta.input_maxes)
    return (x - meta.means[:-1]) / meta.ranges[:-1]


def denormalize_input(meta, x):
    return np.asarray(x, dtype=float) * meta.ranges[:-1] + meta.means[:-1]


def denormalize_output(meta, y):
    return np.asarray(y, dtype=float) * meta.ranges[-1] + meta.means[-1]


def normalize_input_set(meta, input_set):
    """Map an input set into the network's normalized coordinates.

    Hyperrectangles are clamped to the stated bounds first (matching the
    pointwise clamp); zonotope generators scale without clamping since a
    zonotope has no tight axis-aligned description to clamp.
    """
    if isinstance(input_set, Hyperrectangle):
        lower = normalize_input(meta, input_set.lower)
        upper = normalize_input(meta, input_set.upper)
        return Hyperrectangle.from_bounds(lower, upper)
    scale = meta.ranges[:-1]
    center = (input_set.center - meta.means[:-1]) / scale
    return Zonotope(center, input_set.generators / scale[:, None])


# --- NNet text format ---

def _content_lines(text):
    out = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("//"):
            continue
        out.append((number, stripped))
    return out


def _row_floats(number, line, name, expected=None):
    tokens = [t.strip() for t in line.split(",")]
    tokens = [t for t in tokens if t]
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"non-numeric value in {name}", line=number) from None
    if expected is not None and len(values) != expected:
        raise ParseError(f"{name} has {len(values)} values, expected {expected}", line=number)
    return values


def _row_ints(number, line, name, expected=None):
    values = _row_floats(number, line, name, expected)
    ints = []
    for v in values:
        if v != int(v):
            raise ParseError(f"{name} must contain integers", line=number)
        ints.append(int(v))
    return ints


class _RowReader:
    def __init__(self, text):
        self.rows = _content_lines(text)
        self.cursor = 0
        self.last_line = self.rows[-1][0] if self.rows else 1

    def take(self, name):
        if self.cursor >= len(self.rows):
            raise ParseError(f"file ends before {name}", line=self.last_line)
        row = self.rows[self.cursor]
        self.cursor += 1
        return row

    def done(self):
        return self.cursor >= len(self.rows)

    def current_line(self):
        return self.rows[self.cursor][0]


def parse_nnet(text):
    """Parse NNet text into (FeedForwardNetwork, NNetMetadata)."""
    reader = _RowReader(text)
    number, line = reader.take("header")
    header = _row_ints(number, line, "header", 4)
    n_layers, input_dim, output_dim, _max_width = header
    if n_layers < 1 or input_dim < 1 or output_dim < 1:
        raise ParseError("header counts must be positive", line=number)

    number, line = reader.take("layer sizes")
    sizes = _row_ints(number, line, "layer sizes", n_layers + 1)
    if any(s < 1 for s in sizes):
        raise ParseError("layer sizes must be positive", line=number)
    if sizes[0] != input_dim:
        raise ParseError(f"first layer size {sizes[0]} does not match header input size "
                         f"{input_dim}", line=number)
    if sizes[-1] != output_dim:
        raise ParseError(f"last layer size {sizes[-1]} does not match header output size "
                         f"{output_dim}", line=number)

    reader.take("unused flag")

    number, line = reader.take("input minimums")
    mins = _row_floats(number, line, "input minimums", input_dim)
    number, line = reader.take("input maximums")
    maxes = _row_floats(number, line, "input maximums", input_dim)
    number, line = reader.take("normalization means")
    means = _row_floats(number, line, "normalization means", input_dim + 1)
    number, line = reader.take("normalization ranges")
    ranges = _row_floats(number, line, "normalization ranges", input_dim + 1)
    try:
        meta = NNetMetadata(mins, maxes, means, ranges)
    except ValueError as exc:
        raise ParseError(str(exc), line=number) from None

    layers = []
    for index in range(n_layers):
        n_in, n_out = sizes[index], sizes[index + 1]
        weights = np.empty((n_out, n_in))
        for row in range(n_out):
            name = f"layer {index + 1} weight row {row + 1}"
            number, line = reader.take(name)
            weights[row] = _row_floats(number, line, name, n_in)
        bias = np.empty(n_out)
        for row in range(n_out):
            name = f"layer {index + 1} bias row {row + 1}"
            number, line = reader.take(name)
            bias[row] = _row_floats(number, line, name, 1)[0]
        activation = "identity" if index == n_layers - 1 else "relu"
        layers.append(AffineLayer(weights, bias, activation))

    if not reader.done():
        raise ParseError("unexpected data after the last bias row", line=reader.current_line())
    return FeedForwardNetwork(layers), meta


def serialize_nnet(net, meta=None, comments=()):
    """Render a network (and optional metadata) in NNet text format."""
    if meta is None:
        meta = NNetMetadata.identity(net.input_dim)
    if meta.input_dim != net.input_dim:
        raise ValueError("metadata input dimension does not match the network")
    sizes = net.layer_sizes

    def row(values):
        return "".join(f"{float(v)!r}," for v in values)

    lines = [f"// {c}" for c in comments]
    lines.append(f"{len(net.layers)},{net.input_dim},{net.output_dim},{max(sizes)},")
    lines.append("".join(f"{s}," for s in sizes))
    lines.append("0,")
    lines.append(row(meta.input_mins))
    lines.append(row(meta.input_maxes))
    lines.append(row(meta.means))
    lines.append(row(meta.ranges))
    for layer in net.layers:
        for weight_row in layer.weights:
            lines.append(row(weight_row))
        for b in layer.bias:
            lines.append(f"{float(b)!r},")
    return "\n".join(lines) + "\n"


# --- JSON network format ---

def parse_network_json(text):
    """Parse the JSON network format into (FeedForwardNetwork, NNetMetadata)."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ParseError("network JSON must be an object")
    try:
        weights = [np.array(w, dtype=float) for w in payload["weights"]]
        biases = [np.array(b, dtype=float) for b in payload["biases"]]
    except KeyError as exc:
        raise ParseError(f"network JSON is missing {exc.args[0]!r}") from None
    except (TypeError, ValueError):
        raise ParseError("network weights and biases must be numeric arrays") from None
    if len(weights) != len(biases) or not weights:
        raise ParseError("need one bias vector per weight matrix")
    layers = []
    for index, (w, b) in enumerate(zip(weights, biases)):
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise ParseError(f"layer {index + 1} weight/bias shapes do not agree")
        activation = "identity" if index == len(weights) - 1 else "relu"
        layers.append(AffineLayer(w, b, activation))
    net = FeedForwardNetwork(layers)
    if "layer_sizes" in payload and tuple(payload["layer_sizes"]) != net.layer_sizes:
        raise ParseError("declared layer_sizes do not match the weight shapes")
    if "normalization" in payload:
        norm = payload["normalization"]
        try:
            meta = NNetMetadata(norm["input_mins"], norm["input_maxes"],
                                norm["means"], norm["ranges"])
        except KeyError as exc:
            raise ParseError(f"normalization block is missing {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ParseError(str(exc)) from None
        if meta.input_dim != net.input_dim:
            raise ParseError("normalization dimensions do not match the network")
    else:
        meta = NNetMetadata.identity(net.input_dim)
    return net, meta


def serialize_network_json(net, meta=None):
    payload = {
        "layer_sizes": list(net.layer_sizes),
        "weights": [layer.weights.tolist() for layer in net.layers],
        "biases": [layer.bias.tolist() for layer in net.layers],
    }
    if meta is not None:
        payload["normalization"] = {
            "input_mins": meta.input_mins.tolist(),
            "input_maxes": meta.input_maxes.tolist(),
            "means": meta.means.tolist(),
            "ranges": meta.ranges.tolist(),
        }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def load_network(path):
    """Load a network from .nnet or .json by file extension."""
    path = str(path)
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    if path.endswith(".json"):
        return parse_network_json(text)
    return parse_nnet(text)


def save_network(path, net, meta=None):
    path = str(path)
    text = serialize_network_json(net, meta) if path.endswith(".json") \
        else serialize_nnet(net, meta)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


# --- query JSON ---

QUERY_KINDS = ("min-convex", "polytope-contained", "polytope-reach", "project",
               "noise-buffer", "net-diff")


@dataclass(frozen=True)
class GridSpec:
    """Two input dimensions to sweep, with bounds and cell counts."""

    dims: tuple
    lower: np.ndarray
    upper: np.ndarray
    cells: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        cells = tuple(int(c) for c in self.cells)
        lower = np.array(self.lower, dtype=float)
        upper = np.array(self.upper, dtype=float)
        if len(dims) != 2 or dims[0] == dims[1] or min(dims) < 0:
            raise ValueError("grid needs two distinct input dimensions")
        if len(cells) != 2 or min(cells) < 1:
            raise ValueError("grid cell counts must be positive")
        if lower.shape != (2,) or upper.shape != (2,) or np.any(upper <= lower):
            raise ValueError("grid bounds must satisfy lower < upper per dimension")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


@dataclass(frozen=True)
class QuerySpec:
    kind: str
    networks: tuple
    input_set: object
    payload: object
    stop_gap: float = 1e-4
    stop_frequency: int = 1
    max_iterations: int = 1_000_000
    timeout_seconds: float = 300.0
    apply_normalization: bool = False
    grid: GridSpec | None = None


def _require(mapping, key, context):
    if key not in mapping:
        raise ParseError(f"{context} is missing {key!r}")
    return mapping[key]


def _parse_array(value, context, ndim):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{context} must be numeric") from None
    if arr.ndim != ndim:
        raise ParseError(f"{context} must be {ndim}-dimensional")
    return arr


def parse_set(obj, context="input_set"):
    if not isinstance(obj, dict):
        raise ParseError(f"{context} must be an object")
    kind = _require(obj, "type", context)
    if kind == "hyperrectangle":
        center = _parse_array(_require(obj, "center", context), f"{context}.center", 1)
        radius = _parse_array(_require(obj, "radius", context), f"{context}.radius", 1)
        try:
            return Hyperrectangle(center, radius)
        except ValueError as exc:
            raise ParseError(f"{context}: {exc}") from None
    if kind == "zonotope":
        center = _parse_array(_require(obj, "center", context), f"{context}.center", 1)
        generators = _parse_array(_require(obj, "generators", context),
                                  f"{context}.generators", 2)
        try:
            return Zonotope(center, generators)
        except ValueError as exc:
            raise ParseError(f"{context}: {exc}") from None
    raise ParseError(f"{context}.type must be 'hyperrectangle' or 'zonotope'")


def serialize_set(input_set):
    if isinstance(input_set, Hyperrectangle):
        return {"type": "hyperrectangle", "center": input_set.center.tolist(),
                "radius": input_set.radius.tolist()}
    return {"type": "zonotope", "center": input_set.center.tolist(),
            "generators": input_set.generators.tolist()}


def _parse_polytope(obj, context):
    if not isinstance(obj, dict):
        raise ParseError(f"{context} must be an object")
    a = _parse_array(_require(obj, "A", context), f"{context}.A", 2)
    b = _parse_array(_require(obj, "b", context), f"{context}.b", 1)
    try:
        return Polytope(a, b)
    except ValueError as exc:
        raise ParseError(f"{context}: {exc}") from None


def _parse_norm_name(value, context):
    if value not in _NORM_BY_NAME:
        raise ParseError(f"{context} must be one of 'l1', 'l2', 'linf'")
    return _NORM_BY_NAME[value]


def _parse_order(value, context):
    if value == "inf":
        return np.inf
    try:
        order = float(value)
    except (TypeError, ValueError):
        raise ParseError(f"{context} must be a number >= 1 or 'inf'") from None
    if not (order >= 1.0 or math.isinf(order)):
        raise ParseError(f"{context} must be a number >= 1 or 'inf'")
    return order


def parse_objective(obj, context="objective"):
    if not isinstance(obj, dict):
        raise ParseError(f"{context} must be an object")
    kind = _require(obj, "type", context)
    if kind == "affine":
        a = _parse_array(_require(obj, "a", context), f"{context}.a", 1)
        return AffineObjective(a, float(obj.get("b", 0.0)))
    if kind == "polytope-violation":
        return PolytopeViolationObjective(_parse_polytope(_require(obj, "polytope", context),
                                                          f"{context}.polytope"))
    if kind == "distance":
        target = _parse_array(_require(obj, "target", context), f"{context}.target", 1)
        order = _parse_norm_name(obj.get("norm", "l2"), f"{context}.norm")
        return DistanceObjective(target, order)
    raise ParseError(f"{context}.type must be 'affine', 'polytope-violation', or 'distance'")


def serialize_objective(objective):
    if isinstance(objective, AffineObjective):
        return {"type": "affine", "a": objective.a.tolist(), "b": objective.b}
    if isinstance(objective, PolytopeViolationObjective):
        poly = objective.polytope
        return {"type": "polytope-violation",
                "polytope": {"A": poly.A.tolist(), "b": poly.b.tolist()}}
    return {"type": "distance", "target": objective.target.tolist(),
            "norm": _NAME_BY_NORM[objective.order]}


def read_query(text):
    """Parse a query JSON document into a QuerySpec."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ParseError("query must be a JSON object")
    kind = _require(payload, "kind", "query")
    if kind not in QUERY_KINDS:
        raise ParseError(f"unknown query kind {kind!r}; expected one of "
                         + ", ".join(QUERY_KINDS))

    two_nets = kind in ("noise-buffer", "net-diff")
    if two_nets:
        networks = _require(payload, "networks", "query")
        if not (isinstance(networks, list) and len(networks) == 2
                and all(isinstance(n, str) for n in networks)):
            raise ParseError("query.networks must list exactly two network paths")
        networks = tuple(networks)
    else:
        network = _require(payload, "network", "query")
        if not isinstance(network, str):
            raise ParseError("query.network must be a path string")
        networks = (network,)

    input_set = parse_set(_require(payload, "input_set", "query"))

    if kind == "min-convex":
        problem_payload = parse_objective(_require(payload, "objective", "query"))
    elif kind in ("polytope-contained", "polytope-reach"):
        problem_payload = _parse_polytope(_require(payload, "polytope", "query"),
                                          "query.polytope")
    elif kind == "project":
        target = _parse_array(_require(payload, "target", "query"), "query.target", 1)
        order = _parse_norm_name(payload.get("norm", "l2"), "query.norm")
        problem_payload = DistanceObjective(target, order)
    elif kind == "noise-buffer":
        buffer_obj = parse_set(_require(payload, "buffer", "query"), "query.buffer")
        if isinstance(buffer_obj, Hyperrectangle):
            buffer_obj = buffer_obj.to_zonotope()
        objective = parse_objective(_require(payload, "objective", "query"))
        problem_payload = (buffer_obj, objective)
    else:  # net-diff
        problem_payload = _parse_order(payload.get("norm", "inf"), "query.norm")

    grid = None
    if "grid" in payload:
        g = payload["grid"]
        if not isinstance(g, dict):
            raise ParseError("query.grid must be an object")
        try:
            grid = GridSpec(_require(g, "dims", "query.grid"),
                            _require(g, "lower", "query.grid"),
                            _require(g, "upper", "query.grid"),
                            _require(g, "cells", "query.grid"))
        except ValueError as exc:
            raise ParseError(f"query.grid: {exc}") from None

    stop_gap = float(payload.get("stop_gap", 1e-4))
    stop_frequency = int(payload.get("stop_frequency", 1))
    max_iterations = int(payload.get("max_iterations", 1_000_000))
    timeout_seconds = float(payload.get("timeout_seconds", 300.0))
    if stop_gap <= 0 or stop_frequency < 1 or max_iterations < 1 or timeout_seconds <= 0:
        raise ParseError("budgets must be positive (stop_gap, stop_frequency, "
                         "max_iterations, timeout_seconds)")
    return QuerySpec(kind, networks, input_set, problem_payload,
                     stop_gap=stop_gap, stop_frequency=stop_frequency,
                     max_iterations=max_iterations, timeout_seconds=timeout_seconds,
                     apply_normalization=bool(payload.get("apply_normalization", False)),
                     grid=grid)


def write_query(spec):
    """Render a QuerySpec back into query JSON (inverse of read_query)."""
    payload = {
        "kind": spec.kind,
        "input_set": serialize_set(spec.input_set),
        "stop_gap": spec.stop_gap,
        "stop_frequency": spec.stop_frequency,
        "max_iterations": spec.max_iterations,
        "timeout_seconds": spec.timeout_seconds,
        "apply_normalization": spec.apply_normalization,
    }
    if len(spec.networks) == 2:
        payload["networks"] = list(spec.networks)
    else:
        payload["network"] = spec.networks[0]
    if spec.kind == "min-convex":
        payload["objective"] = serialize_objective(spec.payload)
    elif spec.kind in ("polytope-contained", "polytope-reach"):
        payload["polytope"] = {"A": spec.payload.A.tolist(),
                               "b": spec.payload.b.tolist()}
    elif spec.kind == "project":
        payload["target"] = spec.payload.target.tolist()
        payload["norm"] = _NAME_BY_NORM[spec.payload.order]
    elif spec.kind == "noise-buffer":
        buffer_obj, objective = spec.payload
        payload["buffer"] = serialize_set(buffer_obj)
        payload["objective"] = serialize_objective(objective)
    else:
        payload["norm"] = "inf" if np.isinf(spec.payload) else spec.payload
    if spec.grid is not None:
        payload["grid"] = {"dims": list(spec.grid.dims), "lower": spec.grid.lower.tolist(),
                           "upper": spec.grid.upper.tolist(), "cells": list(spec.grid.cells)}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# --- result JSON ---

def write_result(result):
    payload = {
        "kind": result.kind,
        "status": result.status,
        "lower_bound": float(result.lower_bound),
        "upper_bound": float(result.upper_bound),
        "gap": float(result.gap),
        "value": float(result.value),
        "witness_input": None if result.witness_input is None
        else np.asarray(result.witness_input, dtype=float).tolist(),
        "witness_output": None if result.witness_output is None
        else np.asarray(result.witness_output, dtype=float).tolist(),
        "iterations": int(result.iterations),
        "subproblems_expanded": int(result.subproblems_expanded),
        "wall_time_seconds": float(result.wall_time_seconds),
    }
    if result.verdict is not None:
        payload["verdict"] = result.verdict
    if result.witness_perturbation is not None:
        payload["witness_perturbation"] = \
            np.asarray(result.witness_perturbation, dtype=float).tolist()
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def read_result(text):
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ParseError("result must be a JSON object")

    def arr(key):
        value = payload.get(key)
        return None if value is None else np.array(value, dtype=float)

    try:
        return QueryResult(
            kind=payload["kind"], status=payload["status"],
            lower_bound=float(payload["lower_bound"]),
            upper_bound=float(payload["upper_bound"]),
            value=float(payload["value"]),
            witness_input=arr("witness_input"), witness_output=arr("witness_output"),
            iterations=int(payload["iterations"]),
            subproblems_expanded=int(payload["subproblems_expanded"]),
            wall_time_seconds=float(payload["wall_time_seconds"]),
            verdict=payload.get("verdict"),
            witness_perturbation=arr("witness_perturbation"))
    except KeyError as exc:
        raise ParseError(f"result JSON is missing {exc.args[0]!r}") from None
