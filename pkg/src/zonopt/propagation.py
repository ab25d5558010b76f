"""Sound zonotope propagation through affine layers and ReLUs.

Affine maps are exact on zonotopes.  Each ReLU row is replaced by its
minimal-area linear relaxation: with pre-activation bounds [l, u] straddling
zero, the row is scaled by slope u / (u - l), the center shifts by
mu = -slope * l / 2, and one fresh generator with entry mu captures the
relaxation error.  Rows with u <= 0 are zeroed, rows with l >= 0 pass through
unchanged, so the output generator count grows by at most one per unstable
row.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import Zonotope


@dataclass(frozen=True)
class NeuronBounds:
    """Pre-activation bounds of one layer, from the zonotope rows."""

    lower: np.ndarray
    upper: np.ndarray


def affine_transform(zono, weights, bias):
    """Exact image of a zonotope under x -> weights @ x + bias."""
    weights = np.asarray(weights, dtype=float)
    bias = np.asarray(bias, dtype=float)
    if weights.ndim != 2 or weights.shape[1] != zono.dim:
        raise ValueError(f"weights must have shape (*, {zono.dim})")
    if bias.shape != (weights.shape[0],):
        raise ValueError("bias length must equal the number of weight rows")
    return Zonotope(weights @ zono.center + bias, weights @ zono.generators)


def relu_transform(zono):
    """Sound overapproximation of the elementwise ReLU image."""
    center = zono.center
    gens = zono.generators
    radius = np.abs(gens).sum(axis=1)
    lower = center - radius
    upper = center + radius

    scale = np.ones(zono.dim)
    scale[upper <= 0.0] = 0.0
    unstable = (lower < 0.0) & (upper > 0.0)
    scale[unstable] = upper[unstable] / (upper[unstable] - lower[unstable])
    mu = np.zeros(zono.dim)
    mu[unstable] = -scale[unstable] * lower[unstable] / 2.0

    new_center = scale * center + mu
    new_gens = scale[:, None] * gens
    rows = np.where(unstable)[0]
    if rows.size:
        fresh = np.zeros((zono.dim, rows.size))
        fresh[rows, np.arange(rows.size)] = mu[rows]
        new_gens = np.hstack([new_gens, fresh])
    return Zonotope(new_center, new_gens)


def propagate(net, zono):
    """Push a zonotope through every layer of the network."""
    if zono.dim != net.input_dim:
        raise ValueError(f"zonotope dimension {zono.dim} does not match input {net.input_dim}")
    for layer in net.layers:
        zono = affine_transform(zono, layer.weights, layer.bias)
        if layer.activation == "relu":
            zono = relu_transform(zono)
    return zono


def propagate_with_bounds(net, zono):
    """Like propagate, also returning per-layer pre-activation bounds."""
    if zono.dim != net.input_dim:
        raise ValueError(f"zonotope dimension {zono.dim} does not match input {net.input_dim}")
    bounds = []
    for layer in net.layers:
        zono = affine_transform(zono, layer.weights, layer.bias)
        box = zono.bounding_box()
        bounds.append(NeuronBounds(box.lower, box.upper))
        if layer.activation == "relu":
            zono = relu_transform(zono)
    return zono, bounds
