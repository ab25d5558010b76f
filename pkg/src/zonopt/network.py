"""Feedforward ReLU networks as explicit affine layer stacks."""

import numpy as np

ACTIVATIONS = ("relu", "identity")


class AffineLayer:
    """One layer: x -> activation(weights @ x + bias)."""

    __slots__ = ("weights", "bias", "activation")

    def __init__(self, weights, bias, activation="relu"):
        weights = np.array(weights, dtype=float)
        bias = np.array(bias, dtype=float)
        if weights.ndim != 2:
            raise ValueError("weights must be a 2-D matrix")
        if bias.ndim != 1 or bias.shape[0] != weights.shape[0]:
            raise ValueError("bias length must equal the number of weight rows")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unsupported activation {activation!r}; expected one of {ACTIVATIONS}")
        weights.setflags(write=False)
        bias.setflags(write=False)
        self.weights = weights
        self.bias = bias
        self.activation = activation

    @property
    def n_inputs(self):
        return self.weights.shape[1]

    @property
    def n_outputs(self):
        return self.weights.shape[0]

    def apply(self, values):
        """Apply to a vector (n_inputs,) or a batch (n_inputs, count)."""
        pre = self.weights @ values
        pre = pre + (self.bias[:, None] if pre.ndim == 2 else self.bias)
        if self.activation == "relu":
            return np.maximum(pre, 0.0)
        return pre

    def __repr__(self):
        return f"AffineLayer({self.n_inputs}->{self.n_outputs}, {self.activation})"


class FeedForwardNetwork:
    """Layer stack with ReLU hidden activations and an identity final layer."""

    __slots__ = ("layers",)

    def __init__(self, layers):
        layers = tuple(layers)
        if not layers:
            raise ValueError("network needs at least one layer")
        for earlier, later in zip(layers, layers[1:]):
            if earlier.n_outputs != later.n_inputs:
                raise ValueError(
                    f"layer size mismatch: {earlier.n_outputs} outputs feed {later.n_inputs} inputs"
                )
        for layer in layers[:-1]:
            if layer.activation != "relu":
                raise ValueError("hidden layers must use the relu activation")
        if layers[-1].activation != "identity":
            raise ValueError("the final layer must use the identity activation")
        self.layers = layers

    @classmethod
    def identity(cls, dim):
        return cls([AffineLayer(np.eye(dim), np.zeros(dim), "identity")])

    @property
    def input_dim(self):
        return self.layers[0].n_inputs

    @property
    def output_dim(self):
        return self.layers[-1].n_outputs

    @property
    def layer_sizes(self):
        return (self.input_dim,) + tuple(layer.n_outputs for layer in self.layers)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.input_dim,):
            raise ValueError(f"input must have shape ({self.input_dim},)")
        for layer in self.layers:
            x = layer.apply(x)
        return x

    def evaluate_batch(self, points):
        """Evaluate a batch of inputs with shape (input_dim, count)."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[0] != self.input_dim:
            raise ValueError(f"batch must have shape ({self.input_dim}, count)")
        for layer in self.layers:
            points = layer.apply(points)
        return points

    def __repr__(self):
        sizes = "x".join(str(s) for s in self.layer_sizes)
        return f"FeedForwardNetwork({sizes})"


def compose(first, second):
    """Network computing second(first(x)).

    The first network's final identity layer is folded into the second
    network's first affine layer (exact), keeping every hidden activation a
    ReLU and the final activation the identity.
    """
    if first.output_dim != second.input_dim:
        raise ValueError(
            f"cannot compose: first outputs {first.output_dim}, second expects {second.input_dim}"
        )
    tail = first.layers[-1]
    head = second.layers[0]
    merged = AffineLayer(head.weights @ tail.weights,
                         head.weights @ tail.bias + head.bias,
                         head.activation)
    return FeedForwardNetwork(first.layers[:-1] + (merged,) + second.layers[1:])
