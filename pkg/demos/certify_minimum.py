"""Certify the global minimum of objectives over a ReLU network's outputs.

Builds a small random network, then minimizes an affine functional and an
l-infinity distance over a box of inputs.  Both answers come back with a
certified bracket [lower_bound, upper_bound] whose width is below stop_gap,
plus a concrete witness input that attains the reported value.
"""

import numpy as np

from zonopt import (AffineObjective, DistanceObjective, FeedForwardNetwork,
                    AffineLayer, Hyperrectangle, minimize_convex)


def random_net(rng, sizes):
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
        act = "identity" if i == len(sizes) - 2 else "relu"
        layers.append(AffineLayer(rng.normal(size=(fan_out, fan_in)) / np.sqrt(fan_in),
                                  rng.normal(size=fan_out) * 0.3, act))
    return FeedForwardNetwork(layers)


def show(title, res, net):
    replay = net.evaluate(res.witness_input)
    print(f"{title}")
    print(f"  status      {res.status} after {res.iterations} iterations")
    print(f"  bracket     [{res.lower_bound:.6f}, {res.upper_bound:.6f}]")
    print(f"  value       {res.value:.6f}")
    print(f"  witness     x = {np.round(res.witness_input, 4)}")
    print(f"  replay      net(x) = {np.round(replay, 4)}")
    print()


def main():
    rng = np.random.default_rng(7)
    net = random_net(rng, [2, 8, 8, 3])
    box = Hyperrectangle(center=[0.0, 0.0], radius=[1.0, 1.0])
    print(f"network {net!r}, inputs in {box!r}\n")

    # Lowest value of a . net(x) + b over the whole box, certified to 1e-6.
    a = np.array([1.0, -0.5, 0.25])
    res = minimize_convex(net, box, AffineObjective(a, 0.1), stop_gap=1e-6)
    show("affine objective  a . net(x) + 0.1", res, net)

    # Closest the network can get to a target point, in the max norm.
    target = np.array([0.5, 0.5, 0.5])
    res = minimize_convex(net, box, DistanceObjective(target, np.inf), stop_gap=1e-6)
    show("distance objective  ||net(x) - target||_inf", res, net)

    # The solver is anytime: bounds tighten monotonically while it runs.
    trace = []
    minimize_convex(net, box, AffineObjective(a, 0.1), stop_gap=1e-6,
                    stop_frequency=1,
                    callback=lambda i, lo, up, q: trace.append((i, lo, up)))
    print("anytime trace (iteration, lower, upper):")
    for i, lo, up in trace[:: max(1, len(trace) // 6)]:
        print(f"  {i:5d}  {lo:12.6f}  {up:12.6f}")


if __name__ == "__main__":
    main()
