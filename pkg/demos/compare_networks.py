"""Bound the disagreement of two networks and the effect of injected noise.

First certifies the largest output difference between a network and a
weight-quantized copy of it.  Then bounds the worst objective value of a
two-stage pipeline where bounded noise is added between the stages, and
compares against the noise-free composition.
"""

import numpy as np

from zonopt import (AffineLayer, AffineObjective, FeedForwardNetwork,
                    Hyperrectangle, NetworkDifferenceProblem,
                    NoiseBufferProblem, Zonotope, compose,
                    max_network_difference, minimize_convex,
                    solve_noise_buffer)
from certify_minimum import random_net


def quantize(net, step):
    layers = [AffineLayer(np.round(l.weights / step) * step,
                          np.round(l.bias / step) * step, l.activation)
              for l in net.layers]
    return FeedForwardNetwork(layers)


def main():
    rng = np.random.default_rng(35)
    net = random_net(rng, [2, 10, 10, 2])
    box = Hyperrectangle(center=[0.0, 0.0], radius=[1.0, 1.0])

    for step in (0.1, 0.01):
        rough = quantize(net, step)
        problem = NetworkDifferenceProblem(net, rough, order=np.inf)
        res = max_network_difference(problem, box, stop_gap=1e-4)
        print(f"quantization step {step:4}: max ||net - rough||_inf "
              f"in [{res.lower_bound:.6f}, {res.upper_bound:.6f}]")
        diff = net.evaluate(res.witness_input) - rough.evaluate(res.witness_input)
        print(f"  worst input {np.round(res.witness_input, 4)}, "
              f"|diff| = {np.abs(diff).max():.6f}")
    print()

    # Two-stage pipeline: sensor net feeds a controller net, with the handoff
    # corrupted by noise bounded in a small box.
    sensor = random_net(rng, [2, 6, 2])
    controller = random_net(rng, [2, 6, 1])
    noise = Zonotope(center=[0.0, 0.0], generators=[[0.05, 0.0], [0.0, 0.05]])
    objective = AffineObjective([1.0])

    noisy = solve_noise_buffer(
        NoiseBufferProblem(sensor, controller, noise, objective), box,
        stop_gap=1e-5)
    clean = minimize_convex(compose(sensor, controller), box, objective,
                            stop_gap=1e-5)
    print(f"controller output floor, clean handoff: {clean.value:.6f}")
    print(f"controller output floor, noisy handoff: {noisy.value:.6f}")
    print(f"  noise chosen by the solver: {np.round(noisy.witness_perturbation, 4)}")
    assert noisy.value <= clean.value + 1e-4  # noise can only make it worse


if __name__ == "__main__":
    main()
