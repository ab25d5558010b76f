"""Prove or refute output-set properties with verdicts and witnesses.

check_containment asks "does every output stay inside the polytope?" and
check_reachability asks "can any output enter it?".  Both return a verdict
backed by a certified bound; refutations carry a concrete counterexample
input that is replayed here through the network.
"""

import numpy as np

from zonopt import (Hyperrectangle, Polytope, check_containment,
                    check_reachability)
from certify_minimum import random_net


def main():
    rng = np.random.default_rng(21)
    net = random_net(rng, [2, 6, 6, 2])
    box = Hyperrectangle(center=[0.0, 0.0], radius=[0.8, 0.8])

    # A generous safety region: outputs must keep both coordinates below 2.
    safe = Polytope(A=[[1.0, 0.0], [0.0, 1.0]], b=[2.0, 2.0])
    res = check_containment(net, box, safe)
    print(f"containment in y <= (2, 2):    {res.verdict}")
    print(f"  worst violation bracket      [{res.lower_bound:.6f}, {res.upper_bound:.6f}]")

    # Shrink the region until some input escapes; the verdict flips and the
    # result carries the escaping input.
    tight = Polytope(A=[[1.0, 0.0], [0.0, 1.0]], b=[0.1, 0.1])
    res = check_containment(net, box, tight)
    print(f"containment in y <= (.1, .1):  {res.verdict}")
    if res.verdict == "violated":
        y = net.evaluate(res.witness_input)
        print(f"  counterexample               x = {np.round(res.witness_input, 4)}")
        print(f"  escapes by                   {tight.violation(y):.6f}")

    # Reachability of a small target box around an observed output.
    y0 = net.evaluate(np.array([0.3, -0.2]))
    target = Polytope(A=[[1, 0], [-1, 0], [0, 1], [0, -1]],
                      b=np.concatenate([y0 + 0.05, -(y0 - 0.05)]))
    res = check_reachability(net, box, target)
    print(f"reachability of a box at y0:   {res.verdict}")
    if res.verdict == "reachable":
        print(f"  reached through              x = {np.round(res.witness_input, 4)}")

    # A far-away target is certified unreachable, not just "not found".
    far = Polytope(A=[[1, 0], [-1, 0], [0, 1], [0, -1]],
                   b=[-50.0 + 1, 50.0 + 1, -50.0 + 1, 50.0 + 1])
    res = check_reachability(net, box, far)
    print(f"reachability of a far box:     {res.verdict}")
    print(f"  min violation at least       {res.lower_bound:.6f}")


if __name__ == "__main__":
    main()
