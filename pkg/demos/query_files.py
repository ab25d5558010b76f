"""Drive the solver through files and the command line.

Saves a network in both supported formats (.nnet text and .json), writes
query documents, and runs the zonopt CLI: a single solve with a live
bound trace, a 2-D sweep producing a CSV heatmap of certified minima, and
the built-in selftest.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from zonopt import NNetMetadata, load_network, save_network
from certify_minimum import random_net


def run(args):
    proc = subprocess.run([sys.executable, "-m", "zonopt.cli", *args],
                          capture_output=True, text=True)
    print(f"$ zonopt {' '.join(args)}")
    print(proc.stdout if proc.stdout else proc.stderr)
    return proc


def main():
    rng = np.random.default_rng(48)
    net = random_net(rng, [2, 8, 1])
    work = Path(tempfile.mkdtemp(prefix="zonopt-demo-"))

    # Round-trip through both formats; .nnet carries normalization metadata.
    meta = NNetMetadata(input_mins=[-1.0, -1.0], input_maxes=[1.0, 1.0],
                        means=[0.0, 0.0, 0.0], ranges=[1.0, 1.0, 1.0])
    save_network(work / "net.nnet", net, meta)
    save_network(work / "net.json", net)
    reloaded, _ = load_network(work / "net.nnet")
    x = np.array([0.3, -0.7])
    print(f"round trip drift: {np.abs(net.evaluate(x) - reloaded.evaluate(x)).max():.1e}\n")

    query = {
        "kind": "min-convex",
        "network": str(work / "net.json"),
        "input_set": {"type": "hyperrectangle", "center": [0.0, 0.0],
                      "radius": [1.0, 1.0]},
        "objective": {"type": "affine", "a": [1.0]},
        "stop_gap": 1e-6,
    }
    (work / "query.json").write_text(json.dumps(query, indent=2))
    run(["solve", "--query", str(work / "query.json"), "--trace",
         "--out", str(work / "result.json")])
    print((work / "result.json").read_text())

    # Sweep the same query over a 6x6 grid of input boxes; rows are reused on
    # rerun, so an interrupted sweep resumes instead of starting over.
    query["grid"] = {"dims": [0, 1], "lower": [-1.0, -1.0], "upper": [1.0, 1.0],
                     "cells": [6, 6]}
    (work / "sweep.json").write_text(json.dumps(query, indent=2))
    run(["sweep", "--query", str(work / "sweep.json"),
         "--out", str(work / "sweep.csv")])
    lines = (work / "sweep.csv").read_text().splitlines()
    print("\n".join(lines[:4] + ["..."] + lines[-2:]))

    run(["selftest", "--seed", "1"])


if __name__ == "__main__":
    main()
