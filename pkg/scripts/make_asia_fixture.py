"""Regenerate the bundled Asia fixture network.

The structure is the classic eight-node Asia graph; the CPT values are
project fixtures chosen to give strong dependencies so the pipeline's
statistical acceptance checks are stable at desk-scale sample sizes.
"""

import numpy as np

from sedkit.data import Variable
from sedkit.graph import MixedGraph, directed_edge
from sedkit.model import BayesNet, Cpt, save_network

NODES = ["asia", "tub", "smoke", "lung", "bronc", "either", "xray", "dysp"]
EDGES = [
    ("asia", "tub"),
    ("smoke", "lung"),
    ("smoke", "bronc"),
    ("tub", "either"),
    ("lung", "either"),
    ("either", "xray"),
    ("either", "dysp"),
    ("bronc", "dysp"),
]


def build() -> BayesNet:
    variables = [Variable(v, ("yes", "no")) for v in NODES]
    graph = MixedGraph(NODES, [directed_edge(a, b) for a, b in EDGES])

    def cpt(child, parents, rows):
        return Cpt(child, tuple(parents), np.array(rows, dtype=float))

    cpts = {
        "asia": cpt("asia", (), [[0.40, 0.60]]),
        "smoke": cpt("smoke", (), [[0.50, 0.50]]),
        "tub": cpt("tub", ("asia",), [[0.80, 0.20], [0.15, 0.85]]),
        "lung": cpt("lung", ("smoke",), [[0.80, 0.20], [0.15, 0.85]]),
        "bronc": cpt("bronc", ("smoke",), [[0.85, 0.15], [0.20, 0.80]]),
        # rows: (tub, lung) = (y,y), (y,n), (n,y), (n,n)
        "either": cpt(
            "either",
            ("tub", "lung"),
            [[0.98, 0.02], [0.90, 0.10], [0.90, 0.10], [0.05, 0.95]],
        ),
        "xray": cpt("xray", ("either",), [[0.90, 0.10], [0.10, 0.90]]),
        # rows: (bronc, either) = (y,y), (y,n), (n,y), (n,n)
        "dysp": cpt(
            "dysp",
            ("bronc", "either"),
            [[0.95, 0.05], [0.85, 0.15], [0.75, 0.25], [0.10, 0.90]],
        ),
    }
    return BayesNet(graph, variables, cpts)


if __name__ == "__main__":
    import sys

    out = sys.argv[1] if len(sys.argv) > 1 else "src/sedkit/fixtures/asia.json"
    save_network(build(), out)
    print(f"wrote {out}")
