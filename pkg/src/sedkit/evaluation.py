"""Structural accuracy metrics on CPDAGs: precision/recall/F1, structural
Hamming distance, and 3-vertex-clique counts.

Matching is orientation-strict: a learned directed edge against an
undirected truth edge counts as one false positive plus one false negative,
and contributes one unit to the Hamming distance.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import SchemaMismatch
from .graph import MixedGraph, find_3_cliques


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    shd: int
    cliques_learned: int
    cliques_true: int

    def to_json(self) -> dict:
        return asdict(self)


def _pair_status(g: MixedGraph, a: str, b: str) -> str:
    e = g.edge_between(a, b)
    if e is None:
        return "absent"
    if not e.directed:
        return "undirected"
    return f"{e.a}>{e.b}"


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def compare_cpdags(learned: MixedGraph, truth: MixedGraph) -> EvalReport:
    """Edge-level confusion counts, F1, and pair-status Hamming distance."""
    if learned.node_set != truth.node_set:
        raise SchemaMismatch("graphs must share a node set")

    tp = sum(1 for e in learned.edges if e in truth.edges)
    fp = len(learned.edges) - tp
    fn = len(truth.edges) - tp

    nodes = sorted(learned.node_set)
    shd = 0
    for i, a in enumerate(nodes):
        for b in nodes[i + 1 :]:
            if _pair_status(learned, a, b) != _pair_status(truth, a, b):
                shd += 1

    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = _ratio(2 * tp, 2 * tp + fp + fn) if tp + fp + fn else 0.0
    return EvalReport(
        tp=tp,
        fp=fp,
        fn=fn,
        precision=precision,
        recall=recall,
        f1=f1,
        shd=shd,
        cliques_learned=clique_count(learned),
        cliques_true=clique_count(truth),
    )


def clique_count(g: MixedGraph) -> int:
    """Number of 3-vertex cliques (orientation ignored)."""
    return len(find_3_cliques(g))
