"""Candidate-spurious-edge construction, hidden-variable graph reconstruction,
and the two-phase spurious-edge removal search.

The search only ever removes edges: phase 1 hunts the single candidate edge
whose hidden-variable reconstruction most improves BIC, phase 2 keeps
attributing further edges to the same noisy variable while each additional
removal beats the previous best improvement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .data import Dataset
from .em import EmConfig, EmResult
from .errors import EdgeNotFound, InvalidCandidate, NodeNotFound, NotExtendable
from .graph import Edge, MixedGraph, cpdag_to_dag, directed_edge, orient_acyclic
from .score import BicScore, bic_complete, bic_hidden
from .seeding import stable_seed


def build_cse(g: MixedGraph) -> dict[str, frozenset[Edge]]:
    """Edges between neighbors, per candidate noisy variable; empty sets omitted.

    Equivalently: ``e`` is listed under ``v`` iff ``{v} | endpoints(e)`` is a
    3-vertex clique.
    """
    out: dict[str, frozenset[Edge]] = {}
    for v in g.nodes:
        nbrs = g.neighbors_of(v)
        edges = frozenset(e for e in g.edges if e.a in nbrs and e.b in nbrs)
        if edges:
            out[v] = edges
    return out


@dataclass(frozen=True)
class ReconstructionResult:
    score_i: BicScore
    score_r: BicScore
    g_r: MixedGraph
    em: EmResult

    @property
    def delta(self) -> float:
        return self.score_r.value - self.score_i.value


def _fresh_hidden_name(v: str, g: MixedGraph, data: Dataset) -> str:
    name = f"{v}__h"
    k = 0
    while name in g.node_set or name in data.columns:
        k += 1
        name = f"{v}__h{k}"
    return name


def _extend(g: MixedGraph, seed: int) -> MixedGraph:
    """DAG extension, preferring a consistent one; mid-search removals can
    leave patterns with no consistent extension, which fall back to a plain
    acyclic orientation."""
    if g.is_dag:
        return g
    try:
        return cpdag_to_dag(g, seed)
    except NotExtendable:
        return orient_acyclic(g, seed)


def score_graph(g: MixedGraph, data: Dataset, seed: int) -> BicScore:
    """BIC of a possibly partially directed graph, with the same fallback
    extension policy used for reconstruction graphs."""
    return bic_complete(_extend(g, seed), data, seed)


def reconstruction(
    g: MixedGraph,
    v: str,
    e: Iterable[Edge],
    data: Dataset,
    cfg: EmConfig,
    seed: int = 0,
    *,
    _score_i: BicScore | None = None,
) -> ReconstructionResult:
    """Score the hypothesis that ``v`` is noisy and the edges ``e`` spurious.

    Removes ``e``, re-routes ``v``'s adjacencies through a fresh hidden node
    of equal cardinality, reattaches ``v`` as the hidden node's sole new
    child, and compares the EM-fitted BIC of that graph against the input's.
    """
    if v not in g.node_set:
        raise NodeNotFound(v)
    eset = frozenset(e)
    for edge in eset:
        if edge not in g.edges:
            raise EdgeNotFound(str(edge))
        if v in (edge.a, edge.b):
            raise InvalidCandidate(f"candidate edge {edge} is incident to {v!r}")

    score_i = _score_i if _score_i is not None else score_graph(g, data, seed)

    hidden = _fresh_hidden_name(v, g, data)
    stripped = g.without_edges(eset)
    nodes = tuple(hidden if u == v else u for u in stripped.nodes) + (v,)
    edges = [
        Edge(hidden if ed.a == v else ed.a, hidden if ed.b == v else ed.b, ed.directed)
        for ed in stripped.edges
    ]
    edges.append(directed_edge(hidden, v))
    g_r = MixedGraph(nodes, edges)

    dag_r = _extend(g_r, seed)
    score_r, em_res = bic_hidden(
        dag_r, hidden, data, cfg, hidden_card=data.variable(v).card, with_em=True
    )
    return ReconstructionResult(score_i=score_i, score_r=score_r, g_r=g_r, em=em_res)


@dataclass(frozen=True)
class SedConfig:
    """Search configuration; ``base`` picks the graph candidate reconstructions
    are built from: the evolving modified graph (default) or the literal input."""

    epsilon: float = 1e-3
    max_iter: int = 200
    restarts: int = 3
    seed: int = 0
    base: str = "gmod"

    def __post_init__(self) -> None:
        if self.base not in ("gmod", "literal"):
            raise ValueError(f"base must be 'gmod' or 'literal', got {self.base!r}")


@dataclass(frozen=True)
class RemovalRecord:
    edge: Edge
    variable: str
    delta: float
    phase: int
    order: int

    def to_json(self) -> dict:
        return {
            "edge": str(self.edge),
            "noisy_variable": self.variable,
            "delta": self.delta,
            "phase": self.phase,
            "order": self.order,
        }


@dataclass
class SedState:
    """Mutable search record; exposed for inspection and tests."""

    g_mod: MixedGraph
    cse: dict[str, frozenset[Edge]]
    v_m: str | None = None
    e_m: Edge | None = None
    e_d: frozenset[Edge] = frozenset()
    delta_max: float = 0.0
    removal_log: list[RemovalRecord] = field(default_factory=list)


def _edge_key(e: Edge) -> tuple[str, str]:
    return (e.a, e.b)


def run_sed(
    g: MixedGraph, data: Dataset, cfg: SedConfig = SedConfig()
) -> tuple[MixedGraph, list[RemovalRecord]]:
    """Two-phase greedy removal of candidate spurious edges.

    Phase 1 evaluates every (variable, edge) pair in the candidate map and
    removes the best edge if its reconstruction improves BIC; phase 2 keeps
    testing the remaining candidates of that variable, removing edges while
    each enlarged removal set beats the previous best improvement.  Variables
    whose candidate set has been exhausted stay cleared for the rest of the
    run.  Deterministic for fixed inputs: ties break lexicographically and
    every EM restart seed derives from (run seed, variable, edge set).
    """
    for v in g.nodes:
        if v not in data.columns:
            raise NodeNotFound(v)

    state = SedState(g_mod=g, cse=build_cse(g))
    cleared: set[str] = set()
    memo: dict[tuple, ReconstructionResult] = {}
    base_scores: dict[frozenset[Edge], BicScore] = {}

    def base_graph() -> MixedGraph:
        return g if cfg.base == "literal" else state.g_mod

    def evaluate(v: str, eset: frozenset[Edge]) -> ReconstructionResult:
        base = base_graph()
        key = (base.edges, v, eset)
        if key not in memo:
            if base.edges not in base_scores:
                base_scores[base.edges] = score_graph(base, data, cfg.seed)
            em_cfg = EmConfig(
                epsilon=cfg.epsilon,
                max_iter=cfg.max_iter,
                restarts=cfg.restarts,
                seed=stable_seed(cfg.seed, v, *sorted(str(e) for e in eset)),
            )
            memo[key] = reconstruction(
                base, v, eset, data, em_cfg, cfg.seed, _score_i=base_scores[base.edges]
            )
        return memo[key]

    def refresh_cse() -> None:
        state.cse = {
            v: edges for v, edges in build_cse(state.g_mod).items() if v not in cleared
        }

    def remove(v: str, edge: Edge, delta: float, phase: int) -> None:
        state.g_mod = state.g_mod.without_edges([edge])
        state.removal_log.append(
            RemovalRecord(edge, v, delta, phase, len(state.removal_log))
        )
        state.v_m = v
        state.e_m = edge
        state.delta_max = delta
        refresh_cse()

    while True:
        # Phase 1: best single-edge reconstruction across the candidate map.
        best: tuple[float, str, Edge] | None = None
        for v in sorted(state.cse):
            for edge in sorted(state.cse[v], key=_edge_key):
                res = evaluate(v, frozenset([edge]))
                if best is None or res.delta > best[0]:
                    best = (res.delta, v, edge)
        if best is None or best[0] <= 0:
            break
        delta, v_m, e_m = best
        remove(v_m, e_m, delta, phase=1)
        state.e_d = frozenset([e_m])

        # Phase 2: further edges attributable to the same noisy variable.
        while state.cse.get(v_m):
            best2: tuple[float, Edge] | None = None
            for edge in sorted(state.cse[v_m], key=_edge_key):
                eset = (
                    state.e_d | {edge} if cfg.base == "literal" else frozenset([edge])
                )
                res = evaluate(v_m, eset)
                if best2 is None or res.delta > best2[0]:
                    best2 = (res.delta, edge)
            if best2 is None or best2[0] <= state.delta_max:
                break
            delta2, edge2 = best2
            remove(v_m, edge2, delta2, phase=2)
            state.e_d = state.e_d | {edge2}

        cleared.add(v_m)
        state.cse.pop(v_m, None)

    assert state.g_mod.edges <= g.edges, "search must only remove edges"
    return state.g_mod, state.removal_log
