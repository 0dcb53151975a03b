import itertools
import random

import numpy as np
import pytest

from sedkit.data import Dataset, Variable
from sedkit.graph import MixedGraph, directed_edge, undirected_edge
from sedkit.model import BayesNet, Cpt

ASIA_NODES = ["asia", "tub", "smoke", "lung", "bronc", "either", "xray", "dysp"]
ASIA_EDGES = [
    ("asia", "tub"),
    ("smoke", "lung"),
    ("smoke", "bronc"),
    ("tub", "either"),
    ("lung", "either"),
    ("either", "xray"),
    ("either", "dysp"),
    ("bronc", "dysp"),
]


@pytest.fixture
def fig5_graph() -> MixedGraph:
    """Five-node DAG with three overlapping triangles."""
    return MixedGraph(
        ["A", "B", "C", "D", "E"],
        [
            directed_edge("A", "B"),
            directed_edge("A", "C"),
            directed_edge("A", "E"),
            directed_edge("B", "C"),
            directed_edge("B", "D"),
            directed_edge("B", "E"),
            directed_edge("C", "D"),
        ],
    )


@pytest.fixture
def asia_dag() -> MixedGraph:
    return MixedGraph(ASIA_NODES, [directed_edge(a, b) for a, b in ASIA_EDGES])


@pytest.fixture
def asia_learned_noisy() -> MixedGraph:
    """The eight-node CPDAG a constraint-based learner produces from data
    with noise on bronc: partial skeleton plus the spurious smoke -- dysp."""
    return MixedGraph(
        ASIA_NODES,
        [
            undirected_edge("asia", "tub"),
            undirected_edge("smoke", "lung"),
            undirected_edge("smoke", "bronc"),
            undirected_edge("bronc", "dysp"),
            directed_edge("tub", "either"),
            directed_edge("lung", "either"),
            undirected_edge("smoke", "dysp"),
        ],
    )


def random_dag(seed: int, n_min: int = 4, n_max: int = 10, p: float = 0.25) -> MixedGraph:
    """Ordered random DAG over X0..Xk used by graph-level property tests."""
    rng = random.Random(seed)
    n = rng.randint(n_min, n_max)
    names = [f"X{i}" for i in range(n)]
    order = names[:]
    rng.shuffle(order)
    edges = []
    for t, v in enumerate(order):
        for u in order[:t]:
            if rng.random() < p:
                edges.append(directed_edge(u, v))
    return MixedGraph(names, edges)


def make_bn(nodes, edges, states, tables) -> BayesNet:
    """Assemble a network from plain lists; ``tables`` maps child -> (parents, rows)."""
    graph = MixedGraph(nodes, [directed_edge(a, b) for a, b in edges])
    variables = [Variable(v, tuple(states[v])) for v in nodes]
    cpts = {
        child: Cpt(child, tuple(parents), np.asarray(rows, dtype=float))
        for child, (parents, rows) in tables.items()
    }
    return BayesNet(graph, variables, cpts)


def dataset_from_rows(columns, rows, cards=None) -> Dataset:
    """Small literal dataset; ``cards`` overrides per-column state counts."""
    arr = np.asarray(rows, dtype=np.int32).reshape(len(rows), len(columns))
    if cards is None:
        cards = [max(2, int(arr[:, j].max()) + 1) if len(rows) else 2 for j in range(len(columns))]
    schema = [
        Variable(name, tuple(f"s{k}" for k in range(card)))
        for name, card in zip(columns, cards)
    ]
    return Dataset(schema, arr)


# ----------------------------------------------------------------- oracles


def brute_force_3_cliques(g: MixedGraph) -> set[frozenset[str]]:
    out = set()
    for trio in itertools.combinations(g.nodes, 3):
        if all(g.has_pair(a, b) for a, b in itertools.combinations(trio, 2)):
            out.add(frozenset(trio))
    return out


def path_enumeration_d_separated(g: MixedGraph, x: str, y: str, z) -> bool:
    """Rule-by-rule oracle: enumerate every simple path and test blocking.

    A path is active given z iff every collider on it has itself or a
    descendant in z, and no non-collider on it is in z.
    """
    zset = set(z)
    parents = {v: set(g.parents_of(v)) for v in g.nodes}

    def descendants(v):
        out, stack = set(), [v]
        while stack:
            u = stack.pop()
            for w in g.children_of(u):
                if w not in out:
                    out.add(w)
                    stack.append(w)
        return out

    desc = {v: descendants(v) for v in g.nodes}

    def active(path):
        for i in range(1, len(path) - 1):
            prev, node, nxt = path[i - 1], path[i], path[i + 1]
            is_collider = prev in parents[node] and nxt in parents[node]
            if is_collider:
                if node not in zset and not (desc[node] & zset):
                    return False
            elif node in zset:
                return False
        return True

    def extend(path):
        last = path[-1]
        if last == y:
            return active(path)
        for w in g.neighbors_of(last):
            if w not in path and extend(path + [w]):
                return True
        return False

    return not extend([x])


def enumerate_consistent_extensions(skeleton_pairs, vstructs, nodes):
    """All DAG orientations of a skeleton sharing the given collider set."""
    pairs = sorted(tuple(sorted(p)) for p in skeleton_pairs)
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        edges = [
            directed_edge(a, b) if bit == 0 else directed_edge(b, a)
            for (a, b), bit in zip(pairs, bits)
        ]
        g = MixedGraph(nodes, edges)
        if not g.is_dag:
            continue
        if dag_vstructures(g) == vstructs:
            yield g


def dag_vstructures(g: MixedGraph) -> set[tuple[str, str, str]]:
    out = set()
    for v in g.nodes:
        for p1, p2 in itertools.combinations(sorted(g.parents_of(v)), 2):
            if not g.has_pair(p1, p2):
                out.add((p1, v, p2))
    return out
