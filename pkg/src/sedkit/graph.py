"""Mixed graphs (directed plus undirected edges) and the structural algorithms
behind the correction pipeline: triangle enumeration, d-separation, CPDAG
conversion, seeded consistent extension, and noisy-child augmentation.

Graph values are immutable; every operation is a pure function returning a
new graph, so graphs can be shared freely across threads.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable

from .errors import NodeNotFound, NotADag, NotExtendable, ParseError

_RESERVED_TOKENS = ("->", "--")


def _valid_label(name: str) -> str:
    if not isinstance(name, str) or not name:
        raise ValueError(f"node label must be a non-empty string, got {name!r}")
    if any(ch.isspace() for ch in name):
        raise ValueError(f"node label {name!r} contains whitespace")
    for token in _RESERVED_TOKENS:
        if token in name:
            raise ValueError(f"node label {name!r} contains reserved token {token!r}")
    return name


@dataclass(frozen=True)
class Edge:
    """One edge between two distinct nodes.

    Undirected edges are canonicalized so ``Edge(a, b, directed=False)`` and
    ``Edge(b, a, directed=False)`` compare equal.
    """

    a: str
    b: str
    directed: bool = True

    def __post_init__(self) -> None:
        _valid_label(self.a)
        _valid_label(self.b)
        if self.a == self.b:
            raise ValueError(f"self-loop on node {self.a!r}")
        if not self.directed and self.a > self.b:
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", lo)
            object.__setattr__(self, "b", hi)

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.a, self.b))

    def __str__(self) -> str:
        return f"{self.a} {'->' if self.directed else '--'} {self.b}"


def directed_edge(a: str, b: str) -> Edge:
    return Edge(a, b, directed=True)


def undirected_edge(a: str, b: str) -> Edge:
    return Edge(a, b, directed=False)


@dataclass(frozen=True, eq=False, init=False)
class MixedGraph:
    """Node-ordered graph with at most one (directed or undirected) edge per pair."""

    nodes: tuple[str, ...]
    edges: frozenset[Edge]

    def __init__(self, nodes: Iterable[str], edges: Iterable[Edge] = ()):
        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "edges", frozenset(edges))
        seen: set[str] = set()
        for v in self.nodes:
            _valid_label(v)
            if v in seen:
                raise ValueError(f"duplicate node {v!r}")
            seen.add(v)
        pairs: set[frozenset[str]] = set()
        for e in self.edges:
            if e.a not in seen:
                raise NodeNotFound(e.a)
            if e.b not in seen:
                raise NodeNotFound(e.b)
            if e.pair in pairs:
                raise ValueError(f"more than one edge between {e.a!r} and {e.b!r}")
            pairs.add(e.pair)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return self.node_set == other.node_set and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.node_set, self.edges))

    def __repr__(self) -> str:
        return f"MixedGraph({len(self.nodes)} nodes, {len(self.edges)} edges)"

    # ------------------------------------------------------------------ views
    @cached_property
    def node_set(self) -> frozenset[str]:
        return frozenset(self.nodes)

    @cached_property
    def _adjacency(self) -> dict[str, frozenset[str]]:
        adj: dict[str, set[str]] = {v: set() for v in self.nodes}
        for e in self.edges:
            adj[e.a].add(e.b)
            adj[e.b].add(e.a)
        return {v: frozenset(s) for v, s in adj.items()}

    @cached_property
    def _parent_map(self) -> dict[str, frozenset[str]]:
        par: dict[str, set[str]] = {v: set() for v in self.nodes}
        for e in self.edges:
            if e.directed:
                par[e.b].add(e.a)
        return {v: frozenset(s) for v, s in par.items()}

    @cached_property
    def _child_map(self) -> dict[str, frozenset[str]]:
        ch: dict[str, set[str]] = {v: set() for v in self.nodes}
        for e in self.edges:
            if e.directed:
                ch[e.a].add(e.b)
        return {v: frozenset(s) for v, s in ch.items()}

    @cached_property
    def _edge_index(self) -> dict[frozenset[str], Edge]:
        return {e.pair: e for e in self.edges}

    def _require(self, v: str) -> None:
        if v not in self.node_set:
            raise NodeNotFound(v)

    def neighbors_of(self, v: str) -> frozenset[str]:
        self._require(v)
        return self._adjacency[v]

    def parents_of(self, v: str) -> frozenset[str]:
        self._require(v)
        return self._parent_map[v]

    def children_of(self, v: str) -> frozenset[str]:
        self._require(v)
        return self._child_map[v]

    def undirected_neighbors_of(self, v: str) -> frozenset[str]:
        self._require(v)
        return self._adjacency[v] - self._parent_map[v] - self._child_map[v]

    def has_pair(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self._edge_index

    def edge_between(self, a: str, b: str) -> Edge | None:
        return self._edge_index.get(frozenset((a, b)))

    @property
    def directed_edges(self) -> frozenset[Edge]:
        return frozenset(e for e in self.edges if e.directed)

    @property
    def undirected_edges(self) -> frozenset[Edge]:
        return frozenset(e for e in self.edges if not e.directed)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges, key=lambda e: (e.a, e.b, not e.directed))

    @cached_property
    def directed_part_acyclic(self) -> bool:
        state: dict[str, int] = {}

        def visit(v: str) -> bool:
            state[v] = 1
            for w in sorted(self._child_map[v]):
                s = state.get(w, 0)
                if s == 1 or (s == 0 and not visit(w)):
                    return False
            state[v] = 2
            return True

        return all(visit(v) for v in self.nodes if state.get(v, 0) == 0)

    @cached_property
    def is_dag(self) -> bool:
        return not self.undirected_edges and self.directed_part_acyclic

    # --------------------------------------------------------------- builders
    def with_edges(self, extra: Iterable[Edge]) -> MixedGraph:
        return MixedGraph(self.nodes, set(self.edges) | set(extra))

    def without_edges(self, removed: Iterable[Edge]) -> MixedGraph:
        gone = {e.pair for e in removed}
        return MixedGraph(self.nodes, (e for e in self.edges if e.pair not in gone))

    def with_nodes(self, extra: Iterable[str]) -> MixedGraph:
        return MixedGraph((*self.nodes, *extra), self.edges)


# --------------------------------------------------------------------- basics


def neighbors(g: MixedGraph, v: str) -> set[str]:
    """All nodes adjacent to ``v`` by any edge, regardless of orientation."""
    return set(g.neighbors_of(v))


def find_3_cliques(g: MixedGraph) -> set[frozenset[str]]:
    """Every pairwise-adjacent node triple, as a set of frozen triples."""
    out: set[frozenset[str]] = set()
    for e in g.edges:
        for c in g.neighbors_of(e.a) & g.neighbors_of(e.b):
            out.add(frozenset((e.a, e.b, c)))
    return out


def topological_order(g: MixedGraph) -> list[str]:
    """Topological order over the directed part; node order breaks ties."""
    if not g.directed_part_acyclic:
        raise NotADag("directed part contains a cycle")
    pending = {v: len(g.parents_of(v)) for v in g.nodes}
    order: list[str] = []
    remaining = list(g.nodes)
    while remaining:
        v = next(u for u in remaining if pending[u] == 0)
        remaining.remove(v)
        order.append(v)
        for w in g.children_of(v):
            pending[w] -= 1
    return order


def augment_with_noisy_children(g: MixedGraph, noisy: Iterable[str]) -> MixedGraph:
    """Attach a fresh observation node ``v^o`` with edge ``v -> v^o`` per noisy node."""
    if not g.is_dag:
        raise NotADag("augmentation is defined on DAGs")
    noisy_set = set(noisy)
    for v in noisy_set:
        if v not in g.node_set:
            raise NodeNotFound(v)
    fresh = [f"{v}^o" for v in g.nodes if v in noisy_set]
    for name in fresh:
        if name in g.node_set:
            raise ValueError(f"augmented node {name!r} already exists")
    edges = set(g.edges)
    edges.update(directed_edge(v, f"{v}^o") for v in g.nodes if v in noisy_set)
    return MixedGraph((*g.nodes, *fresh), edges)


# --------------------------------------------------------------- d-separation


def _bit_indices(mask: int) -> list[int]:
    out = []
    while mask:
        lsb = mask & -mask
        out.append(lsb.bit_length() - 1)
        mask ^= lsb
    return out


@lru_cache(maxsize=256)
def _dsep_index(g: MixedGraph) -> tuple[dict[str, int], tuple[int, ...]]:
    index = {v: i for i, v in enumerate(g.nodes)}
    par = [0] * len(g.nodes)
    for e in g.edges:
        par[index[e.b]] |= 1 << index[e.a]
    return index, tuple(par)


def d_separated(g: MixedGraph, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """Whether ``z`` blocks every path between ``x`` and ``y`` in the DAG ``g``.

    Implemented via reachability in the moralized ancestral graph of
    ``{x, y} | z``; the rule-by-rule path enumeration is kept in the test
    suite as an independent oracle.
    """
    zset = frozenset(z)
    for v in (x, y, *zset):
        if v not in g.node_set:
            raise NodeNotFound(v)
    if not g.is_dag:
        raise NotADag("d-separation requires a DAG")
    if x == y:
        raise ValueError("x and y must differ")
    if x in zset or y in zset:
        raise ValueError("x and y must not be part of z")

    index, par = _dsep_index(g)
    ix, iy = index[x], index[y]
    zmask = 0
    for v in zset:
        zmask |= 1 << index[v]

    anc = (1 << ix) | (1 << iy) | zmask
    stack = _bit_indices(anc)
    while stack:
        new = par[stack.pop()] & ~anc
        anc |= new
        stack.extend(_bit_indices(new))

    # Moralize within the ancestral set: keep skeleton, marry co-parents.
    adj = [0] * len(g.nodes)
    for i in _bit_indices(anc):
        p = par[i] & anc
        adj[i] |= p
        for j in _bit_indices(p):
            adj[j] |= (1 << i) | (p & ~(1 << j))

    allowed = anc & ~zmask
    visited = 1 << ix
    frontier = visited
    target = 1 << iy
    while frontier:
        nxt = 0
        for i in _bit_indices(frontier):
            nxt |= adj[i]
        nxt &= allowed & ~visited
        if nxt & target:
            return False
        visited |= nxt
        frontier = nxt
    return True


# ------------------------------------------------------- CPDAG machinery


class _Pdag:
    """Mutable partially directed graph used for pattern closure and extension."""

    def __init__(self, nodes: Iterable[str]):
        self.nodes = list(nodes)
        self.adj: dict[str, set[str]] = {v: set() for v in self.nodes}
        self._head: dict[frozenset[str], str | None] = {}

    @classmethod
    def from_graph(cls, g: MixedGraph) -> "_Pdag":
        pd = cls(g.nodes)
        for e in g.edges:
            pd.adj[e.a].add(e.b)
            pd.adj[e.b].add(e.a)
            pd._head[e.pair] = e.b if e.directed else None
        return pd

    def add_undirected(self, a: str, b: str) -> None:
        self.adj[a].add(b)
        self.adj[b].add(a)
        self._head[frozenset((a, b))] = None

    def adjacent(self, a: str, b: str) -> bool:
        return b in self.adj[a]

    def is_directed(self, a: str, b: str) -> bool:
        return self._head.get(frozenset((a, b))) == b

    def is_undirected(self, a: str, b: str) -> bool:
        key = frozenset((a, b))
        return key in self._head and self._head[key] is None

    def orient(self, a: str, b: str) -> None:
        self._head[frozenset((a, b))] = b

    def parents(self, v: str) -> list[str]:
        return [u for u in self.adj[v] if self.is_directed(u, v)]

    def children(self, v: str) -> list[str]:
        return [u for u in self.adj[v] if self.is_directed(v, u)]

    def undirected_neighbors(self, v: str) -> list[str]:
        return [u for u in self.adj[v] if self.is_undirected(v, u)]

    def undirected_pairs(self) -> list[tuple[str, str]]:
        return sorted(tuple(sorted(k)) for k, h in self._head.items() if h is None)

    def reaches(self, src: str, dst: str) -> bool:
        """Directed reachability src -> dst."""
        stack, seen = [src], {src}
        while stack:
            v = stack.pop()
            if v == dst:
                return True
            for w in self.children(v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def has_directed_cycle(self) -> bool:
        state: dict[str, int] = {}

        def visit(v: str) -> bool:
            state[v] = 1
            for w in self.children(v):
                s = state.get(w, 0)
                if s == 1 or (s == 0 and visit(w)):
                    return True
            state[v] = 2
            return False

        return any(visit(v) for v in self.nodes if state.get(v, 0) == 0)

    def makes_cycle(self, a: str, b: str) -> bool:
        return self.reaches(b, a)

    def makes_vstructure(self, a: str, b: str) -> bool:
        return any(p != a and not self.adjacent(p, a) for p in self.parents(b))

    # Orientation rules for pattern closure: each orients u -- v into u -> v.
    def _rule1(self, u: str, v: str) -> bool:
        # c -> u, u -- v, c and v nonadjacent.
        return any(not self.adjacent(c, v) for c in self.parents(u))

    def _rule2(self, u: str, v: str) -> bool:
        # u -> c -> v with u -- v.
        return any(self.is_directed(c, v) for c in self.children(u))

    def _rule3(self, u: str, v: str) -> bool:
        # u -- c, u -- d, c -> v, d -> v, c and d nonadjacent.
        into_v = [c for c in self.undirected_neighbors(u) if self.is_directed(c, v)]
        return any(
            not self.adjacent(c, d) for c, d in itertools.combinations(sorted(into_v), 2)
        )

    def _rule4(self, u: str, v: str) -> bool:
        # u -- c, c -> d, d -> v, c and v nonadjacent.
        for c in self.undirected_neighbors(u):
            if c != v and not self.adjacent(c, v):
                if any(self.is_directed(d, v) for d in self.children(c)):
                    return True
        return False

    def close(self) -> None:
        """Orient all edges compelled by the four closure rules."""
        changed = True
        while changed:
            changed = False
            for a, b in self.undirected_pairs():
                for u, v in ((a, b), (b, a)):
                    if (
                        self._rule1(u, v)
                        or self._rule2(u, v)
                        or self._rule3(u, v)
                        or self._rule4(u, v)
                    ):
                        self.orient(u, v)
                        changed = True
                        break

    def to_graph(self) -> MixedGraph:
        edges = []
        for key, head in self._head.items():
            a, b = sorted(key)
            if head is None:
                edges.append(undirected_edge(a, b))
            else:
                tail = a if head == b else b
                edges.append(directed_edge(tail, head))
        return MixedGraph(self.nodes, edges)


def dag_to_cpdag(g: MixedGraph) -> MixedGraph:
    """Equivalence-class representative: compelled edges directed, rest undirected.

    Orients the colliders of ``g`` on its skeleton and closes under the four
    orientation-propagation rules.
    """
    if not g.is_dag:
        raise NotADag("input must be a DAG")
    pd = _Pdag(g.nodes)
    for e in g.edges:
        pd.add_undirected(e.a, e.b)
    for v in g.nodes:
        for p1, p2 in itertools.combinations(sorted(g.parents_of(v)), 2):
            if not g.has_pair(p1, p2):
                pd.orient(p1, v)
                pd.orient(p2, v)
    pd.close()
    return pd.to_graph()


def cpdag_to_dag(g: MixedGraph, seed: int) -> MixedGraph:
    """One member of the equivalence class of ``g``, deterministic per seed.

    Repeatedly orients the lowest-priority undirected edge (priority from a
    seeded node shuffle) in a direction creating neither a cycle nor a new
    collider, re-closing after every choice.
    """
    pd = _Pdag.from_graph(g)
    if pd.has_directed_cycle():
        raise NotExtendable("directed part contains a cycle")
    pd.close()
    rng = random.Random(seed)
    shuffled = list(g.nodes)
    rng.shuffle(shuffled)
    rank = {v: i for i, v in enumerate(shuffled)}

    while True:
        und = pd.undirected_pairs()
        if not und:
            break
        a, b = min(und, key=lambda p: tuple(sorted((rank[p[0]], rank[p[1]]))))
        if rank[b] < rank[a]:
            a, b = b, a
        for u, v in ((a, b), (b, a)):
            if not pd.makes_cycle(u, v) and not pd.makes_vstructure(u, v):
                pd.orient(u, v)
                break
        else:
            raise NotExtendable(f"no valid orientation for {a} -- {b}")
        pd.close()

    out = pd.to_graph()
    if not out.is_dag:
        raise NotExtendable("closure forced a directed cycle")
    return out


def orient_acyclic(g: MixedGraph, seed: int) -> MixedGraph:
    """Orient all undirected edges acyclically, ignoring collider preservation.

    Fallback for partially directed graphs with no consistent extension
    (these arise mid-search when edge removals leave a non-CPDAG pattern);
    prefer :func:`cpdag_to_dag` whenever it succeeds.
    """
    if not g.directed_part_acyclic:
        raise NotExtendable("directed part contains a cycle")
    rng = random.Random(seed)
    shuffled = list(g.nodes)
    rng.shuffle(shuffled)
    rank = {v: i for i, v in enumerate(shuffled)}
    base = topological_order(g)
    pos = {v: i for i, v in enumerate(base)}
    edges = []
    for e in g.edges:
        if e.directed:
            edges.append(e)
        else:
            a, b = sorted((e.a, e.b), key=lambda v: (pos[v], rank[v]))
            edges.append(directed_edge(a, b))
    return MixedGraph(g.nodes, edges)


# ------------------------------------------------------------------ text I/O


def parse_graph_text(text: str) -> MixedGraph:
    """Parse the one-edge-per-line graph format (``A -> B``, ``A -- B``, ``node A``)."""
    order: dict[str, None] = {}
    edges: list[Edge] = []
    pairs: set[frozenset[str]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if len(parts) == 2 and parts[0] == "node":
                order.setdefault(_valid_label(parts[1]))
            elif len(parts) == 3 and parts[1] in ("->", "--"):
                a, b = _valid_label(parts[0]), _valid_label(parts[2])
                edge = Edge(a, b, directed=parts[1] == "->")
                if edge.pair in pairs:
                    raise ValueError(f"duplicate edge between {a!r} and {b!r}")
                if a == b:
                    raise ValueError(f"self-loop on {a!r}")
                pairs.add(edge.pair)
                order.setdefault(a)
                order.setdefault(b)
                edges.append(edge)
            else:
                raise ValueError(f"unrecognized line {line!r}")
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from exc
    return MixedGraph(tuple(order), edges)


def format_graph_text(g: MixedGraph) -> str:
    """Serialize a graph to the text format; output is sorted and stable."""
    connected = {v for e in g.edges for v in (e.a, e.b)}
    lines = [f"node {v}" for v in g.nodes if v not in connected]
    lines.extend(str(e) for e in g.sorted_edges())
    return "\n".join(lines) + "\n"


def load_graph(path: str | Path) -> MixedGraph:
    return parse_graph_text(Path(path).read_text(encoding="utf-8"))


def save_graph(g: MixedGraph, path: str | Path) -> None:
    Path(path).write_text(format_graph_text(g), encoding="utf-8", newline="\n")
