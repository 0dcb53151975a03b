"""Baseline structure learning (greedy BIC hill climbing) and import of
externally learned graphs.

The hill climber exists so the pipeline runs end to end; it uses plain
add/delete/reverse moves with family-score caching and no tabu list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .data import Dataset, Variable, counts
from .errors import NodeNotFound, NotADag
from .graph import MixedGraph, directed_edge, load_graph, save_graph
from .score import family_dim, family_loglik


@dataclass(frozen=True)
class HcConfig:
    max_parents: int = 4
    max_iterations: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_parents < 0:
            raise ValueError("max_parents must be nonnegative")


class _Climber:
    def __init__(self, data: Dataset, cfg: HcConfig):
        self.data = data
        self.cfg = cfg
        self.nodes = list(data.columns)
        self.parents: dict[str, set[str]] = {v: set() for v in self.nodes}
        self.children: dict[str, set[str]] = {v: set() for v in self.nodes}
        self.penalty = 0.5 * math.log(data.n_rows)
        self._cache: dict[tuple[str, tuple[str, ...]], float] = {}

    def family_score(self, child: str, parents: set[str]) -> float:
        key = (child, tuple(sorted(parents)))
        score = self._cache.get(key)
        if score is None:
            stats = counts(self.data, child, key[1])
            q = 1
            for p in key[1]:
                q *= self.data.variable(p).card
            r = self.data.variable(child).card
            score = family_loglik(stats) - self.penalty * family_dim(r, q)
            self._cache[key] = score
        return score

    def reaches(self, src: str, dst: str, skip: tuple[str, str] | None = None) -> bool:
        stack, seen = [src], {src}
        while stack:
            v = stack.pop()
            if v == dst:
                return True
            for w in self.children[v]:
                if skip is not None and (v, w) == skip:
                    continue
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def moves(self):
        """All legal moves in a fixed lexicographic order."""
        cap = self.cfg.max_parents
        for x in self.nodes:
            for y in self.nodes:
                if x == y:
                    continue
                if y in self.children[x]:
                    # delete x -> y
                    delta = self.family_score(y, self.parents[y] - {x}) - self.family_score(
                        y, self.parents[y]
                    )
                    yield delta, ("delete", x, y)
                    # reverse x -> y
                    if len(self.parents[x]) < cap and not self.reaches(x, y, skip=(x, y)):
                        delta += self.family_score(x, self.parents[x] | {y}) - self.family_score(
                            x, self.parents[x]
                        )
                        yield delta, ("reverse", x, y)
                elif x not in self.children[y] and len(self.parents[y]) < cap:
                    # add x -> y
                    if not self.reaches(y, x):
                        delta = self.family_score(y, self.parents[y] | {x}) - self.family_score(
                            y, self.parents[y]
                        )
                        yield delta, ("add", x, y)

    def apply(self, move: tuple[str, str, str]) -> None:
        op, x, y = move
        if op == "add":
            self.parents[y].add(x)
            self.children[x].add(y)
        elif op == "delete":
            self.parents[y].discard(x)
            self.children[x].discard(y)
        else:
            self.parents[y].discard(x)
            self.children[x].discard(y)
            self.parents[x].add(y)
            self.children[y].add(x)

    def graph(self) -> MixedGraph:
        edges = [
            directed_edge(p, v) for v in self.nodes for p in sorted(self.parents[v])
        ]
        return MixedGraph(self.nodes, edges)


def hill_climb(
    data: Dataset, cfg: HcConfig = HcConfig(), *, with_trace: bool = False
) -> MixedGraph | tuple[MixedGraph, list[float]]:
    """Greedy BIC search from the empty graph over add/delete/reverse moves.

    Accepts the best strictly improving move each step (first in move order
    on ties) until none improves or the iteration cap is hit.  With
    ``with_trace`` the BIC values along accepted moves are returned too,
    starting from the empty graph's score.
    """
    if data.n_rows < 1:
        raise ValueError("learning needs at least one record")
    climber = _Climber(data, cfg)
    total = sum(climber.family_score(v, set()) for v in climber.nodes)
    trace = [total]
    for _ in range(cfg.max_iterations):
        best_delta, best_move = 0.0, None
        for delta, move in climber.moves():
            if delta > best_delta:
                best_delta, best_move = delta, move
        if best_move is None:
            break
        climber.apply(best_move)
        total += best_delta
        trace.append(total)
    g = climber.graph()
    return (g, trace) if with_trace else g


def import_graph(path: str | Path, schema: Sequence[Variable]) -> MixedGraph:
    """Load a graph text file, checking node names against ``schema`` and the
    acyclicity of the directed part."""
    g = load_graph(path)
    known = {v.name for v in schema}
    for v in g.nodes:
        if v not in known:
            raise NodeNotFound(v)
    if not g.directed_part_acyclic:
        raise NotADag(f"{path}: directed part contains a cycle")
    return g


def export_graph(g: MixedGraph, path: str | Path) -> None:
    save_graph(g, path)
