"""Discrete Bayesian networks: CPTs, forward sampling, random network
generation, and the per-variable measurement-error channel.

Networks and channels are immutable; sampling and corruption take explicit
seeds, so replicate runs parallelize with disjoint seeds and no shared state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset, Variable, config_strides
from .errors import ParseError, SchemaMismatch
from .graph import MixedGraph, directed_edge, topological_order

_ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table for one child variable.

    Rows are indexed by the mixed-radix parent configuration (last parent
    varying fastest), columns by child state.
    """

    child: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=np.float64)
        object.__setattr__(self, "table", table)
        if table.ndim != 2:
            raise ValueError(f"CPT of {self.child!r} must be two-dimensional")
        if np.any(table < -_ROW_SUM_TOL) or np.any(table > 1 + _ROW_SUM_TOL):
            raise ValueError(f"CPT of {self.child!r} has entries outside [0, 1]")
        if np.any(np.abs(table.sum(axis=1) - 1.0) > _ROW_SUM_TOL):
            raise ValueError(f"CPT of {self.child!r} has rows not summing to 1")
        table.setflags(write=False)


class BayesNet:
    """A DAG with one CPT per variable over categorical state spaces."""

    def __init__(self, graph: MixedGraph, variables: Sequence[Variable], cpts: Mapping[str, Cpt]):
        if not graph.is_dag:
            raise ValueError("network graph must be a DAG")
        self.graph = graph
        self.variables = tuple(variables)
        self._vars = {v.name: v for v in self.variables}
        if set(self._vars) != graph.node_set:
            raise ValueError("variable set must equal the graph's node set")
        self.cpts = dict(cpts)
        for name in graph.nodes:
            cpt = self.cpts.get(name)
            if cpt is None:
                raise ValueError(f"missing CPT for {name!r}")
            if set(cpt.parents) != set(graph.parents_of(name)):
                raise ValueError(f"CPT parents of {name!r} disagree with the graph")
            q = int(np.prod([self._vars[p].card for p in cpt.parents])) if cpt.parents else 1
            if cpt.table.shape != (q, self._vars[name].card):
                raise ValueError(f"CPT of {name!r} has shape {cpt.table.shape}, expected {(q, self._vars[name].card)}")

    def variable(self, name: str) -> Variable:
        return self._vars[name]

    def card(self, name: str) -> int:
        return self._vars[name].card

    @property
    def schema(self) -> tuple[Variable, ...]:
        return self.variables

    # ------------------------------------------------------------- JSON form
    def to_json(self) -> dict:
        return {
            "variables": [{"name": v.name, "states": list(v.states)} for v in self.variables],
            "edges": [[e.a, e.b] for e in self.graph.sorted_edges()],
            "cpts": {
                name: {"parents": list(cpt.parents), "table": cpt.table.tolist()}
                for name, cpt in sorted(self.cpts.items())
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BayesNet":
        try:
            variables = [Variable(v["name"], tuple(v["states"])) for v in obj["variables"]]
            names = [v.name for v in variables]
            edges = [directed_edge(a, b) for a, b in obj["edges"]]
            graph = MixedGraph(names, edges)
            cpts = {
                name: Cpt(name, tuple(spec["parents"]), np.asarray(spec["table"], dtype=np.float64))
                for name, spec in obj["cpts"].items()
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad network file: {exc}") from exc
        return cls(graph, variables, cpts)


def load_network(path: str | Path) -> BayesNet:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return BayesNet.from_json(obj)


def save_network(bn: BayesNet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(bn.to_json(), indent=2) + "\n", encoding="utf-8")


# ------------------------------------------------------------------ sampling


def _pick(rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample one categorical draw per row of probabilities."""
    cum = np.cumsum(rows, axis=1)
    u = rng.random(rows.shape[0])
    return (u[:, None] > cum).sum(axis=1).astype(np.int32)


def forward_sample(bn: BayesNet, n: int, seed: int) -> Dataset:
    """Ancestral sampling: draw variables in topological order from their CPTs."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    order = topological_order(bn.graph)
    col_of = {v.name: j for j, v in enumerate(bn.variables)}
    codes = np.zeros((n, len(bn.variables)), dtype=np.int32)
    for name in order:
        cpt = bn.cpts[name]
        if cpt.parents:
            cards = [bn.card(p) for p in cpt.parents]
            strides = config_strides(cards)
            cfg = np.zeros(n, dtype=np.int64)
            for p, s in zip(cpt.parents, strides):
                cfg += codes[:, col_of[p]].astype(np.int64) * s
            rows = cpt.table[cfg]
        else:
            rows = np.broadcast_to(cpt.table[0], (n, cpt.table.shape[1]))
        codes[:, col_of[name]] = _pick(rows, rng)
    return Dataset(bn.variables, codes)


# ------------------------------------------------------------- noise channel


class NoiseChannel:
    """Per-variable confusion matrices for the measurement-error model.

    Row ``l`` of a variable's matrix is the distribution of the observed
    state given true state ``l``; its diagonal entry is ``1 - alpha_l``.
    """

    def __init__(self, schema: Sequence[Variable], matrices: Mapping[str, np.ndarray]):
        self.schema = tuple(schema)
        self.matrices: dict[str, np.ndarray] = {}
        for var in self.schema:
            m = np.asarray(matrices[var.name], dtype=np.float64)
            if m.shape != (var.card, var.card):
                raise ValueError(f"channel for {var.name!r} has shape {m.shape}")
            if np.any(m < -_ROW_SUM_TOL) or np.any(np.abs(m.sum(axis=1) - 1.0) > _ROW_SUM_TOL):
                raise ValueError(f"channel rows for {var.name!r} must be distributions")
            m.setflags(write=False)
            self.matrices[var.name] = m

    def alpha_l(self, name: str) -> np.ndarray:
        """Per-state error rates: 1 minus the diagonal."""
        return 1.0 - np.diag(self.matrices[name])

    def alpha(self, name: str) -> float:
        """The variable's error rate: the maximum over its states."""
        return float(self.alpha_l(name).max())

    @classmethod
    def identity(cls, schema: Sequence[Variable]) -> "NoiseChannel":
        return cls(schema, {v.name: np.eye(v.card) for v in schema})

    @classmethod
    def fixed(cls, schema: Sequence[Variable], rates: Mapping[str, float] | float) -> "NoiseChannel":
        """Same error rate for every state, off-diagonal mass split evenly."""
        mats = {}
        for v in schema:
            rate = rates if isinstance(rates, (int, float)) else rates.get(v.name, 0.0)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"rate for {v.name!r} outside [0, 1]")
            m = np.full((v.card, v.card), rate / (v.card - 1))
            np.fill_diagonal(m, 1.0 - rate)
            mats[v.name] = m
        return cls(schema, mats)

    def to_json(self) -> dict:
        return {
            v.name: {
                "alpha": self.alpha(v.name),
                "alpha_l": self.alpha_l(v.name).tolist(),
                "matrix": self.matrices[v.name].tolist(),
            }
            for v in self.schema
        }


def draw_noise_channel(variables: Sequence[Variable], alpha_max: float, seed: int) -> NoiseChannel:
    """Randomized channel: per-variable rate in (0, alpha_max], per-state rates
    rescaled so their maximum hits the variable rate, off-diagonal mass split
    by a flat Dirichlet draw."""
    if not 0.0 <= alpha_max <= 1.0:
        raise ValueError("alpha_max must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    mats = {}
    for var in variables:
        r = var.card
        if alpha_max == 0.0:
            mats[var.name] = np.eye(r)
            continue
        alpha_i = alpha_max * (1.0 - rng.random())  # Uniform(0, alpha_max]
        alpha_il = alpha_i * (1.0 - rng.random(r))
        alpha_il *= alpha_i / alpha_il.max()
        m = np.zeros((r, r))
        off = np.eye(r, dtype=bool)
        for l in range(r):
            split = rng.dirichlet(np.ones(r - 1)) if r > 2 else np.ones(1)
            m[l, ~off[l]] = alpha_il[l] * split
            m[l, l] = 1.0 - alpha_il[l]
        mats[var.name] = m
    return NoiseChannel(variables, mats)


def corrupt(data: Dataset, channel: NoiseChannel, seed: int) -> Dataset:
    """Resample every cell from its channel row, independently per record."""
    if channel.schema != data.schema:
        raise SchemaMismatch("channel variables do not match dataset columns")
    rng = np.random.default_rng(seed)
    out = np.empty_like(data.codes)
    for j, var in enumerate(data.schema):
        rows = channel.matrices[var.name][data.codes[:, j]]
        out[:, j] = _pick(rows, rng)
    return Dataset(data.schema, out)


# ------------------------------------------------------------ random networks


def random_bn(
    n_nodes: int,
    arity: int = 2,
    max_parents: int = 3,
    edge_prob: float = 0.15,
    seed: int = 0,
) -> BayesNet:
    """Ordered random DAG with an in-degree cap and flat-Dirichlet CPT rows.

    Each node may draw an edge from every node earlier in a seeded random
    ordering with probability ``edge_prob``; when more than ``max_parents``
    fire, a random subset of that size is kept.
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be at least 1")
    if arity < 2:
        raise ValueError("arity must be at least 2")
    rng = np.random.default_rng(seed)
    names = [f"V{i}" for i in range(n_nodes)]
    order = [names[i] for i in rng.permutation(n_nodes)]

    parents: dict[str, list[str]] = {}
    for t, v in enumerate(order):
        earlier = order[:t]
        chosen = [u for u in earlier if rng.random() < edge_prob]
        if len(chosen) > max_parents:
            keep = rng.choice(len(chosen), size=max_parents, replace=False)
            chosen = [chosen[i] for i in sorted(keep)]
        parents[v] = chosen

    variables = [Variable(v, tuple(f"s{k}" for k in range(arity))) for v in names]
    graph = MixedGraph(names, [directed_edge(p, v) for v in names for p in parents[v]])
    cpts = {}
    for v in names:
        q = arity ** len(parents[v])
        cpts[v] = Cpt(v, tuple(parents[v]), rng.dirichlet(np.ones(arity), size=q))
    return BayesNet(graph, variables, cpts)
