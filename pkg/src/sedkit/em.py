"""Expectation-Maximization for a DAG with exactly one hidden categorical
variable.

Only the families touching the hidden node are re-estimated per iteration;
every other family stays at its complete-data MLE, whose expected counts are
constants.  That is an exact optimization (the expected log-likelihood
decomposes per family), not an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .data import Dataset, config_index, config_strides, counts
from .errors import InvalidReconstruction, NotADag
from .graph import MixedGraph
from .score import family_loglik
from .seeding import stable_seed

_ASCENT_SLACK = 1e-6


@dataclass(frozen=True)
class EmConfig:
    """Convergence threshold (absolute log-likelihood units), iteration cap,
    restart count, and base seed."""

    epsilon: float = 1e-3
    max_iter: int = 200
    restarts: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1 or self.restarts < 1:
            raise ValueError("max_iter and restarts must be at least 1")


@dataclass
class EmResult:
    theta: dict[str, np.ndarray]
    ll_trace: list[float]
    converged: bool
    best_restart: int

    @property
    def loglik(self) -> float:
        return self.ll_trace[-1]


def _normalize_rows(en: np.ndarray) -> np.ndarray:
    s = en.sum(axis=1, keepdims=True)
    uniform = 1.0 / en.shape[1]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(s > 0, en / np.where(s > 0, s, 1.0), uniform)
    return out


def _mle_table(stats) -> np.ndarray:
    return _normalize_rows(stats.counts.astype(np.float64))


class _HiddenProblem:
    """Packed arrays for the E-step kernel of one (graph, hidden, data) triple."""

    def __init__(self, g: MixedGraph, hidden: str, data: Dataset, hidden_card: int):
        self.hidden = hidden
        self.hidden_card = hidden_card
        self.children = sorted(g.children_of(hidden))
        self.hidden_parents = sorted(g.parents_of(hidden))

        self.hidden_cfg, self.q_h = config_index(data, self.hidden_parents)

        base_rows, strides, codes, offsets, cards, shapes = [], [], [], [], [], []
        offset = 0
        self.child_parents: dict[str, tuple[str, ...]] = {}
        for c in self.children:
            parents = sorted(g.parents_of(c))
            self.child_parents[c] = tuple(parents)
            par_cards = [
                hidden_card if p == hidden else data.variable(p).card for p in parents
            ]
            par_strides = config_strides(par_cards)
            pos = parents.index(hidden)
            base = np.zeros(data.n_rows, dtype=np.int64)
            for p, s in zip(parents, par_strides):
                if p != hidden:
                    base += data.column(p).astype(np.int64) * s
            r_c = data.variable(c).card
            q_c = int(np.prod(par_cards))
            base_rows.append(base)
            strides.append(int(par_strides[pos]))
            codes.append(np.ascontiguousarray(data.column(c)))
            offsets.append(offset)
            cards.append(r_c)
            shapes.append((q_c, r_c))
            offset += q_c * r_c

        n_children = len(self.children)
        n_rows = data.n_rows
        self.child_base = (
            np.stack(base_rows) if n_children else np.zeros((0, n_rows), dtype=np.int64)
        )
        self.child_stride = np.asarray(strides, dtype=np.int64)
        self.child_code = (
            np.stack(codes) if n_children else np.zeros((0, n_rows), dtype=np.int32)
        )
        self.child_offset = np.asarray(offsets, dtype=np.int64)
        self.child_card = np.asarray(cards, dtype=np.int64)
        self.child_shapes = shapes
        self.flat_size = offset

    def pack_child_tables(self, tables: Sequence[np.ndarray]) -> np.ndarray:
        flat = np.empty(self.flat_size)
        for off, shape, tab in zip(self.child_offset, self.child_shapes, tables):
            flat[off : off + shape[0] * shape[1]] = tab.reshape(-1)
        return flat

    def unpack_child_tables(self, flat: np.ndarray) -> list[np.ndarray]:
        out = []
        for off, (q, r) in zip(self.child_offset, self.child_shapes):
            out.append(flat[off : off + q * r].reshape(q, r))
        return out

    def estep(self, theta_h: np.ndarray, theta_c_flat: np.ndarray):
        en_h = np.zeros((self.q_h, self.hidden_card))
        en_c_flat = np.zeros(self.flat_size)
        ll = _kernels.em_estep(
            np.ascontiguousarray(self.hidden_cfg),
            np.ascontiguousarray(theta_h),
            np.ascontiguousarray(self.child_base),
            self.child_stride,
            np.ascontiguousarray(self.child_code),
            np.ascontiguousarray(theta_c_flat),
            self.child_offset,
            self.child_card,
            en_h,
            en_c_flat,
        )
        return ll, en_h, en_c_flat


def _resolve_hidden_card(g: MixedGraph, hidden: str, data: Dataset, hidden_card: int | None) -> int:
    if hidden_card is not None:
        if hidden_card < 2:
            raise ValueError("hidden variable needs at least two states")
        return hidden_card
    children = sorted(g.children_of(hidden))
    if len(children) == 1:
        return data.variable(children[0]).card
    raise ValueError(
        f"hidden node {hidden!r} has {len(children)} children; pass hidden_card explicitly"
    )


def em_fit(
    g: MixedGraph,
    hidden: str,
    data: Dataset,
    cfg: EmConfig,
    hidden_card: int | None = None,
    init: Mapping[str, np.ndarray] | None = None,
) -> EmResult:
    """Fit all CPTs of ``g`` by EM with ``hidden`` marginalized in the E-step.

    Per restart the hidden-touching CPT rows start from flat Dirichlet draws;
    a warm start for those families may be supplied via ``init`` (used by the
    first restart only).  Iteration stops once the log-likelihood improves by
    less than ``cfg.epsilon`` or the cap is reached.  The best restart by
    final log-likelihood wins.
    """
    if not g.is_dag:
        raise NotADag("EM requires a DAG")
    observed = set(data.columns)
    if hidden not in g.node_set:
        raise ValueError(f"hidden node {hidden!r} not in graph")
    if hidden in observed:
        raise ValueError(f"hidden node {hidden!r} must be absent from the data")
    missing = [v for v in g.nodes if v != hidden and v not in observed]
    if missing:
        raise ValueError(f"graph nodes {missing} missing from the data")
    if not g.children_of(hidden):
        raise InvalidReconstruction(f"hidden node {hidden!r} has no observed child")
    if data.n_rows < 1:
        raise ValueError("EM needs at least one record")

    hidden_card = _resolve_hidden_card(g, hidden, data, hidden_card)
    problem = _HiddenProblem(g, hidden, data, hidden_card)

    # Families not touching the hidden node: complete-data MLE, constant LL.
    static_theta: dict[str, np.ndarray] = {}
    static_ll = 0.0
    for v in g.nodes:
        if v == hidden or v in problem.children:
            continue
        stats = counts(data, v, sorted(g.parents_of(v)))
        static_theta[v] = _mle_table(stats)
        static_ll += family_loglik(stats)

    best: tuple[float, EmResult] | None = None
    improved = False
    for restart in range(cfg.restarts):
        if restart == 0 and init is not None:
            theta_h = np.array(init[hidden], dtype=np.float64)
            child_tables = [np.asarray(init[c], dtype=np.float64) for c in problem.children]
        else:
            rng = np.random.default_rng(stable_seed(cfg.seed, "em-restart", restart))
            theta_h = rng.dirichlet(np.ones(hidden_card), size=problem.q_h)
            child_tables = [
                rng.dirichlet(np.ones(r), size=q) for (q, r) in problem.child_shapes
            ]
        theta_c_flat = problem.pack_child_tables(child_tables)

        trace: list[float] = []
        converged = False
        for _ in range(cfg.max_iter):
            ll_part, en_h, en_c_flat = problem.estep(theta_h, theta_c_flat)
            trace.append(static_ll + ll_part)
            if len(trace) > 1 and trace[-1] - trace[-2] < cfg.epsilon:
                converged = True
                break
            theta_h = _normalize_rows(en_h)
            for off, (q, r) in zip(problem.child_offset, problem.child_shapes):
                block = en_c_flat[off : off + q * r].reshape(q, r)
                theta_c_flat[off : off + q * r] = _normalize_rows(block).reshape(-1)
        else:
            # Cap reached right after an M-step: evaluate the final parameters.
            ll_part, _, _ = problem.estep(theta_h, theta_c_flat)
            trace.append(static_ll + ll_part)
            converged = trace[-1] - trace[-2] < cfg.epsilon

        theta = dict(static_theta)
        theta[hidden] = theta_h
        for c, tab in zip(problem.children, problem.unpack_child_tables(theta_c_flat)):
            theta[c] = tab.copy()
        result = EmResult(theta, trace, converged, restart)
        improved = improved or trace[-1] > trace[0] + 1e-9
        if best is None or trace[-1] > best[0]:
            best = (trace[-1], result)

    if not improved:
        # No restart moved past its own initialization: flag, keep the value.
        best[1].converged = False
    return best[1]


def posterior_hidden(
    theta: Mapping[str, np.ndarray],
    g: MixedGraph,
    hidden: str,
    record: Mapping[str, int],
) -> np.ndarray:
    """Posterior over the hidden states for one fully observed record.

    Proportional to the hidden node's own CPT row times each of its
    children's CPT entries; an all-zero weight vector is defined as uniform.
    """
    r_h = theta[hidden].shape[1]

    def cfg_of(parents: Sequence[str], hidden_state: int | None) -> int:
        cards = [
            r_h if p == hidden else theta[p].shape[1] for p in parents
        ]
        strides = config_strides(cards)
        idx = 0
        for p, s in zip(parents, strides):
            value = hidden_state if p == hidden else record[p]
            idx += value * s
        return int(idx)

    hidden_parents = sorted(g.parents_of(hidden))
    w = theta[hidden][cfg_of(hidden_parents, None)].copy()
    for c in sorted(g.children_of(hidden)):
        parents = sorted(g.parents_of(c))
        for h in range(r_h):
            w[h] *= theta[c][cfg_of(parents, h), record[c]]
    total = w.sum()
    if total <= 0.0:
        return np.full(r_h, 1.0 / r_h)
    return w / total


def check_ascent(trace: Sequence[float]) -> bool:
    """Whether a log-likelihood trace is monotone within the ascent slack."""
    return all(b >= a - _ASCENT_SLACK for a, b in zip(trace, trace[1:]))
