"""Log-likelihood and BIC scoring for complete-data DAGs and for
reconstruction graphs containing one hidden variable.

Natural logarithms throughout; terms with zero counts contribute nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .data import Dataset, counts
from .errors import NodeNotFound, NotADag
from .graph import MixedGraph, cpdag_to_dag

if TYPE_CHECKING:
    from .em import EmConfig, EmResult


@dataclass(frozen=True)
class BicScore:
    loglik: float
    dim: int
    n: int

    @property
    def value(self) -> float:
        return self.loglik - 0.5 * math.log(self.n) * self.dim


def family_loglik(stats) -> float:
    """Maximum-likelihood log-likelihood contribution of one family."""
    c = stats.counts
    nz = c > 0
    margins = stats.margins[:, None]
    ratios = np.where(nz, c / np.where(margins > 0, margins, 1), 1.0)
    return float(np.sum(np.where(nz, c, 0) * np.log(ratios)))


def family_dim(r: int, q: int) -> int:
    return (r - 1) * q


def _check_nodes(g: MixedGraph, data: Dataset) -> None:
    for v in g.nodes:
        if v not in data.columns:
            raise NodeNotFound(v)


def loglik_complete(g: MixedGraph, data: Dataset) -> float:
    """Maximized log-likelihood of a fully observed DAG."""
    if not g.is_dag:
        raise NotADag("complete-data scoring requires a DAG")
    _check_nodes(g, data)
    return math.fsum(
        family_loglik(counts(data, v, sorted(g.parents_of(v)))) for v in g.nodes
    )


def graph_dim(g: MixedGraph, cards: dict[str, int]) -> int:
    """Free-parameter count: sum over nodes of (r - 1) * q."""
    total = 0
    for v in g.nodes:
        q = 1
        for p in g.parents_of(v):
            q *= cards[p]
        total += family_dim(cards[v], q)
    return total


def bic_complete(g: MixedGraph, data: Dataset, seed: int = 0) -> BicScore:
    """BIC of a DAG, or of a seeded class member when given a CPDAG."""
    _check_nodes(g, data)
    if g.undirected_edges:
        g = cpdag_to_dag(g, seed)
    if data.n_rows < 1:
        raise ValueError("scoring needs at least one record")
    cards = {v: data.variable(v).card for v in g.nodes}
    return BicScore(loglik_complete(g, data), graph_dim(g, cards), data.n_rows)


def bic_hidden(
    g_r: MixedGraph,
    hidden: str,
    data: Dataset,
    cfg: EmConfig,
    hidden_card: int | None = None,
    *,
    with_em: bool = False,
) -> BicScore | tuple[BicScore, EmResult]:
    """BIC of a reconstruction DAG whose ``hidden`` node is absent from the data.

    The log-likelihood is the best converged EM value across restarts; the
    dimension formula treats the hidden node's families exactly like observed
    ones.
    """
    from .em import em_fit

    if data.n_rows < 1:
        raise ValueError("scoring needs at least one record")
    result = em_fit(g_r, hidden, data, cfg, hidden_card=hidden_card)
    cards = {
        v: result.theta[v].shape[1] for v in g_r.nodes
    }
    score = BicScore(result.loglik, graph_dim(g_r, cards), data.n_rows)
    if with_em:
        return score, result
    return score
