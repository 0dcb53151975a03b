import numpy as np
import pytest

from sedkit.data import Dataset, Variable
from sedkit.errors import NodeNotFound, NotADag
from sedkit.graph import MixedGraph, dag_to_cpdag, directed_edge, undirected_edge
from sedkit.learn import HcConfig, export_graph, hill_climb, import_graph
from sedkit.model import forward_sample, random_bn
from sedkit.score import bic_complete
from sedkit.seeding import stable_seed

from conftest import make_bn, random_dag


def independent_binary_data(n, seed, k=4):
    rng = np.random.default_rng(seed)
    schema = [Variable(f"X{i}", ("0", "1")) for i in range(k)]
    return Dataset(schema, rng.integers(0, 2, size=(n, k), dtype=np.int32))


def test_independent_data_yields_empty_graph():
    empties = 0
    for s in range(10):
        d = independent_binary_data(10_000, stable_seed("indep", s))
        g = hill_climb(d)
        empties += not g.edges
    assert empties >= 9


def test_strong_pairwise_dependence_recovers_skeleton():
    bn = make_bn(
        ["A", "B"],
        [("A", "B")],
        {"A": ("0", "1"), "B": ("0", "1")},
        {"A": ((), [[0.5, 0.5]]), "B": (("A",), [[0.9, 0.1], [0.1, 0.9]])},
    )
    d = forward_sample(bn, 10_000, seed=stable_seed("pair"))
    g = hill_climb(d)
    cpdag = dag_to_cpdag(g)
    assert cpdag.edges == frozenset([undirected_edge("A", "B")])


def test_output_beats_empty_graph():
    bn = random_bn(8, edge_prob=0.3, seed=9)
    d = forward_sample(bn, 2_000, seed=1)
    g = hill_climb(d)
    assert bic_complete(g, d).value >= bic_complete(MixedGraph(d.columns), d).value


def test_trace_is_strictly_increasing():
    bn = random_bn(8, edge_prob=0.3, seed=10)
    d = forward_sample(bn, 2_000, seed=2)
    g, trace = hill_climb(d, with_trace=True)
    assert all(b > a for a, b in zip(trace, trace[1:]))
    assert trace[-1] == pytest.approx(bic_complete(g, d).value, abs=1e-6)


def test_respects_max_parents_and_acyclicity():
    bn = random_bn(10, max_parents=4, edge_prob=0.5, seed=3)
    d = forward_sample(bn, 3_000, seed=4)
    for cap in (1, 2, 3):
        g = hill_climb(d, HcConfig(max_parents=cap))
        assert g.is_dag
        assert max(len(g.parents_of(v)) for v in g.nodes) <= cap


def test_deterministic_output():
    bn = random_bn(8, edge_prob=0.3, seed=12)
    d = forward_sample(bn, 1_500, seed=5)
    assert hill_climb(d) == hill_climb(d)


def test_import_graph_basic(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("tub -> either\nlung -> either\n", encoding="utf-8")
    schema = [Variable(v, ("0", "1")) for v in ("tub", "lung", "either", "xray")]
    g = import_graph(p, schema)
    assert set(g.nodes) == {"tub", "lung", "either"}
    assert len(g.edges) == 2


def test_import_graph_node_lines_only(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("node A\nnode B\n", encoding="utf-8")
    g = import_graph(p, [Variable("A", ("0", "1")), Variable("B", ("0", "1"))])
    assert set(g.nodes) == {"A", "B"} and not g.edges


def test_import_graph_rejects_unknown_nodes(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("A -> B\n", encoding="utf-8")
    with pytest.raises(NodeNotFound):
        import_graph(p, [Variable("A", ("0", "1"))])


def test_import_graph_rejects_directed_cycle(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("A -> B\nB -> C\nC -> A\n", encoding="utf-8")
    schema = [Variable(v, ("0", "1")) for v in "ABC"]
    with pytest.raises(NotADag):
        import_graph(p, schema)


def test_export_import_roundtrip(tmp_path):
    for i in range(10):
        g = random_dag(stable_seed("io", i))
        schema = [Variable(v, ("0", "1")) for v in g.nodes]
        p = tmp_path / f"g{i}.txt"
        export_graph(g, p)
        assert import_graph(p, schema) == g
