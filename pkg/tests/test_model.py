import json
import math

import numpy as np
import pytest

from sedkit.data import Variable
from sedkit.errors import SchemaMismatch
from sedkit.graph import MixedGraph, directed_edge
from sedkit.model import (
    BayesNet,
    Cpt,
    NoiseChannel,
    corrupt,
    draw_noise_channel,
    forward_sample,
    load_network,
    random_bn,
    save_network,
)
from sedkit.seeding import stable_seed

from conftest import make_bn


def test_cpt_rows_must_be_distributions():
    with pytest.raises(ValueError):
        Cpt("A", (), np.array([[0.5, 0.6]]))
    with pytest.raises(ValueError):
        Cpt("A", (), np.array([[1.2, -0.2]]))


def test_bayesnet_validates_parents_and_shape():
    g = MixedGraph(["A", "B"], [directed_edge("A", "B")])
    vs = [Variable("A", ("0", "1")), Variable("B", ("0", "1"))]
    with pytest.raises(ValueError):
        BayesNet(g, vs, {"A": Cpt("A", (), np.array([[0.5, 0.5]])),
                         "B": Cpt("B", (), np.array([[0.5, 0.5]]))})
    with pytest.raises(ValueError):
        BayesNet(g, vs, {"A": Cpt("A", (), np.array([[0.5, 0.5]])),
                         "B": Cpt("B", ("A",), np.array([[0.5, 0.5]]))})


# ------------------------------------------------------------------- sampling


def test_forward_sample_deterministic_cpts():
    bn = make_bn(
        ["A", "B"],
        [("A", "B")],
        {"A": ("0", "1"), "B": ("0", "1")},
        {"A": ((), [[0.0, 1.0]]), "B": (("A",), [[1.0, 0.0], [0.0, 1.0]])},
    )
    d = forward_sample(bn, 50, seed=9)
    assert (d.column("A") == 1).all()
    assert (d.column("B") == 1).all()


def test_forward_sample_matches_marginal():
    bn = make_bn(
        ["A"], [], {"A": ("s1", "s2")}, {"A": ((), [[0.7, 0.3]])}
    )
    d = forward_sample(bn, 100_000, seed=5)
    freq = float((d.column("A") == 0).mean())
    assert 0.69 <= freq <= 0.71


def test_forward_sample_matches_joint():
    bn = make_bn(
        ["A", "B"],
        [("A", "B")],
        {"A": ("0", "1"), "B": ("0", "1")},
        {"A": ((), [[0.6, 0.4]]), "B": (("A",), [[0.9, 0.1], [0.2, 0.8]])},
    )
    d = forward_sample(bn, 100_000, seed=4)
    analytic = np.array([[0.54, 0.06], [0.08, 0.32]])
    empirical = np.zeros((2, 2))
    for a in range(2):
        for b in range(2):
            empirical[a, b] = float(((d.column("A") == a) & (d.column("B") == b)).mean())
    assert np.abs(empirical - analytic).max() <= 0.01


def test_forward_sample_seed_determinism():
    bn = random_bn(6, seed=2)
    assert forward_sample(bn, 100, seed=1) == forward_sample(bn, 100, seed=1)
    assert forward_sample(bn, 100, seed=1) != forward_sample(bn, 100, seed=2)


# -------------------------------------------------------------- noise channel


def test_zero_alpha_gives_identity_channel():
    vs = [Variable("A", ("0", "1")), Variable("B", ("x", "y", "z"))]
    ch = draw_noise_channel(vs, 0.0, seed=1)
    for v in vs:
        assert np.array_equal(ch.matrices[v.name], np.eye(v.card))


def test_binary_rows_collapse_to_two_entries():
    vs = [Variable("A", ("0", "1"))]
    ch = draw_noise_channel(vs, 0.3, seed=8)
    m = ch.matrices["A"]
    al = ch.alpha_l("A")
    assert np.allclose(m, [[1 - al[0], al[0]], [al[1], 1 - al[1]]])
    assert math.isclose(ch.alpha("A"), al.max())


def test_alpha_max_is_hit_by_some_state():
    vs = [Variable("A", ("0", "1", "2"))]
    for s in range(5):
        ch = draw_noise_channel(vs, 0.1, seed=s)
        al = ch.alpha_l("A")
        assert 0 < ch.alpha("A") <= 0.1
        assert math.isclose(al.max(), ch.alpha("A"))


def test_offdiagonal_split_is_symmetric_on_average():
    vs = [Variable("A", ("0", "1", "2"))]
    rng_seeds = range(4000)
    ratios = []
    for s in rng_seeds:
        ch = draw_noise_channel(vs, 0.5, seed=stable_seed("dir", s))
        m = ch.matrices["A"]
        row = m[0]
        off = np.array([row[1], row[2]])
        if off.sum() > 0:
            ratios.append(off[0] / off.sum())
    assert abs(np.mean(ratios) - 0.5) <= 0.01


def test_channel_rows_sum_to_one():
    vs = [Variable("A", ("0", "1", "2", "3"))]
    ch = draw_noise_channel(vs, 0.2, seed=3)
    assert np.allclose(ch.matrices["A"].sum(axis=1), 1.0)


# ------------------------------------------------------------------- corrupt


def test_identity_channel_is_noop():
    bn = random_bn(5, seed=3)
    d = forward_sample(bn, 300, seed=1)
    out = corrupt(d, NoiseChannel.identity(bn.schema), seed=42)
    assert out == d


def test_binary_flip_rate():
    bn = make_bn(["A"], [], {"A": ("0", "1")}, {"A": ((), [[0.5, 0.5]])})
    d = forward_sample(bn, 100_000, seed=2)
    ch = NoiseChannel.fixed(bn.schema, 0.1)
    noisy = corrupt(d, ch, seed=3)
    flips = float((noisy.column("A") != d.column("A")).mean())
    assert 0.09 <= flips <= 0.11


def test_corrupt_empty_dataset():
    bn = random_bn(3, seed=1)
    d = forward_sample(bn, 1, seed=0)
    from sedkit.data import Dataset

    empty = Dataset(d.schema, d.codes[:0])
    out = corrupt(empty, NoiseChannel.fixed(bn.schema, 0.2), seed=1)
    assert out.n_rows == 0


def test_corrupt_schema_mismatch():
    bn = random_bn(3, seed=1)
    other = random_bn(4, seed=2)
    d = forward_sample(bn, 10, seed=0)
    with pytest.raises(SchemaMismatch):
        corrupt(d, NoiseChannel.identity(other.schema), seed=0)


def test_corrupt_satisfies_error_rate_definition():
    # 1 - P(observed == l | true == l) must equal the per-state rate.
    bn = make_bn(["A"], [], {"A": ("0", "1", "2")}, {"A": ((), [[0.3, 0.3, 0.4]])})
    d = forward_sample(bn, 100_000, seed=6)
    ch = draw_noise_channel(bn.schema, 0.3, seed=7)
    noisy = corrupt(d, ch, seed=8)
    for l in range(3):
        mask = d.column("A") == l
        err = float((noisy.column("A")[mask] != l).mean())
        assert abs(err - ch.alpha_l("A")[l]) <= 0.02


def test_corrupt_marginal_matches_channel_composition():
    bn = make_bn(["A"], [], {"A": ("0", "1")}, {"A": ((), [[0.7, 0.3]])})
    d = forward_sample(bn, 100_000, seed=9)
    ch = draw_noise_channel(bn.schema, 0.2, seed=10)
    noisy = corrupt(d, ch, seed=11)
    marg_true = np.array([0.7, 0.3])
    expected = marg_true @ ch.matrices["A"]
    observed = np.array([(noisy.column("A") == k).mean() for k in range(2)])
    assert np.abs(observed - expected).max() <= 0.01


# ---------------------------------------------------------------- random nets


def test_random_bn_single_node():
    bn = random_bn(1, seed=0)
    assert len(bn.graph.edges) == 0
    assert bn.cpts["V0"].table.shape == (1, 2)


def test_random_bn_no_edges():
    bn = random_bn(8, edge_prob=0.0, seed=1)
    assert len(bn.graph.edges) == 0


def test_random_bn_respects_max_parents():
    for s in range(5):
        bn = random_bn(12, max_parents=2, edge_prob=0.9, seed=s)
        assert bn.graph.is_dag
        assert max(len(bn.graph.parents_of(v)) for v in bn.graph.nodes) <= 2


def _truncated_binomial_mean_var(m: int, p: float, cap: int) -> tuple[float, float]:
    mean = var = 0.0
    probs = [math.comb(m, k) * p**k * (1 - p) ** (m - k) for k in range(m + 1)]
    vals = [min(k, cap) for k in range(m + 1)]
    mean = sum(pr * v for pr, v in zip(probs, vals))
    second = sum(pr * v * v for pr, v in zip(probs, vals))
    return mean, second - mean * mean


def test_random_bn_edge_count_matches_analytic_expectation():
    n, p, cap, n_seeds = 20, 0.15, 3, 50
    per_node = [_truncated_binomial_mean_var(t, p, cap) for t in range(n)]
    expected = sum(m for m, _ in per_node)
    var_total = sum(v for _, v in per_node)
    sigma_mean = math.sqrt(var_total / n_seeds)
    means = [
        len(random_bn(n, 2, cap, p, seed=stable_seed("edges", s)).graph.edges)
        for s in range(n_seeds)
    ]
    assert abs(np.mean(means) - expected) <= 3 * sigma_mean


def test_random_bn_cpt_rows_sum_to_one():
    bn = random_bn(10, arity=3, seed=5)
    for cpt in bn.cpts.values():
        assert np.allclose(cpt.table.sum(axis=1), 1.0, atol=1e-9)


# ------------------------------------------------------------------ JSON I/O


def test_network_json_roundtrip(tmp_path):
    bn = random_bn(6, arity=3, max_parents=2, edge_prob=0.4, seed=13)
    p = tmp_path / "net.json"
    save_network(bn, p)
    back = load_network(p)
    assert back.graph == bn.graph
    assert back.schema == bn.schema
    for v in bn.graph.nodes:
        assert back.cpts[v].parents == bn.cpts[v].parents
        assert np.allclose(back.cpts[v].table, bn.cpts[v].table)


def test_asia_fixture_loads():
    from importlib import resources

    with resources.as_file(resources.files("sedkit.fixtures") / "asia.json") as p:
        bn = load_network(p)
    assert set(bn.graph.nodes) == {
        "asia", "tub", "smoke", "lung", "bronc", "either", "xray", "dysp"
    }
    assert len(bn.graph.edges) == 8
    from sedkit.evaluation import clique_count

    assert clique_count(bn.graph) == 0
