import numpy as np
import pytest

from sedkit.data import Dataset, Variable, counts, read_csv, write_csv
from sedkit.errors import NodeNotFound, ParseError, UnknownState
from sedkit.model import random_bn, forward_sample
from sedkit.seeding import stable_seed

from conftest import dataset_from_rows


def test_variable_needs_two_distinct_states():
    with pytest.raises(ValueError):
        Variable("A", ("only",))
    with pytest.raises(ValueError):
        Variable("A", ("x", "x"))


def test_dataset_is_readonly(tmp_path):
    d = dataset_from_rows(["A"], [[0], [1]])
    with pytest.raises(ValueError):
        d.codes[0, 0] = 1


def test_read_header_only(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("A,B\n", encoding="utf-8")
    d = read_csv(p)
    assert d.n_rows == 0 and d.columns == ("A", "B")


def test_read_two_by_two(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("A,B\na,b\nb,a\n", encoding="utf-8")
    d = read_csv(p)
    assert d.n_rows == 2
    assert d.variable("A").states == ("a", "b")
    assert d.variable("B").states == ("b", "a")
    assert d.codes.tolist() == [[0, 0], [1, 1]]


def test_read_accepts_crlf(tmp_path):
    p = tmp_path / "d.csv"
    p.write_bytes(b"A,B\r\na,b\r\n")
    assert read_csv(p).n_rows == 1


def test_ragged_row_rejected(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("A,B\na\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        read_csv(p)
    assert err.value.line == 2


def test_quoted_comma_value_rejected(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text('A,B\n"x,y",b\n', encoding="utf-8")
    with pytest.raises(ParseError) as err:
        read_csv(p)
    assert err.value.line == 2


def test_unknown_state_with_fixed_schema(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("A\nweird\n", encoding="utf-8")
    with pytest.raises(UnknownState):
        read_csv(p, schema=[Variable("A", ("a", "b"))])


def test_schema_fixes_state_order(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("A\nb\na\n", encoding="utf-8")
    d = read_csv(p, schema=[Variable("A", ("a", "b"))])
    assert d.codes[:, 0].tolist() == [1, 0]


def test_unknown_column_with_fixed_schema(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("Z\nx\n", encoding="utf-8")
    with pytest.raises(NodeNotFound):
        read_csv(p, schema=[Variable("A", ("a", "b"))])


def test_csv_roundtrip_of_generated_data(tmp_path):
    bn = random_bn(6, arity=3, max_parents=2, edge_prob=0.4, seed=11)
    d = forward_sample(bn, 500, seed=3)
    p = tmp_path / "d.csv"
    write_csv(d, p)
    back = read_csv(p, schema=bn.schema)
    assert back == d
    # Inference order also matches here because sampling covers every state.
    inferred = read_csv(p)
    assert inferred.n_rows == d.n_rows


# -------------------------------------------------------------------- counts


def test_counts_marginal():
    d = dataset_from_rows(["A"], [[0], [1], [1], [1]])
    stats = counts(d, "A", [])
    assert stats.counts.tolist() == [[1, 3]]
    assert stats.margins.tolist() == [4]
    assert stats.n == 4


def test_counts_exhaustive_binary_pairs():
    d = dataset_from_rows(["A", "B"], [[0, 0], [0, 1], [1, 0], [1, 1]])
    stats = counts(d, "B", ["A"])
    assert stats.counts.tolist() == [[1, 1], [1, 1]]


def test_counts_mixed_radix_order_last_parent_fastest():
    # parents (P, Q) with cards (2, 3): row index = 3 * p + q
    rows = [[p, q, (p + q) % 2] for p in range(2) for q in range(3) for _ in range(p * 3 + q + 1)]
    d = dataset_from_rows(["P", "Q", "C"], rows, cards=[2, 3, 2])
    stats = counts(d, "C", ["P", "Q"])
    assert stats.counts.shape == (6, 2)
    for p in range(2):
        for q in range(3):
            row = stats.counts[3 * p + q]
            assert row.sum() == p * 3 + q + 1
            assert row[(p + q) % 2] == row.sum()


def test_counts_total_and_margins_on_random_data():
    bn = random_bn(5, arity=2, max_parents=3, edge_prob=0.5, seed=7)
    d = forward_sample(bn, 257, seed=1)
    for v in d.columns:
        for parents in ([], [c for c in d.columns if c != v][:2]):
            stats = counts(d, v, parents)
            assert stats.n == d.n_rows
            assert (stats.counts >= 0).all()
            # Marginalizing over the child reproduces the parent-set counts.
            parent_stats = counts(d, v, parents)  # same family
            assert parent_stats.margins.tolist() == stats.counts.sum(axis=1).tolist()


def test_counts_invariant_under_row_permutation():
    rng = np.random.default_rng(stable_seed("perm"))
    d = dataset_from_rows(["A", "B", "C"], rng.integers(0, 2, size=(50, 3)).tolist())
    perm = rng.permutation(50)
    shuffled = Dataset(d.schema, d.codes[perm])
    for child, parents in (("A", ["B"]), ("C", ["A", "B"])):
        assert np.array_equal(
            counts(d, child, parents).counts, counts(shuffled, child, parents).counts
        )
