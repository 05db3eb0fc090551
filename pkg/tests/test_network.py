from __future__ import annotations

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binnet.conditional import RegressionMethod, signed_log_magnitude
from binnet.engine import BinaryMatrix, WeightTable, all_pairs, pair_arrays
from binnet.errors import ConfigError, IoFailure
from binnet.measures import MeasureKind
from binnet.network import (
    Edge,
    WeightedNetwork,
    build_network,
    compare_measures,
    dot,
    edge_list_csv,
    export,
    node_link_json,
    rank_edges,
    read_node_link_json,
)


def table_from(values, kind=MeasureKind.JACCARD, degenerate=None):
    values = np.asarray(values, dtype=float)
    k = int((1 + np.sqrt(1 + 8 * len(values))) / 2)
    return WeightTable(k, kind, values, degenerate)


def brute_top_k(values, labels, k, signed):
    ii, jj = pair_arrays(len(labels))
    items = []
    for p, (i, j) in enumerate(zip(ii, jj)):
        score = abs(values[p]) if signed else values[p]
        items.append((-score, tuple(sorted((labels[i], labels[j]))), p))
    items.sort()
    return [p for *_, p in items[:k]]


# -- rank_edges -----------------------------------------------------------------------------


def test_single_strong_pair():
    vals = np.zeros(6)
    vals[4] = 1.0
    ranking = rank_edges(table_from(vals), list("abcd"), 1)
    assert [(e.label_i, e.label_j, e.weight) for e in ranking.edges] == [("b", "d", 1.0)]


def test_toy_jaccard_top_edge(toy):
    ranking = rank_edges(all_pairs(toy, MeasureKind.JACCARD), toy.labels, 1)
    assert ranking.edges[0][:3] == ("Software Dev", "C++", 1.0)


def test_ties_break_lexicographically():
    labels = ["d", "b", "c", "a"]
    ranking = rank_edges(table_from(np.full(6, 0.5)), labels, 6)
    pairs = [tuple(sorted((e.label_i, e.label_j))) for e in ranking.edges]
    assert pairs == sorted(pairs)


def test_signed_kinds_rank_by_magnitude():
    vals = [0.1, -0.9, 0.5, 0.0, -0.2, 0.3]
    ranking = rank_edges(table_from(vals, MeasureKind.PHI), list("abcd"), 3)
    assert [e.weight for e in ranking.edges] == [-0.9, 0.5, 0.3]


def test_degenerate_pairs_listed_separately():
    vals = [0.0, 0.4, 0.9, 0.2, 0.0, 0.1]
    deg = [True, False, False, False, True, False]
    ranking = rank_edges(table_from(vals, degenerate=deg), list("abcd"), 10)
    assert len(ranking.edges) == 4 and len(ranking.degenerate) == 2
    assert all(not table_from(vals, degenerate=deg).is_degenerate(e.i, e.j) for e in ranking.edges)
    merged = rank_edges(table_from(vals, degenerate=deg), list("abcd"), 10, include_degenerate=True)
    assert len(merged.edges) == 6 and merged.degenerate == []


def test_m_beyond_pair_count():
    assert len(rank_edges(table_from(np.arange(6.0)), list("abcd"), 100).edges) == 6


def test_rank_needs_positive_m():
    with pytest.raises(ConfigError):
        rank_edges(table_from(np.arange(6.0)), list("abcd"), 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**32 - 1), st.sampled_from(list(MeasureKind)[:5]))
def test_rank_invariant_under_column_permutation(k, seed, kind):
    rng = np.random.default_rng(seed)
    dense = rng.random((25, k)) < 0.4
    labels = [f"g{c}" for c in range(k)]
    perm = rng.permutation(k)
    a = rank_edges(all_pairs(BinaryMatrix.from_dense(dense, labels), kind), labels, 5)
    plabels = [labels[c] for c in perm]
    b = rank_edges(all_pairs(BinaryMatrix.from_dense(dense[:, perm], plabels), kind), plabels, 5)
    key = lambda r: [(frozenset((e.label_i, e.label_j)), e.weight) for e in r.edges]
    assert key(a) == key(b)


# -- build_network --------------------------------------------------------------------------------


def test_top_zero_is_empty():
    net = build_network(table_from(np.arange(6.0)), list("abcd"), top_k=0)
    assert net.edges == ()


def test_threshold_minus_inf_keeps_all():
    rng = np.random.default_rng(0)
    m = BinaryMatrix.from_dense(rng.random((40, 4)) < 0.5)
    w = all_pairs(m, MeasureKind.PHI)
    assert not w.degenerate.any()
    net = build_network(w, m.labels, threshold=-np.inf)
    assert len(net.edges) == 6


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("kind", [MeasureKind.JACCARD, MeasureKind.PHI])
def test_top_k_matches_sort_oracle(seed, kind):
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-1 if kind.signed else 0, 1, 45)
    labels = [f"n{c}" for c in range(10)]
    net = build_network(table_from(vals, kind), labels, top_k=5)
    ii, jj = pair_arrays(10)
    got = {(e.i, e.j) for e in net.edges}
    want = {(int(ii[p]), int(jj[p])) for p in brute_top_k(vals, labels, 5, kind.signed)}
    assert got == want


@pytest.mark.parametrize("m", [1, 3, 7])
def test_threshold_at_mth_weight_is_superset(m):
    rng = np.random.default_rng(m)
    vals = np.round(rng.uniform(0, 1, 28), 1)      # force ties
    labels = [f"n{c}" for c in range(8)]
    w = table_from(vals)
    top = build_network(w, labels, top_k=m)
    tau = sorted(vals, reverse=True)[m - 1]
    thr = build_network(w, labels, threshold=tau)
    top_set = {(e.i, e.j) for e in top.edges}
    thr_set = {(e.i, e.j) for e in thr.edges}
    assert top_set <= thr_set
    assert all(w.get(i, j) == tau for i, j in thr_set - top_set)


def test_signed_threshold_uses_magnitude():
    net = build_network(table_from([0.1, -0.9, 0.5, 0.0, -0.2, 0.3], MeasureKind.PHI), list("abcd"), threshold=0.4)
    assert sorted(e.weight for e in net.edges) == [-0.9, 0.5]


def test_build_network_rule_required():
    with pytest.raises(ConfigError):
        build_network(table_from(np.arange(6.0)), list("abcd"))
    with pytest.raises(ConfigError):
        build_network(table_from(np.arange(6.0)), list("abcd"), top_k=1, threshold=0.0)


def test_degenerate_excluded_from_network_unless_requested():
    w = table_from([1.0, 1.0, 1.0, 1.0, 1.0, 1.0], degenerate=[1, 0, 0, 0, 0, 0])
    assert len(build_network(w, list("abcd"), threshold=0.5).edges) == 5
    net = build_network(w, list("abcd"), threshold=0.5, include_degenerate=True)
    assert len(net.edges) == 6 and net.edges[0].degenerate


def test_network_validation():
    with pytest.raises(Exception):
        WeightedNetwork(("a", "b"), (Edge(1, 0, 0.5, MeasureKind.P11),))
    with pytest.raises(Exception):
        WeightedNetwork(("a", "b"), (Edge(0, 1, 0.5, MeasureKind.P11), Edge(0, 1, 0.2, MeasureKind.P11)))


# -- comparison tables ------------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_comparison_ordering(seed):
    rng = np.random.default_rng(seed)
    m = BinaryMatrix.from_dense(rng.random((100, 12)) < rng.uniform(0.05, 0.6, 12))
    table = compare_measures(m, [MeasureKind.P11, MeasureKind.JACCARD, MeasureKind.SIMPSON])
    p11, jac, sim = (table.column(k) for k in table.kinds)
    assert np.all(p11 <= jac) and np.all(jac <= sim)


def test_single_kind_equals_weight_table(toy):
    table = compare_measures(toy, [MeasureKind.PHI])
    assert np.array_equal(table.column(MeasureKind.PHI), all_pairs(toy, MeasureKind.PHI).values)


def test_conditional_column_is_signed_log():
    from binnet.conditional import conditional_edge_weights
    from binnet.synth import sample_leader_model

    m = sample_leader_model(2000, seed=4)
    table = compare_measures(m, [MeasureKind.PHI, MeasureKind.CONDITIONAL], RegressionMethod.ols())
    raw = conditional_edge_weights(m, RegressionMethod.ols()).values
    assert table.column(MeasureKind.CONDITIONAL).tolist() == [signed_log_magnitude(v) for v in raw]


def test_compare_config_errors(toy):
    with pytest.raises(ConfigError):
        compare_measures(toy, [MeasureKind.P11, MeasureKind.P11])
    with pytest.raises(ConfigError):
        compare_measures(toy, [MeasureKind.CONDITIONAL])
    with pytest.raises(ConfigError):
        compare_measures(toy, [MeasureKind.P11], RegressionMethod.ols())
    with pytest.raises(ConfigError):
        compare_measures(toy, [])


def test_comparison_csv_header(toy):
    text = compare_measures(toy, [MeasureKind.P11, MeasureKind.JACCARD]).to_csv()
    lines = text.splitlines()
    assert lines[0] == "i,j,label_i,label_j,p11,jaccard"
    assert len(lines) == 29
    assert lines[2] == "0,2,Software Dev,C++,0.5,1"


# -- export -------------------------------------------------------------------------------------


def sample_network():
    labels = ("alpha", 'say "hi"', "c,d")
    edges = (Edge(0, 1, 1 / 3, MeasureKind.JACCARD), Edge(1, 2, -0.1, MeasureKind.JACCARD, True))
    return WeightedNetwork(labels, edges, {"rule": "top_k", "value": 2})


def test_empty_network_csv():
    net = WeightedNetwork(("a", "b"), ())
    assert edge_list_csv(net) == "source,target,weight,measure\n"


def test_csv_quoting_and_precision():
    text = edge_list_csv(sample_network())
    lines = text.split("\n")
    assert lines[1] == 'alpha,"say ""hi""",0.33333333333333331,jaccard'
    assert lines[2].startswith('"say ""hi""","c,d",')
    assert float(lines[1].rsplit(",", 2)[1]) == 1 / 3


def test_node_link_round_trip():
    net = WeightedNetwork(("x", "y"), (Edge(0, 1, 0.1 + 0.2, MeasureKind.PHI),), {"rule": "threshold", "value": 0.0})
    assert read_node_link_json(node_link_json(net)) == net
    assert read_node_link_json(node_link_json(sample_network())) == sample_network()


def test_node_link_schema():
    import json

    doc = json.loads(node_link_json(sample_network()))
    assert doc["nodes"][1] == {"id": 1, "label": 'say "hi"'}
    assert set(doc["links"][0]) >= {"source", "target", "weight", "measure"}


def test_dot_output():
    text = dot(sample_network())
    assert text.startswith("graph associations {")
    assert 'n1 [label="say \\"hi\\""];' in text
    assert "n0 -- n1 [weight=0.33333333333333331" in text
    assert "->" not in text


@pytest.mark.parametrize("fmt", ["csv", "dot", "json"])
def test_export_is_byte_identical(tmp_path, fmt):
    a, b = tmp_path / "a", tmp_path / "b"
    export(sample_network(), fmt, a)
    export(sample_network(), fmt, b)
    assert a.read_bytes() == b.read_bytes()
    buf = io.StringIO()
    export(sample_network(), fmt, buf)
    assert buf.getvalue().encode("utf-8") == a.read_bytes()


def test_export_errors(tmp_path):
    with pytest.raises(IoFailure) as err:
        export(sample_network(), "csv", tmp_path / "missing" / "out.csv")
    assert "missing" in str(err.value)
    with pytest.raises(ConfigError):
        export(sample_network(), "graphml", tmp_path / "x")
