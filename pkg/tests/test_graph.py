import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfaug.errors import CallIntoEOA, DanglingEndpoint, InsufficientCandidates, LabelKindError
from hfaug.graph import build_het_graph, check_counts, project_hom_graph, sample_negatives
from hfaug.records import (
    Edge,
    EdgeType,
    Kind,
    Label,
    parse_records,
    to_text,
    write_accounts,
    write_edges,
)
from oracles import random_het

T, C = EdgeType.TRANS, EdgeType.CALL


def test_small_counts():
    accounts = [("e1", Kind.EOA), ("e2", Kind.EOA), ("ca", Kind.CA)]
    g = build_het_graph(accounts, [Edge("e1", "ca", T, 1, 1), Edge("e1", "ca", C)])
    c = g.counts()
    assert (c["ca"], c["eoa"], c["call"], c["trans"]) == (1, 2, 1, 1)
    assert c["edges"] == c["call"] + c["trans"]


def test_dangling_endpoint():
    with pytest.raises(DanglingEndpoint):
        build_het_graph([("a", Kind.EOA)], [Edge("a", "zz", T, 1, 1)])


def test_call_into_eoa():
    accounts = [("a", Kind.EOA), ("b", Kind.EOA)]
    bad = [Edge("a", "b", C)]
    with pytest.raises(CallIntoEOA):
        build_het_graph(accounts, bad)
    g = build_het_graph(accounts, bad, lenient=True)
    assert g.counts()["call"] == 0 and g.dropped_calls == 1


def test_ponzi_label_must_be_contract():
    with pytest.raises(LabelKindError):
        build_het_graph([("a", Kind.EOA)], [], {"a": Label.PONZI})


def test_projection_toy():
    accounts = [("a", Kind.EOA), ("b", Kind.CA), ("c", Kind.EOA)]
    edges = [Edge("a", "b", T, 1, 1), Edge("b", "c", T, 1, 2), Edge("a", "b", C)]
    hom = project_hom_graph(build_het_graph(accounts, edges))
    assert hom.counts() == {"nodes": 3, "edges": 2}


def test_projection_of_call_only_graph():
    accounts = [("a", Kind.EOA), ("b", Kind.CA)]
    hom = project_hom_graph(build_het_graph(accounts, [Edge("a", "b", C)] * 3))
    assert hom.counts() == {"nodes": 2, "edges": 0}


def test_duplicates_are_kept():
    accounts = [("a", Kind.EOA), ("b", Kind.CA)]
    e = Edge("a", "b", T, 5, 1)
    g = build_het_graph(accounts, [e, e])
    assert g.counts()["trans"] == 2
    assert g.neighbors("a", T) == ["b"]


def test_neighbors_sorted_by_address():
    accounts = [(x, Kind.EOA) for x in ("m", "a", "z", "c")]
    g = build_het_graph(accounts, [Edge("m", x, T, 1, 1) for x in ("z", "a", "c")])
    assert g.neighbors("m", T) == ["a", "c", "z"]


def test_graph_arrays_are_read_only():
    g = build_het_graph([("a", Kind.CA)], [])
    with pytest.raises(ValueError):
        g.is_ca[0] = False


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(0, 120))
def test_alignment_and_edge_conservation(seed, n, m):
    accounts, edges = random_het(np.random.default_rng(seed), n, m)
    het = build_het_graph(accounts, edges)
    hom = project_hom_graph(het)
    assert set(hom.ids) == set(het.ids)
    assert sorted(map(repr, hom.edges)) == sorted(repr(e) for e in edges if e.etype is T)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_serialization_roundtrip(seed):
    accounts, edges = random_het(np.random.default_rng(seed), 25, 80)
    het = build_het_graph(accounts, edges)
    rec = parse_records(
        io.StringIO(to_text(write_accounts, het.accounts())),
        io.StringIO(to_text(write_edges, het.edges)),
    )
    again = build_het_graph(rec.accounts, rec.edges)
    assert again.adjacency_signature() == het.adjacency_signature()


def _ca_graph(n_ca, n_ponzi):
    accounts = [(f"c{i:03d}", Kind.CA) for i in range(n_ca)]
    labels = {f"c{i:03d}": Label.PONZI for i in range(n_ponzi)}
    return build_het_graph(accounts, [], labels)


def test_negatives_deterministic_and_disjoint():
    g = _ca_graph(10, 3)
    a = sample_negatives(g, seed=4)
    assert a == sample_negatives(g, seed=4)
    assert len(a) == 3 and not set(a) & set(g.ponzi())


def test_negatives_insufficient():
    with pytest.raises(InsufficientCandidates):
        sample_negatives(_ca_graph(5, 5), seed=0)


def test_negatives_cover_every_candidate():
    g = _ca_graph(100, 10)
    seen = set()
    for seed in range(1000):
        seen.update(sample_negatives(g, seed=seed))
    assert seen == set(g.nodes_of_kind(Kind.CA)) - set(g.ponzi())


def test_check_counts_reports_mismatch():
    g = _ca_graph(3, 1)
    assert check_counts(g, {"nodes": 3, "ca": 3}) == []
    assert check_counts(g, {"nodes": 4}) == ["nodes: expected 4, got 3"]
