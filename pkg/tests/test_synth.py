import filecmp

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfaug.graph import build_het_graph
from hfaug.metapath import P2, MatchLimits, match_anchored
from hfaug.records import Label, read_dataset, write_dataset
from hfaug.synth import SyntheticSpec, generate_synthetic


def complete_p2(g, t):
    return match_anchored(g, t, P2, P2.target_pos, MatchLimits(10**6)).n_complete


def test_planted_motifs_found_by_matcher():
    data = generate_synthetic(SyntheticSpec(n_ponzi=10, investors_per_ponzi=5, seed=1))
    g = build_het_graph(data.accounts, data.edges, data.labels)
    counts = {t: complete_p2(g, t) for t in data.planted}
    assert len(counts) == 10
    assert all(c >= 5 for c in counts.values())
    assert sum(counts.values()) >= 50


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6), st.floats(0.0, 1.0))
def test_each_planted_ca_has_enough_instances(seed, k, payback):
    spec = SyntheticSpec(n_ponzi=4, n_background=60, investors_per_ponzi=k, payback_fraction=payback,
                         noise_edges=50, seed=seed)
    data = generate_synthetic(spec)
    g = build_het_graph(data.accounts, data.edges, data.labels)
    for t, investors in data.planted.items():
        assert len(investors) == k
        assert complete_p2(g, t) >= k


def test_no_ponzi_only_negative_labels():
    data = generate_synthetic(SyntheticSpec(n_ponzi=0, seed=3))
    assert data.labels and set(data.labels.values()) == {Label.NON_PONZI}


def test_labels_mark_planted_cas():
    data = generate_synthetic(SyntheticSpec(n_ponzi=5, seed=2))
    assert {a for a, lab in data.labels.items() if lab is Label.PONZI} == set(data.planted)


def test_same_seed_same_files(tmp_path):
    spec = SyntheticSpec(n_ponzi=5, n_background=80, seed=11)
    write_dataset(tmp_path / "a", *_triple(generate_synthetic(spec)))
    write_dataset(tmp_path / "b", *_triple(generate_synthetic(spec)))
    for name in ("accounts.csv", "edges.csv", "labels.csv"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)
    rec = read_dataset(tmp_path / "a")
    assert len(rec.edges) == len(generate_synthetic(spec).edges)


def test_invalid_spec():
    with pytest.raises(ValueError):
        SyntheticSpec(n_ponzi=-1)
    with pytest.raises(ValueError):
        SyntheticSpec(payback_fraction=1.5)


def _triple(data):
    return data.accounts, data.edges, data.labels
