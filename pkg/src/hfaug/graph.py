"""Aligned heterogeneous / homogeneous account-interaction graphs.

Nodes are indexed in sorted address order, so every neighbour array is sorted
by address as well; the metapath matcher relies on that for its deterministic
enumeration order.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable

import numpy as np

from .errors import (
    CallIntoEOA,
    DanglingEndpoint,
    InsufficientCandidates,
    LabelKindError,
    UnknownAccount,
)
from .records import Edge, EdgeType, Kind, Label

OUT, IN = "out", "in"

# Graph statistics of the reference labelled Ponzi dataset.
REFERENCE_COUNTS = {
    "nodes": 57_130,
    "edges": 156_255,
    "ca": 4_616,
    "eoa": 52_514,
    "call": 69_653,
    "trans": 86_602,
    "labels": 191,
}


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _csr(n: int, keys: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(keys, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(keys, minlength=n), out=indptr[1:])
    return _frozen(indptr), _frozen(values[order].astype(np.int64))


def _unique_csr(n: int, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """CSR of distinct ``b`` per ``a``, each row sorted ascending."""
    if len(a) == 0:
        return _frozen(np.zeros(n + 1, dtype=np.int64)), _frozen(np.zeros(0, dtype=np.int64))
    pairs = np.unique(a.astype(np.int64) * n + b.astype(np.int64))
    rows, cols = pairs // n, pairs % n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return _frozen(indptr), _frozen(cols)


class _TransGraph:
    """Shared machinery: node index plus TRANS-edge incidence and adjacency."""

    def __init__(self, ids: tuple[str, ...], trans_edges: tuple[Edge, ...]):
        self.ids = ids
        self.index = {a: i for i, a in enumerate(ids)}
        self.trans_edges = trans_edges
        n = len(ids)
        src = np.fromiter((self.index[e.src] for e in trans_edges), dtype=np.int64, count=len(trans_edges))
        dst = np.fromiter((self.index[e.dst] for e in trans_edges), dtype=np.int64, count=len(trans_edges))
        self._t_src, self._t_dst = _frozen(src), _frozen(dst)
        # wei amounts overflow int64, keep Python ints
        self.trans_amounts = tuple(e.amount for e in trans_edges)
        self.trans_timestamps = _frozen(
            np.fromiter((e.timestamp for e in trans_edges), dtype=np.int64, count=len(trans_edges))
        )
        eid = np.arange(len(trans_edges), dtype=np.int64)
        self._t_inc = {OUT: _csr(n, src, eid), IN: _csr(n, dst, eid)}
        self._adj = {
            (EdgeType.TRANS, OUT): _unique_csr(n, src, dst),
            (EdgeType.TRANS, IN): _unique_csr(n, dst, src),
        }

    @property
    def n_nodes(self) -> int:
        return len(self.ids)

    def __contains__(self, v: str) -> bool:
        return v in self.index

    def node_index(self, v: str) -> int:
        try:
            return self.index[v]
        except KeyError:
            raise UnknownAccount(v) from None

    def trans_incidence(self, i: int, direction: str) -> np.ndarray:
        """Edge ids (into ``trans_edges``) of TRANS edges leaving/entering node ``i``."""
        indptr, eids = self._t_inc[direction]
        return eids[indptr[i] : indptr[i + 1]]

    def neighbor_index(self, i: int, etype: EdgeType = EdgeType.TRANS, direction: str = OUT) -> np.ndarray:
        indptr, cols = self._adj[(EdgeType(etype), direction)]
        return cols[indptr[i] : indptr[i + 1]]

    def neighbors(self, v: str, etype: EdgeType = EdgeType.TRANS, direction: str = OUT) -> list[str]:
        return [self.ids[j] for j in self.neighbor_index(self.node_index(v), etype, direction)]


class HetGraph(_TransGraph):
    """Typed multigraph over EOA/CA accounts with TRANS and CALL edges.

    Treat instances as immutable; use :func:`build_het_graph` to construct.
    """

    def __init__(self, accounts: dict[str, Kind], edges: tuple[Edge, ...], labels: dict[str, Label]):
        ids = tuple(sorted(accounts))
        self.edges = edges
        self.labels = dict(labels)
        trans = tuple(e for e in edges if e.etype is EdgeType.TRANS)
        calls = tuple(e for e in edges if e.etype is EdgeType.CALL)
        super().__init__(ids, trans)
        self.call_edges = calls
        self.is_ca = _frozen(np.array([accounts[a] is Kind.CA for a in ids], dtype=bool))
        n = len(ids)
        c_src = np.fromiter((self.index[e.src] for e in calls), dtype=np.int64, count=len(calls))
        c_dst = np.fromiter((self.index[e.dst] for e in calls), dtype=np.int64, count=len(calls))
        self._adj[(EdgeType.CALL, OUT)] = _unique_csr(n, c_src, c_dst)
        self._adj[(EdgeType.CALL, IN)] = _unique_csr(n, c_dst, c_src)

    def kind(self, v: str) -> Kind:
        return Kind.CA if self.is_ca[self.node_index(v)] else Kind.EOA

    def kind_of_index(self, i: int) -> Kind:
        return Kind.CA if self.is_ca[i] else Kind.EOA

    def accounts(self) -> list[tuple[str, Kind]]:
        return [(a, self.kind_of_index(i)) for i, a in enumerate(self.ids)]

    def nodes_of_kind(self, kind: Kind) -> list[str]:
        want = Kind(kind) is Kind.CA
        return [a for a, ca in zip(self.ids, self.is_ca) if ca == want]

    def ponzi(self) -> list[str]:
        return sorted(a for a, lab in self.labels.items() if lab is Label.PONZI)

    def counts(self) -> dict[str, int]:
        n_ca = int(self.is_ca.sum())
        return {
            "nodes": self.n_nodes,
            "edges": len(self.edges),
            "ca": n_ca,
            "eoa": self.n_nodes - n_ca,
            "call": len(self.call_edges),
            "trans": len(self.trans_edges),
            "labels": sum(1 for lab in self.labels.values() if lab is Label.PONZI),
        }

    def adjacency_signature(self) -> dict:
        """Id-keyed multiset adjacency, for isomorphism checks."""
        sig: dict[str, Counter] = {a: Counter() for a in self.ids}
        for e in self.edges:
            sig[e.src][(e.dst, e.etype.value, e.amount, e.timestamp)] += 1
        return {"kinds": dict(self.accounts()), "out": sig}


class HomGraph(_TransGraph):
    """Type-erased projection: same node set, TRANS edges only."""

    def __init__(self, het: HetGraph):
        super().__init__(het.ids, het.trans_edges)
        self.labels = dict(het.labels)

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.trans_edges

    def counts(self) -> dict[str, int]:
        return {"nodes": self.n_nodes, "edges": len(self.trans_edges)}


def build_het_graph(
    accounts: Iterable[tuple[str, Kind]],
    edges: Iterable[Edge],
    labels: dict[str, Label] | None = None,
    lenient: bool = False,
) -> HetGraph:
    """Validate records and build the heterogeneous graph.

    Every edge endpoint must be a known account and every CALL edge must land
    on a CA. With ``lenient=True`` call-into-EOA edges are dropped (and counted
    in ``graph.dropped_calls``) instead of raising.
    """
    kinds = {}
    for addr, kind in accounts:
        kinds[addr] = Kind(kind)
    kept = []
    dropped = 0
    for e in edges:
        for end in (e.src, e.dst):
            if end not in kinds:
                raise DanglingEndpoint(e, end)
        if e.etype is EdgeType.CALL and kinds[e.dst] is not Kind.CA:
            if not lenient:
                raise CallIntoEOA(e)
            dropped += 1
            continue
        kept.append(e)
    labels = dict(labels or {})
    for addr, lab in labels.items():
        if addr not in kinds:
            raise UnknownAccount(addr)
        if lab is Label.PONZI and kinds[addr] is not Kind.CA:
            raise LabelKindError(f"ponzi label on non-contract account {addr}")
    g = HetGraph(kinds, tuple(kept), labels)
    g.dropped_calls = dropped
    return g


def project_hom_graph(het: HetGraph) -> HomGraph:
    return HomGraph(het)


def sample_negatives(het: HetGraph, labels: dict[str, Label] | None = None, seed: int = 0) -> list[str]:
    """Draw as many non-Ponzi CA as there are Ponzi labels, uniformly without replacement.

    Returned sorted by address.
    """
    labels = het.labels if labels is None else labels
    ponzi = {a for a, lab in labels.items() if lab is Label.PONZI}
    candidates = [a for a in het.nodes_of_kind(Kind.CA) if a not in ponzi]
    if len(candidates) < len(ponzi):
        raise InsufficientCandidates(
            f"{len(candidates)} non-ponzi contract accounts for {len(ponzi)} ponzi labels"
        )
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(candidates), size=len(ponzi), replace=False)
    return sorted(candidates[i] for i in picks)


def check_counts(het: HetGraph, expected: dict[str, int] = REFERENCE_COUNTS) -> list[str]:
    """Compare graph statistics with ``expected``; returns human-readable mismatches."""
    got = het.counts()
    return [f"{k}: expected {v}, got {got[k]}" for k, v in expected.items() if got.get(k) != v]
