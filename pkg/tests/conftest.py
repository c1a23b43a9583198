import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hfaug.graph import build_het_graph  # noqa: E402
from hfaug.records import Edge, EdgeType, Kind  # noqa: E402

T, C = EdgeType.TRANS, EdgeType.CALL


@pytest.fixture
def toy():
    """EOA1 -call-> CA_t -trans-> EOA2 -trans-> CA2."""
    accounts = [("eoa1", Kind.EOA), ("cat", Kind.CA), ("eoa2", Kind.EOA), ("ca2", Kind.CA)]
    edges = [
        Edge("eoa1", "cat", C, 0, 10),
        Edge("cat", "eoa2", T, 5, 20),
        Edge("eoa2", "ca2", T, 3, 30),
    ]
    return accounts, edges, build_het_graph(accounts, edges)


@pytest.fixture
def star():
    """CA_t calls 3 CAs, each pays 2 EOAs, each EOA calls one CA."""
    accounts = [("cat", Kind.CA)]
    edges = []
    for i in range(3):
        mid = f"mid{i}"
        accounts.append((mid, Kind.CA))
        edges.append(Edge("cat", mid, C))
        for j in range(2):
            e = f"eoa{i}{j}"
            sink = f"sink{i}{j}"
            accounts += [(e, Kind.EOA), (sink, Kind.CA)]
            edges.append(Edge(mid, e, T, 1, 1))
            edges.append(Edge(e, sink, C))
    return accounts, edges, build_het_graph(accounts, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
