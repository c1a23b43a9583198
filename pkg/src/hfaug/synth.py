"""Seeded synthetic Ponzi datasets.

Planted schemes follow the behaviour pattern

    EOA_investor -call-> CA_t -trans-> EOA_2 -trans-> CA_2

Investors call and pay into the scheme; the scheme pays its creator (who
moves funds on to another contract) and, with probability
``payback_fraction``, pays each investor back, who then reinvests elsewhere.

Background contracts draw their transaction counts and amounts from the same
distributions, so manual features of a single contract carry little signal;
the difference lives in who the counterparties are and what they do next.
Their payouts go to "sink" EOAs (exchange-like accounts that never pay into
contracts).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .records import Edge, EdgeType, Kind, Label

WEI = 10**18
T0 = 1_600_000_000
SPAN = 365 * 24 * 3600


@dataclass
class SyntheticSpec:
    n_ponzi: int = 10
    n_background: int = 200
    investors_per_ponzi: int = 5
    payback_fraction: float = 0.5
    noise_edges: int = 200
    seed: int = 0
    ca_fraction: float = 0.2

    def __post_init__(self):
        for name in ("n_ponzi", "n_background", "investors_per_ponzi", "noise_edges"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.payback_fraction <= 1.0:
            raise ValueError("payback_fraction must lie in [0, 1]")


@dataclass
class SyntheticData:
    accounts: list[tuple[str, Kind]]
    edges: list[Edge]
    labels: dict[str, Label]
    planted: dict[str, list[str]]


def _amount(rng) -> int:
    # lognormal around ~1 ETH, in wei
    return int(rng.lognormal(0.0, 1.0) * WEI)


def _ts(rng) -> int:
    return T0 + int(rng.integers(0, SPAN))


def generate_synthetic(spec: SyntheticSpec) -> SyntheticData:
    rng = np.random.default_rng(spec.seed)
    n_bg_ca = max(int(round(spec.n_background * spec.ca_fraction)), 0)
    n_bg_eoa = spec.n_background - n_bg_ca
    n_users = n_bg_eoa // 2
    width = 6
    ponzi = [f"0xp{i:0{width}d}" for i in range(spec.n_ponzi)]
    creators = [f"0xc{i:0{width}d}" for i in range(spec.n_ponzi)]
    bg_ca = [f"0xb{i:0{width}d}" for i in range(n_bg_ca)]
    users = [f"0xu{i:0{width}d}" for i in range(n_users)]
    sinks = [f"0xs{i:0{width}d}" for i in range(n_bg_eoa - n_users)]
    eoas = creators + users + sinks
    cas = ponzi + bg_ca
    accounts = [(a, Kind.CA) for a in cas] + [(a, Kind.EOA) for a in eoas]
    edges: list[Edge] = []
    planted: dict[str, list[str]] = {}
    k = spec.investors_per_ponzi

    def pick(pool, size):
        size = min(size, len(pool))
        return [pool[i] for i in rng.choice(len(pool), size=size, replace=False)] if size else []

    for t, creator in zip(ponzi, creators):
        investors = pick(users, k)
        planted[t] = investors
        edges.append(Edge(creator, t, EdgeType.CALL, 0, _ts(rng)))
        for inv in investors:
            amt = _amount(rng)
            edges.append(Edge(inv, t, EdgeType.CALL, 0, _ts(rng)))
            edges.append(Edge(inv, t, EdgeType.TRANS, amt, _ts(rng)))
            if rng.random() < spec.payback_fraction:
                edges.append(Edge(t, inv, EdgeType.TRANS, _amount(rng), _ts(rng)))
                dest = pick(cas, 1)
                if dest:
                    edges.append(Edge(inv, dest[0], EdgeType.CALL, 0, _ts(rng)))
                    edges.append(Edge(inv, dest[0], EdgeType.TRANS, _amount(rng), _ts(rng)))
        # funds transfer to the creator, who moves them on to another contract
        edges.append(Edge(t, creator, EdgeType.TRANS, _amount(rng), _ts(rng)))
        onward = pick([c for c in cas if c != t], 1) or [t]
        edges.append(Edge(creator, onward[0], EdgeType.TRANS, _amount(rng), _ts(rng)))

    for b in bg_ca:
        n_in = int(rng.poisson(k)) + 1
        for u in pick(users, n_in):
            edges.append(Edge(u, b, EdgeType.CALL, 0, _ts(rng)))
            edges.append(Edge(u, b, EdgeType.TRANS, _amount(rng), _ts(rng)))
        n_out = int(rng.binomial(n_in, spec.payback_fraction)) + 1
        for s in pick(sinks, n_out):
            edges.append(Edge(b, s, EdgeType.TRANS, _amount(rng), _ts(rng)))

    everyone = cas + eoas
    ca_set = set(cas)
    for _ in range(spec.noise_edges):
        src = everyone[int(rng.integers(len(everyone)))]
        dst = everyone[int(rng.integers(len(everyone)))]
        if src == dst:
            continue
        # contracts only call contracts in response; keep calls CA-targeted
        if dst in ca_set and rng.random() < 0.5:
            edges.append(Edge(src, dst, EdgeType.CALL, 0, _ts(rng)))
        else:
            edges.append(Edge(src, dst, EdgeType.TRANS, _amount(rng), _ts(rng)))

    labels = {t: Label.PONZI for t in ponzi}
    labels.update({b: Label.NON_PONZI for b in bg_ca})
    return SyntheticData(accounts, edges, labels, planted)


def pad_to_counts(data: SyntheticData, counts: dict[str, int], seed: int = 0) -> SyntheticData:
    """Top up ``data`` with filler accounts and random edges until its graph
    statistics equal ``counts`` (keys as in ``HetGraph.counts``).

    Used to stand in for a dataset of known shape when the real one is absent.
    Labels and planted motifs are kept; filler CALL edges always land on a CA.
    """
    rng = np.random.default_rng(seed)
    cas = [a for a, k in data.accounts if k is Kind.CA]
    eoas = [a for a, k in data.accounts if k is Kind.EOA]
    n_call = sum(e.etype is EdgeType.CALL for e in data.edges)
    n_trans = len(data.edges) - n_call
    need = {
        "ca": counts["ca"] - len(cas),
        "eoa": counts["eoa"] - len(eoas),
        "call": counts["call"] - n_call,
        "trans": counts["trans"] - n_trans,
    }
    if min(need.values()) < 0:
        raise ValueError(f"synthetic data already exceeds the target counts: {need}")
    n_ponzi = sum(lab is Label.PONZI for lab in data.labels.values())
    if n_ponzi != counts.get("labels", n_ponzi):
        raise ValueError(f"{n_ponzi} ponzi labels, target {counts['labels']}")
    cas = cas + [f"0xfc{i:08d}" for i in range(need["ca"])]
    eoas = eoas + [f"0xfe{i:08d}" for i in range(need["eoa"])]
    everyone = cas + eoas
    edges = list(data.edges)
    src = rng.integers(len(everyone), size=need["call"])
    dst = rng.integers(len(cas), size=need["call"])
    edges += [Edge(everyone[s], cas[d], EdgeType.CALL, 0, _ts(rng)) for s, d in zip(src, dst)]
    src = rng.integers(len(everyone), size=need["trans"])
    dst = rng.integers(len(everyone), size=need["trans"])
    edges += [Edge(everyone[s], everyone[d], EdgeType.TRANS, _amount(rng), _ts(rng)) for s, d in zip(src, dst)]
    accounts = [(a, Kind.CA) for a in cas] + [(a, Kind.EOA) for a in eoas]
    return SyntheticData(accounts, edges, dict(data.labels), data.planted)
