"""Heterogeneous feature augmentation.

A node's feature vector is replaced by the sum of the feature vectors of the
nodes on its matched metapath instances:

* ``TARGET_CA``: a contract account is located at each pattern's target
  position (``CA_t``) and matched in both directions.
* ``HEAD_NODE``: a node is the head of every pattern whose head kind equals
  its own kind (P1 for CA, P2 for EOA).

When a pattern has no complete instance the maximal partial ones are used.
The node's own vector is always part of the sum, so a node without any
instance keeps its input vector unchanged.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .errors import KindIncompatible
from .graph import HetGraph
from .matrix import FeatureMatrix
from .metapath import Matcher, MatchLimits, MetapathPattern, P1, P2, resolve_patterns
from .records import Kind


class Mode(str, Enum):
    TARGET_CA = "target-ca"
    HEAD_NODE = "head-node"


class Aggregator(str, Enum):
    SUM = "sum"
    MEAN = "mean"


@dataclass
class AugmentationConfig:
    mode: Mode = Mode.TARGET_CA
    patterns: tuple[MetapathPattern, ...] = (P1, P2)
    limits: MatchLimits = field(default_factory=MatchLimits)
    dedupe: bool = True
    agg: Aggregator = Aggregator.SUM

    def __post_init__(self):
        self.mode = Mode(self.mode)
        self.agg = Aggregator(self.agg)
        self.patterns = tuple(resolve_patterns(self.patterns))
        if not self.patterns:
            raise ValueError("at least one metapath pattern is required")
        if self.mode is Mode.TARGET_CA:
            for p in self.patterns:
                if p.kinds[p.target_pos] is not Kind.CA:
                    raise KindIncompatible(f"pattern {p.name} has no CA at its target position")


@dataclass
class NodeDiagnostics:
    node: str
    n_complete: int = 0
    n_partial: int = 0
    overflow: int = 0
    missing_features: int = 0
    n_terms: int = 1

    @property
    def truncated(self) -> bool:
        return self.overflow > 0

    @property
    def matched(self) -> bool:
        return self.n_terms > 1


@dataclass
class AugmentReport:
    nodes: list[NodeDiagnostics] = field(default_factory=list)

    def to_json(self) -> dict:
        rows = [dict(asdict(d), truncated=d.truncated) for d in self.nodes]
        return {
            "n_targets": len(rows),
            "n_matched": sum(1 for d in self.nodes if d.matched),
            "n_truncated": sum(1 for d in self.nodes if d.truncated),
            "missing_features": sum(d.missing_features for d in self.nodes),
            "nodes": rows,
        }


class Augmenter:
    """Reusable augmentation over a fixed graph and original feature matrix."""

    def __init__(self, g: HetGraph, feats: FeatureMatrix, cfg: AugmentationConfig):
        self.g = g
        self.feats = feats
        self.cfg = cfg
        self._matchers = {p: Matcher(g, p) for p in cfg.patterns}

    def _jobs(self, v: str, i: int):
        """(pattern, anchor position) pairs that apply to node ``v``."""
        kind = self.g.kind_of_index(i)
        if self.cfg.mode is Mode.TARGET_CA:
            if kind is not Kind.CA:
                raise KindIncompatible(f"target-ca augmentation needs a CA, {v} is {kind.value}")
            return [(p, p.target_pos) for p in self.cfg.patterns]
        return [(p, 0) for p in self.cfg.patterns if p.head_kind is kind]

    def terms(self, v: str) -> tuple[dict[int, int], NodeDiagnostics]:
        """Multiplicity of every node index in the aggregation for ``v``."""
        i = self.g.node_index(v)
        self.feats.position(v)
        diag = NodeDiagnostics(v)
        weights = {i: 1}
        for p, anchor in self._jobs(v, i):
            m = self._matchers[p]
            raw, total = m.anchored(i, anchor, self.cfg.limits.max_instances)
            diag.overflow += total - len(raw)
            for walk, complete, offset in raw:
                if len(walk) < 2:
                    continue
                if complete:
                    diag.n_complete += 1
                else:
                    diag.n_partial += 1
                for pos, j in enumerate(walk):
                    if self.cfg.dedupe:
                        weights.setdefault(j, 1)
                    elif pos + offset != anchor:
                        weights[j] = weights.get(j, 0) + 1
        diag.n_terms = sum(weights.values())
        return weights, diag

    def node(self, v: str) -> tuple[np.ndarray, NodeDiagnostics]:
        weights, diag = self.terms(v)
        own = self.feats.row(v)
        if len(weights) == 1 and diag.n_terms == 1:
            return own.copy(), diag
        acc = np.zeros_like(own)
        ids = self.g.ids
        for j in sorted(weights):
            a = ids[j]
            if a not in self.feats:
                diag.missing_features += 1
                continue
            w = weights[j]
            acc += self.feats.row(a) if w == 1 else w * self.feats.row(a)
        if self.cfg.agg is Aggregator.MEAN:
            acc /= diag.n_terms
        return acc, diag


def augment_node(g: HetGraph, feats: FeatureMatrix, v: str, cfg: AugmentationConfig) -> np.ndarray:
    vec, _ = Augmenter(g, feats, cfg).node(v)
    return vec


def augment_matrix(
    g: HetGraph, feats: FeatureMatrix, targets, cfg: AugmentationConfig
) -> tuple[FeatureMatrix, AugmentReport]:
    """Augment the rows of ``targets``; every update reads the original ``feats``."""
    aug = Augmenter(g, feats, cfg)
    out = feats.copy()
    report = AugmentReport()
    done: dict[str, np.ndarray] = {}
    for v in targets:
        if v not in done:
            vec, diag = aug.node(v)
            done[v] = vec
            report.nodes.append(diag)
    for r, a in enumerate(out.ids):
        if a in done:
            out.values[r] = done[a]
    return out, report
