"""Metapath-based heterogeneous feature augmentation for Ponzi detection on Ethereum graphs."""

__version__ = "0.1.0"

from .augment import AugmentationConfig, Mode, augment_matrix, augment_node
from .features import account_features, feature_matrix, gini
from .graph import HetGraph, HomGraph, build_het_graph, project_hom_graph, sample_negatives
from .matrix import FeatureMatrix
from .metapath import P1, P2, MatchLimits, compile_pattern, match_anchored, match_from
from .records import Edge, EdgeType, Kind, Label, parse_records

__all__ = [
    "AugmentationConfig",
    "Edge",
    "EdgeType",
    "FeatureMatrix",
    "HetGraph",
    "HomGraph",
    "Kind",
    "Label",
    "MatchLimits",
    "Mode",
    "P1",
    "P2",
    "account_features",
    "augment_matrix",
    "augment_node",
    "build_het_graph",
    "compile_pattern",
    "feature_matrix",
    "gini",
    "match_anchored",
    "match_from",
    "parse_records",
    "project_hom_graph",
    "sample_negatives",
]
