"""End-to-end run: ingest -> features -> augment -> evaluate -> report.

A run is described by one JSON document::

    {
      "version": 1,
      "seed": 0,
      "output_dir": "out",
      "data": {"accounts": "accounts.csv", "edges": "edges.csv", "labels": "labels.csv"},
      "features": {"source": "manual"},
      "augment": {"mode": "target-ca", "patterns": ["P2"]},
      "evaluate": {"models": ["lr", "svm"], "k": 5, "repeats": 10}
    }

Relative paths resolve against the config file's directory. Every stage seed
is derived from ``seed`` and the stage name.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .augment import AugmentationConfig, augment_matrix
from .embed import SkipGramConfig, WalkConfig, embed_graph, grid_pq
from .errors import HFAugError
from .features import feature_matrix
from .graph import REFERENCE_COUNTS, build_het_graph, check_counts, project_hom_graph, sample_negatives
from .metapath import MatchLimits
from .mlkit import CVReport, Dataset, Hyper, cross_validate, gain
from .records import Label, parse_records, write_labels

log = logging.getLogger(__name__)

CONFIG_VERSION = 1


def derive_seed(seed: int, stage: str) -> int:
    digest = hashlib.sha256(f"{seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:4], "little")


class PipelineError(HFAugError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


@dataclass
class DataPaths:
    accounts: str
    edges: str
    labels: str
    format: str = "csv"
    lenient: bool = False


@dataclass
class FeatureStage:
    source: str = "manual"
    walk: dict = field(default_factory=dict)
    skipgram: dict = field(default_factory=dict)
    grid_pq: bool = False
    normalize: bool = False


@dataclass
class AugmentStage:
    mode: str = "target-ca"
    patterns: list = field(default_factory=lambda: ["P2"])
    max_instances: int = 1000
    dedupe: bool = True
    agg: str = "sum"

    def config(self) -> AugmentationConfig:
        return AugmentationConfig(self.mode, tuple(self.patterns), MatchLimits(self.max_instances),
                                  self.dedupe, self.agg)


@dataclass
class EvaluateStage:
    models: list = field(default_factory=lambda: ["lr", "svm"])
    k: int = 5
    repeats: int = 10
    standardize: bool = True
    l2: float = 1e-4
    epochs: int = 200
    learning_rate: float = 0.1


@dataclass
class PipelineConfig:
    data: DataPaths
    output_dir: str = "out"
    seed: int = 0
    version: int = CONFIG_VERSION
    features: FeatureStage = field(default_factory=FeatureStage)
    augment: AugmentStage = field(default_factory=AugmentStage)
    evaluate: EvaluateStage = field(default_factory=EvaluateStage)
    expect_counts: dict | None = None

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "PipelineConfig":
        d = dict(d)
        version = d.get("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ValueError(f"unsupported config version {version}")
        base = base or Path(".")

        def resolve(p):
            return str(p if Path(p).is_absolute() else base / p)

        data = dict(d.pop("data"))
        for key in ("accounts", "edges", "labels"):
            data[key] = resolve(data[key])
        expect = d.pop("expect_counts", None)
        if expect == "reference":
            expect = dict(REFERENCE_COUNTS)
        return cls(
            data=DataPaths(**data),
            output_dir=resolve(d.pop("output_dir", "out")),
            seed=int(d.pop("seed", 0)),
            version=version,
            features=FeatureStage(**d.pop("features", {})),
            augment=AugmentStage(**d.pop("augment", {})),
            evaluate=EvaluateStage(**d.pop("evaluate", {})),
            expect_counts=expect,
        )

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), path.parent)

    def to_dict(self) -> dict:
        return asdict(self)


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def gain_table(raw: dict[str, CVReport], aug: dict[str, CVReport], label: str) -> str:
    lines = [
        f"| {label} | " + " | ".join(m.upper() for m in raw) + " |",
        "|---|" + "---|" * len(raw),
        "| raw | " + " | ".join(f"{100 * raw[m].mean:.2f}" for m in raw) + " |",
        "| raw + HFAug | " + " | ".join(f"{100 * aug[m].mean:.2f}" for m in raw) + " |",
        "| gain | " + " | ".join(f"{gain(raw[m].mean, aug[m].mean):+.2f}%" for m in raw) + " |",
    ]
    return "\n".join(lines) + "\n"


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run all stages, writing artifacts to ``cfg.output_dir``; returns a summary dict."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"artifacts": []}

    def artifact(name):
        summary["artifacts"].append(name)
        return out / name

    with _Stage("ingest"):
        d = cfg.data
        rec = parse_records(d.accounts, d.edges, d.labels, fmt=d.format, lenient=d.lenient)
        het = build_het_graph(rec.accounts, rec.edges, rec.labels, lenient=d.lenient)
        hom = project_hom_graph(het)
        mismatches = check_counts(het, cfg.expect_counts) if cfg.expect_counts else []
        stats = {
            "het": het.counts(),
            "hom": hom.counts(),
            "skipped_rows": len(rec.skipped),
            "dropped_calls": het.dropped_calls,
            "expected_counts": cfg.expect_counts,
            "count_mismatches": mismatches,
        }
        _dump_json(artifact("graph_stats.json"), stats)
        if mismatches:
            raise ValueError("graph statistics differ from expected counts: " + "; ".join(mismatches))
        summary["graph"] = stats

    with _Stage("sample"):
        ponzi = het.ponzi()
        negatives = sample_negatives(het, seed=derive_seed(cfg.seed, "negatives"))
        ids = ponzi + negatives
        labels = {a: Label.PONZI for a in ponzi}
        labels.update({a: Label.NON_PONZI for a in negatives})
        with open(artifact("dataset_labels.csv"), "w", encoding="utf-8", newline="") as fh:
            write_labels(fh, labels)

    ev = cfg.evaluate
    hyper = Hyper(ev.l2, ev.epochs, ev.learning_rate, derive_seed(cfg.seed, "fit"))
    cv_seed = derive_seed(cfg.seed, "cv")

    def evaluate(fm, model):
        ds = Dataset.from_matrix(fm, labels, ids)
        return cross_validate(ds, model, hyper, ev.k, ev.repeats, cv_seed, ev.standardize)

    with _Stage("features"):
        fs = cfg.features
        source = fs.source.lower()
        if source == "manual":
            feats = feature_matrix(het)
        elif source in ("deepwalk", "node2vec"):
            walk = WalkConfig(**{**fs.walk, "strategy": source, "seed": derive_seed(cfg.seed, "walks")})
            sg = SkipGramConfig(**{**fs.skipgram, "seed": derive_seed(cfg.seed, "skipgram")})
            if source == "node2vec" and fs.grid_pq:
                (walk.p, walk.q), table = grid_pq(
                    hom, ids, None, walk, sg,
                    lambda fm, _: evaluate(fm, ev.models[0]).mean,
                )
                _dump_json(artifact("grid_pq.json"), {"best": [walk.p, walk.q], "table": table})
            feats, emb_diag = embed_graph(hom, walk, sg, fs.normalize)
            _dump_json(artifact("embed_diagnostics.json"),
                       {"n_walks": emb_diag["n_walks"], "missing": emb_diag["missing"],
                        "loss_history": emb_diag["loss_history"], "p": walk.p, "q": walk.q})
        else:
            raise ValueError(f"unknown feature source {fs.source!r}")
        feats.select(ids).to_csv(artifact("features_raw.csv"))

    with _Stage("augment"):
        aug_feats, report = augment_matrix(het, feats, ids, cfg.augment.config())
        aug_feats.select(ids).to_csv(artifact("features_aug.csv"))
        _dump_json(artifact("augment_diagnostics.json"), report.to_json())

    with _Stage("evaluate"):
        raw_reports, aug_reports = {}, {}
        for model in ev.models:
            raw_reports[model] = evaluate(feats, model)
            aug_reports[model] = evaluate(aug_feats, model)
            artifact(f"cv_raw_{model}.json").write_text(raw_reports[model].dumps(), encoding="utf-8")
            artifact(f"cv_aug_{model}.json").write_text(aug_reports[model].dumps(), encoding="utf-8")

    with _Stage("report"):
        patterns = ",".join(p.name for p in cfg.augment.config().patterns)
        table = gain_table(raw_reports, aug_reports, f"{fs.source} / {patterns}")
        artifact("gain.md").write_text(table, encoding="utf-8")
        gains = {
            m: {
                "raw": raw_reports[m].mean,
                "aug": aug_reports[m].mean,
                "gain_pct": gain(raw_reports[m].mean, aug_reports[m].mean),
            }
            for m in ev.models
        }
        _dump_json(artifact("gain.json"), gains)
        summary["gain"] = gains
        summary["table"] = table
    return summary
