"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines appear in the normal output) or directly with
``python tests/test_acceptance.py`` for a bare report.

Reproduction mode uses the directory named by ``HFAUG_REFERENCE_DATA`` when set
(``accounts.csv``, ``edges.csv``, ``labels.csv``); otherwise it builds a
synthetic stand-in with exactly the reference dataset's graph statistics.
"""

from __future__ import annotations

import itertools
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, str(Path(__file__).parent))

from hfaug.augment import AugmentationConfig, augment_matrix, augment_node  # noqa: E402
from hfaug.embed import WalkConfig, generate_walks  # noqa: E402
from hfaug.features import gini  # noqa: E402
from hfaug.graph import REFERENCE_COUNTS, build_het_graph, project_hom_graph  # noqa: E402
from hfaug.matrix import FeatureMatrix  # noqa: E402
from hfaug.metapath import P1, P2, MatchLimits, match_from  # noqa: E402
from hfaug.mlkit import ModelKind, loss_and_grad, micro_f1  # noqa: E402
from hfaug.pipeline import PipelineConfig, run_pipeline  # noqa: E402
from hfaug.records import Edge, EdgeType, Kind, write_dataset  # noqa: E402
from hfaug.synth import SyntheticSpec, generate_synthetic, pad_to_counts  # noqa: E402
from oracles import gini_pairs, oracle_augment, oracle_instances, random_het  # noqa: E402

UNLIMITED = MatchLimits(10**9)
CRITERIA = {}


def criterion(name):
    def register(fn):
        CRITERIA[name] = fn
        return fn

    return register


# -- property criteria ---------------------------------------------------------

@criterion("metapath oracle equivalence")
def metapath_oracle():
    rng = np.random.default_rng(20240501)
    t0 = time.perf_counter()
    checked = mismatches = 0
    for _ in range(200):
        n = int(rng.integers(2, 51))
        accounts, edges = random_het(rng, n, int(rng.integers(n, 4 * n + 1)))
        g = build_het_graph(accounts, edges)
        for p in (P1, P2):
            for v in g.nodes_of_kind(p.head_kind):
                got = {(m.nodes, m.complete, m.offset) for m in match_from(g, v, p, UNLIMITED)}
                mismatches += got != oracle_instances(accounts, edges, p, v, 0)
                checked += 1
    elapsed = time.perf_counter() - t0
    return mismatches == 0 and elapsed < 60, f"{checked} start nodes, {mismatches} mismatches, {elapsed:.1f}s"


@criterion("hfaug oracle equivalence")
def hfaug_oracle():
    rng = np.random.default_rng(7)
    worst, nodes = 0.0, 0
    for i in range(100):
        n = int(rng.integers(2, 31))
        accounts, edges = random_het(rng, n, 4 * n)
        g = build_het_graph(accounts, edges)
        fm = FeatureMatrix(list(g.ids), rng.normal(size=(n, 4)))
        feats = {a: fm.row(a) for a in fm.ids}
        agg = "sum" if i % 2 == 0 else "mean"
        for mode, dedupe in itertools.product(("target-ca", "head-node"), (True, False)):
            cfg = AugmentationConfig(mode, (P1, P2), UNLIMITED, dedupe, agg)
            targets = g.nodes_of_kind(Kind.CA) if mode == "target-ca" else list(g.ids)
            for v in targets:
                got = augment_node(g, fm, v, cfg)
                want = oracle_augment(accounts, edges, feats, v, (P1, P2), mode, dedupe, agg)
                worst = max(worst, float(np.max(np.abs(got - want))))
                nodes += 1
    return worst <= 1e-9, f"{nodes} node checks, max abs error {worst:.2e}"


@criterion("no-match fixpoint")
def no_match_fixpoint():
    rng = np.random.default_rng(11)
    unmatched = broken = 0
    for _ in range(100):
        n = int(rng.integers(2, 31))
        accounts, edges = random_het(rng, n, 2 * n)
        g = build_het_graph(accounts, edges)
        fm = FeatureMatrix(list(g.ids), rng.integers(-10**6, 10**6, size=(n, 5)).astype(float))
        for mode, dedupe, agg in itertools.product(("target-ca", "head-node"), (True, False), ("sum", "mean")):
            targets = g.nodes_of_kind(Kind.CA) if mode == "target-ca" else list(g.ids)
            out, report = augment_matrix(g, fm, targets, AugmentationConfig(mode, (P1, P2), dedupe=dedupe, agg=agg))
            for d in report.nodes:
                if not d.matched:
                    unmatched += 1
                    broken += out.row(d.node).tobytes() != fm.row(d.node).tobytes()
    return unmatched > 0 and broken == 0, f"{unmatched} unmatched nodes, {broken} changed"


@criterion("gini correctness")
def gini_correctness():
    rng = np.random.default_rng(3)
    worst, invariance_ok = 0.0, True
    for i in range(1000):
        size = int(rng.integers(0, 40))
        if i % 2:
            xs = [int(x) for x in rng.integers(0, 10**18, size=size)]
        else:
            xs = list(rng.exponential(5.0, size=size))
        worst = max(worst, abs(gini(xs) - gini_pairs(xs)))
        if size:
            c = float(rng.uniform(0.01, 100.0))
            perm = [xs[j] for j in rng.permutation(size)]
            invariance_ok &= abs(gini([c * float(x) for x in xs]) - gini(xs)) <= 1e-12
            invariance_ok &= gini(perm) == pytest.approx(gini(xs), abs=1e-15)
    ok = worst <= 1e-12 and gini([1, 3]) == 0.25 and invariance_ok
    return ok, f"max oracle error {worst:.1e}, gini([1,3])={gini([1, 3])}, invariances {'hold' if invariance_ok else 'FAIL'}"


@criterion("micro-F1 equals accuracy")
def micro_f1_accuracy():
    cases = bad = 0
    for n in range(1, 7):
        for pred in itertools.product((0, 1), repeat=n):
            for truth in itertools.product((0, 1), repeat=n):
                acc = sum(a == b for a, b in zip(pred, truth)) / n
                bad += abs(micro_f1(pred, truth) - acc) > 1e-15
                cases += 1
    return bad == 0, f"{cases} vector pairs, {bad} disagreements"


@criterion("classifier gradient check")
def gradient_check():
    rng = np.random.default_rng(5)
    worst, h = 0.0, 1e-6
    for _ in range(50):
        n, d = int(rng.integers(5, 30)), int(rng.integers(1, 8))
        X, y = rng.normal(size=(n, d)), rng.integers(0, 2, n)
        w, b, l2 = rng.normal(size=d), float(rng.normal()), float(rng.uniform(0, 0.5))
        for kind in ModelKind:
            _, gw, gb = loss_and_grad(w, b, X, y, kind, l2)
            theta = np.append(w, b)
            num = np.empty(d + 1)
            for j in range(d + 1):
                e = np.zeros(d + 1)
                e[j] = h
                plus, minus = theta + e, theta - e
                num[j] = (loss_and_grad(plus[:d], plus[d], X, y, kind, l2)[0]
                          - loss_and_grad(minus[:d], minus[d], X, y, kind, l2)[0]) / (2 * h)
            ana = np.append(gw, gb)
            rel = np.linalg.norm(ana - num) / max(np.linalg.norm(ana), np.linalg.norm(num), 1e-12)
            worst = max(worst, float(rel))
    return worst < 1e-5, f"100 checks (50 instances x 2 losses), max relative error {worst:.1e}"


@criterion("node2vec degeneracy")
def node2vec_degeneracy():
    rng = np.random.default_rng(2024)
    pairs = {(i, (i + 1) % 10) for i in range(10)} | {((i + 1) % 10, i) for i in range(10)}
    while len(pairs) < 40:
        a, b = rng.choice(10, 2, replace=False)
        pairs.add((int(a), int(b)))
    names = [f"n{i}" for i in range(10)]
    het = build_het_graph([(a, Kind.EOA) for a in names],
                          [Edge(names[a], names[b], EdgeType.TRANS, 1, 1) for a, b in sorted(pairs)])
    g = project_hom_graph(het)
    walks = generate_walks(g, WalkConfig(100, 101, "node2vec", 1.0, 1.0, seed=1))
    counts = {}
    for w in walks:
        for a, b in zip(w, w[1:]):
            counts[(a, b)] = counts.get((a, b), 0) + 1
    stat, dof, steps = 0.0, 0, 0
    for a in g.ids:
        obs = np.array([counts.get((a, b), 0) for b in g.neighbors(a)], dtype=float)
        exp = obs.sum() / len(obs)
        stat += float(((obs - exp) ** 2 / exp).sum())
        dof += len(obs) - 1
        steps += int(obs.sum())
    pval = float(stats.chi2.sf(stat, dof))
    return steps >= 100_000 and pval > 0.01, f"{steps} steps, chi2={stat:.1f} on {dof} dof, p={pval:.3f}"


# -- end-to-end criteria -------------------------------------------------------

def _write_config(root: Path, out: str, **over) -> PipelineConfig:
    d = {
        "version": 1,
        "seed": 0,
        "output_dir": out,
        "data": {"accounts": "accounts.csv", "edges": "edges.csv", "labels": "labels.csv"},
        "features": {"source": "manual"},
        "augment": {"mode": "target-ca", "patterns": ["P2"]},
        "evaluate": {"models": ["lr"], "k": 5, "repeats": 10},
    }
    d.update(over)
    path = root / f"{out}.json"
    path.write_text(json.dumps(d), encoding="utf-8")
    return PipelineConfig.load(path)


@criterion("synthetic directional check")
def synthetic_directional():
    t0 = time.perf_counter()
    rows = []
    with tempfile.TemporaryDirectory() as tmp:
        for seed in range(5):
            root = Path(tmp) / f"s{seed}"
            spec = SyntheticSpec(n_ponzi=50, n_background=500, investors_per_ponzi=8,
                                 payback_fraction=0.6, noise_edges=2000, seed=seed)
            data = generate_synthetic(spec)
            write_dataset(root, data.accounts, data.edges, data.labels)
            summary = run_pipeline(_write_config(root, "out", seed=seed))
            g = summary["gain"]["lr"]
            rows.append((g["raw"], g["aug"]))
    elapsed = time.perf_counter() - t0
    wins = sum(aug > raw for raw, aug in rows)
    detail = ", ".join(f"{100 * r:.1f}->{100 * a:.1f}" for r, a in rows)
    return wins >= 4 and elapsed < 300, f"{wins}/5 seeds improve (LR raw->aug: {detail}), {elapsed:.1f}s"


def _reference_standin(root: Path) -> None:
    spec = SyntheticSpec(n_ponzi=REFERENCE_COUNTS["labels"], n_background=18_000, investors_per_ponzi=8,
                         payback_fraction=0.6, noise_edges=10_000, seed=0)
    data = pad_to_counts(generate_synthetic(spec), REFERENCE_COUNTS, seed=0)
    write_dataset(root, data.accounts, data.edges, data.labels)


@criterion("reproduction mode")
def reproduction_mode():
    with tempfile.TemporaryDirectory() as tmp:
        real = os.environ.get("HFAUG_REFERENCE_DATA")
        root = Path(real) if real else Path(tmp)
        if not real:
            _reference_standin(root)
        out = Path(tmp) / "repro"
        cfg = _write_config(Path(tmp), "repro_cfg", output_dir=str(out), expect_counts="reference",
                            evaluate={"models": ["lr", "svm"], "k": 5, "repeats": 10})
        cfg.data.accounts, cfg.data.edges, cfg.data.labels = (
            str(root / "accounts.csv"), str(root / "edges.csv"), str(root / "labels.csv"))
        summary = run_pipeline(cfg)
        graph = json.loads((out / "graph_stats.json").read_text())
        table = (out / "gain.md").read_text()
    ok = not graph["count_mismatches"] and set(summary["gain"]) == {"lr", "svm"} and "| gain |" in table
    gains = ", ".join(f"{m.upper()} {v['gain_pct']:+.2f}%" for m, v in summary["gain"].items())
    source = "user data" if real else "synthetic stand-in"
    return ok, f"{source}: counts validated ({graph['het']['nodes']} nodes), gains {gains}"


@criterion("pipeline determinism")
def pipeline_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        data = generate_synthetic(SyntheticSpec(n_ponzi=15, n_background=200, seed=9))
        write_dataset(root, data.accounts, data.edges, data.labels)
        embed = {"source": "node2vec", "walk": {"walks_per_node": 2, "walk_length": 12, "p": 0.5, "q": 2.0},
                 "skipgram": {"dim": 16, "window": 4, "epochs": 2}}
        compared, differ = 0, []
        for label, features in (("manual", {"source": "manual"}), ("node2vec", embed)):
            for run in ("a", "b"):
                run_pipeline(_write_config(root, f"{label}_{run}", seed=123, features=features,
                                           evaluate={"models": ["lr", "svm"], "k": 5, "repeats": 3}))
            for f in sorted((root / f"{label}_a").iterdir()):
                if f.suffix in (".csv", ".json"):
                    compared += 1
                    if f.read_bytes() != (root / f"{label}_b" / f.name).read_bytes():
                        differ.append(f"{label}/{f.name}")
    return not differ, f"{compared} artifacts compared, {len(differ)} differ {differ if differ else ''}".rstrip()


# -- runners -------------------------------------------------------------------

def _line(name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"


@pytest.mark.parametrize("name", list(CRITERIA))
def test_acceptance(name, capsys):
    ok, detail = CRITERIA[name]()
    with capsys.disabled():
        print("\n" + _line(name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for name, fn in CRITERIA.items():
        ok, detail = fn()
        failed += not ok
        print(_line(name, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
