"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .augment import AugmentationConfig, augment_matrix
from .embed import SkipGramConfig, WalkConfig, embed_graph, generate_walks
from .errors import DataError, HFAugError
from .features import feature_matrix
from .graph import REFERENCE_COUNTS, build_het_graph, check_counts, project_hom_graph
from .matrix import FeatureMatrix
from .metapath import Matcher, MatchLimits, compile_pattern, match_anchored
from .mlkit import CVReport, Dataset, Hyper, cross_validate, gain
from .pipeline import PipelineConfig, PipelineError, run_pipeline
from .records import Kind, Label, parse_labels, parse_records, write_dataset
from .synth import SyntheticSpec, generate_synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("hfaug")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _globals(p, suppress):
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=default if suppress else 0, help="global random seed")
    p.add_argument("--threads", type=int, default=default if suppress else 1)
    p.add_argument("--quiet", action="store_true", default=default if suppress else False)


def _graph_args(p, labels=False):
    p.add_argument("--data", type=Path, help="directory holding accounts/edges/labels files")
    p.add_argument("--accounts", type=Path)
    p.add_argument("--edges", type=Path)
    if labels:
        p.add_argument("--labels", type=Path)
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.add_argument("--lenient", action="store_true", help="skip malformed rows and calls into EOAs")


def _load_graph(args, with_labels=True):
    ext = "csv" if args.format == "csv" else "jsonl"
    accounts = args.accounts or (args.data / f"accounts.{ext}" if args.data else None)
    edges = args.edges or (args.data / f"edges.{ext}" if args.data else None)
    if accounts is None or edges is None:
        raise UsageError("give --data DIR or both --accounts and --edges")
    labels = getattr(args, "labels", None)
    if labels is None and args.data and with_labels:
        cand = args.data / f"labels.{ext}"
        labels = cand if cand.exists() else None
    rec = parse_records(accounts, edges, labels, fmt=args.format, lenient=args.lenient)
    for err in rec.skipped:
        log.warning("skipped %s", err)
    het = build_het_graph(rec.accounts, rec.edges, rec.labels, lenient=args.lenient)
    return rec, het


def _print_json(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


# -- subcommands ---------------------------------------------------------------

def cmd_ingest(args):
    rec, het = _load_graph(args)
    hom = project_hom_graph(het)
    stats = {"records": rec.counts(), "het": het.counts(), "hom": hom.counts(),
             "dropped_calls": het.dropped_calls}
    status = EXIT_OK
    if args.expect_reference:
        stats["count_mismatches"] = check_counts(het, REFERENCE_COUNTS)
        if stats["count_mismatches"]:
            status = EXIT_DATA
    if args.out_dir:
        write_dataset(args.out_dir, het.accounts(), het.edges, het.labels)
    _print_json(stats)
    return status


def cmd_features(args):
    _, het = _load_graph(args)
    if args.nodes:
        nodes = [ln.strip().lower() for ln in args.nodes.read_text().splitlines() if ln.strip()]
    elif args.select == "ca":
        nodes = het.nodes_of_kind(Kind.CA)
    elif args.select == "labeled":
        nodes = sorted(het.labels)
    else:
        nodes = list(het.ids)
    feature_matrix(het, nodes).to_csv(args.out)
    return EXIT_OK


def cmd_match(args):
    _, het = _load_graph(args, with_labels=False)
    pattern = compile_pattern(args.pattern)
    anchor = args.anchor
    if args.start:
        starts = [s.lower() for s in args.start]
    else:
        kind = Kind.CA if args.all_ca else Kind.EOA
        starts = [a for a in het.nodes_of_kind(kind) if pattern.kinds[anchor] is kind]
    limits = MatchLimits(args.max_instances)
    matcher = Matcher(het, pattern)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for s in starts:
            res = match_anchored(het, s, pattern, anchor, limits, matcher)
            for inst in res:
                out.write(json.dumps(inst.to_json(s, pattern.name)) + "\n")
            if res.truncated:
                log.warning("%s: %d instances beyond --max-instances", s, res.overflow)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_augment(args):
    _, het = _load_graph(args, with_labels=False)
    feats = FeatureMatrix.from_csv(args.features)
    cfg = AugmentationConfig(args.mode, tuple(args.patterns.split(",")), MatchLimits(args.max_instances),
                             args.dedupe, args.agg)
    if args.targets:
        targets = [ln.strip().lower() for ln in args.targets.read_text().splitlines() if ln.strip()]
    elif cfg.mode.value == "target-ca":
        targets = [a for a in feats.ids if a in het and het.kind(a) is Kind.CA]
    else:
        targets = [a for a in feats.ids if a in het]
    out, report = augment_matrix(het, feats, targets, cfg)
    out.to_csv(args.out)
    sidecar = args.diagnostics or Path(str(args.out) + ".diagnostics.json")
    _print_json(report.to_json(), sidecar)
    return EXIT_OK


def cmd_embed(args):
    _, het = _load_graph(args, with_labels=False)
    hom = project_hom_graph(het)
    walk = WalkConfig(args.walks, args.length, args.strategy, args.p, args.q, args.seed, args.undirected)
    sg = SkipGramConfig(args.dim, args.window, args.negatives, args.epochs, args.lr, args.seed, args.threads)
    if args.corpus:
        with open(args.corpus, "w", encoding="utf-8") as fh:
            for w in generate_walks(hom, walk):
                fh.write(" ".join(w) + "\n")
    emb, diag = embed_graph(hom, walk, sg, args.normalize)
    emb.to_csv(args.out)
    if not args.quiet:
        print(f"final loss {diag['loss_history'][-1]:.4f}; {len(diag['missing'])} nodes without walks",
              file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args):
    feats = FeatureMatrix.from_csv(args.features)
    with open(args.labels, encoding="utf-8", newline="") as fh:
        labels = parse_labels(fh)
    ds = Dataset.from_matrix(feats, labels)
    hyper = Hyper(args.l2, args.epochs, args.lr, args.seed)
    report = cross_validate(ds, args.model, hyper, args.k, args.repeats, args.seed, not args.no_standardize)
    if args.out:
        Path(args.out).write_text(report.dumps(), encoding="utf-8")
    if not args.quiet:
        print(report.table())
    return EXIT_OK


def cmd_compare(args):
    raw = CVReport.from_json(json.loads(Path(args.raw).read_text()))
    aug = CVReport.from_json(json.loads(Path(args.aug).read_text()))
    g = gain(raw.mean, aug.mean)
    print(json.dumps({"raw": raw.mean, "aug": aug.mean, "gain_pct": g}, sort_keys=True))
    return EXIT_OK


def cmd_synth(args):
    spec = SyntheticSpec(args.n_ponzi, args.n_background, args.investors, args.payback,
                         args.noise_edges, args.seed)
    data = generate_synthetic(spec)
    write_dataset(args.out_dir, data.accounts, data.edges, data.labels)
    return EXIT_OK


def cmd_pipeline(args):
    cfg = PipelineConfig.load(args.config)
    if args.seed_override is not None:
        cfg.seed = args.seed_override
    if args.out_dir:
        cfg.output_dir = str(args.out_dir)
    summary = run_pipeline(cfg)
    if not args.quiet:
        print(summary["table"], end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hfaug", description="Heterogeneous feature augmentation for Ponzi detection")
    parser.add_argument("--version", action="version", version=__version__)
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, **kw):
        p = sub.add_parser(name, **kw)
        _globals(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("ingest", cmd_ingest, help="parse and validate records, print graph statistics")
    _graph_args(p, labels=True)
    p.add_argument("--expect-reference", action="store_true", help="require the reference dataset counts")
    p.add_argument("--out-dir", type=Path, help="write normalised records here")

    p = add("features", cmd_features, help="manual account features")
    _graph_args(p, labels=True)
    p.add_argument("--select", choices=["all", "ca", "labeled"], default="all")
    p.add_argument("--nodes", type=Path, help="file with one address per line")
    p.add_argument("--out", type=Path, required=True)

    mp = add("metapath", lambda a: EXIT_USAGE, help="metapath tools")
    msub = mp.add_subparsers(dest="metapath_command", required=True, parser_class=_Parser)
    p = msub.add_parser("match", help="enumerate metapath instances as JSONL")
    _globals(p, suppress=True)
    p.set_defaults(func=cmd_match)
    _graph_args(p)
    p.add_argument("--pattern", required=True, help="P1, P2 or e.g. 'CA -call-> CA -trans-> EOA'")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--start", action="append", help="start address (repeatable)")
    g.add_argument("--all-ca", action="store_true")
    g.add_argument("--all-eoa", action="store_true")
    p.add_argument("--anchor", type=int, default=0)
    p.add_argument("--max-instances", type=int, default=1000)
    p.add_argument("--out", type=Path)

    p = add("augment", cmd_augment, help="metapath feature augmentation")
    _graph_args(p)
    p.add_argument("--mode", choices=["target-ca", "head-node"], default="target-ca")
    p.add_argument("--patterns", default="P1,P2")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--targets", type=Path, help="file with one address per line")
    p.add_argument("--dedupe", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--agg", choices=["sum", "mean"], default="sum")
    p.add_argument("--max-instances", type=int, default=1000)
    p.add_argument("--diagnostics", type=Path)

    p = add("embed", cmd_embed, help="DeepWalk / Node2Vec embeddings")
    _graph_args(p)
    p.add_argument("--strategy", choices=["deepwalk", "node2vec"], default="deepwalk")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--walks", type=int, default=5)
    p.add_argument("--length", type=int, default=50)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--corpus", type=Path, help="also dump the walk corpus here")
    p.add_argument("--out", type=Path, required=True)

    p = add("evaluate", cmd_evaluate, help="repeated stratified k-fold CV")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--labels", type=Path, required=True)
    p.add_argument("--model", choices=["lr", "svm"], default="lr")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--out", type=Path)

    p = add("compare", cmd_compare, help="relative gain between two CV reports")
    p.add_argument("raw", type=Path)
    p.add_argument("aug", type=Path)

    p = add("synth", cmd_synth, help="generate a synthetic Ponzi dataset")
    p.add_argument("--n-ponzi", type=int, default=50)
    p.add_argument("--n-background", type=int, default=500)
    p.add_argument("--investors", type=int, default=8)
    p.add_argument("--payback", type=float, default=0.6)
    p.add_argument("--noise-edges", type=int, default=2000)
    p.add_argument("--out-dir", type=Path, required=True)

    p = add("pipeline", cmd_pipeline, help="run the full pipeline from a JSON config")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out-dir", type=Path)
    p.add_argument("--seed-override", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads and args.threads > 1:
        import numba

        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream reader (e.g. `head`) closed early; not an error
        import os

        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except UsageError as exc:
        print(f"hfaug: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        print(f"hfaug: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(exc.cause, (DataError, OSError, ValueError)) else EXIT_INTERNAL
    except (DataError, OSError, HFAugError, ValueError) as exc:
        print(f"hfaug: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"hfaug: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
