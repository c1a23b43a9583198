"""Gain grid: feature source x metapath x classifier.

    python scripts/reference_grid.py --data DIR [--out-dir runs/grid]

DIR holds accounts.csv, edges.csv and labels.csv. With ``--check-counts`` the
ingest stage insists on the reference dataset's statistics. Without ``--data``
a synthetic stand-in of the same shape is generated first.

Absolute numbers depend on the data, the negative sample and the classifier
settings; the script only fixes the layout (raw, raw + HFAug, gain).
"""

from __future__ import annotations

import argparse
import tempfile
from pathlib import Path

from hfaug.graph import REFERENCE_COUNTS
from hfaug.pipeline import PipelineConfig, run_pipeline
from hfaug.records import write_dataset
from hfaug.synth import SyntheticSpec, generate_synthetic, pad_to_counts

SOURCES = {
    "manual": {"source": "manual"},
    "deepwalk": {"source": "deepwalk"},
    "node2vec": {"source": "node2vec", "grid_pq": True},
}


def standin(root: Path) -> None:
    spec = SyntheticSpec(n_ponzi=REFERENCE_COUNTS["labels"], n_background=18_000, investors_per_ponzi=8,
                         payback_fraction=0.6, noise_edges=10_000, seed=0)
    data = pad_to_counts(generate_synthetic(spec), REFERENCE_COUNTS)
    write_dataset(root, data.accounts, data.edges, data.labels)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--data", type=Path)
    ap.add_argument("--out-dir", type=Path, default=Path("runs/grid"))
    ap.add_argument("--sources", nargs="+", default=list(SOURCES), choices=list(SOURCES))
    ap.add_argument("--patterns", nargs="+", default=["P1", "P2"])
    ap.add_argument("--models", nargs="+", default=["lr", "svm"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--check-counts", action="store_true")
    args = ap.parse_args()

    tmp = None
    data = args.data
    if data is None:
        tmp = tempfile.TemporaryDirectory()
        data = Path(tmp.name)
        print(f"no --data given; generating a stand-in in {data}")
        standin(data)
        args.check_counts = True

    blocks = []
    for source in args.sources:
        for pattern in args.patterns:
            cfg = PipelineConfig.from_dict({
                "version": 1,
                "seed": args.seed,
                "output_dir": str(args.out_dir / f"{source}_{pattern}"),
                "data": {k: str(data / f"{k}.csv") for k in ("accounts", "edges", "labels")},
                "features": SOURCES[source],
                "augment": {"mode": "target-ca", "patterns": [pattern]},
                "evaluate": {"models": args.models},
                **({"expect_counts": "reference"} if args.check_counts else {}),
            })
            summary = run_pipeline(cfg)
            blocks.append(summary["table"])
            print(summary["table"], flush=True)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / "grid.md").write_text("\n".join(blocks), encoding="utf-8")
    if tmp:
        tmp.cleanup()


if __name__ == "__main__":
    main()
