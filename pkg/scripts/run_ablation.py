#!/usr/bin/env python3
"""Train every ablation-grid configuration on one synthetic corpus and
emit the comparison table plus plot-ready mean-deviation data."""

import argparse
import json
import sys
from pathlib import Path

from docdate.model import ModelConfig
from docdate.pipeline import (
    Corpus,
    TrainConfig,
    ablation_json,
    ablation_table,
    make_splits,
    run_ablation_harness,
)
from docdate.synthetic import generate_synthetic_corpus


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-docs", type=int, default=200)
    ap.add_argument("--difficulty", choices=("easy", "hard"), default="hard")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=25)
    ap.add_argument("--lr", type=float, default=0.01)
    ap.add_argument("--out", type=Path, help="directory for ablation.json / ablation.txt")
    args = ap.parse_args()

    docs, _ = generate_synthetic_corpus(args.n_docs, 1995, 1999, seed=args.seed,
                                        difficulty=args.difficulty)
    corpus = Corpus(docs={d.doc_id: d for d in docs},
                    split=make_splits([d.doc_id for d in docs], seed=args.seed),
                    meta={"generator": "synthetic"})
    template = ModelConfig(year_start=1995, year_end=1999, embed_dim=24, lstm_hidden=16,
                           syn_dim=24, temp_dim=24, precision=32)
    rows = run_ablation_harness(corpus, template,
                                TrainConfig(seed=args.seed, max_epochs=args.epochs,
                                            lr=args.lr, patience=8))
    payload = ablation_json(rows)
    table = ablation_table(rows)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "ablation.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        (args.out / "ablation.txt").write_text(table + "\n")
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    print()
    print(table, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
