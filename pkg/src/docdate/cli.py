"""Command-line surface.

Exit codes: 0 success, 1 data/validation failure, 2 usage error,
3 numeric failure (non-finite loss or a failed gradient check).
Machine-readable output goes to stdout as JSON; diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .documents import ValidationError, parse_json_line
from .embeddings import load_embedding_file
from .gradcheck import run_suite
from .layers import ConfigError
from .model import ModelConfig
from .pipeline import (
    Corpus,
    NumericError,
    TrainConfig,
    ablation_json,
    ablation_table,
    evaluate,
    load_corpus,
    make_splits,
    run_ablation_harness,
    save_corpus,
    train,
)
from .synthetic import GenerationError, generate_synthetic_corpus

logger = logging.getLogger("docdate")

GRADCHECK_TOLERANCE = 1e-4

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")


def _add_train_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", type=Path, help="model config JSON; flags override its values")
    sub.add_argument("--components", help="comma list drawn from bilstm,sgcn,tgcn")
    sub.add_argument("--k-layers", type=int, help="temporal GCN depth")
    sub.add_argument("--no-gate", action="store_true", help="disable edge gating")
    sub.add_argument("--precision", type=int, choices=(32, 64))
    sub.add_argument("--embeddings", type=Path, help="pretrained vector file")
    sub.add_argument("--batch-size", type=int, default=32)
    sub.add_argument("--epochs", type=int, default=100)
    sub.add_argument("--patience", type=int, default=5)
    sub.add_argument("--lr", type=float, default=0.001)
    sub.add_argument("--max-tokens", type=int, default=300)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="docdate")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("validate", help="schema-check a corpus or one annotation file")
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--corpus", type=Path)
    group.add_argument("--file", type=Path)

    sub = commands.add_parser("gen-synth", help="write a synthetic corpus")
    sub.add_argument("--out", type=Path, required=True)
    sub.add_argument("--n-docs", type=int, default=200)
    sub.add_argument("--year-start", type=int, default=1995)
    sub.add_argument("--year-end", type=int, default=1999)
    sub.add_argument("--difficulty", choices=("easy", "hard"), default="easy")
    sub.add_argument("--max-offset", type=int, default=4)
    sub.add_argument("--ratios", default="0.8,0.1,0.1")
    sub.add_argument("--seed", type=int, default=0)

    sub = commands.add_parser("train", help="train a model on a corpus")
    sub.add_argument("--corpus", type=Path, required=True)
    sub.add_argument("--out", type=Path, required=True)
    sub.add_argument("--seed", type=int, default=0)
    _add_train_flags(sub)

    sub = commands.add_parser("eval", help="score a checkpoint on a corpus split")
    sub.add_argument("--corpus", type=Path, required=True)
    sub.add_argument("--checkpoint", type=Path, required=True)
    sub.add_argument("--split", choices=("train", "dev", "test"), default="test")

    sub = commands.add_parser("predict", help="date the documents in one annotation file")
    sub.add_argument("--file", type=Path, required=True)
    sub.add_argument("--checkpoint", type=Path, required=True)
    sub.add_argument("--top", type=int, default=3)

    sub = commands.add_parser("ablate", help="train and score every grid configuration")
    sub.add_argument("--corpus", type=Path, required=True)
    sub.add_argument("--out", type=Path, required=True)
    sub.add_argument("--seed", type=int, default=0)
    _add_train_flags(sub)

    sub = commands.add_parser("gradcheck", help="finite-difference check of all gradients")
    sub.add_argument("--dims", type=int, default=8)
    sub.add_argument("--precision", type=int, choices=(32, 64), default=64)
    return parser


def _model_config(args, corpus: Corpus) -> ModelConfig:
    if args.config is not None:
        obj = json.loads(args.config.read_text(encoding="utf-8"))
        config = ModelConfig.from_json_obj(obj)
    else:
        meta = corpus.meta
        if "year_start" in meta and "year_end" in meta:
            start, end = int(meta["year_start"]), int(meta["year_end"])
        else:
            start, end = corpus.year_range()
        config = ModelConfig(year_start=start, year_end=end)

    overrides: dict = {}
    if args.components is not None:
        parts = {p.strip() for p in args.components.split(",") if p.strip()}
        unknown = parts - {"bilstm", "sgcn", "tgcn"}
        if unknown:
            raise ConfigError(f"unknown components {sorted(unknown)}")
        overrides["use_bilstm"] = "bilstm" in parts
        overrides["use_sgcn"] = "sgcn" in parts
        if "tgcn" not in parts:
            overrides["tgcn_layers"] = 0
        elif config.tgcn_layers == 0:
            overrides["tgcn_layers"] = 1
    if args.k_layers is not None:
        overrides["tgcn_layers"] = args.k_layers
    if args.no_gate:
        overrides["gating"] = False
    if args.precision is not None:
        overrides["precision"] = args.precision
    config = dataclasses.replace(config, **overrides)
    config.validate()
    return config


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        seed=args.seed,
        batch_size=args.batch_size,
        max_epochs=args.epochs,
        patience=args.patience,
        lr=args.lr,
        max_tokens=args.max_tokens,
    )


def cmd_validate(args) -> int:
    if args.corpus is not None:
        corpus = load_corpus(args.corpus)
        _emit({"ok": True, "documents": len(corpus.docs),
               "split": corpus.split is not None})
    else:
        count = 0
        with open(args.file, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    parse_json_line(line)
                except ValidationError as exc:
                    raise ValidationError(f"{args.file}:{lineno}: {exc}") from exc
                count += 1
        _emit({"ok": True, "documents": count})
    return EXIT_OK


def cmd_gen_synth(args) -> int:
    try:
        ratios = tuple(float(p) for p in args.ratios.split(","))
    except ValueError as exc:
        raise GenerationError(f"bad --ratios {args.ratios!r}") from exc
    if len(ratios) != 3:
        raise GenerationError("--ratios needs three comma-separated numbers")
    docs, derivations = generate_synthetic_corpus(
        args.n_docs, args.year_start, args.year_end, seed=args.seed,
        difficulty=args.difficulty, max_offset=args.max_offset)
    split = make_splits([d.doc_id for d in docs], seed=args.seed, ratios=ratios)
    corpus = Corpus(
        docs={d.doc_id: d for d in docs},
        split=split,
        meta={"generator": "synthetic", "seed": args.seed, "difficulty": args.difficulty,
              "year_start": args.year_start, "year_end": args.year_end},
    )
    save_corpus(corpus, args.out)
    (args.out / "derivations.json").write_text(
        json.dumps(derivations, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _emit({"ok": True, "documents": len(docs), "out": str(args.out)})
    return EXIT_OK


def cmd_train(args) -> int:
    corpus = load_corpus(args.corpus)
    config = _model_config(args, corpus)
    pretrained = load_embedding_file(args.embeddings) if args.embeddings else None
    result = train(corpus, config, _train_config(args), pretrained=pretrained)
    args.out.mkdir(parents=True, exist_ok=True)
    ckpt = args.out / "checkpoint.json"
    save_checkpoint(result.model, ckpt)
    (args.out / "train_log.jsonl").write_text(result.log_lines() + "\n", encoding="utf-8")
    _emit({"ok": True, "checkpoint": str(ckpt), "epochs": len(result.log),
           "best_epoch": result.best_epoch, "best_dev_accuracy": result.best_dev_accuracy})
    return EXIT_OK


def cmd_eval(args) -> int:
    corpus = load_corpus(args.corpus)
    if corpus.split is None:
        raise ValidationError(f"{args.corpus}: corpus has no split")
    model = load_checkpoint(args.checkpoint)
    docs = corpus.subset(getattr(corpus.split, args.split))
    report = evaluate(model, docs)
    _emit(report.to_json_obj())
    print(report.to_table(), file=sys.stderr)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_checkpoint(args.checkpoint)
    cfg = model.config
    with open(args.file, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc, _ = parse_json_line(line)
            except ValidationError as exc:
                raise ValidationError(f"{args.file}:{lineno}: {exc}") from exc
            prediction = model.predict(doc)
            _emit({
                "doc_id": doc.doc_id,
                "predicted_year": prediction.predicted_year,
                "top": [[cfg.year_start + i, p] for i, p in prediction.top(args.top)],
            })
    return EXIT_OK


def cmd_ablate(args) -> int:
    corpus = load_corpus(args.corpus)
    template = _model_config(args, corpus)
    rows = run_ablation_harness(corpus, template, _train_config(args))
    payload = ablation_json(rows)
    table = ablation_table(rows)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "ablation.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (args.out / "ablation.txt").write_text(table + "\n", encoding="utf-8")
    _emit(payload)
    print(table, file=sys.stderr)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    started = time.monotonic()
    results = run_suite(precision=args.precision, dims=args.dims)
    worst = max(results.values())
    _emit({
        "checks": {k: v for k, v in sorted(results.items())},
        "max_rel_error": worst,
        "tolerance": GRADCHECK_TOLERANCE,
        "seconds": round(time.monotonic() - started, 2),
        "ok": worst < GRADCHECK_TOLERANCE,
    })
    return EXIT_OK if worst < GRADCHECK_TOLERANCE else EXIT_NUMERIC


_HANDLERS = {
    "validate": cmd_validate,
    "gen-synth": cmd_gen_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "ablate": cmd_ablate,
    "gradcheck": cmd_gradcheck,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, GenerationError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
