"""Corpus handling, the training loop, evaluation metrics and the ablation harness.

A corpus on disk is a directory holding ``docs.jsonl`` (annotation
records) plus ``manifest.json`` with the train/dev/test split and
generation metadata. Training is plain mini-batch Adam: per-document
forward/backward, gradients averaged over the batch, best-dev snapshot
retained, early stop on a patience counter.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .checkpoint import restore_params, snapshot_params
from .documents import (
    AnnotatedDocument,
    ValidationError,
    make_document,
    read_annotation_file,
    write_annotation_file,
)
from .embeddings import build_vocab
from .layers import ConfigError
from .model import DatingModel, ModelConfig, Prediction, ablation_grid
from .optim import Adam
from .synthetic import derive_year

logger = logging.getLogger(__name__)


class NumericError(RuntimeError):
    """Training produced a non-finite loss."""


MANIFEST_NAME = "manifest.json"
DOCS_NAME = "docs.jsonl"


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[str, ...]
    dev: tuple[str, ...]
    test: tuple[str, ...]

    def validate_against(self, doc_ids) -> None:
        ids = set(doc_ids)
        parts = [set(self.train), set(self.dev), set(self.test)]
        union = parts[0] | parts[1] | parts[2]
        if len(self.train) + len(self.dev) + len(self.test) != len(union):
            raise ValidationError("split: train/dev/test overlap")
        if union != ids:
            raise ValidationError("split: does not cover the corpus exactly")


def make_splits(doc_ids, seed: int, ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)) -> DatasetSplit:
    """Deterministic shuffled split; default ratio 80:10:10."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValidationError(f"split ratios must sum to 1, got {ratios}")
    ids = sorted(doc_ids)
    order = np.random.default_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    n = len(ids)
    n_train = int(round(ratios[0] * n))
    n_dev = int(round(ratios[1] * n))
    return DatasetSplit(
        train=tuple(shuffled[:n_train]),
        dev=tuple(shuffled[n_train:n_train + n_dev]),
        test=tuple(shuffled[n_train + n_dev:]),
    )


@dataclass
class Corpus:
    docs: dict[str, AnnotatedDocument]
    split: DatasetSplit | None = None
    meta: dict = field(default_factory=dict)

    def subset(self, doc_ids) -> list[AnnotatedDocument]:
        return [self.docs[i] for i in doc_ids]

    def year_range(self) -> tuple[int, int]:
        years = [d.gold_year for d in self.docs.values() if d.gold_year is not None]
        if not years:
            raise ValidationError("corpus has no gold years")
        return min(years), max(years)


def save_corpus(corpus: Corpus, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    docs = [corpus.docs[i] for i in sorted(corpus.docs)]
    write_annotation_file(docs, directory / DOCS_NAME)
    manifest = {"format": "docdate-corpus", "version": 1, "files": [DOCS_NAME]}
    manifest.update(corpus.meta)
    if corpus.split is not None:
        manifest["splits"] = {
            "train": list(corpus.split.train),
            "dev": list(corpus.split.dev),
            "test": list(corpus.split.test),
        }
    (directory / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_corpus(directory: str | Path) -> Corpus:
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise ValidationError(f"{manifest_path}: missing corpus manifest")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    docs: dict[str, AnnotatedDocument] = {}
    for name in manifest.get("files", [DOCS_NAME]):
        for doc in read_annotation_file(directory / name):
            if doc.doc_id in docs:
                raise ValidationError(f"{directory}: duplicate doc_id {doc.doc_id!r}")
            docs[doc.doc_id] = doc
    split = None
    if "splits" in manifest:
        raw = manifest["splits"]
        split = DatasetSplit(tuple(raw["train"]), tuple(raw["dev"]), tuple(raw["test"]))
        split.validate_against(docs.keys())
    meta = {k: v for k, v in manifest.items()
            if k not in ("format", "version", "files", "splits")}
    return Corpus(docs=docs, split=split, meta=meta)


def truncate_document(doc: AnnotatedDocument, max_tokens: int) -> AnnotatedDocument:
    """Clip to the first ``max_tokens`` tokens, dropping whatever no longer fits."""
    if doc.n_tokens <= max_tokens:
        return doc
    sentences = []
    for start, end in doc.sentences:
        if start >= max_tokens:
            break
        sentences.append((start, min(end, max_tokens)))
    dep_edges = [(h, d, l) for h, d, l in doc.dep_edges if h < max_tokens and d < max_tokens]
    kept_nodes = []
    for node in doc.temporal_nodes:
        if node.span is None or node.span[1] <= max_tokens:
            kept_nodes.append(node)
    kept_ids = {n.node_id for n in kept_nodes}
    edges = [(s, d, r) for s, d, r in doc.temporal_edges if s in kept_ids and d in kept_ids]
    return make_document(doc.doc_id, doc.tokens[:max_tokens], sentences, dep_edges,
                         kept_nodes, edges, doc.gold_year)


# -- evaluation -----------------------------------------------------------------


@dataclass
class EvalReport:
    n_docs: int
    accuracy: float
    mean_abs_deviation_years: float
    accuracy_with_time_mention: float
    accuracy_without_time_mention: float
    n_with_time_mention: int
    n_without_time_mention: int
    year_start: int
    year_end: int
    confusion: list[list[int]]  # confusion[gold - start][pred - start]

    def recombined_accuracy(self) -> float:
        total = self.n_with_time_mention + self.n_without_time_mention
        return (self.n_with_time_mention * self.accuracy_with_time_mention
                + self.n_without_time_mention * self.accuracy_without_time_mention) / total

    def to_json_obj(self) -> dict:
        return dataclasses.asdict(self)

    def to_table(self) -> str:
        rows = [
            ("docs", f"{self.n_docs}"),
            ("accuracy", f"{self.accuracy:.4f}"),
            ("mean_abs_deviation_years", f"{self.mean_abs_deviation_years:.4f}"),
            ("accuracy_with_time_mention", f"{self.accuracy_with_time_mention:.4f}"),
            ("accuracy_without_time_mention", f"{self.accuracy_without_time_mention:.4f}"),
            ("n_with_time_mention", f"{self.n_with_time_mention}"),
            ("n_without_time_mention", f"{self.n_without_time_mention}"),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def score_predictions(predictions: list[Prediction], mention_flags: list[bool],
                      year_start: int, year_end: int) -> EvalReport:
    n_classes = year_end - year_start + 1
    confusion = [[0] * n_classes for _ in range(n_classes)]
    correct = with_total = with_correct = 0
    deviation = 0.0
    for pred, has_mention in zip(predictions, mention_flags):
        if pred.gold_year is None:
            raise ValidationError(f"{pred.doc_id}: cannot score without a gold year")
        hit = pred.predicted_year == pred.gold_year
        correct += hit
        deviation += abs(pred.predicted_year - pred.gold_year)
        confusion[pred.gold_year - year_start][pred.predicted_year - year_start] += 1
        if has_mention:
            with_total += 1
            with_correct += hit
    n = len(predictions)
    if n == 0:
        raise ValidationError("nothing to evaluate")
    without_total = n - with_total
    without_correct = correct - with_correct
    return EvalReport(
        n_docs=n,
        accuracy=correct / n,
        mean_abs_deviation_years=deviation / n,
        accuracy_with_time_mention=with_correct / with_total if with_total else 0.0,
        accuracy_without_time_mention=without_correct / without_total if without_total else 0.0,
        n_with_time_mention=with_total,
        n_without_time_mention=without_total,
        year_start=year_start,
        year_end=year_end,
        confusion=confusion,
    )


def evaluate(model: DatingModel, docs: list[AnnotatedDocument]) -> EvalReport:
    cfg = model.config
    for doc in docs:
        if doc.gold_year is None or not cfg.year_start <= doc.gold_year <= cfg.year_end:
            raise ConfigError(
                f"{doc.doc_id}: gold year {doc.gold_year} outside the model's "
                f"range [{cfg.year_start},{cfg.year_end}]")
    predictions = [model.predict(doc) for doc in docs]
    flags = [doc.has_year_mention for doc in docs]
    return score_predictions(predictions, flags, cfg.year_start, cfg.year_end)


# -- training ---------------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 5
    lr: float = 0.001
    max_tokens: int = 300
    verify_synthetic_labels: bool = True
    track_train_accuracy: bool = False
    stop_at_train_accuracy: float | None = None


@dataclass
class TrainResult:
    model: DatingModel
    log: list[dict]
    best_epoch: int
    best_dev_accuracy: float

    def log_lines(self) -> str:
        return "\n".join(json.dumps(rec, sort_keys=True) for rec in self.log)


def _length_batches(docs: list[AnnotatedDocument], order: np.ndarray, batch_size: int):
    """Group the epoch's shuffled documents into batches of similar length."""
    ranked = sorted((int(i) for i in order), key=lambda i: (docs[i].n_tokens, i))
    for start in range(0, len(ranked), batch_size):
        yield ranked[start:start + batch_size]


def train(corpus: Corpus, model_config: ModelConfig, train_config: TrainConfig,
          pretrained: dict[str, np.ndarray] | None = None) -> TrainResult:
    if corpus.split is None:
        raise ValidationError("corpus has no split; training needs one")
    cfg = model_config
    tc = train_config

    train_docs = []
    for doc in corpus.subset(corpus.split.train):
        if doc.gold_year is None or not cfg.year_start <= doc.gold_year <= cfg.year_end:
            logger.warning("%s: gold year %s outside [%d,%d]; skipping",
                           doc.doc_id, doc.gold_year, cfg.year_start, cfg.year_end)
            continue
        train_docs.append(truncate_document(doc, tc.max_tokens))
    if not train_docs:
        raise ValidationError("empty training split")
    if tc.verify_synthetic_labels and corpus.meta.get("generator") == "synthetic":
        for doc in train_docs:
            derived = derive_year(doc)
            if derived != doc.gold_year:
                raise ValidationError(
                    f"{doc.doc_id}: stored gold {doc.gold_year} but the rule "
                    f"interpreter derives {derived}")
    dev_docs = [truncate_document(d, tc.max_tokens)
                for d in corpus.subset(corpus.split.dev)
                if d.gold_year is not None and cfg.year_start <= d.gold_year <= cfg.year_end]

    rng = np.random.default_rng(tc.seed)
    vocab = build_vocab(train_docs)
    model = DatingModel(cfg, vocab, rng, pretrained=pretrained)
    optimizer = Adam(model.parameters(), lr=tc.lr)

    best_snapshot = snapshot_params(model)
    best_dev = -1.0
    best_epoch = 0
    bad_epochs = 0
    log: list[dict] = []

    for epoch in range(1, tc.max_epochs + 1):
        order = rng.permutation(len(train_docs))
        epoch_loss = 0.0
        for batch in _length_batches(train_docs, order, tc.batch_size):
            optimizer.zero_grad()
            for i in batch:
                loss, _ = model.forward(train_docs[i], training=True, rng=rng)
                if not math.isfinite(float(loss.data)):
                    raise NumericError(f"non-finite loss on {train_docs[i].doc_id} "
                                       f"in epoch {epoch}")
                epoch_loss += float(loss.data)
                loss.backward()
            optimizer.step(grad_scale=1.0 / len(batch))
        record: dict = {"epoch": epoch, "train_loss": epoch_loss / len(train_docs)}

        if dev_docs:
            dev_acc = evaluate(model, dev_docs).accuracy
        else:
            dev_acc = float("nan")
        record["dev_acc"] = dev_acc

        train_acc = None
        if tc.track_train_accuracy or tc.stop_at_train_accuracy is not None:
            train_acc = evaluate(model, train_docs).accuracy
            record["train_acc"] = train_acc
        log.append(record)
        logger.info("epoch %d: %s", epoch, record)

        if dev_docs and dev_acc > best_dev:
            best_dev = dev_acc
            best_epoch = epoch
            best_snapshot = snapshot_params(model)
            bad_epochs = 0
        elif dev_docs:
            bad_epochs += 1
            if bad_epochs >= tc.patience:
                logger.info("early stop after %d stale epochs", bad_epochs)
                break
        if tc.stop_at_train_accuracy is not None and train_acc is not None \
                and train_acc >= tc.stop_at_train_accuracy:
            break

    if dev_docs:
        restore_params(model, best_snapshot)
    else:
        best_epoch = len(log)
        best_dev = float("nan")
    return TrainResult(model=model, log=log, best_epoch=best_epoch, best_dev_accuracy=best_dev)


# -- ablation harness ---------------------------------------------------------------


@dataclass
class AblationRow:
    name: str
    config: ModelConfig
    report: EvalReport


def run_ablation_harness(corpus: Corpus, template: ModelConfig,
                         train_config: TrainConfig) -> list[AblationRow]:
    """Train and score every grid configuration with a shared seed and split."""
    rows = []
    for config in ablation_grid(template):
        result = train(corpus, config, train_config)
        report = evaluate(result.model, corpus.subset(corpus.split.test))
        rows.append(AblationRow(name=config.name, config=config, report=report))
        logger.info("ablation %-36s accuracy=%.4f deviation=%.4f",
                    config.name, report.accuracy, report.mean_abs_deviation_years)
    return rows


def ablation_table(rows: list[AblationRow]) -> str:
    width = max(len(r.name) for r in rows)
    header = f"{'method':<{width}}  {'acc':>7}  {'mad':>7}  {'acc_time':>8}  {'acc_notime':>10}"
    lines = [header]
    for r in rows:
        rep = r.report
        lines.append(
            f"{r.name:<{width}}  {rep.accuracy:>7.4f}  {rep.mean_abs_deviation_years:>7.4f}  "
            f"{rep.accuracy_with_time_mention:>8.4f}  {rep.accuracy_without_time_mention:>10.4f}")
    return "\n".join(lines)


def ablation_json(rows: list[AblationRow]) -> dict:
    return {
        "rows": [
            {"name": r.name, "config": r.config.to_json_obj(), "report": r.report.to_json_obj()}
            for r in rows
        ],
        "deviation_series": [
            [r.name, r.report.mean_abs_deviation_years] for r in rows
        ],
    }
