"""The document-dating network: embeddings -> Bi-LSTM -> syntactic GCN ->
(average pool, temporal GCN) -> softmax over years.

Components toggle independently so the ablation grid can be trained from
one code path. Temporal nodes are initialised from the encoded token
matrix: events and time mentions take the mean of their span rows, the
creation-time node takes the document average, which gives it document-
wide context before temporal message passing. Disabled components
contribute no parameters at all.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .documents import AnnotatedDocument, NodeKind
from .embeddings import Vocab
from .graphs import build_temporal_graph, dependency_graph, syntactic_classes, temporal_classes
from .layers import (
    BiLstmParams,
    ConfigError,
    GcnLayerParams,
    average_pool,
    bilstm_forward,
    gcn_forward,
    gcn_stack,
    init_bilstm,
    init_gcn_params,
)
from .tensor import DTYPES, Tensor


@dataclass(frozen=True)
class ModelConfig:
    year_start: int
    year_end: int
    name: str = "full"
    use_bilstm: bool = True
    use_sgcn: bool = True
    tgcn_layers: int = 1
    gating: bool = True
    embed_dim: int = 300
    lstm_hidden: int = 128  # per direction; context dim is twice this
    syn_dim: int = 128
    temp_dim: int = 128
    keep_prob: float = 0.8
    precision: int = 32

    def validate(self) -> None:
        if self.precision not in DTYPES:
            raise ConfigError(f"precision must be 32 or 64, got {self.precision}")
        if self.tgcn_layers < 0:
            raise ConfigError("tgcn_layers must be >= 0")
        if not (self.use_bilstm or self.use_sgcn or self.tgcn_layers > 0):
            raise ConfigError("at least one of bilstm/sgcn/tgcn must be enabled")
        if self.n_classes < 2:
            raise ConfigError(
                f"year range [{self.year_start},{self.year_end}] yields {self.n_classes} classes; need >= 2"
            )
        if not 0 < self.keep_prob <= 1:
            raise ConfigError(f"keep_prob must be in (0, 1], got {self.keep_prob}")
        for field in ("embed_dim", "lstm_hidden", "syn_dim", "temp_dim"):
            if getattr(self, field) < 1:
                raise ConfigError(f"{field} must be positive")

    @property
    def n_classes(self) -> int:
        return self.year_end - self.year_start + 1

    @property
    def token_dim(self) -> int:
        """Width of the token matrix after the enabled encoders."""
        if self.use_sgcn:
            return self.syn_dim
        if self.use_bilstm:
            return 2 * self.lstm_hidden
        return self.embed_dim

    @property
    def context_dim(self) -> int:
        return 2 * self.lstm_hidden if self.use_bilstm else self.embed_dim

    @property
    def classifier_dim(self) -> int:
        return self.token_dim + (self.temp_dim if self.tgcn_layers > 0 else 0)

    def to_json_obj(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ModelConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config fields {sorted(extra)}")
        config = cls(**obj)
        config.validate()
        return config


@dataclass(frozen=True)
class Prediction:
    doc_id: str
    probs: np.ndarray  # one probability per year, earliest year first
    predicted_year: int
    gold_year: int | None

    def top(self, k: int = 3) -> list[tuple[int, float]]:
        order = np.argsort(-self.probs, kind="stable")[:k]
        return [(int(i), float(self.probs[i])) for i in order]


class DatingModel:
    """All learnable state plus the forward pass for one document."""

    def __init__(self, config: ModelConfig, vocab: Vocab, rng: np.random.Generator,
                 pretrained: dict[str, np.ndarray] | None = None):
        config.validate()
        self.config = config
        self.vocab = vocab
        dtype = DTYPES[config.precision]

        emb = rng.normal(0.0, 0.1, size=(len(vocab), config.embed_dim)).astype(dtype)
        if pretrained:
            for i, token in enumerate(vocab.tokens):
                vec = pretrained.get(token)
                if vec is not None:
                    if vec.shape[0] != config.embed_dim:
                        raise ConfigError(
                            f"pretrained vectors are {vec.shape[0]}-dimensional, "
                            f"config expects {config.embed_dim}"
                        )
                    emb[i] = vec.astype(dtype)
        self.embed = Tensor(emb, requires_grad=True)

        self.bilstm: BiLstmParams | None = None
        if config.use_bilstm:
            self.bilstm = init_bilstm(config.embed_dim, config.lstm_hidden, rng, dtype)

        self.sgcn: GcnLayerParams | None = None
        if config.use_sgcn:
            self.sgcn = init_gcn_params(
                syntactic_classes(), config.context_dim, config.syn_dim,
                gated=config.gating, rng=rng, dtype=dtype,
            )

        self.tgcn: list[GcnLayerParams] = []
        for layer in range(config.tgcn_layers):
            d_in = config.token_dim if layer == 0 else config.temp_dim
            self.tgcn.append(init_gcn_params(
                temporal_classes(), d_in, config.temp_dim,
                gated=config.gating, rng=rng, dtype=dtype,
            ))

        # zero-initialised classifier: an untrained model is exactly uniform
        self.clf_w = T.zeros((config.n_classes, config.classifier_dim), dtype=dtype, requires_grad=True)
        self.clf_b = T.zeros((config.n_classes,), dtype=dtype, requires_grad=True)

        self._params = dict(self._named_params())

    def _named_params(self):
        yield "embed.table", self.embed
        if self.bilstm is not None:
            yield from self.bilstm.named("bilstm")
        if self.sgcn is not None:
            yield from self.sgcn.named("sgcn")
        for i, layer in enumerate(self.tgcn):
            yield from layer.named(f"tgcn.{i}")
        yield "clf.W", self.clf_w
        yield "clf.b", self.clf_b

    def parameters(self) -> dict[str, Tensor]:
        return self._params

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.zero_grad()

    def encode_tokens(self, doc: AnnotatedDocument, training: bool = False,
                      rng: np.random.Generator | None = None) -> Tensor:
        h = T.gather_rows(self.embed, self.vocab.ids(doc.tokens))
        if self.bilstm is not None:
            h = bilstm_forward(h, self.bilstm)
        if self.sgcn is not None:
            h = gcn_forward(h, dependency_graph(doc), self.sgcn)
        return h

    def forward(self, doc: AnnotatedDocument, training: bool = False,
                rng: np.random.Generator | None = None) -> tuple[Tensor | None, Prediction]:
        """Loss (when the document carries a gold year) and the prediction."""
        cfg = self.config
        h = self.encode_tokens(doc, training, rng)
        h_avg = average_pool(h)

        if cfg.tgcn_layers > 0:
            tg = build_temporal_graph(doc)
            rows = []
            for kind, span in zip(tg.kinds, tg.spans):
                if kind is NodeKind.DCT:
                    rows.append(T.reshape(h_avg, (1, cfg.token_dim)))
                else:
                    span_rows = T.gather_rows(h, list(range(span[0], span[1])))
                    rows.append(T.reshape(T.mean_rows(span_rows), (1, cfg.token_dim)))
            t0 = rows[0] if len(rows) == 1 else T.concat(rows, axis=0)
            h_temp = gcn_stack(t0, tg.graph, self.tgcn)
            h_dct = T.reshape(T.gather_rows(h_temp, [tg.dct_index]), (cfg.temp_dim,))
            h_clf = T.concat([h_dct, h_avg], axis=-1)
        else:
            h_clf = h_avg

        h_clf = T.dropout(h_clf, cfg.keep_prob, training, rng)
        logits = T.matmul(self.clf_w, h_clf) + self.clf_b
        probs = T.softmax(logits.data)
        predicted_year = cfg.year_start + int(np.argmax(probs))  # ties -> earliest year

        loss = None
        if doc.gold_year is not None:
            label = doc.gold_year - cfg.year_start
            if not 0 <= label < cfg.n_classes:
                raise ConfigError(
                    f"{doc.doc_id}: gold year {doc.gold_year} outside "
                    f"[{cfg.year_start},{cfg.year_end}]"
                )
            loss = T.softmax_cross_entropy(logits, label)

        return loss, Prediction(doc.doc_id, probs, predicted_year, doc.gold_year)

    def predict(self, doc: AnnotatedDocument) -> Prediction:
        cfg = self.config
        if doc.gold_year is not None and not cfg.year_start <= doc.gold_year <= cfg.year_end:
            # inference does not need the label; only train/eval are strict about it
            doc = dataclasses.replace(doc, gold_year=None)
        with T.no_grad():
            _, prediction = self.forward(doc, training=False)
        return prediction


_ABLATION_ROWS: list[tuple[str, dict]] = [
    ("T-GCN", dict(use_bilstm=False, use_sgcn=False, tgcn_layers=1)),
    ("S-GCN + T-GCN (K=1)", dict(use_bilstm=False, use_sgcn=True, tgcn_layers=1)),
    ("S-GCN + T-GCN (K=2)", dict(use_bilstm=False, use_sgcn=True, tgcn_layers=2)),
    ("S-GCN + T-GCN (K=3)", dict(use_bilstm=False, use_sgcn=True, tgcn_layers=3)),
    ("Bi-LSTM", dict(use_bilstm=True, use_sgcn=False, tgcn_layers=0)),
    ("Bi-LSTM + T-GCN", dict(use_bilstm=True, use_sgcn=False, tgcn_layers=1)),
    ("Bi-LSTM + S-GCN + T-GCN (no gate)",
     dict(use_bilstm=True, use_sgcn=True, tgcn_layers=1, gating=False)),
    ("Bi-LSTM + S-GCN + T-GCN (K=1)", dict(use_bilstm=True, use_sgcn=True, tgcn_layers=1)),
    ("Bi-LSTM + S-GCN + T-GCN (K=2)", dict(use_bilstm=True, use_sgcn=True, tgcn_layers=2)),
    ("Bi-LSTM + S-GCN + T-GCN (K=3)", dict(use_bilstm=True, use_sgcn=True, tgcn_layers=3)),
]


def ablation_grid(template: ModelConfig) -> list[ModelConfig]:
    """The ten component on/off configurations, sharing the template's dims."""
    configs = []
    for name, overrides in _ABLATION_ROWS:
        fields = dict(overrides)
        fields.setdefault("gating", True)
        config = dataclasses.replace(template, name=name, **fields)
        config.validate()
        configs.append(config)
    return configs
