"""Token vocabulary and the whitespace-delimited pretrained-vector format."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

UNK_TOKEN = "<unk>"


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]  # index 0 is always the unknown token

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def index(self) -> dict[str, int]:
        if not hasattr(self, "_index"):
            object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})
        return self._index

    def id_of(self, token: str) -> int:
        return self.index.get(token, 0)

    def ids(self, tokens) -> list[int]:
        idx = self.index
        return [idx.get(t, 0) for t in tokens]


def build_vocab(docs) -> Vocab:
    """Sorted unique tokens of the given documents, unknown token first."""
    seen = set()
    for doc in docs:
        seen.update(doc.tokens)
    seen.discard(UNK_TOKEN)
    return Vocab(tokens=(UNK_TOKEN, *sorted(seen)))


def load_embedding_file(path: str | Path, dim: int | None = None) -> dict[str, np.ndarray]:
    """Read "token f1 f2 ... fk" lines into a token -> vector map.

    All vectors must share one dimensionality; ``dim``, when given, pins it.
    """
    table: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected a token followed by floats")
            token = parts[0]
            try:
                vec = np.array([float(p) for p in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric embedding value") from exc
            if dim is None:
                dim = vec.shape[0]
            if vec.shape[0] != dim:
                raise ValueError(
                    f"{path}:{lineno}: vector has {vec.shape[0]} dims, expected {dim}"
                )
            table[token] = vec
    logger.info("loaded %d pretrained vectors from %s", len(table), path)
    return table
