"""Versioned model checkpoints.

A checkpoint is one JSON document::

    {"format": "docdate-checkpoint", "version": 1,
     "config": {...ModelConfig fields...},
     "vocab": ["<unk>", ...],
     "dtype": "<f4" | "<f8",
     "params": {name: {"shape": [...], "data": "<base64>"}}}

``data`` is the base64 of the raw little-endian buffer in the run's
precision, so save -> load -> save is byte-identical.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .embeddings import Vocab
from .model import DatingModel, ModelConfig

FORMAT_NAME = "docdate-checkpoint"
FORMAT_VERSION = 1

_DTYPE_TAGS = {32: "<f4", 64: "<f8"}


def save_checkpoint(model: DatingModel, path: str | Path) -> None:
    tag = _DTYPE_TAGS[model.config.precision]
    params = {}
    for name, tensor in model.parameters().items():
        buf = np.ascontiguousarray(tensor.data.astype(tag, copy=False))
        params[name] = {
            "shape": list(tensor.data.shape),
            "data": base64.b64encode(buf.tobytes()).decode("ascii"),
        }
    payload = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "config": model.config.to_json_obj(),
        "vocab": list(model.vocab.tokens),
        "dtype": tag,
        "params": params,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_checkpoint(path: str | Path) -> DatingModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != FORMAT_NAME:
        raise ValueError(f"{path}: not a {FORMAT_NAME} file")
    if payload.get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {payload.get('version')}")
    config = ModelConfig.from_json_obj(payload["config"])
    vocab = Vocab(tokens=tuple(payload["vocab"]))
    model = DatingModel(config, vocab, rng=np.random.default_rng(0))
    tag = payload["dtype"]
    stored = payload["params"]
    expected = model.parameters()
    if set(stored) != set(expected):
        missing = sorted(set(expected) - set(stored))
        surplus = sorted(set(stored) - set(expected))
        raise ValueError(f"{path}: parameter names disagree with config "
                         f"(missing {missing}, surplus {surplus})")
    for name, tensor in expected.items():
        entry = stored[name]
        shape = tuple(entry["shape"])
        if shape != tensor.data.shape:
            raise ValueError(f"{path}: {name} has shape {shape}, expected {tensor.data.shape}")
        raw = base64.b64decode(entry["data"])
        arr = np.frombuffer(raw, dtype=tag).reshape(shape)
        tensor.data = arr.astype(tensor.data.dtype).copy()
    return model


def snapshot_params(model: DatingModel) -> dict[str, np.ndarray]:
    return {name: t.data.copy() for name, t in model.parameters().items()}


def restore_params(model: DatingModel, snapshot: dict[str, np.ndarray]) -> None:
    for name, tensor in model.parameters().items():
        tensor.data = snapshot[name].copy()
