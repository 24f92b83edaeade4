"""Differentiable layers: label-specific graph convolution and a Bi-LSTM.

A GCN layer updates node v as

    h_v = ReLU( sum over incoming edges (u, v, l) of
                g_uv * (W_l h_u + b_l) )

where the per-edge gate g_uv = sigmoid(h_u . w_l + b_l_gate) when gating
is enabled and 1 otherwise. Parameters are keyed by the edge's class, the
bias sits inside the sum (one contribution per edge), and there is no
degree normalisation. Aggregation runs over edges pointing INTO v; since
every graph is expanded first, information still flows both ways.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .graphs import LabeledGraph, ValidationError
from .tensor import Tensor


class ConfigError(ValueError):
    """Layer parameters do not fit the graph or the dimension chain."""


@dataclass
class GcnLayerParams:
    """One weight/bias pair per edge class, plus gate parameters when gated."""

    d_in: int
    d_out: int
    weights: dict[str, Tensor]             # class -> (d_out, d_in)
    biases: dict[str, Tensor]              # class -> (d_out,)
    gate_weights: dict[str, Tensor] | None  # class -> (d_in,)
    gate_biases: dict[str, Tensor] | None   # class -> (1,)

    @property
    def gated(self) -> bool:
        return self.gate_weights is not None

    def named(self, prefix: str):
        for cls in sorted(self.weights):
            yield f"{prefix}.W[{cls}]", self.weights[cls]
            yield f"{prefix}.b[{cls}]", self.biases[cls]
        if self.gated:
            for cls in sorted(self.gate_weights):
                yield f"{prefix}.gw[{cls}]", self.gate_weights[cls]
                yield f"{prefix}.gb[{cls}]", self.gate_biases[cls]


def init_gcn_params(classes, d_in: int, d_out: int, gated: bool,
                    rng: np.random.Generator, dtype=np.float64) -> GcnLayerParams:
    weights, biases = {}, {}
    gate_w: dict[str, Tensor] | None = {} if gated else None
    gate_b: dict[str, Tensor] | None = {} if gated else None
    for cls in sorted(set(classes)):
        weights[cls] = T.glorot(rng, (d_out, d_in), dtype=dtype)
        biases[cls] = T.zeros((d_out,), dtype=dtype, requires_grad=True)
        if gated:
            gate_w[cls] = T.glorot(rng, (d_in,), dtype=dtype)
            gate_b[cls] = T.zeros((1,), dtype=dtype, requires_grad=True)
    return GcnLayerParams(d_in, d_out, weights, biases, gate_w, gate_b)


def gcn_forward(h_in: Tensor, graph: LabeledGraph, params: GcnLayerParams,
                gate_override: float | None = None) -> Tensor:
    """One graph convolution over an expanded graph.

    ``gate_override`` replaces every gate with a constant (testing hook;
    1.0 reproduces the ungated layer bit for bit).
    """
    if not graph.expanded:
        raise ValidationError("gcn_forward needs an expanded graph")
    if h_in.shape != (graph.node_count, params.d_in):
        raise ConfigError(
            f"input shape {h_in.shape} does not match {graph.node_count} nodes x d_in={params.d_in}"
        )
    by_class: dict[str, tuple[list[int], list[int]]] = {}
    for edge, cls in zip(graph.edges, graph.edge_classes()):
        if cls not in params.weights:
            raise ConfigError(f"no parameters for edge class {cls!r}")
        src, dst = by_class.setdefault(cls, ([], []))
        src.append(edge.u)
        dst.append(edge.v)

    total: Tensor | None = None
    for cls in sorted(by_class):
        src, dst = by_class[cls]
        h_src = T.gather_rows(h_in, src)
        messages = T.matmul(h_src, T.transpose(params.weights[cls])) + params.biases[cls]
        if gate_override is not None:
            gate_value = float(gate_override)
            if gate_value != 1.0:
                messages = messages * gate_value
        elif params.gated:
            gate = T.sigmoid(T.matmul(h_src, params.gate_weights[cls]) + params.gate_biases[cls])
            messages = messages * T.reshape(gate, (len(src), 1))
        part = T.scatter_add_rows(messages, dst, graph.node_count)
        total = part if total is None else total + part
    return T.relu(total)


def gcn_stack(h0: Tensor, graph: LabeledGraph, layers: list[GcnLayerParams],
              gate_override: float | None = None) -> Tensor:
    if not layers:
        raise ConfigError("gcn_stack needs at least one layer")
    for prev, nxt in zip(layers, layers[1:]):
        if prev.d_out != nxt.d_in:
            raise ConfigError(f"dimension chain breaks: {prev.d_out} -> {nxt.d_in}")
    h = h0
    for layer in layers:
        h = gcn_forward(h, graph, layer, gate_override=gate_override)
    return h


# -- Bi-LSTM --------------------------------------------------------------

GATES = ("input", "forget", "output", "candidate")


@dataclass
class LstmCellParams:
    """One direction: per-gate input weights (k, r), hidden weights (r, r), biases (r,)."""

    w_x: dict[str, Tensor]
    w_h: dict[str, Tensor]
    b: dict[str, Tensor]

    @property
    def hidden_size(self) -> int:
        return self.w_h["input"].shape[0]

    def named(self, prefix: str):
        for gate in GATES:
            yield f"{prefix}.{gate}.wx", self.w_x[gate]
            yield f"{prefix}.{gate}.wh", self.w_h[gate]
            yield f"{prefix}.{gate}.b", self.b[gate]


@dataclass
class BiLstmParams:
    forward: LstmCellParams
    backward: LstmCellParams

    @property
    def hidden_size(self) -> int:
        return self.forward.hidden_size

    def named(self, prefix: str):
        yield from self.forward.named(f"{prefix}.f")
        yield from self.backward.named(f"{prefix}.b")


def init_lstm_cell(input_dim: int, hidden: int, rng: np.random.Generator,
                   dtype=np.float64) -> LstmCellParams:
    w_x = {g: T.glorot(rng, (input_dim, hidden), dtype=dtype) for g in GATES}
    w_h = {g: T.glorot(rng, (hidden, hidden), dtype=dtype) for g in GATES}
    b = {g: T.zeros((hidden,), dtype=dtype, requires_grad=True) for g in GATES}
    return LstmCellParams(w_x, w_h, b)


def init_bilstm(input_dim: int, hidden: int, rng: np.random.Generator,
                dtype=np.float64) -> BiLstmParams:
    return BiLstmParams(
        forward=init_lstm_cell(input_dim, hidden, rng, dtype),
        backward=init_lstm_cell(input_dim, hidden, rng, dtype),
    )


def _run_cell(x: Tensor, cell: LstmCellParams, reverse: bool) -> list[Tensor]:
    n = x.shape[0]
    r = cell.hidden_size
    # one packed matmul per step; column blocks keep per-gate parameters intact
    w_x = T.concat([cell.w_x[g] for g in GATES], axis=-1)  # (k, 4r)
    w_h = T.concat([cell.w_h[g] for g in GATES], axis=-1)  # (r, 4r)
    b = T.concat([cell.b[g] for g in GATES], axis=-1)      # (4r,)
    h = T.zeros((1, r), dtype=x.dtype)
    c = T.zeros((1, r), dtype=x.dtype)
    steps: list[Tensor] = []
    order = range(n - 1, -1, -1) if reverse else range(n)
    for t in order:
        x_t = T.gather_rows(x, [t])
        pre = T.matmul(x_t, w_x) + T.matmul(h, w_h) + b
        i = T.sigmoid(T.slice_cols(pre, 0, r))
        f = T.sigmoid(T.slice_cols(pre, r, 2 * r))
        o = T.sigmoid(T.slice_cols(pre, 2 * r, 3 * r))
        g = T.tanh(T.slice_cols(pre, 3 * r, 4 * r))
        c = f * c + i * g
        h = o * T.tanh(c)
        steps.append(h)
    if reverse:
        steps.reverse()
    return steps


def bilstm_forward(x: Tensor, params: BiLstmParams, keep_prob: float = 1.0,
                   training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
    """Contextualise token rows; output is [forward_t ; backward_t] per token."""
    fwd = _run_cell(x, params.forward, reverse=False)
    bwd = _run_cell(x, params.backward, reverse=True)
    rows = [T.concat([f, b], axis=-1) for f, b in zip(fwd, bwd)]
    out = rows[0] if len(rows) == 1 else T.concat(rows, axis=0)
    return T.dropout(out, keep_prob, training, rng)


def average_pool(h: Tensor) -> Tensor:
    """Document vector: arithmetic mean of the token rows."""
    return T.mean_rows(h)
