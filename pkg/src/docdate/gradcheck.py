"""Central finite-difference checks for every differentiable piece.

Each check builds a deterministic scalar objective, backpropagates once,
then re-evaluates the objective twice per parameter element. Relative
error uses a small floor so near-zero gradients are compared on an
absolute scale instead of blowing up the ratio.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import tensor as T
from .documents import NodeKind, TemporalNode, TemporalRelation, make_document
from .embeddings import build_vocab
from .layers import bilstm_forward, gcn_forward, gcn_stack, init_bilstm, init_gcn_params
from .model import DatingModel, ModelConfig
from .tensor import DTYPES, Tensor

REL_ERR_FLOOR = 1e-6


def rel_error(approx: np.ndarray, exact: np.ndarray, floor: float = REL_ERR_FLOOR) -> float:
    num = np.abs(approx - exact)
    den = np.maximum(np.maximum(np.abs(approx), np.abs(exact)), floor)
    return float((num / den).max()) if num.size else 0.0


def max_rel_error(loss_fn: Callable[[], Tensor], params: list[Tensor], h: float = 1e-5) -> float:
    """Worst relative error between backprop and central differences."""
    for p in params:
        p.zero_grad()
    loss_fn().backward()
    worst = 0.0
    for p in params:
        grad = p.grad if p.grad is not None else np.zeros_like(p.data)
        fd = np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        fd_flat = fd.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            up = float(loss_fn().data)
            flat[i] = original - h
            down = float(loss_fn().data)
            flat[i] = original
            fd_flat[i] = (up - down) / (2.0 * h)
        worst = max(worst, rel_error(fd, grad))
    return worst


def _weighted_sum(out: Tensor, weights: np.ndarray) -> Tensor:
    return T.sum_all(out * Tensor(weights))


def op_checks(precision: int = 64, dims: int = 8) -> dict[str, float]:
    dt = DTYPES[precision]
    rng = np.random.default_rng(7)
    m, k, n = min(5, dims), min(4, dims), min(3, dims)
    results: dict[str, float] = {}

    def p(shape):
        return Tensor(rng.normal(size=shape).astype(dt), requires_grad=True)

    a, b = p((m, k)), p((k, n))
    w = rng.normal(size=(m, n)).astype(dt)
    results["matmul"] = max_rel_error(lambda: _weighted_sum(T.matmul(a, b), w), [a, b])

    x = p((m, k))
    bias = p((k,))
    other = p((m, k))
    w = rng.normal(size=(m, k)).astype(dt)
    results["add"] = max_rel_error(lambda: _weighted_sum(x + bias, w), [x, bias])
    results["mul"] = max_rel_error(lambda: _weighted_sum(x * other, w), [x, other])
    # keep activations away from the relu kink so the two-sided difference is clean
    x_act = Tensor(rng.normal(size=(m, k)).astype(dt) + 0.3, requires_grad=True)
    results["relu"] = max_rel_error(lambda: _weighted_sum(T.relu(x_act), w), [x_act])
    results["tanh"] = max_rel_error(lambda: _weighted_sum(T.tanh(x), w), [x])
    results["sigmoid"] = max_rel_error(lambda: _weighted_sum(T.sigmoid(x), w), [x])
    results["transpose"] = max_rel_error(lambda: _weighted_sum(T.transpose(x), w.T.copy()), [x])
    results["reshape"] = max_rel_error(
        lambda: _weighted_sum(T.reshape(x, (k, m)), w.reshape(k, m)), [x])

    w_vec = rng.normal(size=(k,)).astype(dt)
    results["mean_rows"] = max_rel_error(lambda: _weighted_sum(T.mean_rows(x), w_vec), [x])

    pieces = [p((m, 2)), p((m, 3))]
    w_cat = rng.normal(size=(m, 5)).astype(dt)
    results["concat"] = max_rel_error(lambda: _weighted_sum(T.concat(pieces, axis=-1), w_cat), pieces)

    table = p((6, k))
    idx = [0, 2, 2, 5, 1]
    w_gather = rng.normal(size=(len(idx), k)).astype(dt)
    results["gather_rows"] = max_rel_error(
        lambda: _weighted_sum(T.gather_rows(table, idx), w_gather), [table])

    rows = p((5, k))
    w_scatter = rng.normal(size=(4, k)).astype(dt)
    results["scatter_add_rows"] = max_rel_error(
        lambda: _weighted_sum(T.scatter_add_rows(rows, [0, 3, 3, 1, 0], 4), w_scatter), [rows])

    logits = p((7,))
    results["softmax_cross_entropy"] = max_rel_error(
        lambda: T.softmax_cross_entropy(logits, 4), [logits])

    drop_in = p((m, k))
    results["dropout"] = max_rel_error(
        lambda: _weighted_sum(
            T.dropout(drop_in, 0.8, training=True, rng=np.random.default_rng(13)), w),
        [drop_in])
    return results


def layer_checks(precision: int = 64, dims: int = 8) -> dict[str, float]:
    from .graphs import LabeledGraph, expand_edges

    dt = DTYPES[precision]
    rng = np.random.default_rng(11)
    d_in, d_out = min(4, dims), min(3, dims)
    graph = expand_edges(LabeledGraph.from_triples(
        4, [(0, 1, "A"), (1, 2, "B"), (2, 3, "A"), (0, 3, "C")]))
    results: dict[str, float] = {}

    h = Tensor(rng.normal(size=(4, d_in)).astype(dt), requires_grad=True)
    w_out = rng.normal(size=(4, d_out)).astype(dt)
    for gated, name in ((False, "gcn"), (True, "gcn_gated")):
        params = init_gcn_params(graph.classes(), d_in, d_out, gated=gated, rng=rng, dtype=dt)
        tensors = [h] + [t for _, t in params.named("g")]
        results[name] = max_rel_error(
            lambda: _weighted_sum(gcn_forward(h, graph, params), w_out), tensors)

    stack = [
        init_gcn_params(graph.classes(), d_in, d_in, gated=True, rng=rng, dtype=dt)
        for _ in range(3)
    ]
    w_stack = rng.normal(size=(4, d_in)).astype(dt)
    tensors = [h] + [t for layer in stack for _, t in layer.named("s")]
    results["gcn_stack_k3"] = max_rel_error(
        lambda: _weighted_sum(gcn_stack(h, graph, stack), w_stack), tensors)

    n, k, r = 5, min(4, dims), min(3, dims)
    x = Tensor(rng.normal(size=(n, k)).astype(dt), requires_grad=True)
    lstm = init_bilstm(k, r, rng, dtype=dt)
    w_lstm = rng.normal(size=(n, 2 * r)).astype(dt)
    tensors = [x] + [t for _, t in lstm.named("l")]
    results["bilstm"] = max_rel_error(
        lambda: _weighted_sum(bilstm_forward(x, lstm), w_lstm), tensors)
    return results


def _toy_document():
    tokens = ["the", "pact", "was", "signed", "in", "1995", ".",
              "two", "years", "later", "it", "held"]
    sentences = [(0, 7), (7, 12)]
    dep_edges = [
        (3, 1, "nsubj"), (1, 0, "det"), (3, 2, "aux"), (3, 5, "obl"),
        (5, 4, "case"), (3, 6, "punct"),
        (11, 10, "nsubj"), (11, 8, "obl"), (8, 7, "nummod"), (8, 9, "advmod"),
    ]
    nodes = [
        TemporalNode("t1", NodeKind.TIMEX, (5, 6), "1995"),
        TemporalNode("e1", NodeKind.EVENT, (3, 4)),
        TemporalNode("t2", NodeKind.TIMEX, (7, 10), "P2Y"),
        TemporalNode("e2", NodeKind.EVENT, (11, 12)),
        TemporalNode("dct", NodeKind.DCT, None),
    ]
    edges = [
        ("t1", "e1", TemporalRelation.INCLUDES),
        ("t2", "e1", TemporalRelation.AFTER),
        ("t2", "e2", TemporalRelation.INCLUDES),
        ("e2", "dct", TemporalRelation.IS_INCLUDED),
        ("t1", "dct", TemporalRelation.BEFORE),
    ]
    return make_document("gradcheck-doc", tokens, sentences, dep_edges, nodes, edges,
                         gold_year=1997)


def model_check(precision: int = 64, dims: int = 8) -> float:
    """Finite-difference check of every parameter of the assembled network."""
    doc = _toy_document()
    config = ModelConfig(
        year_start=1995, year_end=1999, use_bilstm=True, use_sgcn=True,
        tgcn_layers=1, gating=True, embed_dim=min(6, dims),
        lstm_hidden=min(4, dims), syn_dim=min(6, dims), temp_dim=min(6, dims),
        keep_prob=1.0, precision=precision,
    )
    model = DatingModel(config, build_vocab([doc]), np.random.default_rng(3))

    def loss_fn() -> Tensor:
        loss, _ = model.forward(doc, training=False)
        return loss

    return max_rel_error(loss_fn, list(model.parameters().values()))


def run_suite(precision: int = 64, dims: int = 8) -> dict[str, float]:
    """All checks; keys are check names, values worst relative errors."""
    results = {}
    for name, err in op_checks(precision, dims).items():
        results[f"op.{name}"] = err
    for name, err in layer_checks(precision, dims).items():
        results[f"layer.{name}"] = err
    results["model.full"] = model_check(precision, dims)
    return results
