"""Independent reference implementations the test suite checks against.

Everything here deliberately avoids the package's own layer code: the
GCN oracle loops over edges with plain numpy, the LSTM oracle runs the
recurrence with scalar Python arithmetic.
"""

from __future__ import annotations

import math

import numpy as np

from docdate.graphs import EdgeDirection, LabeledGraph


def dense_gcn_reference(h_in: np.ndarray, graph: LabeledGraph, weights, biases,
                        gate_weights=None, gate_biases=None) -> np.ndarray:
    """Edge-by-edge accumulation of ReLU(sum g * (W h_u + b)) into each node."""
    n = graph.node_count
    d_out = next(iter(weights.values())).shape[0]
    acc = np.zeros((n, d_out), dtype=h_in.dtype)
    for edge, cls in zip(graph.edges, graph.edge_classes()):
        message = weights[cls] @ h_in[edge.u] + biases[cls]
        if gate_weights is not None:
            gate = 1.0 / (1.0 + math.exp(-(float(h_in[edge.u] @ gate_weights[cls]) + float(gate_biases[cls][0]))))
            message = gate * message
        acc[edge.v] += message
    return np.maximum(acc, 0.0)


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def scalar_lstm_reference(x: list[list[float]], w_x, w_h, b, reverse: bool) -> list[list[float]]:
    """One LSTM direction with pure-Python scalar arithmetic.

    ``w_x[gate]`` is (k, r) nested lists, ``w_h[gate]`` (r, r), ``b[gate]`` (r,).
    Gates are named input/forget/output/candidate.
    """
    n = len(x)
    k = len(x[0])
    r = len(b["input"])
    h = [0.0] * r
    c = [0.0] * r
    out: list[list[float]] = [None] * n  # type: ignore[list-item]
    order = range(n - 1, -1, -1) if reverse else range(n)
    for t in order:
        pre = {}
        for gate in ("input", "forget", "output", "candidate"):
            pre[gate] = [
                sum(x[t][i] * w_x[gate][i][j] for i in range(k))
                + sum(h[i] * w_h[gate][i][j] for i in range(r))
                + b[gate][j]
                for j in range(r)
            ]
        i_g = [_sigmoid(v) for v in pre["input"]]
        f_g = [_sigmoid(v) for v in pre["forget"]]
        o_g = [_sigmoid(v) for v in pre["output"]]
        g_g = [math.tanh(v) for v in pre["candidate"]]
        c = [f_g[j] * c[j] + i_g[j] * g_g[j] for j in range(r)]
        h = [o_g[j] * math.tanh(c[j]) for j in range(r)]
        out[t] = h
    return out


def scalar_bilstm_reference(x: np.ndarray, params) -> np.ndarray:
    """Reference for the whole Bi-LSTM using the scalar recurrence above."""
    def unpack(cell):
        w_x = {g: cell.w_x[g].data.tolist() for g in cell.w_x}
        w_h = {g: cell.w_h[g].data.tolist() for g in cell.w_h}
        b = {g: cell.b[g].data.tolist() for g in cell.b}
        return w_x, w_h, b

    rows = x.tolist()
    fwd = scalar_lstm_reference(rows, *unpack(params.forward), reverse=False)
    bwd = scalar_lstm_reference(rows, *unpack(params.backward), reverse=True)
    return np.array([f + b for f, b in zip(fwd, bwd)], dtype=x.dtype)


def random_labeled_graph(rng: np.random.Generator, max_nodes: int = 10,
                         labels=("A", "B", "C")) -> LabeledGraph:
    n = int(rng.integers(1, max_nodes + 1))
    n_edges = int(rng.integers(0, max(1, 3 * n)))
    triples = []
    for _ in range(n_edges):
        u, v = rng.integers(0, n, size=2)
        triples.append((int(u), int(v), str(rng.choice(labels))))
    return LabeledGraph.from_triples(n, triples)


def expansion_structure_ok(original: LabeledGraph, expanded: LabeledGraph) -> bool:
    originals = {(e.u, e.v, e.label) for e in original.edges}
    forwards = [(e.u, e.v, e.label) for e in expanded.edges if e.direction is EdgeDirection.FORWARD]
    inverses = [(e.u, e.v, e.label) for e in expanded.edges if e.direction is EdgeDirection.INVERSE]
    loops = [e for e in expanded.edges if e.direction is EdgeDirection.SELF_LOOP]
    if len(expanded.edges) != 2 * len(originals) + original.node_count:
        return False
    if sorted(forwards) != sorted(originals):
        return False
    if sorted(inverses) != sorted((v, u, l) for u, v, l in originals):
        return False
    if len(loops) != original.node_count:
        return False
    if {e.u for e in loops} != set(range(original.node_count)):
        return False
    return all(e.u == e.v and e.label == "⊤" for e in loops)
