"""Directed labeled graphs and the edge-set expansion the GCN layers expect.

Expansion augments an edge set with one inverse edge per original edge
(duplicates removed first) and one self-loop per node carrying the
distinguished empty label, so ``|E'| = 2*|E_dedup| + |V|``. Parameter
classes are derived per edge: forward edges use their label, inverse
edges the label with an ``_inv`` suffix, self-loops the empty label —
unless the graph declares that its labels already encode direction, as
the collapsed three-label syntactic graph does.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .documents import AnnotatedDocument, NodeKind, TemporalRelation, ValidationError

SELF_LOOP_LABEL = "⊤"
SYN_FORWARD = "→"
SYN_INVERSE = "←"
INVERSE_SUFFIX = "_inv"


class EdgeDirection(enum.Enum):
    FORWARD = "forward"
    INVERSE = "inverse"
    SELF_LOOP = "selfloop"


class Edge(NamedTuple):
    u: int
    v: int
    label: str
    direction: EdgeDirection


@dataclass(frozen=True)
class LabeledGraph:
    node_count: int
    edges: tuple[Edge, ...]
    expanded: bool = False
    labels_encode_direction: bool = False

    @classmethod
    def from_triples(cls, node_count: int, triples: Iterable[tuple[int, int, str]]) -> "LabeledGraph":
        """Raw (u, v, label) edges, all tagged forward, not yet expanded."""
        edges = []
        for u, v, label in triples:
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValidationError(
                    f"edge ({u},{v},{label!r}) has an endpoint outside [0,{node_count})"
                )
            edges.append(Edge(int(u), int(v), str(label), EdgeDirection.FORWARD))
        return cls(node_count=node_count, edges=tuple(edges))

    def edge_class(self, edge: Edge) -> str:
        """Parameter class of one edge (label, qualified by direction)."""
        if edge.direction is EdgeDirection.SELF_LOOP:
            return SELF_LOOP_LABEL
        if edge.direction is EdgeDirection.INVERSE and not self.labels_encode_direction:
            return edge.label + INVERSE_SUFFIX
        return edge.label

    def edge_classes(self) -> list[str]:
        return [self.edge_class(e) for e in self.edges]

    def classes(self) -> list[str]:
        return sorted(set(self.edge_classes()))


def expand_edges(graph: LabeledGraph) -> LabeledGraph:
    """Add inverse edges and self-loops; rejects an already-expanded graph."""
    if graph.expanded:
        raise ValidationError("graph is already expanded; expansion is applied exactly once")
    if graph.node_count < 1:
        raise ValidationError("cannot expand a graph with no nodes")
    originals = sorted({(e.u, e.v, e.label) for e in graph.edges})
    edges = [Edge(u, v, label, EdgeDirection.FORWARD) for u, v, label in originals]
    edges += [Edge(v, u, label, EdgeDirection.INVERSE) for u, v, label in originals]
    edges += [
        Edge(u, u, SELF_LOOP_LABEL, EdgeDirection.SELF_LOOP) for u in range(graph.node_count)
    ]
    edges.sort(key=lambda e: (e.u, e.v, e.label, e.direction.value))
    return LabeledGraph(node_count=graph.node_count, edges=tuple(edges), expanded=True)


def _check_expanded(graph: LabeledGraph) -> None:
    if not graph.expanded:
        raise ValidationError("graph is not expanded")
    loops = [e for e in graph.edges if e.direction is EdgeDirection.SELF_LOOP]
    if len(loops) != graph.node_count or {e.u for e in loops} != set(range(graph.node_count)):
        raise ValidationError("expanded graph is missing self-loops")


def collapse_syntactic_labels(graph: LabeledGraph) -> LabeledGraph:
    """Collapse an expanded dependency graph onto the three syntactic classes.

    Forward parse edges become ``→``, inverse edges ``←``, self-loops stay
    ``⊤``; the original parser labels never reach the layer parameters.
    """
    _check_expanded(graph)
    relabeled = []
    for e in graph.edges:
        if e.direction is EdgeDirection.SELF_LOOP:
            relabeled.append(e)
        elif e.direction is EdgeDirection.INVERSE:
            relabeled.append(Edge(e.u, e.v, SYN_INVERSE, e.direction))
        else:
            relabeled.append(Edge(e.u, e.v, SYN_FORWARD, e.direction))
    return LabeledGraph(
        node_count=graph.node_count,
        edges=tuple(relabeled),
        expanded=True,
        labels_encode_direction=True,
    )


def syntactic_classes() -> list[str]:
    return sorted({SYN_FORWARD, SYN_INVERSE, SELF_LOOP_LABEL})


def temporal_classes() -> list[str]:
    """The eleven temporal parameter classes: five labels, their inverses, ⊤."""
    names = [r.value for r in TemporalRelation]
    return sorted(names + [n + INVERSE_SUFFIX for n in names] + [SELF_LOOP_LABEL])


def dependency_graph(doc: AnnotatedDocument) -> LabeledGraph:
    """Expanded, collapsed token-level graph over the document's parses."""
    raw = LabeledGraph.from_triples(doc.n_tokens, doc.dep_edges)
    return collapse_syntactic_labels(expand_edges(raw))


@dataclass(frozen=True)
class TemporalGraph:
    """Expanded relation graph plus what the model needs to initialise nodes."""

    graph: LabeledGraph
    node_ids: tuple[str, ...]
    kinds: tuple[NodeKind, ...]
    spans: tuple[tuple[int, int] | None, ...]
    dct_index: int


def build_temporal_graph(doc: AnnotatedDocument) -> TemporalGraph:
    nodes = doc.temporal_nodes
    dct_indices = [i for i, n in enumerate(nodes) if n.kind is NodeKind.DCT]
    if len(dct_indices) != 1:
        raise ValidationError(f"expected exactly one DCT node, found {len(dct_indices)}")
    index = {n.node_id: i for i, n in enumerate(nodes)}
    triples = [(index[src], index[dst], rel.value) for src, dst, rel in doc.temporal_edges]
    graph = expand_edges(LabeledGraph.from_triples(len(nodes), triples))
    return TemporalGraph(
        graph=graph,
        node_ids=tuple(n.node_id for n in nodes),
        kinds=tuple(n.kind for n in nodes),
        spans=tuple(n.span for n in nodes),
        dct_index=dct_indices[0],
    )
