import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docdate.documents import ValidationError, parse_record
from docdate.graphs import (
    SELF_LOOP_LABEL,
    SYN_FORWARD,
    SYN_INVERSE,
    Edge,
    EdgeDirection,
    LabeledGraph,
    build_temporal_graph,
    collapse_syntactic_labels,
    dependency_graph,
    expand_edges,
    syntactic_classes,
    temporal_classes,
)
from oracles import expansion_structure_ok, random_labeled_graph


def test_lone_node_expands_to_single_self_loop():
    out = expand_edges(LabeledGraph.from_triples(1, []))
    assert out.edges == (Edge(0, 0, SELF_LOOP_LABEL, EdgeDirection.SELF_LOOP),)


def test_single_edge_expansion_count_and_content():
    out = expand_edges(LabeledGraph.from_triples(2, [(0, 1, "nsubj")]))
    assert len(out.edges) == 4  # 2*1 + 2
    kinds = {(e.u, e.v, e.label, e.direction) for e in out.edges}
    assert (0, 1, "nsubj", EdgeDirection.FORWARD) in kinds
    assert (1, 0, "nsubj", EdgeDirection.INVERSE) in kinds
    assert (0, 0, SELF_LOOP_LABEL, EdgeDirection.SELF_LOOP) in kinds
    assert (1, 1, SELF_LOOP_LABEL, EdgeDirection.SELF_LOOP) in kinds


def test_expansion_count_formula_on_fixed_graph():
    rng = np.random.default_rng(3)
    triples = set()
    while len(triples) < 35:
        u, v = rng.integers(0, 20, size=2)
        triples.add((int(u), int(v), str(rng.choice(["a", "b", "c"]))))
    out = expand_edges(LabeledGraph.from_triples(20, sorted(triples)))
    assert len(out.edges) == 2 * 35 + 20 == 90


def test_duplicate_edges_deduped_before_expansion():
    out = expand_edges(LabeledGraph.from_triples(2, [(0, 1, "x"), (0, 1, "x"), (0, 1, "y")]))
    assert len(out.edges) == 2 * 2 + 2


def test_expansion_guard_rejects_double_application():
    out = expand_edges(LabeledGraph.from_triples(2, [(0, 1, "x")]))
    with pytest.raises(ValidationError):
        expand_edges(out)


def test_expansion_rejects_bad_endpoint():
    with pytest.raises(ValidationError):
        LabeledGraph.from_triples(2, [(0, 5, "x")])


@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
@settings(max_examples=60, deadline=None)
def test_expansion_structure_random_graphs(seed):
    graph = random_labeled_graph(np.random.default_rng(seed))
    assert expansion_structure_ok(graph, expand_edges(graph))


@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
@settings(max_examples=30, deadline=None)
def test_relabeling_commutes_with_expansion_and_collapse(seed):
    rng = np.random.default_rng(seed)
    graph = random_labeled_graph(rng)
    perm = rng.permutation(graph.node_count)

    def relabel(g: LabeledGraph) -> set:
        return {(int(perm[e.u]), int(perm[e.v]), e.label, e.direction) for e in g.edges}

    permuted = LabeledGraph.from_triples(
        graph.node_count, [(int(perm[e.u]), int(perm[e.v]), e.label) for e in graph.edges])
    assert relabel(expand_edges(graph)) == {
        (e.u, e.v, e.label, e.direction) for e in expand_edges(permuted).edges}
    assert relabel(collapse_syntactic_labels(expand_edges(graph))) == {
        (e.u, e.v, e.label, e.direction)
        for e in collapse_syntactic_labels(expand_edges(permuted)).edges}


def test_collapse_rules():
    expanded = expand_edges(LabeledGraph.from_triples(2, [(0, 1, "nsubj")]))
    collapsed = collapse_syntactic_labels(expanded)
    by_dir = {e.direction: e for e in collapsed.edges if e.u != e.v or e.direction is not EdgeDirection.SELF_LOOP}
    assert by_dir[EdgeDirection.FORWARD][:3] == (0, 1, SYN_FORWARD)
    assert by_dir[EdgeDirection.INVERSE][:3] == (1, 0, SYN_INVERSE)
    loops = [e for e in collapsed.edges if e.direction is EdgeDirection.SELF_LOOP]
    assert all(e.label == SELF_LOOP_LABEL for e in loops)
    assert collapsed.classes() == syntactic_classes()


def test_collapse_rejects_unexpanded_input():
    with pytest.raises(ValidationError):
        collapse_syntactic_labels(LabeledGraph.from_triples(2, [(0, 1, "nsubj")]))


def test_parser_labels_never_reach_classes():
    graph = dependency_graph(parse_record({
        "doc_id": "d", "tokens": ["a", "b", "c"], "sentences": [[0, 3]],
        "dep_edges": [[0, 1, "nsubj"], [1, 2, "obl"]],
        "temporal_nodes": [{"id": "dct", "kind": "DCT", "span": []}],
        "temporal_edges": [],
    })[0])
    assert graph.classes() == syntactic_classes()
    assert len(graph.classes()) == 3


def test_temporal_classes_are_eleven():
    classes = temporal_classes()
    assert len(classes) == 11
    assert SELF_LOOP_LABEL in classes
    assert "AFTER" in classes and "AFTER_inv" in classes


def overview_style_doc():
    """Five temporal nodes: an anchored year, an offset phrase, two events, DCT."""
    return parse_record({
        "doc_id": "overview",
        "tokens": ["adopted", "in", "1995", ".", "four", "years", "after", ",",
                   "it", "was", "approved", "."],
        "sentences": [[0, 4], [4, 12]],
        "dep_edges": [[0, 2, "obl"], [2, 1, "case"], [0, 3, "punct"],
                      [10, 8, "nsubj"], [10, 9, "aux"], [10, 5, "obl"],
                      [5, 4, "nummod"], [5, 6, "case"], [10, 7, "punct"], [10, 11, "punct"]],
        "temporal_nodes": [
            {"id": "t1995", "kind": "TIMEX", "span": [2, 3], "value": "1995"},
            {"id": "tafter", "kind": "TIMEX", "span": [4, 7], "value": "P4Y"},
            {"id": "adopted", "kind": "EVENT", "span": [0, 1]},
            {"id": "approved", "kind": "EVENT", "span": [10, 11]},
            {"id": "dct", "kind": "DCT", "span": []},
        ],
        "temporal_edges": [["tafter", "approved", "BEFORE"]],
        "gold_year": 1999,
    })[0]


def test_temporal_graph_of_overview_document():
    tg = build_temporal_graph(overview_style_doc())
    assert tg.graph.node_count == 5
    assert tg.node_ids[tg.dct_index] == "dct"
    idx = {name: i for i, name in enumerate(tg.node_ids)}
    edges = {(e.u, e.v, e.label, e.direction) for e in tg.graph.edges}
    assert (idx["approved"], idx["tafter"], "BEFORE", EdgeDirection.INVERSE) in edges
    loops = [e for e in tg.graph.edges if e.direction is EdgeDirection.SELF_LOOP]
    assert len(loops) == 5


def test_temporal_graph_dct_only():
    doc = parse_record({
        "doc_id": "d", "tokens": ["hello"], "sentences": [[0, 1]], "dep_edges": [],
        "temporal_nodes": [{"id": "dct", "kind": "DCT", "span": []}],
        "temporal_edges": [],
    })[0]
    tg = build_temporal_graph(doc)
    assert tg.graph.edges == (Edge(0, 0, SELF_LOOP_LABEL, EdgeDirection.SELF_LOOP),)


def test_temporal_graph_count_formula():
    doc = parse_record({
        "doc_id": "d", "tokens": ["a", "b"], "sentences": [[0, 2]], "dep_edges": [],
        "temporal_nodes": [
            {"id": "e1", "kind": "EVENT", "span": [0, 1]},
            {"id": "e2", "kind": "EVENT", "span": [1, 2]},
            {"id": "dct", "kind": "DCT", "span": []},
        ],
        "temporal_edges": [["e1", "e2", "BEFORE"], ["e2", "dct", "IS_INCLUDED"]],
    })[0]
    assert len(build_temporal_graph(doc).graph.edges) == 2 * 2 + 3 == 7
