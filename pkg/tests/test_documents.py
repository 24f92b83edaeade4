import json

import pytest

from docdate.documents import (
    NodeKind,
    TemporalNode,
    TemporalRelation,
    ValidationError,
    make_document,
    parse_json_line,
    parse_record,
    to_json_line,
)


def minimal_record(**overrides):
    record = {
        "doc_id": "d1",
        "tokens": ["budget", "approved", "in", "1995", "."],
        "sentences": [[0, 5]],
        "dep_edges": [[1, 0, "nsubj"], [1, 3, "obl"], [3, 2, "case"], [1, 4, "punct"]],
        "temporal_nodes": [
            {"id": "t1", "kind": "TIMEX", "span": [3, 4], "value": "1995"},
            {"id": "e1", "kind": "EVENT", "span": [1, 2]},
            {"id": "dct", "kind": "DCT", "span": []},
        ],
        "temporal_edges": [["t1", "e1", "INCLUDES"], ["e1", "dct", "IS_INCLUDED"]],
        "gold_year": 1995,
    }
    record.update(overrides)
    return record


def test_parse_minimal_record():
    doc, dropped = parse_record(minimal_record())
    assert doc.doc_id == "d1"
    assert doc.n_tokens == 5
    assert doc.gold_year == 1995
    assert doc.has_year_mention
    assert not dropped
    assert doc.dct_node().node_id == "dct"


def test_unknown_relations_dropped_with_count():
    record = minimal_record(
        temporal_edges=[["t1", "e1", "INCLUDES"], ["t1", "e1", "IBEFORE"], ["e1", "dct", "ibefore"]]
    )
    doc, dropped = parse_record(record)
    assert len(doc.temporal_edges) == 1
    assert dropped == {"IBEFORE": 1, "ibefore": 1}


def test_has_year_mention_requires_four_digit_value():
    record = minimal_record(
        tokens=["approved", "two", "years", "ago", "."],
        dep_edges=[],
        temporal_nodes=[
            {"id": "t1", "kind": "TIMEX", "span": [1, 4], "value": "P2Y"},
            {"id": "dct", "kind": "DCT", "span": []},
        ],
        temporal_edges=[],
    )
    doc, _ = parse_record(record)
    assert not doc.has_year_mention


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda r: r.update(sentences=[[0, 3]]), "sentences"),
        (lambda r: r.update(sentences=[[0, 3], [2, 5]]), "sentences"),
        (lambda r: r.update(sentences=[[0, 5], [5, 5]]), "sentences"),
        (lambda r: r.update(dep_edges=[[0, 9, "x"]]), "dep_edges"),
        (lambda r: r.update(dep_edges=[[2, 2, "x"]]), "dep_edges"),
        (lambda r: r.update(extra_field=1), "record"),
        (lambda r: r.pop("tokens"), "record"),
        (lambda r: r.update(gold_year="1995"), "gold_year"),
        (lambda r: r["temporal_nodes"].append({"id": "t9", "kind": "YEAR", "span": [0, 1]}), "kind"),
        (lambda r: r["temporal_nodes"].append({"id": "t1", "kind": "EVENT", "span": [0, 1]}), "id"),
        (lambda r: r["temporal_nodes"].append({"id": "d2", "kind": "DCT", "span": []}), "DCT"),
        (lambda r: r["temporal_nodes"].append({"id": "e9", "kind": "EVENT", "span": [4, 9]}), "span"),
        (lambda r: r["temporal_nodes"].append({"id": "e9", "kind": "EVENT", "span": []}), "span"),
        (lambda r: r["temporal_edges"].append(["t1", "zz", "SAME"]), "unknown node"),
        (lambda r: r["temporal_edges"].append(["t1", "t1", "SAME"]), "self-relation"),
    ],
)
def test_invalid_records_name_the_field(mutate, field):
    record = minimal_record()
    mutate(record)
    with pytest.raises(ValidationError) as err:
        parse_record(record)
    assert field.split()[0].lower() in str(err.value).lower()


def test_sentence_crossing_dep_edge_rejected():
    record = minimal_record(
        tokens=["a", "b", ".", "c", "d"],
        sentences=[[0, 3], [3, 5]],
        dep_edges=[[1, 3, "dep"]],
        temporal_nodes=[{"id": "dct", "kind": "DCT", "span": []}],
        temporal_edges=[],
    )
    with pytest.raises(ValidationError) as err:
        parse_record(record)
    assert "crosses" in str(err.value)


def test_value_only_on_timex():
    record = minimal_record()
    record["temporal_nodes"][1]["value"] = "1995"
    with pytest.raises(ValidationError):
        parse_record(record)


def test_roundtrip_is_bit_exact():
    doc, _ = parse_record(minimal_record())
    line = to_json_line(doc)
    doc2, _ = parse_json_line(line)
    assert doc2 == doc
    assert to_json_line(doc2) == line


def test_roundtrip_canonicalises_key_order():
    record = minimal_record()
    scrambled = json.dumps(dict(reversed(list(record.items()))))
    doc, _ = parse_json_line(scrambled)
    doc2, _ = parse_json_line(to_json_line(doc))
    assert doc == doc2


def test_make_document_rejects_empty():
    with pytest.raises(ValidationError):
        make_document("x", [], [], [], [TemporalNode("dct", NodeKind.DCT, None)], [])


def test_make_document_happy_path_equivalent_to_parse():
    doc, _ = parse_record(minimal_record())
    rebuilt = make_document(
        doc.doc_id, list(doc.tokens), list(doc.sentences), list(doc.dep_edges),
        list(doc.temporal_nodes), list(doc.temporal_edges), doc.gold_year,
    )
    assert rebuilt == doc
    assert isinstance(rebuilt.temporal_edges[0][2], TemporalRelation)
