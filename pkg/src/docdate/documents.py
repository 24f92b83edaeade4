"""Annotated-document types and the line-oriented annotation file format.

One document per line, UTF-8 JSON, schema::

    {doc_id, tokens[], sentences[[start,end)], dep_edges[[head,dep,"label"]],
     temporal_nodes[{id, kind, span[start,end), value?}],
     temporal_edges[[src,dst,"RELATION"]], gold_year?}

``annotation.schema.json`` next to this module is the normative schema;
the validator here reproduces it with field-level diagnostics. All types
are immutable once validated, so documents can be shared freely between
parallel readers.
"""

from __future__ import annotations

import enum
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)


class ValidationError(ValueError):
    """An annotation record violates the schema; message names the field."""


class TemporalRelation(enum.Enum):
    AFTER = "AFTER"
    BEFORE = "BEFORE"
    SAME = "SAME"
    INCLUDES = "INCLUDES"
    IS_INCLUDED = "IS_INCLUDED"


KEPT_RELATIONS = frozenset(r.value for r in TemporalRelation)


class NodeKind(enum.Enum):
    EVENT = "EVENT"
    TIMEX = "TIMEX"
    DCT = "DCT"


@dataclass(frozen=True)
class TemporalNode:
    node_id: str
    kind: NodeKind
    span: tuple[int, int] | None  # None for the DCT node
    value: str | None = None


@dataclass(frozen=True)
class AnnotatedDocument:
    doc_id: str
    tokens: tuple[str, ...]
    sentences: tuple[tuple[int, int], ...]
    dep_edges: tuple[tuple[int, int, str], ...]  # (head, dependent, label)
    temporal_nodes: tuple[TemporalNode, ...]
    temporal_edges: tuple[tuple[str, str, TemporalRelation], ...]
    gold_year: int | None
    has_year_mention: bool

    @property
    def n_tokens(self) -> int:
        return len(self.tokens)

    def dct_node(self) -> TemporalNode:
        return next(n for n in self.temporal_nodes if n.kind is NodeKind.DCT)


_YEAR_RE = re.compile(r"(?<!\d)\d{4}(?!\d)")


def _mentions_year(nodes: tuple[TemporalNode, ...]) -> bool:
    return any(
        n.kind is NodeKind.TIMEX and n.value is not None and _YEAR_RE.search(n.value)
        for n in nodes
    )


def make_document(
    doc_id: str,
    tokens: list[str] | tuple[str, ...],
    sentences,
    dep_edges,
    temporal_nodes,
    temporal_edges,
    gold_year: int | None = None,
) -> AnnotatedDocument:
    """Validate the parts and assemble an immutable document."""
    doc = AnnotatedDocument(
        doc_id=str(doc_id),
        tokens=tuple(tokens),
        sentences=tuple((int(a), int(b)) for a, b in sentences),
        dep_edges=tuple((int(h), int(d), str(l)) for h, d, l in dep_edges),
        temporal_nodes=tuple(temporal_nodes),
        temporal_edges=tuple(temporal_edges),
        gold_year=gold_year,
        has_year_mention=_mentions_year(tuple(temporal_nodes)),
    )
    validate_document(doc)
    return doc


def validate_document(doc: AnnotatedDocument) -> None:
    n = len(doc.tokens)
    if not doc.doc_id:
        raise ValidationError("doc_id: must be a non-empty string")
    if n == 0:
        raise ValidationError("tokens: document has no tokens")

    # sentences must partition [0, n) contiguously
    cursor = 0
    for i, (start, end) in enumerate(doc.sentences):
        if start != cursor:
            raise ValidationError(f"sentences[{i}]: range [{start},{end}) does not start at {cursor}")
        if end <= start:
            raise ValidationError(f"sentences[{i}]: empty or inverted range [{start},{end})")
        cursor = end
    if cursor != n:
        raise ValidationError(f"sentences: ranges cover [0,{cursor}) but the document has {n} tokens")

    def sentence_of(tok: int) -> int:
        for i, (start, end) in enumerate(doc.sentences):
            if start <= tok < end:
                return i
        raise AssertionError(tok)

    for i, (head, dep, label) in enumerate(doc.dep_edges):
        for role, tok in (("head", head), ("dependent", dep)):
            if not 0 <= tok < n:
                raise ValidationError(f"dep_edges[{i}].{role}: token index {tok} outside [0,{n})")
        if head == dep:
            raise ValidationError(f"dep_edges[{i}]: head and dependent are the same token {head}")
        if not label:
            raise ValidationError(f"dep_edges[{i}].label: empty label")
        if sentence_of(head) != sentence_of(dep):
            raise ValidationError(f"dep_edges[{i}]: edge ({head},{dep}) crosses a sentence boundary")

    ids: set[str] = set()
    dct_count = 0
    for i, node in enumerate(doc.temporal_nodes):
        if not node.node_id:
            raise ValidationError(f"temporal_nodes[{i}].id: empty id")
        if node.node_id in ids:
            raise ValidationError(f"temporal_nodes[{i}].id: duplicate id {node.node_id!r}")
        ids.add(node.node_id)
        if node.kind is NodeKind.DCT:
            dct_count += 1
            if node.span is not None:
                raise ValidationError(f"temporal_nodes[{i}].span: DCT node must have an empty span")
            if node.value is not None:
                raise ValidationError(f"temporal_nodes[{i}].value: DCT node cannot carry a value")
        else:
            if node.span is None:
                raise ValidationError(f"temporal_nodes[{i}].span: {node.kind.value} node needs a span")
            start, end = node.span
            if not (0 <= start < end <= n):
                raise ValidationError(
                    f"temporal_nodes[{i}].span: [{start},{end}) invalid for {n} tokens"
                )
            if node.value is not None and node.kind is not NodeKind.TIMEX:
                raise ValidationError(f"temporal_nodes[{i}].value: only TIMEX nodes carry a value")
    if dct_count != 1:
        raise ValidationError(f"temporal_nodes: expected exactly one DCT node, found {dct_count}")

    for i, (src, dst, rel) in enumerate(doc.temporal_edges):
        if src not in ids:
            raise ValidationError(f"temporal_edges[{i}].src: unknown node id {src!r}")
        if dst not in ids:
            raise ValidationError(f"temporal_edges[{i}].dst: unknown node id {dst!r}")
        if src == dst:
            raise ValidationError(f"temporal_edges[{i}]: self-relation on node {src!r}")
        if not isinstance(rel, TemporalRelation):
            raise ValidationError(f"temporal_edges[{i}].relation: {rel!r} is not a kept relation")

    if doc.gold_year is not None and not isinstance(doc.gold_year, int):
        raise ValidationError(f"gold_year: expected an integer, got {type(doc.gold_year).__name__}")


# -- JSON record round-trip ----------------------------------------------------

_RECORD_KEYS = {"doc_id", "tokens", "sentences", "dep_edges", "temporal_nodes", "temporal_edges"}
_OPTIONAL_KEYS = {"gold_year"}
_NODE_KEYS = {"id", "kind", "span"}
_NODE_OPTIONAL = {"value"}


def _expect(cond: bool, field: str, msg: str) -> None:
    if not cond:
        raise ValidationError(f"{field}: {msg}")


def parse_record(obj) -> tuple[AnnotatedDocument, Counter]:
    """Build a validated document from a decoded JSON object.

    Returns the document plus a counter of dropped (non-kept) relation
    names; dropping is deliberate, every other deviation raises.
    """
    _expect(isinstance(obj, dict), "record", "expected a JSON object")
    extra = set(obj) - _RECORD_KEYS - _OPTIONAL_KEYS
    _expect(not extra, "record", f"unknown fields {sorted(extra)}")
    missing = _RECORD_KEYS - set(obj)
    _expect(not missing, "record", f"missing fields {sorted(missing)}")

    _expect(isinstance(obj["doc_id"], str), "doc_id", "expected a string")
    _expect(isinstance(obj["tokens"], list) and all(isinstance(t, str) for t in obj["tokens"]),
            "tokens", "expected a list of strings")

    def int_pair(value, field):
        _expect(isinstance(value, list) and len(value) == 2
                and all(isinstance(v, int) and not isinstance(v, bool) for v in value),
                field, "expected [start, end] integers")
        return value[0], value[1]

    sentences = [int_pair(s, f"sentences[{i}]") for i, s in enumerate(obj["sentences"])]

    dep_edges = []
    for i, e in enumerate(obj["dep_edges"]):
        _expect(isinstance(e, list) and len(e) == 3, f"dep_edges[{i}]", "expected [head, dep, label]")
        head, dep, label = e
        _expect(isinstance(head, int) and isinstance(dep, int) and not isinstance(head, bool)
                and not isinstance(dep, bool), f"dep_edges[{i}]", "head/dependent must be integers")
        _expect(isinstance(label, str), f"dep_edges[{i}].label", "expected a string")
        dep_edges.append((head, dep, label))

    nodes = []
    for i, raw in enumerate(obj["temporal_nodes"]):
        field = f"temporal_nodes[{i}]"
        _expect(isinstance(raw, dict), field, "expected an object")
        extra = set(raw) - _NODE_KEYS - _NODE_OPTIONAL
        _expect(not extra, field, f"unknown fields {sorted(extra)}")
        missing = _NODE_KEYS - set(raw)
        _expect(not missing, field, f"missing fields {sorted(missing)}")
        _expect(isinstance(raw["id"], str), f"{field}.id", "expected a string")
        _expect(raw["kind"] in NodeKind.__members__, f"{field}.kind",
                f"{raw['kind']!r} is not one of EVENT/TIMEX/DCT")
        kind = NodeKind[raw["kind"]]
        _expect(isinstance(raw["span"], list), f"{field}.span", "expected a list")
        span = None if raw["span"] == [] else int_pair(raw["span"], f"{field}.span")
        value = raw.get("value")
        _expect(value is None or isinstance(value, str), f"{field}.value", "expected a string")
        nodes.append(TemporalNode(raw["id"], kind, span, value))

    dropped: Counter = Counter()
    edges = []
    for i, e in enumerate(obj["temporal_edges"]):
        field = f"temporal_edges[{i}]"
        _expect(isinstance(e, list) and len(e) == 3, field, "expected [src, dst, relation]")
        src, dst, rel = e
        _expect(isinstance(src, str) and isinstance(dst, str), field, "src/dst must be node ids")
        _expect(isinstance(rel, str), f"{field}.relation", "expected a string")
        if rel not in KEPT_RELATIONS:
            dropped[rel] += 1
            continue
        edges.append((src, dst, TemporalRelation(rel)))

    gold_year = obj.get("gold_year")
    _expect(gold_year is None or (isinstance(gold_year, int) and not isinstance(gold_year, bool)),
            "gold_year", "expected an integer")

    doc = make_document(obj["doc_id"], obj["tokens"], sentences, dep_edges, nodes, edges, gold_year)
    return doc, dropped


def to_record(doc: AnnotatedDocument) -> dict:
    nodes = []
    for n in doc.temporal_nodes:
        raw: dict = {"id": n.node_id, "kind": n.kind.value,
                     "span": [] if n.span is None else list(n.span)}
        if n.value is not None:
            raw["value"] = n.value
        nodes.append(raw)
    record: dict = {
        "doc_id": doc.doc_id,
        "tokens": list(doc.tokens),
        "sentences": [list(s) for s in doc.sentences],
        "dep_edges": [list(e) for e in doc.dep_edges],
        "temporal_nodes": nodes,
        "temporal_edges": [[s, d, r.value] for s, d, r in doc.temporal_edges],
    }
    if doc.gold_year is not None:
        record["gold_year"] = doc.gold_year
    return record


def to_json_line(doc: AnnotatedDocument) -> str:
    """Canonical single-line serialisation: sorted keys, no spaces, raw UTF-8."""
    return json.dumps(to_record(doc), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def parse_json_line(line: str) -> tuple[AnnotatedDocument, Counter]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"record: invalid JSON ({exc.msg})") from exc
    return parse_record(obj)


def read_annotation_file(path: str | Path) -> list[AnnotatedDocument]:
    """Read one document per line; dropped-relation counts go to the log.

    Raises ValidationError with a ``path:line`` prefix on the first bad record.
    """
    docs = []
    dropped: Counter = Counter()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc, drops = parse_json_line(line)
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            dropped.update(drops)
            docs.append(doc)
    if dropped:
        detail = ", ".join(f"{name} x{count}" for name, count in sorted(dropped.items()))
        logger.warning("%s: dropped relations outside the kept five: %s", path, detail)
    return docs


def write_annotation_file(docs, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(to_json_line(doc) + "\n")
