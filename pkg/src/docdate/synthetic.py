"""Synthetic dating corpus whose labels require temporal-graph composition.

Every document anchors a year Y in one sentence ("The charter was
adopted in 1996 .") and shifts it with an offset construction in another
("three years after , the senate approved the budget ."); the gold year
is Y plus or minus the offset. The relation edges wire the anchor time
mention to the anchored event, the offset mention to both events, and
the second event (plus both mentions) to the creation-time node, so the
gold year is recoverable from temporal_nodes/temporal_edges alone.

At "hard" difficulty a decoy sentence with the same surface frame but a
different year is added, with its mention and event left disconnected
from the graph. The two year mentions are then indistinguishable from
the token sequence, so any model that ignores the graph caps out near
chance between them.

``derive_year`` re-derives the label by fixpoint propagation over the
edges and is kept independent of the generation arithmetic; generation
fails loudly if the two ever disagree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .documents import (
    AnnotatedDocument,
    NodeKind,
    TemporalNode,
    TemporalRelation,
    make_document,
)


class GenerationError(ValueError):
    """Inconsistent template parameters or a generator/interpreter mismatch."""


ANCHOR_NOUNS = ("charter", "accord", "pact", "treaty", "statute", "deal")
ANCHOR_VERBS = ("adopted", "signed", "ratified", "drafted", "enacted", "announced")
SUBJECTS = ("senate", "council", "ministry", "board", "assembly", "agency")
EVENT_VERBS = ("approved", "launched", "endorsed", "reviewed", "extended", "amended")
OBJECTS = ("budget", "reform", "project", "measure", "proposal", "plan")

NUMBER_WORDS = ("zero", "one", "two", "three", "four", "five", "six")


@dataclass
class _Block:
    tokens: list[str]
    deps: list[tuple[int, int, str]]
    marks: dict[str, tuple[int, int]]  # name -> sentence-relative span


def _anchor_block(noun: str, verb: str, year: int) -> _Block:
    tokens = ["The", noun, "was", verb, "in", str(year), "."]
    deps = [(3, 1, "nsubj"), (1, 0, "det"), (3, 2, "aux"),
            (3, 5, "obl"), (5, 4, "case"), (3, 6, "punct")]
    return _Block(tokens, deps, {"year": (5, 6), "event": (3, 4)})


def _offset_block(k: int, direction: str, subj: str, verb: str, obj: str) -> _Block:
    unit = "year" if k == 1 else "years"
    tokens = [NUMBER_WORDS[k].capitalize(), unit, direction, ",",
              "the", subj, verb, "the", obj, "."]
    deps = [(6, 5, "nsubj"), (5, 4, "det"), (6, 8, "obj"), (8, 7, "det"),
            (6, 1, "obl"), (1, 0, "nummod"), (1, 2, "case"),
            (6, 3, "punct"), (6, 9, "punct")]
    return _Block(tokens, deps, {"offset": (0, 3), "event": (6, 7)})


def _same_year_block(subj: str, verb: str, obj: str) -> _Block:
    tokens = ["That", "same", "year", ",", "the", subj, verb, "the", obj, "."]
    deps = [(6, 5, "nsubj"), (5, 4, "det"), (6, 8, "obj"), (8, 7, "det"),
            (6, 2, "obl"), (2, 0, "det"), (2, 1, "amod"),
            (6, 3, "punct"), (6, 9, "punct")]
    return _Block(tokens, deps, {"event": (6, 7)})


def make_offset_document(doc_id: str, anchor_year: int, offset: int, direction: str,
                         rng: np.random.Generator, decoy_year: int | None = None) -> tuple[AnnotatedDocument, dict]:
    """One templated document; gold year = anchor_year +/- offset.

    ``direction`` is "after", "before", or (offset 0 only) "same".
    ``decoy_year`` adds the hard-mode distractor sentence.
    """
    if direction not in ("after", "before", "same"):
        raise GenerationError(f"unknown direction {direction!r}")
    if direction == "same" and offset != 0:
        raise GenerationError("direction 'same' requires a zero offset")
    if direction != "same" and offset < 1:
        raise GenerationError(f"offset must be >= 1 for direction {direction!r}")
    if not 0 <= offset < len(NUMBER_WORDS):
        raise GenerationError(f"offset {offset} has no surface form")
    gold = anchor_year + (offset if direction == "after" else -offset if direction == "before" else 0)
    if decoy_year is not None and decoy_year in (anchor_year, gold):
        raise GenerationError("decoy year must differ from the anchor and gold years")

    blocks: list[tuple[str, _Block]] = [
        ("anchor", _anchor_block(str(rng.choice(ANCHOR_NOUNS)), str(rng.choice(ANCHOR_VERBS)),
                                 anchor_year)),
    ]
    subj, verb, obj = (str(rng.choice(pool)) for pool in (SUBJECTS, EVENT_VERBS, OBJECTS))
    if direction == "same":
        blocks.append(("shift", _same_year_block(subj, verb, obj)))
    else:
        blocks.append(("shift", _offset_block(offset, direction, subj, verb, obj)))
    if decoy_year is not None:
        blocks.append(("decoy", _anchor_block(str(rng.choice(ANCHOR_NOUNS)),
                                              str(rng.choice(ANCHOR_VERBS)), decoy_year)))

    order = rng.permutation(len(blocks))
    tokens: list[str] = []
    sentences: list[tuple[int, int]] = []
    deps: list[tuple[int, int, str]] = []
    spans: dict[str, tuple[int, int]] = {}
    for pos in order:
        name, block = blocks[pos]
        base = len(tokens)
        tokens.extend(block.tokens)
        sentences.append((base, base + len(block.tokens)))
        deps.extend((base + h, base + d, label) for h, d, label in block.deps)
        for mark, (s, e) in block.marks.items():
            spans[f"{name}.{mark}"] = (base + s, base + e)

    nodes = [
        TemporalNode("t_anchor", NodeKind.TIMEX, spans["anchor.year"], str(anchor_year)),
        TemporalNode("e_anchor", NodeKind.EVENT, spans["anchor.event"]),
        TemporalNode("e_shift", NodeKind.EVENT, spans["shift.event"]),
    ]
    edges = [
        ("t_anchor", "e_anchor", TemporalRelation.INCLUDES),
        ("e_shift", "dct", TemporalRelation.IS_INCLUDED),
    ]
    if direction == "same":
        edges.append(("e_anchor", "e_shift", TemporalRelation.SAME))
        edges.append(("t_anchor", "dct", TemporalRelation.INCLUDES))
    else:
        rel = TemporalRelation.AFTER if direction == "after" else TemporalRelation.BEFORE
        anchor_vs_dct = TemporalRelation.BEFORE if direction == "after" else TemporalRelation.AFTER
        nodes.append(TemporalNode("t_offset", NodeKind.TIMEX, spans["shift.offset"], f"P{offset}Y"))
        edges += [
            ("t_offset", "e_anchor", rel),
            ("t_offset", "e_shift", TemporalRelation.INCLUDES),
            ("t_offset", "dct", TemporalRelation.INCLUDES),
            ("t_anchor", "dct", anchor_vs_dct),
        ]
    if decoy_year is not None:
        nodes.append(TemporalNode("t_decoy", NodeKind.TIMEX, spans["decoy.year"], str(decoy_year)))
        nodes.append(TemporalNode("e_decoy", NodeKind.EVENT, spans["decoy.event"]))
    nodes.append(TemporalNode("dct", NodeKind.DCT, None))

    doc = make_document(doc_id, tokens, sentences, deps, nodes, edges, gold_year=gold)
    derivation = {"anchor_year": anchor_year, "offset": offset,
                  "direction": direction, "gold": gold,
                  "decoy_year": decoy_year}
    derived = derive_year(doc)
    if derived != gold:
        raise GenerationError(
            f"{doc_id}: interpreter derives {derived}, generator expected {gold}")
    return doc, derivation


def generate_synthetic_corpus(n_docs: int, year_start: int, year_end: int,
                              seed: int, difficulty: str = "easy",
                              max_offset: int = 4) -> tuple[list[AnnotatedDocument], dict[str, dict]]:
    """Deterministic corpus of ``n_docs`` templated documents.

    Gold years are sampled uniformly over the range. Difficulty "easy"
    allows zero offsets and has no decoys; "hard" forces a nonzero
    offset and adds the decoy sentence, so the anchor year is never the
    answer and the surface form never identifies the anchor.
    """
    width = year_end - year_start + 1
    if width < 3:
        raise GenerationError(f"year range [{year_start},{year_end}] is narrower than 3")
    if difficulty not in ("easy", "hard"):
        raise GenerationError(f"unknown difficulty {difficulty!r}")
    max_offset = min(max_offset, width - 1, len(NUMBER_WORDS) - 1)
    rng = np.random.default_rng(seed)
    docs: list[AnnotatedDocument] = []
    derivations: dict[str, dict] = {}
    for i in range(n_docs):
        gold = int(rng.integers(year_start, year_end + 1))
        while True:
            if difficulty == "easy":
                offset = int(rng.integers(0, max_offset + 1))
            else:
                offset = int(rng.integers(1, max_offset + 1))
            direction = "same" if offset == 0 else ("after", "before")[int(rng.integers(0, 2))]
            anchor = gold - offset if direction == "after" else gold + offset if direction == "before" else gold
            if year_start <= anchor <= year_end:
                break
        decoy = None
        if difficulty == "hard":
            candidates = [y for y in range(year_start, year_end + 1) if y not in (anchor, gold)]
            decoy = int(rng.choice(candidates))
        doc_id = f"synth-{seed}-{i:05d}"
        doc, derivation = make_offset_document(doc_id, anchor, offset, direction, rng,
                                               decoy_year=decoy)
        docs.append(doc)
        derivations[doc_id] = derivation
    return docs, derivations


# -- independent label interpreter ---------------------------------------------

_YEAR_VALUE = re.compile(r"\d{4}")
_DURATION_VALUE = re.compile(r"P(\d+)Y")


class InterpreterConflict(ValueError):
    """Edge constraints assign two different years to one node."""


def derive_year(doc: AnnotatedDocument) -> int | None:
    """Re-derive the creation year from the temporal graph alone.

    Year-valued mentions seed the assignment; SAME/INCLUDES/IS_INCLUDED
    propagate year-granularity equality; AFTER/BEFORE propagate an exact
    shift when the mention side carries a year duration (``PkY``), and
    are treated as unquantified otherwise. Returns None when the DCT
    node is unreachable from any seed.
    """
    nodes = {n.node_id: n for n in doc.temporal_nodes}
    years: dict[str, int] = {}

    def assign(node_id: str, year: int) -> bool:
        if node_id in years:
            if years[node_id] != year:
                raise InterpreterConflict(
                    f"{doc.doc_id}: node {node_id!r} resolves to both {years[node_id]} and {year}")
            return False
        years[node_id] = year
        return True

    for node in doc.temporal_nodes:
        if node.kind is NodeKind.TIMEX and node.value and _YEAR_VALUE.fullmatch(node.value):
            years[node.node_id] = int(node.value)

    def duration_of(node_id: str) -> int | None:
        value = nodes[node_id].value or ""
        match = _DURATION_VALUE.fullmatch(value)
        return int(match.group(1)) if match else None

    changed = True
    while changed:
        changed = False
        for src, dst, rel in doc.temporal_edges:
            if rel in (TemporalRelation.SAME, TemporalRelation.INCLUDES,
                       TemporalRelation.IS_INCLUDED):
                if src in years:
                    changed |= assign(dst, years[src])
                if dst in years:
                    changed |= assign(src, years[dst])
            else:  # AFTER / BEFORE: quantified only via a duration-valued mention
                delta = duration_of(src)
                if delta is None:
                    continue
                sign = 1 if rel is TemporalRelation.AFTER else -1
                if dst in years:
                    changed |= assign(src, years[dst] + sign * delta)
                if src in years:
                    changed |= assign(dst, years[src] - sign * delta)
    return years.get(doc.dct_node().node_id)
