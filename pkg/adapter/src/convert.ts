/** Pure conversion from tool payloads to one annotation record.
 *
 * The output is a deterministic function of the payload bytes: node order
 * follows the entity list (creation-time node last), edge order follows the
 * link list, and serialisation is canonical. Relations outside the kept five
 * are dropped and counted; structural problems raise ConversionError.
 */

import {
  AnnotationNode,
  AnnotationRecord,
  ConversionError,
  ConversionResult,
  RawToolOutput,
} from "./types";

export const KEPT_RELATIONS = new Set(["AFTER", "BEFORE", "SAME", "INCLUDES", "IS_INCLUDED"]);

export const DEFAULT_DCT_ID = "dct";

const ENTITY_KINDS: Record<string, "EVENT" | "TIMEX"> = {
  EVENT: "EVENT",
  TIMEX: "TIMEX",
  TIMEX3: "TIMEX",
};

export function convert(raw: RawToolOutput, docId: string, goldYear?: number): ConversionResult {
  const tokens: string[] = [];
  const sentences: [number, number][] = [];
  const depEdges: [number, number, string][] = [];

  for (const [s, sentence] of raw.parse.sentences.entries()) {
    const base = tokens.length;
    for (const [i, token] of sentence.tokens.entries()) {
      if (token.index !== i + 1) {
        throw new ConversionError(docId, `sentence ${s}: token indices are not contiguous`);
      }
      tokens.push(token.word);
    }
    sentences.push([base, tokens.length]);
    for (const dep of sentence.basicDependencies) {
      if (dep.governor === 0) continue; // virtual root
      const n = sentence.tokens.length;
      if (dep.governor < 1 || dep.governor > n || dep.dependent < 1 || dep.dependent > n) {
        throw new ConversionError(docId, `sentence ${s}: dependency endpoint outside the sentence`);
      }
      depEdges.push([base + dep.governor - 1, base + dep.dependent - 1, dep.dep]);
    }
  }
  if (tokens.length === 0) {
    throw new ConversionError(docId, "parse produced no tokens");
  }
  if (raw.temporal.token_count !== tokens.length) {
    throw new ConversionError(
      docId,
      `token counts disagree: parse has ${tokens.length}, temporal extractor saw ${raw.temporal.token_count}`,
    );
  }

  const dctId = raw.temporal.dct_id ?? DEFAULT_DCT_ID;
  const nodes: AnnotationNode[] = [];
  const known = new Set<string>();
  for (const entity of raw.temporal.entities) {
    if (known.has(entity.id)) {
      throw new ConversionError(docId, `duplicate entity id ${entity.id}`);
    }
    if (entity.id === dctId) {
      throw new ConversionError(docId, `entity id ${entity.id} collides with the DCT placeholder`);
    }
    const kind = ENTITY_KINDS[entity.type.toUpperCase()];
    if (kind === undefined) {
      throw new ConversionError(docId, `entity ${entity.id} has unknown type ${entity.type}`);
    }
    const [start, end] = entity.span;
    if (!(start >= 0 && start < end && end <= tokens.length)) {
      throw new ConversionError(docId, `entity ${entity.id} span [${start},${end}) is out of range`);
    }
    known.add(entity.id);
    const node: AnnotationNode = { id: entity.id, kind, span: [start, end] };
    const value = raw.timex.values[entity.id];
    if (value !== undefined) {
      if (kind !== "TIMEX") {
        throw new ConversionError(docId, `normalised value attached to non-TIMEX entity ${entity.id}`);
      }
      node.value = value;
    }
    nodes.push(node);
  }
  for (const id of Object.keys(raw.timex.values)) {
    if (!known.has(id)) {
      throw new ConversionError(docId, `normalised value for unknown mention ${id}`);
    }
  }
  nodes.push({ id: dctId, kind: "DCT", span: [] });
  known.add(dctId);

  const droppedRelations: Record<string, number> = {};
  const edges: [string, string, string][] = [];
  for (const link of raw.temporal.tlinks) {
    const relation = link.relation.toUpperCase();
    if (!KEPT_RELATIONS.has(relation)) {
      droppedRelations[relation] = (droppedRelations[relation] ?? 0) + 1;
      continue;
    }
    if (!known.has(link.source_id) || !known.has(link.target_id)) {
      throw new ConversionError(
        docId,
        `link references unknown node ${!known.has(link.source_id) ? link.source_id : link.target_id}`,
      );
    }
    if (link.source_id === link.target_id) {
      throw new ConversionError(docId, `self-relation on node ${link.source_id}`);
    }
    edges.push([link.source_id, link.target_id, relation]);
  }

  const record: AnnotationRecord = {
    doc_id: docId,
    tokens,
    sentences,
    dep_edges: depEdges,
    temporal_nodes: nodes,
    temporal_edges: edges,
  };
  if (goldYear !== undefined) {
    record.gold_year = goldYear;
  }
  return { record, droppedRelations };
}
