/** Payload shapes produced by the external NLP tools, and the annotation
 * record shape the primary pipeline consumes. */

/** One token of the parse service's JSON output (1-based index per sentence). */
export interface ParseToken {
  index: number;
  word: string;
}

/** Basic-dependency triple; governor 0 denotes the virtual root. */
export interface ParseDependency {
  governor: number;
  dependent: number;
  dep: string;
}

export interface ParseSentence {
  tokens: ParseToken[];
  basicDependencies: ParseDependency[];
}

/** Parse service response for one document. */
export interface ParsePayload {
  sentences: ParseSentence[];
}

/** Event/time-mention entity from the temporal extractor; spans are
 * document-global half-open token ranges. */
export interface TemporalEntity {
  id: string;
  type: string; // EVENT | TIMEX | TIMEX3
  span: [number, number];
}

/** TLINK-style relation record. */
export interface Tlink {
  source_id: string;
  target_id: string;
  relation: string;
}

/** Temporal extractor response. The extractor runs with the creation time
 * supplied as unknown; links may still reference the placeholder id in
 * `dct_id` (default "dct"). `token_count` is the tokenisation the extractor
 * saw and must agree with the parse. */
export interface TemporalPayload {
  token_count: number;
  entities: TemporalEntity[];
  tlinks: Tlink[];
  dct_id?: string;
}

/** Date normaliser response: normalised value per time-mention id. */
export interface TimexPayload {
  values: Record<string, string>;
}

export interface RawToolOutput {
  parse: ParsePayload;
  temporal: TemporalPayload;
  timex: TimexPayload;
}

/** Annotation record in the primary pipeline's schema. */
export interface AnnotationNode {
  id: string;
  kind: "EVENT" | "TIMEX" | "DCT";
  span: number[];
  value?: string;
}

export interface AnnotationRecord {
  doc_id: string;
  tokens: string[];
  sentences: [number, number][];
  dep_edges: [number, number, string][];
  temporal_nodes: AnnotationNode[];
  temporal_edges: [string, string, string][];
  gold_year?: number;
}

export interface ConversionResult {
  record: AnnotationRecord;
  /** relation name (as seen, post-uppercase) -> dropped count */
  droppedRelations: Record<string, number>;
}

export class ConversionError extends Error {
  constructor(public readonly docId: string, message: string) {
    super(`${docId}: ${message}`);
    this.name = "ConversionError";
  }
}
