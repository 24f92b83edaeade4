export { canonicalStringify } from "./canonical";
export { convert, KEPT_RELATIONS, DEFAULT_DCT_ID } from "./convert";
export { batchIngest, readSourceDir, DOCS_FILE, MANIFEST_FILE } from "./ingest";
export { FixturePayloadSource, HttpPayloadSource } from "./services";
export type { PayloadSource, SourceDocument } from "./services";
export type {
  AnnotationRecord,
  AnnotationNode,
  ConversionResult,
  ParsePayload,
  RawToolOutput,
  TemporalPayload,
  TimexPayload,
  Tlink,
} from "./types";
export { ConversionError } from "./types";
