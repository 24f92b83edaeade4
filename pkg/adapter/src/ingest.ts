/** Batch conversion: read source documents, fetch tool payloads through a
 * bounded worker pool, convert, and write a corpus directory the primary
 * validator accepts. Failed documents are skipped and listed in the
 * manifest; output bytes are a pure function of the inputs. */

import { promises as fs } from "node:fs";
import * as path from "node:path";

import { canonicalStringify } from "./canonical";
import { convert } from "./convert";
import { PayloadSource, SourceDocument } from "./services";
import { AnnotationRecord } from "./types";

export interface IngestOptions {
  concurrency?: number;
}

export interface IngestManifest {
  format: string;
  version: number;
  files: string[];
  documents: number;
  errors: { doc_id: string; error: string }[];
  dropped_relations: Record<string, number>;
}

export const DOCS_FILE = "docs.jsonl";
export const MANIFEST_FILE = "manifest.json";

export async function readSourceDir(inputDir: string): Promise<SourceDocument[]> {
  const names = (await fs.readdir(inputDir)).filter((n) => n.endsWith(".json")).sort();
  const docs: SourceDocument[] = [];
  for (const name of names) {
    const parsed = JSON.parse(await fs.readFile(path.join(inputDir, name), "utf-8"));
    if (typeof parsed.doc_id !== "string" || typeof parsed.text !== "string") {
      throw new Error(`${name}: source document needs doc_id and text`);
    }
    docs.push(parsed as SourceDocument);
  }
  return docs;
}

async function mapBounded<T, R>(items: T[], limit: number, fn: (item: T) => Promise<R>): Promise<R[]> {
  const results: R[] = new Array(items.length);
  let next = 0;
  const workers = Array.from({ length: Math.max(1, Math.min(limit, items.length)) }, async () => {
    while (true) {
      const index = next++;
      if (index >= items.length) return;
      results[index] = await fn(items[index]!);
    }
  });
  await Promise.all(workers);
  return results;
}

export async function batchIngest(
  docs: SourceDocument[],
  source: PayloadSource,
  outDir: string,
  options: IngestOptions = {},
): Promise<IngestManifest> {
  type Outcome =
    | { record: AnnotationRecord; dropped: Record<string, number> }
    | { docId: string; error: string };

  const outcomes = await mapBounded(docs, options.concurrency ?? 4, async (doc): Promise<Outcome> => {
    try {
      const raw = await source.fetch(doc);
      const { record, droppedRelations } = convert(raw, doc.doc_id, doc.gold_year);
      return { record, dropped: droppedRelations };
    } catch (error) {
      return { docId: doc.doc_id, error: error instanceof Error ? error.message : String(error) };
    }
  });

  const records: AnnotationRecord[] = [];
  const errors: { doc_id: string; error: string }[] = [];
  const dropped: Record<string, number> = {};
  for (const outcome of outcomes) {
    if ("record" in outcome) {
      records.push(outcome.record);
      for (const [name, count] of Object.entries(outcome.dropped)) {
        dropped[name] = (dropped[name] ?? 0) + count;
      }
    } else {
      errors.push({ doc_id: outcome.docId, error: outcome.error });
    }
  }
  records.sort((a, b) => (a.doc_id < b.doc_id ? -1 : a.doc_id > b.doc_id ? 1 : 0));
  errors.sort((a, b) => (a.doc_id < b.doc_id ? -1 : a.doc_id > b.doc_id ? 1 : 0));

  const manifest: IngestManifest = {
    format: "docdate-corpus",
    version: 1,
    files: [DOCS_FILE],
    documents: records.length,
    errors,
    dropped_relations: dropped,
  };

  await fs.mkdir(outDir, { recursive: true });
  const lines = records.map((r) => canonicalStringify(r) + "\n").join("");
  await fs.writeFile(path.join(outDir, DOCS_FILE), lines, "utf-8");
  // round-trip through the canonical form to pretty-print with sorted keys
  const sorted = JSON.parse(canonicalStringify(manifest));
  await fs.writeFile(path.join(outDir, MANIFEST_FILE), JSON.stringify(sorted, null, 2) + "\n", "utf-8");
  return manifest;
}
