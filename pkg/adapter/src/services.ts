/** Clients for the parse / temporal / date-normalisation services, plus the
 * offline fixture source that replays recorded responses. */

import { promises as fs } from "node:fs";
import * as path from "node:path";

import { ParsePayload, RawToolOutput, TemporalPayload, TimexPayload } from "./types";

export interface SourceDocument {
  doc_id: string;
  text: string;
  gold_year?: number;
}

/** Anything that can produce the three tool payloads for one document. */
export interface PayloadSource {
  fetch(doc: SourceDocument): Promise<RawToolOutput>;
}

export type FetchLike = (url: string, init: {
  method: string;
  headers: Record<string, string>;
  body: string;
}) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export interface HttpSourceOptions {
  parseUrl: string;
  temporalUrl: string;
  timexUrl: string;
  retries?: number;
  backoffMs?: number;
  fetchImpl?: FetchLike;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/** POSTs the document text to each endpoint; the temporal extractor is
 * called with the creation time explicitly marked unknown. Transient
 * failures retry with exponential backoff. */
export class HttpPayloadSource implements PayloadSource {
  private readonly retries: number;
  private readonly backoffMs: number;
  private readonly fetchImpl: FetchLike;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(private readonly options: HttpSourceOptions) {
    this.retries = options.retries ?? 3;
    this.backoffMs = options.backoffMs ?? 100;
    this.fetchImpl = options.fetchImpl ?? (fetch as unknown as FetchLike);
    this.sleep = options.sleep ?? defaultSleep;
  }

  private async post<T>(url: string, body: unknown): Promise<T> {
    let lastError: Error = new Error("unreachable");
    for (let attempt = 0; attempt <= this.retries; attempt++) {
      if (attempt > 0) {
        await this.sleep(this.backoffMs * 2 ** (attempt - 1));
      }
      try {
        const response = await this.fetchImpl(url, {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body: JSON.stringify(body),
        });
        if (!response.ok) {
          throw new Error(`${url} returned status ${response.status}`);
        }
        return (await response.json()) as T;
      } catch (error) {
        lastError = error instanceof Error ? error : new Error(String(error));
      }
    }
    throw lastError;
  }

  async fetch(doc: SourceDocument): Promise<RawToolOutput> {
    const parse = await this.post<ParsePayload>(this.options.parseUrl, { text: doc.text });
    const temporal = await this.post<TemporalPayload>(this.options.temporalUrl, {
      text: doc.text,
      dct: "unknown",
    });
    const timex = await this.post<TimexPayload>(this.options.timexUrl, { text: doc.text });
    return { parse, temporal, timex };
  }
}

/** Replays recorded responses from `<dir>/<doc_id>.{parse,temporal,timex}.json`. */
export class FixturePayloadSource implements PayloadSource {
  constructor(private readonly dir: string) {}

  private async read<T>(docId: string, suffix: string): Promise<T> {
    const file = path.join(this.dir, `${docId}.${suffix}.json`);
    return JSON.parse(await fs.readFile(file, "utf-8")) as T;
  }

  async fetch(doc: SourceDocument): Promise<RawToolOutput> {
    return {
      parse: await this.read<ParsePayload>(doc.doc_id, "parse"),
      temporal: await this.read<TemporalPayload>(doc.doc_id, "temporal"),
      timex: await this.read<TimexPayload>(doc.doc_id, "timex"),
    };
  }
}
