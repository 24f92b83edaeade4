import assert from "node:assert/strict";
import { promises as fs } from "node:fs";
import * as fsSync from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { spawnSync } from "node:child_process";
import { test } from "node:test";

import { batchIngest, readSourceDir } from "../src/ingest";
import { FixturePayloadSource, HttpPayloadSource, SourceDocument } from "../src/services";

const FIXTURES = path.resolve(__dirname, "../../fixtures");
const SOURCE = path.join(FIXTURES, "source");
const RESPONSES = path.join(FIXTURES, "responses");

function tmpDir(): string {
  return fsSync.mkdtempSync(path.join(os.tmpdir(), "docdate-ingest-"));
}

const GOOD_DOCS = ["fig1", "noisy", "plain", "sameyear"];

test("offline fixture ingest writes records plus a manifest", async () => {
  const docs = await readSourceDir(SOURCE);
  assert.equal(docs.length, 5);
  const out = tmpDir();
  const manifest = await batchIngest(docs, new FixturePayloadSource(RESPONSES), out);

  assert.equal(manifest.documents, 4);
  assert.deepEqual(manifest.errors.map((e) => e.doc_id), ["misaligned"]);
  assert.match(manifest.errors[0]!.error, /token counts disagree/);
  assert.equal(manifest.dropped_relations["IBEFORE"], 2);

  const lines = (await fs.readFile(path.join(out, "docs.jsonl"), "utf-8")).trim().split("\n");
  assert.equal(lines.length, 4);
  assert.deepEqual(lines.map((l) => JSON.parse(l).doc_id), GOOD_DOCS); // sorted by doc_id
});

test("emitted corpus passes the primary validator", async () => {
  const docs = await readSourceDir(SOURCE);
  const out = tmpDir();
  await batchIngest(docs, new FixturePayloadSource(RESPONSES), out);
  const result = spawnSync("python3", ["-m", "docdate.cli", "validate", "--corpus", out], {
    encoding: "utf-8",
  });
  assert.equal(result.status, 0, result.stderr);
  assert.equal(JSON.parse(result.stdout).documents, 4);
});

test("duplicate runs are byte-identical", async () => {
  const docs = await readSourceDir(SOURCE);
  const out1 = tmpDir();
  const out2 = tmpDir();
  await batchIngest(docs, new FixturePayloadSource(RESPONSES), out1, { concurrency: 1 });
  await batchIngest(docs, new FixturePayloadSource(RESPONSES), out2, { concurrency: 3 });
  for (const name of ["docs.jsonl", "manifest.json"]) {
    const a = await fs.readFile(path.join(out1, name));
    const b = await fs.readFile(path.join(out2, name));
    assert.ok(a.equals(b), `${name} differs between runs`);
  }
});

function fakeResponse(payload: unknown) {
  return { ok: true, status: 200, json: async () => payload };
}

async function fixturePayloads(docId: string) {
  const read = async (suffix: string) =>
    JSON.parse(await fs.readFile(path.join(RESPONSES, `${docId}.${suffix}.json`), "utf-8"));
  return { parse: await read("parse"), temporal: await read("temporal"), timex: await read("timex") };
}

test("http source retries with backoff and then succeeds", async () => {
  const payloads = await fixturePayloads("plain");
  let calls = 0;
  const waits: number[] = [];
  const source = new HttpPayloadSource({
    parseUrl: "http://parse.test/",
    temporalUrl: "http://temporal.test/",
    timexUrl: "http://timex.test/",
    retries: 3,
    backoffMs: 10,
    sleep: async (ms) => { waits.push(ms); },
    fetchImpl: async (url) => {
      calls += 1;
      if (calls <= 2) {
        return { ok: false, status: 503, json: async () => ({}) };
      }
      if (url.startsWith("http://parse")) return fakeResponse(payloads.parse);
      if (url.startsWith("http://temporal")) return fakeResponse(payloads.temporal);
      return fakeResponse(payloads.timex);
    },
  });
  const raw = await source.fetch({ doc_id: "plain", text: "Nothing temporal here ." });
  assert.equal(raw.temporal.token_count, 4);
  assert.deepEqual(waits, [10, 20]); // exponential backoff before retries
});

test("documents whose services keep failing end up in manifest errors", async () => {
  const payloads = await fixturePayloads("plain");
  const source = new HttpPayloadSource({
    parseUrl: "http://parse.test/",
    temporalUrl: "http://temporal.test/",
    timexUrl: "http://timex.test/",
    retries: 1,
    backoffMs: 1,
    sleep: async () => {},
    fetchImpl: async (url, init) => {
      const body = JSON.parse(init.body) as { text: string };
      if (body.text.includes("flaky")) {
        return { ok: false, status: 500, json: async () => ({}) };
      }
      if (url.startsWith("http://parse")) return fakeResponse(payloads.parse);
      if (url.startsWith("http://temporal")) return fakeResponse(payloads.temporal);
      return fakeResponse(payloads.timex);
    },
  });
  const docs: SourceDocument[] = [
    { doc_id: "ok-doc", text: "Nothing temporal here ." },
    { doc_id: "bad-doc", text: "flaky service text" },
  ];
  const out = tmpDir();
  const manifest = await batchIngest(docs, source, out);
  assert.equal(manifest.documents, 1);
  assert.deepEqual(manifest.errors.map((e) => e.doc_id), ["bad-doc"]);
  assert.match(manifest.errors[0]!.error, /status 500/);
});

test("temporal extraction is requested with the creation time unknown", async () => {
  const payloads = await fixturePayloads("plain");
  let temporalBody: Record<string, unknown> | undefined;
  const source = new HttpPayloadSource({
    parseUrl: "http://parse.test/",
    temporalUrl: "http://temporal.test/",
    timexUrl: "http://timex.test/",
    fetchImpl: async (url, init) => {
      if (url.startsWith("http://temporal")) {
        temporalBody = JSON.parse(init.body);
        return fakeResponse(payloads.temporal);
      }
      if (url.startsWith("http://parse")) return fakeResponse(payloads.parse);
      return fakeResponse(payloads.timex);
    },
  });
  await source.fetch({ doc_id: "plain", text: "Nothing temporal here ." });
  assert.equal(temporalBody?.dct, "unknown");
});
