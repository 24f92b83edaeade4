import assert from "node:assert/strict";
import { promises as fs } from "node:fs";
import * as path from "node:path";
import { spawnSync } from "node:child_process";
import { test } from "node:test";
import * as os from "node:os";

import { canonicalStringify } from "../src/canonical";
import { convert } from "../src/convert";
import { FixturePayloadSource } from "../src/services";
import { ConversionError, RawToolOutput } from "../src/types";

const FIXTURES = path.resolve(__dirname, "../../fixtures");
const RESPONSES = path.join(FIXTURES, "responses");

async function loadRaw(docId: string): Promise<RawToolOutput> {
  return new FixturePayloadSource(RESPONSES).fetch({ doc_id: docId, text: "" });
}

function validateWithPrimary(line: string): { status: number | null; stderr: string } {
  const dir = require("node:fs").mkdtempSync(path.join(os.tmpdir(), "docdate-adapter-"));
  const file = path.join(dir, "record.jsonl");
  require("node:fs").writeFileSync(file, line + "\n");
  const result = spawnSync("python3", ["-m", "docdate.cli", "validate", "--file", file], {
    encoding: "utf-8",
  });
  return { status: result.status, stderr: result.stderr };
}

test("fig1 fixture yields the five-node temporal graph", async () => {
  const raw = await loadRaw("fig1");
  const { record, droppedRelations } = convert(raw, "fig1", 1999);

  assert.equal(record.tokens.length, 16);
  assert.deepEqual(record.sentences, [[0, 7], [7, 16]]);
  assert.equal(record.temporal_nodes.length, 5);

  const byId = new Map(record.temporal_nodes.map((n) => [n.id, n]));
  assert.equal(byId.get("t1")?.kind, "TIMEX");
  assert.equal(byId.get("t1")?.value, "1995");
  assert.deepEqual(byId.get("t2")?.span, [7, 10]); // "Four years after"
  assert.equal(byId.get("e1")?.kind, "EVENT");
  assert.equal(byId.get("e2")?.kind, "EVENT");
  assert.deepEqual(byId.get("dct"), { id: "dct", kind: "DCT", span: [] });

  assert.ok(record.temporal_edges.some(([s, t, r]) => s === "t2" && t === "e2" && r === "BEFORE"));
  assert.deepEqual(droppedRelations, { IBEFORE: 1 });
  assert.equal(record.gold_year, 1999);
  // parser labels survive conversion untouched; direction is head -> dependent
  assert.ok(record.dep_edges.some(([h, d, l]) => h === 3 && d === 1 && l === "nsubj"));
  // the virtual-root rows are dropped
  assert.ok(record.dep_edges.every(([h]) => h >= 0));
});

test("fig1 record passes the primary validator", async () => {
  const raw = await loadRaw("fig1");
  const { record } = convert(raw, "fig1", 1999);
  const { status, stderr } = validateWithPrimary(canonicalStringify(record));
  assert.equal(status, 0, stderr);
});

test("conversion is deterministic for identical input", async () => {
  const raw1 = await loadRaw("fig1");
  const raw2 = await loadRaw("fig1");
  const a = canonicalStringify(convert(raw1, "fig1", 1999).record);
  const b = canonicalStringify(convert(raw2, "fig1", 1999).record);
  assert.equal(a, b);
});

test("empty temporal payload yields a valid lone-DCT record", async () => {
  const raw = await loadRaw("plain");
  const { record, droppedRelations } = convert(raw, "plain");
  assert.equal(record.temporal_nodes.length, 1);
  assert.deepEqual(record.temporal_nodes[0], { id: "dct", kind: "DCT", span: [] });
  assert.deepEqual(record.temporal_edges, []);
  assert.deepEqual(droppedRelations, {});
  assert.equal(record.gold_year, undefined);
  const { status, stderr } = validateWithPrimary(canonicalStringify(record));
  assert.equal(status, 0, stderr);
});

test("relation names are matched case-insensitively, exactly the kept five", async () => {
  const raw = await loadRaw("sameyear");
  const { record } = convert(raw, "sameyear", 1997);
  assert.ok(record.temporal_edges.some(([, , r]) => r === "SAME"));
  const noisy = convert(await loadRaw("noisy"), "noisy", 1998);
  assert.deepEqual(noisy.droppedRelations, {
    IBEFORE: 1, IAFTER: 1, IDENTITY: 1, SIMULTANEOUS: 1, BEGUN_BY: 1,
  });
  assert.deepEqual(
    noisy.record.temporal_edges,
    [["e1", "t1", "IS_INCLUDED"], ["e2", "e1", "AFTER"]],
  );
});

test("round-trip: convert -> validate -> parse back is field-equal", async () => {
  for (const docId of ["fig1", "sameyear", "noisy"]) {
    const raw = await loadRaw(docId);
    const { record } = convert(raw, docId, 1998);
    const line = canonicalStringify(record);
    const { status, stderr } = validateWithPrimary(line);
    assert.equal(status, 0, `${docId}: ${stderr}`);
    const back = JSON.parse(line);
    assert.deepEqual(back, JSON.parse(JSON.stringify(record)));
    assert.equal(canonicalStringify(back), line);
  }
});

test("token misalignment raises a conversion error naming the document", async () => {
  const raw = await loadRaw("misaligned");
  assert.throws(
    () => convert(raw, "misaligned"),
    (error: unknown) =>
      error instanceof ConversionError &&
      error.message.includes("misaligned") &&
      error.message.includes("token counts disagree"),
  );
});

test("structural problems in payloads are rejected", async () => {
  const raw = await loadRaw("fig1");
  const broken = JSON.parse(JSON.stringify(raw)) as RawToolOutput;
  broken.temporal.tlinks.push({ source_id: "zz", target_id: "e1", relation: "AFTER" });
  assert.throws(() => convert(broken, "fig1"), /unknown node zz/);

  const selfLink = JSON.parse(JSON.stringify(raw)) as RawToolOutput;
  selfLink.temporal.tlinks.push({ source_id: "e1", target_id: "e1", relation: "SAME" });
  assert.throws(() => convert(selfLink, "fig1"), /self-relation/);

  const badKind = JSON.parse(JSON.stringify(raw)) as RawToolOutput;
  badKind.temporal.entities.push({ id: "x1", type: "SIGNAL", span: [0, 1] });
  assert.throws(() => convert(badKind, "fig1"), /unknown type SIGNAL/);

  const badSpan = JSON.parse(JSON.stringify(raw)) as RawToolOutput;
  badSpan.temporal.entities.push({ id: "x2", type: "EVENT", span: [10, 99] });
  assert.throws(() => convert(badSpan, "fig1"), /out of range/);

  const strayValue = JSON.parse(JSON.stringify(raw)) as RawToolOutput;
  strayValue.timex.values["e1"] = "1995";
  assert.throws(() => convert(strayValue, "fig1"), /non-TIMEX/);
});

test("canonical stringify matches the primary's serialisation", async () => {
  const sample = { b: [1, 2, { z: "é", a: null }], a: "x", c: true };
  const expected = spawnSync(
    "python3",
    ["-c",
     "import json,sys; obj=json.load(sys.stdin); " +
     "print(json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(',', ':')))"],
    { input: JSON.stringify(sample), encoding: "utf-8" },
  ).stdout.trim();
  assert.equal(canonicalStringify(sample), expected);
});

test("fixture responses on disk are byte-stable inputs", async () => {
  const a = await fs.readFile(path.join(RESPONSES, "fig1.temporal.json"), "utf-8");
  const b = await fs.readFile(path.join(RESPONSES, "fig1.temporal.json"), "utf-8");
  assert.equal(a, b);
});
