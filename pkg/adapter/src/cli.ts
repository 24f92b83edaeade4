#!/usr/bin/env node
/** Batch-ingest CLI.
 *
 *   node dist/src/cli.js --input DIR --out DIR --fixtures DIR [--concurrency N]
 *   node dist/src/cli.js --input DIR --out DIR \
 *       --parse-url URL --temporal-url URL --timex-url URL
 */

import { batchIngest, readSourceDir } from "./ingest";
import { FixturePayloadSource, HttpPayloadSource, PayloadSource } from "./services";

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (flag === undefined || !flag.startsWith("--") || value === undefined) {
      throw new Error(`bad argument near ${flag ?? "<end>"}`);
    }
    args.set(flag.slice(2), value);
  }
  return args;
}

async function main(): Promise<number> {
  let args: Map<string, string>;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (error) {
    console.error(`usage error: ${error instanceof Error ? error.message : error}`);
    return 2;
  }
  const input = args.get("input");
  const out = args.get("out");
  if (!input || !out) {
    console.error("usage: --input DIR --out DIR (--fixtures DIR | --parse-url U --temporal-url U --timex-url U)");
    return 2;
  }
  let source: PayloadSource;
  const fixtures = args.get("fixtures");
  if (fixtures) {
    source = new FixturePayloadSource(fixtures);
  } else {
    const parseUrl = args.get("parse-url");
    const temporalUrl = args.get("temporal-url");
    const timexUrl = args.get("timex-url");
    if (!parseUrl || !temporalUrl || !timexUrl) {
      console.error("live mode needs --parse-url, --temporal-url and --timex-url");
      return 2;
    }
    source = new HttpPayloadSource({ parseUrl, temporalUrl, timexUrl });
  }
  const docs = await readSourceDir(input);
  const manifest = await batchIngest(docs, source, out, {
    concurrency: Number(args.get("concurrency") ?? 4),
  });
  console.log(JSON.stringify({ ok: true, documents: manifest.documents, errors: manifest.errors.length }));
  return manifest.errors.length === docs.length && docs.length > 0 ? 1 : 0;
}

main().then(
  (code) => process.exit(code),
  (error) => {
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    process.exit(1);
  },
);
