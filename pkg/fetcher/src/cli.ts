#!/usr/bin/env node
import { parseArgs } from "node:util";

import { fetchMembers } from "./members.js";
import { runFetch } from "./prices.js";
import { Throttle } from "./throttle.js";
import type { FetchSpec } from "./types.js";

const USAGE = `usage: isocorr-fetch --out prices.csv --start 2024-09-30 --end 2024-10-25
                     (--tickers AAPL,MSFT,... | --index sp500)
                     [--throttle-ms 400] [--fixture-dir DIR | --live]

Writes the canonical price CSV (date,asset_id,adjusted_close). Recorded
fixture mode is the default-safe path; live requests need --live.`;

function buildSpec(argv: string[]): FetchSpec {
  const { values } = parseArgs({
    args: argv,
    options: {
      tickers: { type: "string" },
      index: { type: "string" },
      start: { type: "string" },
      end: { type: "string" },
      out: { type: "string" },
      "throttle-ms": { type: "string", default: "400" },
      "fixture-dir": { type: "string" },
      live: { type: "boolean", default: false },
      help: { type: "boolean", default: false },
    },
  });
  if (values.help) {
    console.log(USAGE);
    process.exit(0);
  }
  for (const required of ["start", "end", "out"] as const) {
    if (!values[required]) {
      throw new Error(`missing --${required}\n${USAGE}`);
    }
  }
  if (!values.tickers && !values.index) {
    throw new Error(`need --tickers or --index\n${USAGE}`);
  }
  const spec: FetchSpec = {
    tickers: values.tickers?.split(",").map((t) => t.trim()),
    index: values.index,
    start: values.start!,
    end: values.end!,
    out: values.out!,
    throttleMs: Number(values["throttle-ms"]),
    fixtureDir: values["fixture-dir"],
    live: values.live ?? false,
  };
  if (spec.start > spec.end) {
    throw new Error(`empty date range ${spec.start}..${spec.end}`);
  }
  return spec;
}

async function main(): Promise<void> {
  const spec = buildSpec(process.argv.slice(2));
  const ids = await fetchMembers(spec, new Throttle(spec.throttleMs));
  const result = await runFetch(spec, ids);
  const okCount = ids.length - Object.keys(result.failed).length;
  console.error(
    `wrote ${result.rows.length} rows for ${okCount}/${ids.length} tickers to ${spec.out}`,
  );
}

main().catch((error) => {
  console.error(`error: ${error instanceof Error ? error.message : error}`);
  process.exit(1);
});
