import { readFile, writeFile } from "node:fs/promises";
import { join } from "node:path";

import { getText } from "./http.js";
import { toCanonicalCsv } from "./csv.js";
import { Throttle } from "./throttle.js";
import type { FetchResult, FetchSpec, PriceRow } from "./types.js";

const CHART_BASE = "https://query1.finance.yahoo.com/v8/finance/chart";

interface ChartPayload {
  chart?: {
    result?: Array<{
      timestamp?: number[];
      indicators?: { adjclose?: Array<{ adjclose?: Array<number | null> }> };
    }>;
    error?: { description?: string } | null;
  };
}

/**
 * Turn one chart payload into dated adjusted closes.
 *
 * Null or non-positive closes are skipped (halted days and bad points);
 * a payload without a usable series is an error for that ticker.
 */
export function parseChartPayload(assetId: string, payload: ChartPayload): PriceRow[] {
  const result = payload.chart?.result?.[0];
  const stamps = result?.timestamp ?? [];
  const closes = result?.indicators?.adjclose?.[0]?.adjclose ?? [];
  if (stamps.length === 0 || closes.length !== stamps.length) {
    const reason = payload.chart?.error?.description ?? "no usable series";
    throw new Error(`${assetId}: ${reason}`);
  }
  const rows: PriceRow[] = [];
  for (let i = 0; i < stamps.length; i++) {
    const close = closes[i];
    if (close === null || close === undefined || !(close > 0)) {
      continue;
    }
    rows.push({
      date: new Date(stamps[i] * 1000).toISOString().slice(0, 10),
      assetId,
      adjustedClose: close,
    });
  }
  if (rows.length === 0) {
    throw new Error(`${assetId}: series contained no positive closes`);
  }
  return rows;
}

function chartUrl(assetId: string, start: string, end: string): string {
  const period1 = Math.floor(Date.parse(`${start}T00:00:00Z`) / 1000);
  // +1 day so the end date is inclusive
  const period2 = Math.floor(Date.parse(`${end}T00:00:00Z`) / 1000) + 86_400;
  const query = `period1=${period1}&period2=${period2}&interval=1d&events=div%2Csplit`;
  return `${CHART_BASE}/${encodeURIComponent(assetId)}?${query}`;
}

async function loadPayload(
  spec: FetchSpec,
  assetId: string,
  throttle: Throttle,
): Promise<ChartPayload> {
  if (spec.fixtureDir) {
    const text = await readFile(
      join(spec.fixtureDir, "chart", `${assetId}.json`),
      "utf8",
    );
    return JSON.parse(text) as ChartPayload;
  }
  if (!spec.live) {
    throw new Error("no fixture directory given and --live not set");
  }
  const text = await getText(chartUrl(assetId, spec.start, spec.end), throttle, {
    "User-Agent": "isocorr-fetcher/0.1 (research data pull)",
  });
  return JSON.parse(text) as ChartPayload;
}

/**
 * Gather adjusted closes for every ticker in the inclusive date range.
 *
 * Individual ticker failures are collected (and logged), not fatal; an
 * empty id list or a run where every ticker failed is an error.
 */
export async function fetchPrices(
  spec: FetchSpec,
  ids: string[],
  throttle: Throttle,
): Promise<FetchResult> {
  if (ids.length === 0) {
    throw new Error("no tickers to fetch");
  }
  const rows: PriceRow[] = [];
  const failed: Record<string, string> = {};
  for (const assetId of ids) {
    try {
      const payload = await loadPayload(spec, assetId, throttle);
      const parsed = parseChartPayload(assetId, payload).filter(
        (row) => row.date >= spec.start && row.date <= spec.end,
      );
      if (parsed.length === 0) {
        throw new Error(`${assetId}: no rows inside ${spec.start}..${spec.end}`);
      }
      rows.push(...parsed);
    } catch (error) {
      const reason = error instanceof Error ? error.message : String(error);
      failed[assetId] = reason;
      console.error(`skipping ${assetId}: ${reason}`);
    }
  }
  if (rows.length === 0) {
    throw new Error(`all ${ids.length} tickers failed`);
  }
  return { rows, failed };
}

/** Fetch everything in the spec and write the canonical price CSV. */
export async function runFetch(spec: FetchSpec, ids: string[]): Promise<FetchResult> {
  const throttle = new Throttle(spec.throttleMs);
  const result = await fetchPrices(spec, ids, throttle);
  await writeFile(spec.out, toCanonicalCsv(result.rows), "utf8");
  return result;
}
