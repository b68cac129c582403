import { readFile } from "node:fs/promises";
import { join } from "node:path";

import { getText } from "./http.js";
import { Throttle } from "./throttle.js";
import type { FetchSpec } from "./types.js";

const INDEX_PAGES: Record<string, string> = {
  sp500: "https://en.wikipedia.org/wiki/List_of_S%26P_500_companies",
};

/** Drop repeats while keeping first-seen order. */
export function dedupeTickers(tickers: string[]): string[] {
  return [...new Set(tickers.map((t) => t.trim()).filter((t) => t.length > 0))];
}

/**
 * Pull ticker symbols out of the constituents table of an index page.
 *
 * The table rows carry the symbol as the first cell, as a link whose text
 * is the ticker. Matching is deliberately loose about attributes so minor
 * markup churn does not break the scrape.
 */
export function parseConstituentsHtml(html: string): string[] {
  const tableMatch = html.match(
    /<table[^>]*id="constituents"[^>]*>([\s\S]*?)<\/table>/i,
  );
  if (!tableMatch) {
    throw new Error("constituents table not found in page");
  }
  const tickers: string[] = [];
  const rowPattern = /<tr[^>]*>\s*<td[^>]*>\s*<a[^>]*>([A-Z][A-Z0-9.\-]*)<\/a>/g;
  let match: RegExpExecArray | null;
  while ((match = rowPattern.exec(tableMatch[1])) !== null) {
    tickers.push(match[1]);
  }
  if (tickers.length === 0) {
    throw new Error("no ticker symbols parsed from constituents table");
  }
  return dedupeTickers(tickers);
}

/**
 * Resolve the asset universe for a fetch: an explicit list passes through
 * (deduplicated), otherwise the named index page is read, either from the
 * recorded fixture or live.
 */
export async function fetchMembers(
  spec: FetchSpec,
  throttle: Throttle,
): Promise<string[]> {
  if (spec.tickers && spec.tickers.length > 0) {
    return dedupeTickers(spec.tickers);
  }
  const index = spec.index ?? "";
  const url = INDEX_PAGES[index];
  if (!url) {
    throw new Error(`unknown index "${index}"; pass --tickers or --index sp500`);
  }
  let html: string;
  if (spec.fixtureDir) {
    html = await readFile(join(spec.fixtureDir, `members_${index}.html`), "utf8");
  } else if (spec.live) {
    html = await getText(url, throttle, {
      "User-Agent": "isocorr-fetcher/0.1 (research data pull)",
    });
  } else {
    throw new Error("no fixture directory given and --live not set");
  }
  const tickers = parseConstituentsHtml(html);
  console.error(`resolved ${tickers.length} members of ${index}`);
  return tickers;
}
