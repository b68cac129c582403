import type { PriceRow } from "./types.js";

export const PRICE_HEADER = "date,asset_id,adjusted_close";

/**
 * Shortest decimal form with a guaranteed decimal point, so whole-number
 * prices render as "100.0" exactly like the consumer emits them.
 */
export function formatPrice(value: number): string {
  return Number.isInteger(value) ? value.toFixed(1) : String(value);
}

/**
 * Canonical price CSV: header, rows sorted by (date, asset_id), LF line
 * endings, trailing newline.
 */
export function toCanonicalCsv(rows: PriceRow[]): string {
  const sorted = [...rows].sort((a, b) =>
    a.date === b.date
      ? a.assetId.localeCompare(b.assetId)
      : a.date.localeCompare(b.date),
  );
  const lines = [PRICE_HEADER];
  for (const row of sorted) {
    lines.push(`${row.date},${row.assetId},${formatPrice(row.adjustedClose)}`);
  }
  return lines.join("\n") + "\n";
}
