export interface FetchSpec {
  /** Explicit ticker list; takes precedence over `index` when present. */
  tickers?: string[];
  /** Named index whose membership to resolve (currently "sp500"). */
  index?: string;
  /** Inclusive ISO date range. */
  start: string;
  end: string;
  /** Output path for the canonical price CSV. */
  out: string;
  /** Minimum milliseconds between requests. */
  throttleMs: number;
  /** Directory of recorded payloads; when set, no network is touched. */
  fixtureDir?: string;
  /** Explicit opt-in for live requests. */
  live: boolean;
}

export interface PriceRow {
  date: string;
  assetId: string;
  adjustedClose: number;
}

export interface FetchResult {
  rows: PriceRow[];
  /** Tickers that produced no data, with the reason; never fatal alone. */
  failed: Record<string, string>;
}
