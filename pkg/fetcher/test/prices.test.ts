import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { formatPrice, toCanonicalCsv } from "../src/csv.js";
import { fetchPrices, parseChartPayload } from "../src/prices.js";
import { Throttle } from "../src/throttle.js";
import type { FetchSpec } from "../src/types.js";

const FIXTURES = join(__dirname, "..", "fixtures");

function spec(overrides: Partial<FetchSpec> = {}): FetchSpec {
  return {
    start: "2024-01-02",
    end: "2024-01-08",
    out: "/tmp/unused.csv",
    throttleMs: 0,
    live: false,
    fixtureDir: FIXTURES,
    ...overrides,
  };
}

describe("parseChartPayload", () => {
  it("converts timestamps and skips null closes", () => {
    const rows = parseChartPayload("XYZ", {
      chart: {
        result: [
          {
            timestamp: [1704153600, 1704240000, 1704326400],
            indicators: { adjclose: [{ adjclose: [10.5, null, 11.25] }] },
          },
        ],
      },
    });
    expect(rows).toEqual([
      { date: "2024-01-02", assetId: "XYZ", adjustedClose: 10.5 },
      { date: "2024-01-04", assetId: "XYZ", adjustedClose: 11.25 },
    ]);
  });

  it("rejects payloads without a series", () => {
    expect(() => parseChartPayload("XYZ", { chart: { error: { description: "bad" } } }))
      .toThrow(/bad/);
  });
});

describe("fetchPrices in fixture mode", () => {
  it("produces ten rows for two tickers over five days", async () => {
    const result = await fetchPrices(spec(), ["AAA", "BBB"], new Throttle(0));
    expect(result.rows).toHaveLength(10);
    expect(Object.keys(result.failed)).toHaveLength(0);
  });

  it("filters to the requested date range", async () => {
    const result = await fetchPrices(
      spec({ start: "2024-01-03", end: "2024-01-05" }),
      ["AAA"],
      new Throttle(0),
    );
    expect(result.rows.map((r) => r.date)).toEqual([
      "2024-01-03",
      "2024-01-04",
      "2024-01-05",
    ]);
  });

  it("logs missing tickers without failing the run", async () => {
    const result = await fetchPrices(spec(), ["AAA", "NOPE"], new Throttle(0));
    expect(result.rows).toHaveLength(5);
    expect(result.failed.NOPE).toBeTruthy();
  });

  it("fails when every ticker fails", async () => {
    await expect(
      fetchPrices(spec(), ["NOPE1", "NOPE2"], new Throttle(0)),
    ).rejects.toThrow(/all 2 tickers failed/);
  });

  it("fails on an empty id list", async () => {
    await expect(fetchPrices(spec(), [], new Throttle(0))).rejects.toThrow(
      /no tickers/,
    );
  });
});

describe("canonical formatting", () => {
  it("renders whole prices with a decimal point", () => {
    expect(formatPrice(100)).toBe("100.0");
    expect(formatPrice(52.25)).toBe("52.25");
    expect(formatPrice(49.5)).toBe("49.5");
  });

  it("sorts rows by date then asset and ends with a newline", () => {
    const csv = toCanonicalCsv([
      { date: "2024-01-03", assetId: "BBB", adjustedClose: 1.5 },
      { date: "2024-01-02", assetId: "BBB", adjustedClose: 2 },
      { date: "2024-01-02", assetId: "AAA", adjustedClose: 3 },
    ]);
    expect(csv).toBe(
      "date,asset_id,adjusted_close\n" +
        "2024-01-02,AAA,3.0\n" +
        "2024-01-02,BBB,2.0\n" +
        "2024-01-03,BBB,1.5\n",
    );
  });
});

describe("throttle", () => {
  it("spaces sequential calls by the interval", async () => {
    const throttle = new Throttle(40);
    const stamps: number[] = [];
    for (let i = 0; i < 3; i++) {
      await throttle.schedule(async () => {
        stamps.push(Date.now());
      });
    }
    expect(stamps[1] - stamps[0]).toBeGreaterThanOrEqual(35);
    expect(stamps[2] - stamps[1]).toBeGreaterThanOrEqual(35);
  });
});
