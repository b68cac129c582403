export { dedupeTickers, fetchMembers, parseConstituentsHtml } from "./members.js";
export { fetchPrices, parseChartPayload, runFetch } from "./prices.js";
export { formatPrice, toCanonicalCsv, PRICE_HEADER } from "./csv.js";
export { Throttle } from "./throttle.js";
export type { FetchResult, FetchSpec, PriceRow } from "./types.js";
