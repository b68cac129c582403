import { Throttle } from "./throttle.js";

const RETRIES = 2;
const RETRY_DELAY_MS = 500;

/** Throttled GET with retry-then-fail semantics. */
export async function getText(
  url: string,
  throttle: Throttle,
  headers: Record<string, string> = {},
): Promise<string> {
  let lastError: unknown;
  for (let attempt = 0; attempt <= RETRIES; attempt++) {
    try {
      return await throttle.schedule(async () => {
        const response = await fetch(url, { headers });
        if (!response.ok) {
          throw new Error(`HTTP ${response.status} for ${url}`);
        }
        return response.text();
      });
    } catch (error) {
      lastError = error;
      if (attempt < RETRIES) {
        await new Promise((resolve) =>
          setTimeout(resolve, RETRY_DELAY_MS * (attempt + 1)),
        );
      }
    }
  }
  throw lastError;
}
