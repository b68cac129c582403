/** Sequential rate limiter: at most one request per `minIntervalMs`. */
export class Throttle {
  private last = 0;
  private chain: Promise<unknown> = Promise.resolve();

  constructor(private readonly minIntervalMs: number) {}

  /** Queue `fn` behind earlier calls, spacing starts by the interval. */
  schedule<T>(fn: () => Promise<T>): Promise<T> {
    const run = this.chain.then(async () => {
      const wait = this.last + this.minIntervalMs - Date.now();
      if (wait > 0) {
        await new Promise((resolve) => setTimeout(resolve, wait));
      }
      this.last = Date.now();
      return fn();
    });
    this.chain = run.catch(() => undefined);
    return run;
  }
}
