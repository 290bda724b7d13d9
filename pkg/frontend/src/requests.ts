/**
 * Sequenced fetch helper: responses arriving out of order are discarded and
 * identical in-flight requests are de-duplicated by key, so the UI always
 * reflects the latest query the user made.
 */
export class RequestGate<T> {
  private sequence = 0;
  private inflight = new Map<string, Promise<T>>();

  /**
   * Run `task` tagged with `key`; resolves with the result only if no newer
   * request was issued meanwhile (stale results resolve to null).  Repeated
   * calls with an identical key share the underlying promise.
   */
  async run(key: string, task: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.sequence;
    let promise = this.inflight.get(key);
    if (!promise) {
      promise = task().finally(() => this.inflight.delete(key));
      this.inflight.set(key, promise);
    }
    const result = await promise;
    return ticket === this.sequence ? result : null;
  }

  /** Ticket of the most recent request (monotonically increasing). */
  get latest(): number {
    return this.sequence;
  }
}
