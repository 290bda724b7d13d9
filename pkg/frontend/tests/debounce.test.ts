import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce } from "../src/debounce.js";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("fires once after the wait with the last arguments", () => {
    const calls: number[] = [];
    const fn = debounce((x: number) => calls.push(x), 100);
    fn(1);
    fn(2);
    fn(3);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(99);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(calls).toEqual([3]);
  });

  it("restarts the window on every call", () => {
    const calls: string[] = [];
    const fn = debounce((x: string) => calls.push(x), 50);
    fn("a");
    vi.advanceTimersByTime(40);
    fn("b");
    vi.advanceTimersByTime(40);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(10);
    expect(calls).toEqual(["b"]);
  });

  it("separate invocations each fire", () => {
    const calls: number[] = [];
    const fn = debounce((x: number) => calls.push(x), 20);
    fn(1);
    vi.advanceTimersByTime(25);
    fn(2);
    vi.advanceTimersByTime(25);
    expect(calls).toEqual([1, 2]);
  });
});
