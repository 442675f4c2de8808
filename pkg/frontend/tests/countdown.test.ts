import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import {
  CountdownTimer,
  anchorCountdown,
  formatRemaining,
  remainingMs,
} from "../src/countdown.js";

describe("countdown arithmetic", () => {
  it("derives remaining time from server fields only", () => {
    const anchor = anchorCountdown(
      "2026-03-02T10:00:00Z",
      "2026-03-02T09:15:00Z",
      5_000_000,
    );
    expect(anchor.remainingAtAnchorMs).toBe(45 * 60 * 1000);
    expect(remainingMs(anchor, 5_000_000)).toBe(45 * 60 * 1000);
    expect(remainingMs(anchor, 5_000_000 + 60_000)).toBe(44 * 60 * 1000);
  });

  it("a skewed client clock does not change the remaining time", () => {
    // client clock five hours wrong; only the local delta matters
    const skewedLocal = Date.parse("2026-03-02T04:00:00Z");
    const anchor = anchorCountdown(
      "2026-03-02T10:00:00Z",
      "2026-03-02T09:59:00Z",
      skewedLocal,
    );
    expect(remainingMs(anchor, skewedLocal + 30_000)).toBe(30_000);
  });

  it("never goes negative", () => {
    const anchor = anchorCountdown(
      "2026-03-02T10:00:00Z",
      "2026-03-02T10:00:01Z",
      0,
    );
    expect(remainingMs(anchor, 0)).toBe(0);
    expect(remainingMs(anchor, 99_999)).toBe(0);
  });

  it("formats minutes and hours", () => {
    expect(formatRemaining(0)).toBe("00:00");
    expect(formatRemaining(59_400)).toBe("00:59");
    expect(formatRemaining(61_000)).toBe("01:01");
    expect(formatRemaining(45 * 60_000)).toBe("45:00");
    expect(formatRemaining(3_600_000)).toBe("1:00:00");
    expect(formatRemaining(2 * 3_600_000 + 5 * 60_000 + 9_000)).toBe("2:05:09");
  });
});

describe("CountdownTimer", () => {
  beforeEach(() => {
    vi.useFakeTimers();
    vi.setSystemTime(new Date("2026-03-02T09:00:00Z"));
  });
  afterEach(() => vi.useRealTimers());

  it("ticks down and fires expiry exactly once", () => {
    const ticks: string[] = [];
    let expired = 0;
    const timer = new CountdownTimer(
      "2026-03-02T09:00:02Z",
      "2026-03-02T09:00:00Z",
      (text) => ticks.push(text),
      () => {
        expired += 1;
      },
    );
    timer.start();
    expect(ticks[0]).toBe("00:02");
    vi.advanceTimersByTime(1000);
    expect(ticks).toContain("00:01");
    expect(expired).toBe(0);
    vi.advanceTimersByTime(1500);
    expect(ticks[ticks.length - 1]).toBe("00:00");
    expect(expired).toBe(1);
    vi.advanceTimersByTime(5000);
    expect(expired).toBe(1); // timer stopped itself
  });

  it("stop halts ticking", () => {
    const ticks: string[] = [];
    const timer = new CountdownTimer(
      "2026-03-02T10:00:00Z",
      "2026-03-02T09:00:00Z",
      (text) => ticks.push(text),
      () => {},
    );
    timer.start();
    timer.stop();
    const seen = ticks.length;
    vi.advanceTimersByTime(10_000);
    expect(ticks.length).toBe(seen);
  });
});
