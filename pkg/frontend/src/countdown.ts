/** Countdown to a server-issued deadline.
 *
 * The client clock is never trusted for the duration: the remaining time is
 * anchored on (deadline - server_time) from the attempt payload, measured
 * against elapsed local monotonic-ish time since that payload arrived. A
 * reload re-fetches the attempt and re-anchors, so the timer survives it.
 */

export interface CountdownAnchor {
  /** Milliseconds remaining at the moment the payload was received. */
  remainingAtAnchorMs: number;
  /** Local clock (Date.now) when the payload was received. */
  anchorLocalMs: number;
}

export function anchorCountdown(
  deadlineIso: string,
  serverTimeIso: string,
  localNowMs: number,
): CountdownAnchor {
  const remaining = Date.parse(deadlineIso) - Date.parse(serverTimeIso);
  return { remainingAtAnchorMs: remaining, anchorLocalMs: localNowMs };
}

export function remainingMs(anchor: CountdownAnchor, localNowMs: number): number {
  const elapsed = localNowMs - anchor.anchorLocalMs;
  return Math.max(0, anchor.remainingAtAnchorMs - elapsed);
}

/** "MM:SS", or "H:MM:SS" from one hour up. */
export function formatRemaining(ms: number): string {
  const totalSeconds = Math.floor(ms / 1000);
  const seconds = totalSeconds % 60;
  const minutes = Math.floor(totalSeconds / 60) % 60;
  const hours = Math.floor(totalSeconds / 3600);
  const mmss = `${String(minutes).padStart(2, "0")}:${String(seconds).padStart(2, "0")}`;
  return hours > 0 ? `${hours}:${mmss}` : mmss;
}

export class CountdownTimer {
  private timer: ReturnType<typeof setInterval> | null = null;
  private readonly anchor: CountdownAnchor;
  private expired = false;

  constructor(
    deadlineIso: string,
    serverTimeIso: string,
    private readonly onTick: (text: string, msLeft: number) => void,
    private readonly onExpire: () => void,
  ) {
    this.anchor = anchorCountdown(deadlineIso, serverTimeIso, Date.now());
  }

  start(): void {
    this.tick();
    this.timer = setInterval(() => this.tick(), 500);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }

  private tick(): void {
    const left = remainingMs(this.anchor, Date.now());
    this.onTick(formatRemaining(left), left);
    if (left <= 0 && !this.expired) {
      this.expired = true;
      this.stop();
      this.onExpire();
    }
  }
}
