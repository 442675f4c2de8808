/** Trailing-edge debounce: fn runs once, delayMs after the last call. */
export function debounce<A extends unknown[]>(
  delayMs: number,
  fn: (...args: A) => void,
): { (...args: A): void; cancel(): void; flush(): void } {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let pending: A | null = null;

  const fire = () => {
    timer = null;
    if (pending !== null) {
      const args = pending;
      pending = null;
      fn(...args);
    }
  };

  const call = (...args: A) => {
    pending = args;
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(fire, delayMs);
  };
  call.cancel = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
    pending = null;
  };
  call.flush = () => {
    if (timer !== null) clearTimeout(timer);
    fire();
  };
  return call;
}
