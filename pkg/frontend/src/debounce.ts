export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  cancel(): void;
  flush(): void;
}

/**
 * Trailing-edge debounce: a burst of calls inside `ms` collapses to one
 * invocation with the last arguments, `ms` after the burst ends.
 */
export function trailingDebounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let lastArgs: A | null = null;

  const wrapped = (...args: A): void => {
    lastArgs = args;
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      const a = lastArgs as A;
      lastArgs = null;
      fn(...a);
    }, ms);
  };

  wrapped.cancel = (): void => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
    lastArgs = null;
  };

  wrapped.flush = (): void => {
    if (timer === null) return;
    clearTimeout(timer);
    timer = null;
    const a = lastArgs as A;
    lastArgs = null;
    fn(...a);
  };

  return wrapped;
}
