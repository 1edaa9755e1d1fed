/** Trailing-edge debounce; keeps drag-driven request load bounded (~100 ms). */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs = 100,
): (...args: A) => void {
  let handle: ReturnType<typeof setTimeout> | null = null;
  return (...args: A) => {
    if (handle !== null) {
      clearTimeout(handle);
    }
    handle = setTimeout(() => {
      handle = null;
      fn(...args);
    }, waitMs);
  };
}
