/**
 * Sliding-window plan for documents longer than the model's maximum
 * sequence length.
 *
 * Windows start at every multiple of the stride (half the maximum length)
 * below the document length, and each window covers up to `maxLen`
 * positions.  The initial window keeps its first half; every later window
 * keeps its own first half as well, overriding the tail of the window
 * before it — i.e. each position's row comes from the *latest* window that
 * starts at or before it, so every row is computed with the freshest
 * available left context.  The kept spans tile the document exactly once.
 *
 * A document that fits in one window is embedded whole.
 */

export interface WindowSlice {
  /** First position the window sees. */
  start: number;
  /** One past the last position the window sees (at most start + maxLen). */
  end: number;
  /** First position whose row this window contributes. */
  keepStart: number;
  /** One past the last contributed position. */
  keepEnd: number;
}

export function planWindows(n: number, maxLen: number): WindowSlice[] {
  if (!Number.isInteger(n) || n < 0) {
    throw new Error(`invalid position count ${n}`);
  }
  if (!Number.isInteger(maxLen) || maxLen < 2) {
    throw new Error(`maximum sequence length must be at least 2, got ${maxLen}`);
  }
  if (n === 0) {
    return [];
  }
  if (n <= maxLen) {
    return [{ start: 0, end: n, keepStart: 0, keepEnd: n }];
  }
  const stride = Math.floor(maxLen / 2);
  const slices: WindowSlice[] = [];
  for (let start = 0; start < n; start += stride) {
    slices.push({
      start,
      end: Math.min(start + maxLen, n),
      keepStart: start,
      keepEnd: Math.min(start + stride, n),
    });
  }
  return slices;
}

/**
 * Assemble one row per position from per-window row blocks.
 *
 * `encodeWindow` receives the positions a window sees and returns one row
 * per seen position; only the kept span of each window lands in the output.
 */
export function assembleRows<T>(
  n: number,
  maxLen: number,
  encodeWindow: (start: number, end: number) => T[],
): T[] {
  const out = new Array<T>(n);
  for (const slice of planWindows(n, maxLen)) {
    const block = encodeWindow(slice.start, slice.end);
    if (block.length !== slice.end - slice.start) {
      throw new Error(
        `window [${slice.start}, ${slice.end}) produced ${block.length} rows`);
    }
    for (let p = slice.keepStart; p < slice.keepEnd; p++) {
      out[p] = block[p - slice.start];
    }
  }
  return out;
}
