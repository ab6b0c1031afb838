/** Empirical distribution helpers for the CDF figure. */

export interface Ecdf {
  /** sample values, ascending */
  x: number[];
  /** P(X <= x[i]) = (i + 1) / n, nondecreasing by construction */
  p: number[];
}

export function ecdf(values: number[]): Ecdf {
  if (values.length === 0) {
    throw new Error("ecdf of an empty sample");
  }
  const x = [...values].sort((a, b) => a - b);
  const n = x.length;
  return { x, p: x.map((_, i) => (i + 1) / n) };
}

/** Linearly interpolated quantile of an unsorted sample, q in [0, 1]. */
export function quantile(values: number[], q: number): number {
  if (values.length === 0) {
    throw new Error("quantile of an empty sample");
  }
  if (!(q >= 0 && q <= 1)) {
    throw new Error(`quantile level out of range: ${q}`);
  }
  const x = [...values].sort((a, b) => a - b);
  const pos = q * (x.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  return x[lo]! + (x[hi]! - x[lo]!) * (pos - lo);
}
