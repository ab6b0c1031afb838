import { describe, expect, it } from "vitest";

import { ecdf, quantile } from "../src/ecdf.js";

describe("ecdf", () => {
  it("sorts the sample and steps by 1/n", () => {
    const { x, p } = ecdf([3, 1, 2]);
    expect(x).toEqual([1, 2, 3]);
    expect(p).toEqual([1 / 3, 2 / 3, 1]);
  });

  it("is nondecreasing in both coordinates", () => {
    const values = Array.from({ length: 200 }, (_, i) =>
      Math.sin(i * 12.9898) * 43758.5453 % 17,
    );
    const { x, p } = ecdf(values);
    for (let i = 1; i < x.length; i++) {
      expect(x[i]!).toBeGreaterThanOrEqual(x[i - 1]!);
      expect(p[i]!).toBeGreaterThan(p[i - 1]!);
    }
    expect(p[p.length - 1]).toBe(1);
  });

  it("rejects an empty sample", () => {
    expect(() => ecdf([])).toThrowError(/empty/);
  });
});

describe("quantile", () => {
  it("interpolates linearly", () => {
    expect(quantile([1, 2, 3, 4], 0.5)).toBe(2.5);
    expect(quantile([4, 3, 2, 1], 0.0)).toBe(1);
    expect(quantile([4, 3, 2, 1], 1.0)).toBe(4);
  });

  it("rejects bad inputs", () => {
    expect(() => quantile([], 0.5)).toThrowError(/empty/);
    expect(() => quantile([1], 1.5)).toThrowError(/out of range/);
    expect(() => quantile([1], Number.NaN)).toThrowError(/out of range/);
  });
});
