/** Figure assembly: CSV rows in, panel descriptions and SVG text out. */

import { existsSync, writeFileSync } from "node:fs";

import {
  readSinrCsv,
  readTrackingCsv,
  SinrRow,
  TrackingRow,
} from "./csv.js";
import { ecdf } from "./ecdf.js";
import { Panel, renderFigure } from "./svg.js";

export type FigureKind = "sinr_cdf" | "tracking_gain";

export interface FigureSpec {
  input: string;
  output: string;
  kind: FigureKind;
}

interface SchemeStyle {
  scheme: string;
  color: string;
  dash?: string;
}

export const SINR_SCHEME_STYLES: readonly SchemeStyle[] = [
  { scheme: "ideal", color: "#2c7a2c", dash: "6 3" },
  { scheme: "decontaminated", color: "#1f4fa3" },
  { scheme: "contaminated", color: "#b03030", dash: "2 3" },
];

export const TRACKING_SCHEME_STYLES: readonly SchemeStyle[] = [
  { scheme: "conventional", color: "#b03030" },
  { scheme: "angular_speed", color: "#1f4fa3" },
  { scheme: "kalman", color: "#2c7a2c" },
];

export function sinrCdfPanels(rows: SinrRow[]): Panel[] {
  if (rows.length === 0) {
    throw new Error("no SINR rows to plot");
  }
  const kinds = [...new Set(rows.map((r) => r.kind))].sort();
  const lo = Math.min(...rows.map((r) => r.sinrDb));
  const hi = Math.max(...rows.map((r) => r.sinrDb));
  const pad = 0.02 * (hi - lo || 1);
  return kinds.map((kind) => {
    const series = SINR_SCHEME_STYLES.flatMap((style) => {
      const vals = rows
        .filter((r) => r.kind === kind && r.scheme === style.scheme)
        .map((r) => r.sinrDb);
      if (vals.length === 0) {
        return [];
      }
      const { x, p } = ecdf(vals);
      return [{ label: style.scheme, xs: x, ys: p, color: style.color,
                dash: style.dash }];
    });
    return {
      title: kind,
      xLabel: "downlink SINR [dB]",
      yLabel: "empirical CDF",
      xLim: [lo - pad, hi + pad] as [number, number],
      yLim: [0, 1] as [number, number],
      series,
    };
  });
}

/** Mean gain over trajectories, per scheme, at each sample instant. */
export function trackingPanel(rows: TrackingRow[]): Panel {
  if (rows.length === 0) {
    throw new Error("no tracking rows to plot");
  }
  const series = TRACKING_SCHEME_STYLES.flatMap((style) => {
    const byTime = new Map<number, { sum: number; n: number }>();
    for (const r of rows) {
      if (r.scheme !== style.scheme) {
        continue;
      }
      const acc = byTime.get(r.timeS) ?? { sum: 0, n: 0 };
      acc.sum += r.normalizedGain;
      acc.n += 1;
      byTime.set(r.timeS, acc);
    }
    if (byTime.size === 0) {
      return [];
    }
    const xs = [...byTime.keys()].sort((a, b) => a - b);
    return [{
      label: style.scheme,
      xs,
      ys: xs.map((t) => byTime.get(t)!.sum / byTime.get(t)!.n),
      color: style.color,
    }];
  });
  const tMax = Math.max(...rows.map((r) => r.timeS));
  return {
    title: "beam tracking",
    xLabel: "time [s]",
    yLabel: "normalized beamforming gain",
    xLim: [0, tMax],
    yLim: [0, 1.05],
    series,
  };
}

export function renderSpec(spec: FigureSpec): string {
  if (!existsSync(spec.input)) {
    throw new Error(`input CSV not found: ${spec.input}`);
  }
  if (spec.kind === "sinr_cdf") {
    return renderFigure(sinrCdfPanels(readSinrCsv(spec.input)));
  }
  return renderFigure([trackingPanel(readTrackingCsv(spec.input))]);
}

export function writeFigureFile(spec: FigureSpec): void {
  writeFileSync(spec.output, renderSpec(spec));
}
