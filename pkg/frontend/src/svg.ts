/**
 * Minimal SVG line-chart renderer.
 *
 * One figure is a row of panels; each panel owns its axes, series and
 * legend. Output is a standalone SVG document string, so rendering has
 * no DOM or canvas dependency and images diff cleanly in git.
 */

export interface Series {
  label: string;
  xs: number[];
  ys: number[];
  color: string;
  /** SVG dash pattern, solid when omitted */
  dash?: string;
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  xLim: [number, number];
  yLim: [number, number];
  series: Series[];
}

const PANEL_WIDTH = 420;
const PANEL_HEIGHT = 320;
const MARGIN = { top: 34, right: 16, bottom: 46, left: 56 };

/** Round tick positions covering [lo, hi], the usual 1/2/5 ladder. */
export function ticks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const rawStep = (hi - lo) / count;
  const mag = 10 ** Math.floor(Math.log10(rawStep));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= rawStep)!;
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

function fmtTick(v: number): string {
  const s = v.toPrecision(6);
  return String(Number(s));
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function renderPanel(panel: Panel, xOffset: number): string {
  const x0 = xOffset + MARGIN.left;
  const y0 = MARGIN.top;
  const w = PANEL_WIDTH - MARGIN.left - MARGIN.right;
  const h = PANEL_HEIGHT - MARGIN.top - MARGIN.bottom;
  const [xLo, xHi] = panel.xLim;
  const [yLo, yHi] = panel.yLim;
  const px = (x: number) => x0 + ((x - xLo) / (xHi - xLo)) * w;
  const py = (y: number) => y0 + h - ((y - yLo) / (yHi - yLo)) * h;

  const parts: string[] = [];
  parts.push(
    `<rect x="${x0}" y="${y0}" width="${w}" height="${h}" fill="none" stroke="#444"/>`,
  );
  parts.push(
    `<text x="${x0 + w / 2}" y="${y0 - 12}" text-anchor="middle" font-size="14" font-weight="bold">${esc(panel.title)}</text>`,
  );
  for (const t of ticks(xLo, xHi)) {
    const x = px(t);
    parts.push(`<line x1="${x}" y1="${y0 + h}" x2="${x}" y2="${y0 + h + 4}" stroke="#444"/>`);
    parts.push(
      `<text x="${x}" y="${y0 + h + 17}" text-anchor="middle" font-size="11">${fmtTick(t)}</text>`,
    );
  }
  for (const t of ticks(yLo, yHi)) {
    const y = py(t);
    parts.push(`<line x1="${x0 - 4}" y1="${y}" x2="${x0}" y2="${y}" stroke="#444"/>`);
    parts.push(
      `<text x="${x0 - 7}" y="${y + 4}" text-anchor="end" font-size="11">${fmtTick(t)}</text>`,
    );
    parts.push(
      `<line x1="${x0}" y1="${y}" x2="${x0 + w}" y2="${y}" stroke="#ddd" stroke-width="0.5"/>`,
    );
  }
  parts.push(
    `<text x="${x0 + w / 2}" y="${y0 + h + 36}" text-anchor="middle" font-size="12">${esc(panel.xLabel)}</text>`,
  );
  parts.push(
    `<text x="${xOffset + 15}" y="${y0 + h / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 ${xOffset + 15} ${y0 + h / 2})">${esc(panel.yLabel)}</text>`,
  );

  for (const s of panel.series) {
    const pts = s.xs
      .map((x, i) => `${px(x).toFixed(2)},${py(s.ys[i]!).toFixed(2)}`)
      .join(" ");
    const dash = s.dash === undefined ? "" : ` stroke-dasharray="${s.dash}"`;
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="1.6"${dash}/>`,
    );
  }

  panel.series.forEach((s, i) => {
    const lx = x0 + 10;
    const ly = y0 + 14 + 16 * i;
    const dash = s.dash === undefined ? "" : ` stroke-dasharray="${s.dash}"`;
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${s.color}" stroke-width="1.6"${dash}/>`,
    );
    parts.push(
      `<text x="${lx + 27}" y="${ly + 4}" font-size="11">${esc(s.label)}</text>`,
    );
  });

  return parts.join("\n");
}

export function renderFigure(panels: Panel[]): string {
  const width = PANEL_WIDTH * panels.length;
  const body = panels
    .map((panel, i) => renderPanel(panel, i * PANEL_WIDTH))
    .join("\n");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${PANEL_HEIGHT}" ` +
    `viewBox="0 0 ${width} ${PANEL_HEIGHT}" font-family="sans-serif">\n` +
    `<rect width="${width}" height="${PANEL_HEIGHT}" fill="white"/>\n${body}\n</svg>\n`
  );
}
