/**
 * Deterministic SVG line charts: mean curves with shaded 95% CI bands.
 * No timestamps, no randomness; identical input gives identical bytes.
 */
import type { Series } from "./csv.js";

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 72 };

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

function fmt(value: number): string {
  return Number(value.toFixed(4)).toString();
}

/** Tick positions covering [lo, hi] at a 1/2/5 step. */
export function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) {
    const pad = Math.abs(lo) || 1;
    return niceTicks(lo - pad / 2, lo + pad / 2, count);
  }
  const rawStep = (hi - lo) / Math.max(1, count - 1);
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 5, 10].map((m) => m * power);
  const step = candidates.find((c) => c >= rawStep) ?? candidates[3];
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = start; t <= hi + step * 1e-9; t += step) {
    ticks.push(Number(t.toFixed(10)));
  }
  return ticks;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderChart(spec: ChartSpec): string {
  const points = spec.series.flatMap((s) => s.points);
  if (points.length === 0) {
    throw new Error("nothing to plot: no data points");
  }
  const xs = points.map((p) => p.x);
  const lows = points.map((p) => p.mean - p.ci95);
  const highs = points.map((p) => p.mean + p.ci95);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let yMin = Math.min(0, ...lows);
  let yMax = Math.max(...highs);
  if (yMax === yMin) {
    yMax = yMin + 1;
  }
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) =>
    MARGIN.left + (xMax === xMin ? plotW / 2 : ((x - xMin) / (xMax - xMin)) * plotW);
  const sy = (y: number) => MARGIN.top + plotH - ((y - yMin) / (yMax - yMin)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16" font-weight="bold">${escapeXml(spec.title)}</text>`,
  );

  for (const tick of niceTicks(xMin, xMax)) {
    const x = fmt(sx(tick));
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" stroke="#dddddd"/>`,
      `<text x="${x}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-size="11">${fmt(tick)}</text>`,
    );
  }
  for (const tick of niceTicks(yMin, yMax)) {
    const y = fmt(sy(tick));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#dddddd"/>`,
      `<text x="${MARGIN.left - 8}" y="${y}" text-anchor="end" dominant-baseline="middle" font-size="11">${fmt(tick)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333333"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13">${escapeXml(spec.xLabel)}</text>`,
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${escapeXml(spec.yLabel)}</text>`,
  );

  spec.series.forEach((series, index) => {
    const color = PALETTE[index % PALETTE.length];
    if (series.points.some((p) => p.ci95 > 0)) {
      const upper = series.points.map((p) => `${fmt(sx(p.x))},${fmt(sy(p.mean + p.ci95))}`);
      const lower = [...series.points]
        .reverse()
        .map((p) => `${fmt(sx(p.x))},${fmt(sy(p.mean - p.ci95))}`);
      parts.push(
        `<polygon points="${[...upper, ...lower].join(" ")}" fill="${color}" opacity="0.15"/>`,
      );
    }
    const path = series.points.map((p) => `${fmt(sx(p.x))},${fmt(sy(p.mean))}`).join(" ");
    parts.push(
      `<polyline points="${path}" fill="none" stroke="${color}" stroke-width="2"/>`,
    );
    for (const p of series.points) {
      parts.push(
        `<circle cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.mean))}" r="3" fill="${color}"/>`,
      );
    }
  });

  const legendX = MARGIN.left + plotW - 200;
  spec.series.forEach((series, index) => {
    const y = MARGIN.top + 14 + index * 18;
    const color = PALETTE[index % PALETTE.length];
    parts.push(
      `<line x1="${legendX}" y1="${y}" x2="${legendX + 22}" y2="${y}" stroke="${color}" stroke-width="2"/>`,
      `<text x="${legendX + 28}" y="${y + 4}" font-size="12">${escapeXml(series.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
