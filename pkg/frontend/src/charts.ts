// Minimal SVG charts for round-based metrics. Builders return markup strings,
// so tests can assert on structure without a DOM.

import type { MetricsResponse, RoundMetrics } from "./types.js";

export interface BarSegment {
  round: number;
  total: number;
  highlighted: number; // portion drawn darker (newly explored loci)
}

export function lociBarData(metrics: MetricsResponse): BarSegment[] {
  return metrics.rounds.map((r: RoundMetrics) => ({
    round: r.round,
    total: r.unique_loci,
    highlighted: r.new_loci,
  }));
}

export function cumulativeHitsSeries(
  metrics: MetricsResponse,
): { round: number; value: number }[] {
  return metrics.rounds
    .filter((r) => r.cum_top_decile_hits !== null)
    .map((r) => ({ round: r.round, value: r.cum_top_decile_hits as number }));
}

export function bestActivitySeries(
  metrics: MetricsResponse,
): { round: number; value: number }[] {
  return metrics.rounds
    .filter((r) => r.best_activity_so_far !== null)
    .map((r) => ({ round: r.round, value: r.best_activity_so_far as number }));
}

const WIDTH = 360;
const HEIGHT = 160;
const PAD = 28;

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Stacked per-round bars: light = revisited loci, dark = newly explored. */
export function renderLociBars(segments: BarSegment[], title: string): string {
  if (segments.length === 0) {
    return `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img"><text x="${PAD}" y="${HEIGHT / 2}" class="chart-empty">no rounds yet</text></svg>`;
  }
  const maxTotal = Math.max(1, ...segments.map((s) => s.total));
  const plotW = WIDTH - 2 * PAD;
  const plotH = HEIGHT - 2 * PAD;
  const slot = plotW / segments.length;
  const barW = Math.min(40, slot * 0.6);
  const parts: string[] = [];
  parts.push(`<text x="${PAD}" y="14" class="chart-title">${esc(title)}</text>`);
  segments.forEach((seg, i) => {
    const x = PAD + slot * i + (slot - barW) / 2;
    const totalH = (seg.total / maxTotal) * plotH;
    const newH = (Math.min(seg.highlighted, seg.total) / maxTotal) * plotH;
    const yTop = PAD + plotH - totalH;
    parts.push(
      `<rect class="bar-seen" x="${x.toFixed(1)}" y="${yTop.toFixed(1)}" width="${barW.toFixed(1)}" height="${(totalH - newH).toFixed(1)}"></rect>`,
    );
    parts.push(
      `<rect class="bar-new" x="${x.toFixed(1)}" y="${(yTop + totalH - newH).toFixed(1)}" width="${barW.toFixed(1)}" height="${newH.toFixed(1)}"></rect>`,
    );
    parts.push(
      `<text x="${(x + barW / 2).toFixed(1)}" y="${HEIGHT - 8}" class="chart-tick">R${seg.round}</text>`,
    );
    parts.push(
      `<text x="${(x + barW / 2).toFixed(1)}" y="${(yTop - 4).toFixed(1)}" class="chart-value">${seg.total}</text>`,
    );
  });
  return `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img">${parts.join("")}</svg>`;
}

/** Simple line chart over rounds. */
export function renderLineChart(
  series: { round: number; value: number }[],
  title: string,
): string {
  if (series.length === 0) {
    return `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img"><text x="${PAD}" y="${HEIGHT / 2}" class="chart-empty">no data</text></svg>`;
  }
  const values = series.map((p) => p.value);
  const lo = Math.min(0, ...values);
  const hi = Math.max(1e-9, ...values);
  const plotW = WIDTH - 2 * PAD;
  const plotH = HEIGHT - 2 * PAD;
  const x = (i: number) =>
    PAD + (series.length === 1 ? plotW / 2 : (plotW * i) / (series.length - 1));
  const y = (v: number) => PAD + plotH - ((v - lo) / (hi - lo || 1)) * plotH;
  const points = series
    .map((p, i) => `${x(i).toFixed(1)},${y(p.value).toFixed(1)}`)
    .join(" ");
  const parts: string[] = [];
  parts.push(`<text x="${PAD}" y="14" class="chart-title">${esc(title)}</text>`);
  parts.push(`<polyline class="line" points="${points}"></polyline>`);
  series.forEach((p, i) => {
    parts.push(
      `<circle class="dot" cx="${x(i).toFixed(1)}" cy="${y(p.value).toFixed(1)}" r="3"></circle>`,
    );
    parts.push(
      `<text x="${x(i).toFixed(1)}" y="${HEIGHT - 8}" class="chart-tick">R${p.round}</text>`,
    );
  });
  return `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img">${parts.join("")}</svg>`;
}
