/** SVG sparkline geometry for the per-slice KPI charts. Pure string math so
 * it is testable without a DOM. */

import type { KpiPoint } from "./model.js";

export interface ChartGeometry {
  width: number;
  height: number;
  path: string; // p99 latency polyline
  boundY: number | null; // horizontal guide for the latency bound
  points: { x: number; y: number; violated: boolean }[];
  yMax: number;
}

export function latencyChart(
  kpi: KpiPoint[],
  latencyBoundMs: number,
  width = 220,
  height = 48,
): ChartGeometry {
  const usable = kpi.filter((p) => p.p99 !== null);
  if (usable.length === 0) {
    return { width, height, path: "", boundY: null, points: [], yMax: latencyBoundMs };
  }
  const values = usable.map((p) => p.p99 as number);
  const yMax = Math.max(latencyBoundMs * 1.25, ...values) * 1.05;
  const xStep = usable.length > 1 ? width / (usable.length - 1) : 0;
  const toY = (v: number) => round2(height - (v / yMax) * height);
  const points = usable.map((p, i) => ({
    x: round2(usable.length > 1 ? i * xStep : width / 2),
    y: toY(p.p99 as number),
    violated: (p.p99 as number) > latencyBoundMs,
  }));
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${p.x},${p.y}`)
    .join(" ");
  return { width, height, path, boundY: toY(latencyBoundMs), points, yMax };
}

function round2(x: number): number {
  return Math.round(x * 100) / 100;
}
