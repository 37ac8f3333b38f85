/** Pure view-model: folds API responses and the event stream into the
 * state the board renders. No business rules live here; the console only
 * mirrors what the backend reports. */

import type { EventRecord, IntentDoc, KpiReportDoc, SliceDoc } from "./types.js";

export type ComplianceBadge = "met" | "violated" | "unknown";

export interface KpiPoint {
  windowStart: number;
  windowEnd: number;
  p99: number | null;
  availability: number;
  throughput: number;
  empty: boolean;
}

export interface SliceView {
  doc: SliceDoc;
  compliance: ComplianceBadge;
  annotation: string | null; // latest adaptation note, e.g. a re-home
  kpi: KpiPoint[];
}

export interface ViewState {
  slices: Map<string, SliceView>;
  intents: IntentDoc[];
  ticker: string[];
  lastSeq: number;
  gapDetected: boolean;
  simTime: number;
}

export const KPI_POINTS_SHOWN = 24;
const TICKER_LINES = 50;

export function initialState(): ViewState {
  return {
    slices: new Map(),
    intents: [],
    ticker: [],
    lastSeq: 0,
    gapDetected: false,
    simTime: 0,
  };
}

/** Replace query-sourced tables wholesale (startup and gap recovery). */
export function resetFromQueries(
  state: ViewState,
  slices: SliceDoc[],
  intents: IntentDoc[],
  kpiBySlice: Map<string, KpiReportDoc[]>,
  lastSeq: number,
): ViewState {
  const views = new Map<string, SliceView>();
  for (const doc of slices) {
    const previous = state.slices.get(doc.id);
    views.set(doc.id, {
      doc,
      compliance: previous?.compliance ?? "unknown",
      annotation: previous?.annotation ?? null,
      kpi: (kpiBySlice.get(doc.id) ?? []).map(reportToPoint).slice(-KPI_POINTS_SHOWN),
    });
  }
  return {
    slices: views,
    intents,
    ticker: state.ticker,
    lastSeq,
    gapDetected: false,
    simTime: state.simTime,
  };
}

function reportToPoint(report: KpiReportDoc): KpiPoint {
  return {
    windowStart: report.window_start,
    windowEnd: report.window_end,
    p99: report.p99_latency_ms,
    availability: report.availability,
    throughput: report.throughput_mbps,
    empty: report.empty,
  };
}

/** Fold one event into the view. Sets gapDetected when the stream skips a
 * sequence number; the caller then refetches everything via queries. */
export function applyEvent(state: ViewState, event: EventRecord): void {
  if (state.lastSeq > 0 && event.seq !== state.lastSeq + 1) {
    state.gapDetected = true;
  }
  state.lastSeq = Math.max(state.lastSeq, event.seq);
  state.simTime = Math.max(state.simTime, event.t);

  const payload = event.payload;
  const kind = payload["kind"] as string | undefined;

  if (event.category === "kpi" && kind === "verdict") {
    const view = state.slices.get(payload["nsi_id"] as string);
    if (view) view.compliance = (payload["overall"] as boolean) ? "met" : "violated";
  } else if (event.category === "kpi" && kind === "report") {
    const view = state.slices.get(payload["nsi_id"] as string);
    if (view && !(payload["empty"] as boolean)) {
      const point = reportToPoint(payload as unknown as KpiReportDoc);
      const last = view.kpi[view.kpi.length - 1];
      if (last === undefined || point.windowStart > last.windowStart) {
        view.kpi.push(point);
        if (view.kpi.length > KPI_POINTS_SHOWN) view.kpi.shift();
      }
    }
  } else if (event.category === "slice" && kind === "transition") {
    const view = state.slices.get(payload["nsi_id"] as string);
    if (view) view.doc = { ...view.doc, state: payload["to"] as string };
  } else if (event.category === "action" && kind === "action") {
    const view = state.slices.get(payload["nsi_id"] as string);
    if (view) {
      const action = payload["action"] as string;
      const result = payload["result"] as string;
      const path = payload["new_path"] as string[] | undefined;
      view.annotation =
        `${action} at t=${event.t}s: ${result}` + (path ? ` via ${path.join(" > ")}` : "");
    }
  }

  if (kind !== "sample") {
    state.ticker.unshift(tickerLine(event));
    if (state.ticker.length > TICKER_LINES) state.ticker.pop();
  }
}

export function tickerLine(event: EventRecord): string {
  const payload = event.payload;
  const kind = (payload["kind"] ?? payload["command"] ?? "") as string;
  const details: string[] = [];
  for (const key of ["intent_id", "nsi_id", "profile_id", "to", "slice_type", "action", "result", "overall", "stage", "status"]) {
    if (payload[key] !== undefined && payload[key] !== null) {
      details.push(`${key}=${String(payload[key])}`);
    }
  }
  return `#${event.seq} t=${event.t.toFixed(1)} [${event.category}] ${kind} ${details.join(" ")}`.trimEnd();
}

/** Character offset from a parse-stage error message, for inline highlighting. */
export function errorPosition(error: string | null): number | null {
  if (!error) return null;
  const match = /at position (\d+)/.exec(error);
  return match ? Number(match[1]) : null;
}

/** Badge color classes are presentation; the mapping itself is fixed here. */
export function complianceClass(badge: ComplianceBadge): string {
  return { met: "badge-met", violated: "badge-violated", unknown: "badge-unknown" }[badge];
}

export function stateClass(state: string): string {
  switch (state) {
    case "Active":
      return "state-active";
    case "Degraded":
      return "state-degraded";
    case "Terminated":
      return "state-terminated";
    default:
      return "state-transient";
  }
}
