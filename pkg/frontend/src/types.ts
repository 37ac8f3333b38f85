/** Payload shapes of the control API. Everything rendered by the console is
 * traceable to one of these fields; the console derives nothing itself. */

export interface EventRecord {
  seq: number;
  t: number;
  category: "intent" | "sla" | "profile" | "slice" | "mano" | "kpi" | "action";
  payload: Record<string, unknown>;
}

export interface PipelineOutcome {
  ok: boolean;
  stage: string;
  intent_id: string | null;
  profile_id: string | null;
  nsi_id: string | null;
  error_type: string | null;
  error: string | null;
  feasible: boolean | null;
  feasibility_reason: string | null;
  slice_type: string | null;
  service_model: string | null;
}

export interface SliceDoc {
  id: string;
  state: string;
  slice_type: string;
  gst_id: string;
  profile_id: string;
  isolation: string;
  max_latency_ms: number;
  bandwidth_mbps: number;
  endpoints: string[];
  path: string[];
  created_at: number;
  updated_at: number;
  failure_reason: string | null;
  current_path_latency_ms?: number;
}

export interface IntentDoc {
  id: string;
  text: string;
  stakeholder: string;
  status: string;
  stage: string;
  error: string | null;
  profile_id: string | null;
  nsi_id: string | null;
}

export interface KpiReportDoc {
  nsi_id: string;
  window_start: number;
  window_end: number;
  sent: number;
  delivered: number;
  p99_latency_ms: number | null;
  loss_rate: number;
  throughput_mbps: number;
  availability: number;
  deadline_miss_rate: number | null;
  empty: boolean;
}
