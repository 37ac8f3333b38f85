import type { EventRecord, IntentDoc, KpiReportDoc, PipelineOutcome, SliceDoc } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly errorType: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchFn = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let errorType = "HttpError";
      let message = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: string; message?: string };
        errorType = body.error ?? errorType;
        message = body.message ?? message;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, errorType, message);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    return (await this.request(path, init)).json() as Promise<T>;
  }

  submitIntent(stakeholder: string, text: string, dryRun = false): Promise<PipelineOutcome> {
    return this.json("/intents", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ stakeholder, text, dry_run: dryRun }),
    });
  }

  listIntents(): Promise<IntentDoc[]> {
    return this.json("/intents");
  }

  listSlices(): Promise<SliceDoc[]> {
    return this.json("/slices");
  }

  getKpi(nsiId: string, start?: number, end?: number): Promise<KpiReportDoc[]> {
    const params = new URLSearchParams();
    if (start !== undefined) params.set("start", String(start));
    if (end !== undefined) params.set("end", String(end));
    const query = params.toString();
    return this.json(`/slices/${nsiId}/kpi${query ? "?" + query : ""}`);
  }

  /** Incremental NDJSON event fetch; returns records with seq > after. */
  async events(after: number, limit?: number): Promise<EventRecord[]> {
    const params = new URLSearchParams({ after: String(after) });
    if (limit !== undefined) params.set("limit", String(limit));
    const response = await this.request(`/events?${params}`);
    const text = await response.text();
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as EventRecord);
  }

  clock(): Promise<{ sim_time: number; scenario: string | null }> {
    return this.json("/clock");
  }

  injectFault(body: Record<string, unknown>): Promise<{ status: string; kind: string }> {
    return this.json("/faults", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  topology(): Promise<{ nodes: unknown[]; links: { id: string }[] }> {
    return this.json("/topology");
  }
}
