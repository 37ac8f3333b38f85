/** Incremental event polling with gap recovery.
 *
 * One poll round: fetch events after the cursor, fold them into the view,
 * and when the fold detects a sequence gap (server restarted or restored),
 * rebuild the tables from the query endpoints instead of trusting the
 * stream. */

import type { ApiClient } from "./api.js";
import type { KpiReportDoc } from "./types.js";
import { ViewState, applyEvent, resetFromQueries } from "./model.js";

export const DEFAULT_POLL_INTERVAL_MS = 1000;

export async function fullRefetch(api: ApiClient, state: ViewState): Promise<ViewState> {
  // Cursor first: events landing between the cursor read and the table
  // queries get re-applied on the next poll, which the fold tolerates.
  const all = await api.events(0);
  const cursor = all.length > 0 ? all[all.length - 1]!.seq : 0;
  const [slices, intents] = await Promise.all([api.listSlices(), api.listIntents()]);
  const kpiBySlice = new Map<string, KpiReportDoc[]>();
  await Promise.all(
    slices.map(async (doc) => {
      kpiBySlice.set(doc.id, await api.getKpi(doc.id));
    }),
  );
  return resetFromQueries(state, slices, intents, kpiBySlice, cursor);
}

export async function pollOnce(api: ApiClient, state: ViewState): Promise<ViewState> {
  const records = await api.events(state.lastSeq);
  const sliceIdsBefore = new Set(state.slices.keys());
  let newSlices = false;
  for (const record of records) {
    applyEvent(state, record);
    const nsi = record.payload["nsi_id"] as string | undefined;
    if (nsi && !sliceIdsBefore.has(nsi)) newSlices = true;
  }
  if (state.gapDetected || newSlices) {
    return fullRefetch(api, state);
  }
  return state;
}

export function startPolling(
  api: ApiClient,
  state: ViewState,
  onUpdate: (state: ViewState) => void,
  onError: (error: unknown) => void,
  intervalMs: number = DEFAULT_POLL_INTERVAL_MS,
): () => void {
  let current = state;
  let stopped = false;
  let inFlight = false;

  const tick = async () => {
    if (stopped || inFlight) return;
    inFlight = true;
    try {
      current = await pollOnce(api, current);
      onUpdate(current);
    } catch (error) {
      onError(error);
    } finally {
      inFlight = false;
    }
  };

  void tick();
  const timer = setInterval(() => void tick(), intervalMs);
  return () => {
    stopped = true;
    clearInterval(timer);
  };
}
