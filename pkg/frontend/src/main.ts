/** DOM wiring: render loop over the polled view state, the intent form, and
 * the what-if preview. All data shown comes from API fields. */

import { ApiClient, ApiError } from "./api.js";
import { latencyChart } from "./chart.js";
import {
  ViewState,
  complianceClass,
  errorPosition,
  initialState,
  stateClass,
} from "./model.js";
import { fullRefetch, startPolling } from "./poll.js";
import type { PipelineOutcome } from "./types.js";

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function render(state: ViewState): void {
  el("clock").textContent = `t=${state.simTime.toFixed(1)}s`;
  renderSlices(state);
  renderIntents(state);
  el("ticker").innerHTML = state.ticker
    .map((line) => `<div class="tick">${escapeHtml(line)}</div>`)
    .join("");
}

function renderSlices(state: ViewState): void {
  const cards: string[] = [];
  for (const view of state.slices.values()) {
    const doc = view.doc;
    const chart = latencyChart(view.kpi, doc.max_latency_ms);
    const circles = chart.points
      .map(
        (p) =>
          `<circle cx="${p.x}" cy="${p.y}" r="1.6" class="${p.violated ? "pt-bad" : "pt-ok"}"/>`,
      )
      .join("");
    const bound =
      chart.boundY !== null
        ? `<line x1="0" x2="${chart.width}" y1="${chart.boundY}" y2="${chart.boundY}" class="bound"/>`
        : "";
    const latest = view.kpi[view.kpi.length - 1];
    cards.push(`
      <div class="card" data-nsi="${doc.id}">
        <div class="card-head">
          <span class="slice-id">${doc.id}</span>
          <span class="badge ${stateClass(doc.state)}">${doc.state}</span>
          <span class="badge ${complianceClass(view.compliance)}" data-role="compliance">${view.compliance}</span>
        </div>
        <div class="meta">${doc.slice_type} · ${doc.gst_id} · ${doc.isolation} ·
          bound ${doc.max_latency_ms} ms · ${doc.bandwidth_mbps} Mbps</div>
        <div class="meta">path: ${doc.path.join(" > ") || "-"}</div>
        ${view.annotation ? `<div class="annotation">${escapeHtml(view.annotation)}</div>` : ""}
        <svg width="${chart.width}" height="${chart.height}" class="spark">
          ${bound}<path d="${chart.path}" class="p99"/>${circles}
        </svg>
        <div class="meta">${
          latest && latest.p99 !== null
            ? `p99 ${latest.p99.toFixed(2)} ms · availability ${latest.availability.toFixed(5)} · window [${latest.windowStart}, ${latest.windowEnd})`
            : "no samples yet"
        }</div>
      </div>`);
  }
  el("slices").innerHTML = cards.join("") || '<div class="empty">no slices yet</div>';
}

function renderIntents(state: ViewState): void {
  const rows = state.intents
    .map(
      (intent) => `
      <tr>
        <td>${intent.id}</td>
        <td class="mono">${escapeHtml(intent.text)}</td>
        <td>${intent.stakeholder}</td>
        <td class="intent-${intent.status}">${intent.status}${
          intent.status !== "active" && intent.stage ? ` (${intent.stage})` : ""
        }</td>
        <td>${intent.nsi_id ?? "-"}</td>
      </tr>`,
    )
    .join("");
  el("intents").innerHTML =
    `<tr><th>id</th><th>text</th><th>as</th><th>status</th><th>slice</th></tr>` + rows;
}

function renderOutcome(outcome: PipelineOutcome, text: string, dryRun: boolean): void {
  const box = el("outcome");
  if (outcome.ok && !dryRun) {
    box.className = "outcome ok";
    box.innerHTML = `provisioned: ${outcome.nsi_id} (${outcome.slice_type}) from ${outcome.intent_id}`;
    return;
  }
  if (dryRun) {
    box.className = outcome.feasible ? "outcome ok" : "outcome warn";
    box.innerHTML = outcome.feasible
      ? `what-if: feasible as ${outcome.slice_type}`
      : `what-if: infeasible at ${outcome.stage}` +
        (outcome.feasibility_reason || outcome.error
          ? ` - ${escapeHtml(outcome.feasibility_reason ?? outcome.error ?? "")}`
          : "");
    return;
  }
  box.className = "outcome error";
  const position = outcome.stage === "parse" ? errorPosition(outcome.error) : null;
  let highlighted = "";
  if (position !== null) {
    const head = escapeHtml(text.slice(0, position));
    const bad = escapeHtml(text.slice(position, position + 1) || " ");
    const tail = escapeHtml(text.slice(position + 1));
    highlighted = `<div class="mono">${head}<span class="caret">${bad}</span>${tail}</div>`;
  }
  box.innerHTML =
    `failed at ${outcome.stage}: ${escapeHtml(outcome.error ?? "")}` + highlighted;
}

function renderBanner(error: unknown): void {
  const banner = el("banner");
  if (error instanceof ApiError) {
    banner.textContent = `request failed: ${error.errorType} - ${error.message}`;
  } else {
    banner.textContent = `connection lost, retrying: ${String(error)}`;
  }
  banner.classList.remove("hidden");
  setTimeout(() => banner.classList.add("hidden"), 4000);
}

async function submit(dryRun: boolean): Promise<void> {
  const text = el<HTMLInputElement>("intent-text").value.trim();
  const stakeholder = el<HTMLSelectElement>("stakeholder").value;
  if (!text) return;
  try {
    const outcome = await api.submitIntent(stakeholder, text, dryRun);
    renderOutcome(outcome, text, dryRun);
  } catch (error) {
    renderBanner(error);
  }
}

function main(): void {
  el("submit").addEventListener("click", () => void submit(false));
  el("whatif").addEventListener("click", () => void submit(true));
  el<HTMLInputElement>("intent-text").addEventListener("keydown", (event) => {
    if (event.key === "Enter") void submit(false);
  });

  void (async () => {
    const state = await fullRefetch(api, initialState());
    render(state);
    startPolling(api, state, render, renderBanner);
  })().catch(renderBanner);
}

main();
