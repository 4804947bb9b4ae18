// Dashboard wiring: one campaign at a time, one mutating request in flight.

import { ApiError, CampaignApi } from "./api.js";
import { ALPHA_MAX, ALPHA_MIN, alphaToSlider, sliderToAlpha } from "./alpha.js";
import {
  bestActivitySeries,
  cumulativeHitsSeries,
  lociBarData,
  renderLineChart,
  renderLociBars,
} from "./charts.js";
import { assignPasteToBatch, parseSpreadsheetPaste } from "./paste.js";
import type { CampaignState, MetricsResponse } from "./types.js";
import { deriveDashboard, formatScore } from "./viewstate.js";
import { validateGrid, type GridRow } from "./validate.js";

const api = new CampaignApi("");

interface UiState {
  campaignId: string | null;
  state: CampaignState | null;
  metrics: MetricsResponse | null;
  busy: boolean;
  gridText: Map<string, string>;
  gridFailed: Set<string>;
  gridErrors: Map<string, string>;
  alpha: number | null; // null = use the campaign's configured schedule
  banner: { kind: "error" | "info"; text: string } | null;
}

const ui: UiState = {
  campaignId: null,
  state: null,
  metrics: null,
  busy: false,
  gridText: new Map(),
  gridFailed: new Set(),
  gridErrors: new Map(),
  alpha: null,
  banner: null,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function refreshCampaignList(): Promise<void> {
  try {
    const campaigns = await api.listCampaigns();
    const select = el<HTMLSelectElement>("campaign-select");
    const current = ui.campaignId;
    select.innerHTML = "";
    for (const c of campaigns) {
      const option = document.createElement("option");
      option.value = c.campaign_id;
      option.textContent = `${c.campaign_id} (${c.status}, round ${c.rounds_proposed}/${c.max_rounds})`;
      select.appendChild(option);
    }
    if (campaigns.length === 0) {
      ui.campaignId = null;
    } else if (!current || !campaigns.some((c) => c.campaign_id === current)) {
      ui.campaignId = campaigns[0].campaign_id;
    }
    if (ui.campaignId) select.value = ui.campaignId;
    ui.banner = null;
  } catch (err) {
    ui.banner = { kind: "error", text: `service unreachable: ${message(err)}` };
  }
}

async function refreshCampaign(): Promise<void> {
  if (!ui.campaignId) {
    ui.state = null;
    ui.metrics = null;
    return;
  }
  try {
    ui.state = await api.getCampaign(ui.campaignId);
    ui.metrics = await api.metrics(ui.campaignId);
    ui.banner = null;
  } catch (err) {
    ui.banner = { kind: "error", text: `service unreachable: ${message(err)}` };
  }
}

function message(err: unknown): string {
  if (err instanceof ApiError) return err.detail;
  if (err instanceof Error) return err.message;
  return String(err);
}

async function mutate(action: () => Promise<void>): Promise<void> {
  if (ui.busy) return;
  ui.busy = true;
  render();
  try {
    await action();
    ui.banner = null;
  } catch (err) {
    ui.banner = { kind: "error", text: message(err) };
  } finally {
    ui.busy = false;
    await refreshCampaign();
    render();
  }
}

function onPropose(): void {
  void mutate(async () => {
    if (!ui.campaignId) throw new Error("no campaign selected");
    await api.propose(ui.campaignId, ui.alpha);
    ui.gridText.clear();
    ui.gridFailed.clear();
    ui.gridErrors.clear();
  });
}

function currentGridRows(batch: string[]): GridRow[] {
  return batch.map((variant) => ({
    variant,
    text: ui.gridText.get(variant) ?? "",
    failed: ui.gridFailed.has(variant),
  }));
}

function onSubmitMeasurements(): void {
  if (!ui.state || !ui.campaignId) return;
  const view = deriveDashboard(ui.state);
  const rows = currentGridRows(view.pendingBatch);
  const result = validateGrid(rows);
  ui.gridErrors = result.errors;
  if (!result.ok) {
    ui.banner = { kind: "error", text: "fix the highlighted entries first" };
    render();
    return;
  }
  void mutate(async () => {
    await api.submitMeasurements(ui.campaignId as string, result.entries);
    ui.gridText.clear();
    ui.gridFailed.clear();
    ui.gridErrors.clear();
  });
}

function onGridPaste(event: ClipboardEvent): void {
  const text = event.clipboardData?.getData("text/plain");
  if (!text || !ui.state) return;
  const view = deriveDashboard(ui.state);
  if (view.pendingBatch.length === 0) return;
  event.preventDefault();
  const { values, unmatched } = assignPasteToBatch(
    parseSpreadsheetPaste(text),
    view.pendingBatch,
  );
  for (const [variant, value] of values) ui.gridText.set(variant, value);
  ui.banner =
    unmatched.length > 0
      ? { kind: "error", text: `pasted variants not in batch: ${unmatched.join(", ")}` }
      : { kind: "info", text: `filled ${values.size} entries from paste` };
  render();
}

function onCreateCampaign(event: Event): void {
  event.preventDefault();
  const id = el<HTMLInputElement>("create-id").value.trim();
  const reference = el<HTMLInputElement>("create-reference").value.trim();
  const embeddings = el<HTMLInputElement>("create-embeddings").value.trim();
  const logprobs = el<HTMLInputElement>("create-logprobs").value.trim();
  const dataset = el<HTMLInputElement>("create-dataset").value.trim();
  const batch = Number(el<HTMLInputElement>("create-batch").value || "16");
  void mutate(async () => {
    await api.createCampaign({
      campaign_id: id,
      reference,
      embeddings_path: embeddings,
      logprobs_path: logprobs,
      dataset_path: dataset || null,
      config: { batch_size: batch },
    });
    ui.campaignId = id;
    await refreshCampaignList();
  });
}

function renderBanner(): string {
  if (!ui.banner) return "";
  const cls = ui.banner.kind === "error" ? "banner error" : "banner info";
  const retry =
    ui.banner.kind === "error"
      ? `<button id="banner-retry" type="button">retry</button>`
      : "";
  return `<div class="${cls}">${escapeHtml(ui.banner.text)} ${retry}</div>`;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderDashboard(): string {
  if (!ui.state) {
    return `<p class="muted">No campaign selected. Create one or start the service with artifacts from <code>folde synth</code>.</p>`;
  }
  const view = deriveDashboard(ui.state);
  const parts: string[] = [];
  parts.push(
    `<div class="status-row"><span class="chip ${view.status}">${view.status.replace(/_/g, " ")}</span>` +
      `<span class="muted">round ${Math.min(view.roundIndex, ui.state.config.rounds)} of ${ui.state.config.rounds}</span></div>`,
  );

  const sliderPos = alphaToSlider(ui.alpha ?? ui.state.config.alpha_schedule[0] ?? 6);
  parts.push(`
    <div class="controls">
      <label class="alpha-label">exploration &alpha;
        <input id="alpha-slider" type="range" min="0" max="1" step="0.001"
               value="${sliderPos.toFixed(3)}" ${ui.busy ? "disabled" : ""}/>
        <span id="alpha-value">${ui.alpha === null ? "schedule default" : ui.alpha}</span>
        <button id="alpha-reset" type="button" ${ui.alpha === null ? "disabled" : ""}>use schedule</button>
      </label>
      <button id="propose-btn" type="button"
              ${view.proposeEnabled && !ui.busy ? "" : "disabled"}>propose next batch</button>
    </div>`);

  if (view.gridEnabled) {
    const rows = view.currentRows
      .map((row) => {
        const error = ui.gridErrors.get(row.variant);
        return `<tr class="${error ? "row-error" : ""}">
          <td class="mono">${escapeHtml(row.variant)}</td>
          <td class="num">${formatScore(row.naturalness)}</td>
          <td class="num">${formatScore(row.consensus)}</td>
          <td class="num">${formatScore(row.ucb)}</td>
          <td><input class="measure-input" data-variant="${escapeHtml(row.variant)}"
                     value="${escapeHtml(ui.gridText.get(row.variant) ?? "")}"
                     placeholder="activity" ${ui.busy ? "disabled" : ""}/></td>
          <td><input type="checkbox" class="failed-box" data-variant="${escapeHtml(row.variant)}"
                     ${ui.gridFailed.has(row.variant) ? "checked" : ""} ${ui.busy ? "disabled" : ""}/></td>
          <td class="error-cell">${error ? escapeHtml(error) : ""}</td>
        </tr>`;
      })
      .join("");
    parts.push(`
      <h3>round ${view.roundIndex} proposal: enter measurements</h3>
      <p class="muted">paste a tab-separated block from your spreadsheet anywhere in the grid</p>
      <table class="grid" id="measure-grid">
        <thead><tr><th>variant</th><th>naturalness</th><th>consensus</th><th>UCB</th>
               <th>activity</th><th>failed</th><th></th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      <button id="submit-btn" type="button" ${ui.busy ? "disabled" : ""}>submit measurements</button>`);
  }

  for (const past of [...view.historyRows].reverse()) {
    const rows = past.rows
      .map(
        (row) => `<tr>
        <td class="mono">${escapeHtml(row.variant)}</td>
        <td class="num">${formatScore(row.naturalness)}</td>
        <td class="num">${formatScore(row.consensus)}</td>
        <td class="num">${formatScore(row.ucb)}</td>
        <td class="num">${row.failed ? "failed" : formatScore(row.measured)}</td>
      </tr>`,
      )
      .join("");
    parts.push(`
      <details class="history"><summary>round ${past.round} (${past.rows.length} variants)</summary>
      <table class="grid">
        <thead><tr><th>variant</th><th>naturalness</th><th>consensus</th><th>UCB</th><th>measured</th></tr></thead>
        <tbody>${rows}</tbody>
      </table></details>`);
  }
  return parts.join("\n");
}

function renderCharts(): string {
  if (!ui.metrics || ui.metrics.rounds.length === 0) {
    return `<p class="muted">charts appear once a round has been proposed</p>`;
  }
  const parts = [renderLociBars(lociBarData(ui.metrics), "unique loci per batch (dark = new)")];
  const hits = cumulativeHitsSeries(ui.metrics);
  if (hits.length > 0) {
    parts.push(renderLineChart(hits, "cumulative top-10% hits (ground truth attached)"));
  }
  const best = bestActivitySeries(ui.metrics);
  if (best.length > 0) {
    parts.push(renderLineChart(best, "best measured activity so far"));
  }
  return parts.join("\n");
}

export function render(): void {
  el("banner-area").innerHTML = renderBanner();
  el("dashboard").innerHTML = renderDashboard();
  el("charts").innerHTML = renderCharts();
  bindDynamicHandlers();
}

function bindDynamicHandlers(): void {
  const retry = document.getElementById("banner-retry");
  if (retry) {
    retry.addEventListener("click", () => {
      void (async () => {
        await refreshCampaignList();
        await refreshCampaign();
        render();
      })();
    });
  }
  const propose = document.getElementById("propose-btn");
  if (propose) propose.addEventListener("click", onPropose);
  const submit = document.getElementById("submit-btn");
  if (submit) submit.addEventListener("click", onSubmitMeasurements);
  const grid = document.getElementById("measure-grid");
  if (grid) grid.addEventListener("paste", onGridPaste as EventListener);
  for (const input of document.querySelectorAll<HTMLInputElement>(".measure-input")) {
    input.addEventListener("input", () => {
      ui.gridText.set(input.dataset.variant as string, input.value);
    });
  }
  for (const box of document.querySelectorAll<HTMLInputElement>(".failed-box")) {
    box.addEventListener("change", () => {
      const variant = box.dataset.variant as string;
      if (box.checked) ui.gridFailed.add(variant);
      else ui.gridFailed.delete(variant);
    });
  }
  const slider = document.getElementById("alpha-slider") as HTMLInputElement | null;
  if (slider) {
    slider.addEventListener("input", () => {
      ui.alpha = sliderToAlpha(Number(slider.value));
      const label = document.getElementById("alpha-value");
      if (label) label.textContent = String(ui.alpha);
      const reset = document.getElementById("alpha-reset") as HTMLButtonElement | null;
      if (reset) reset.disabled = false;
    });
  }
  const reset = document.getElementById("alpha-reset");
  if (reset) {
    reset.addEventListener("click", () => {
      ui.alpha = null;
      render();
    });
  }
}

export async function boot(): Promise<void> {
  el<HTMLSelectElement>("campaign-select").addEventListener("change", (event) => {
    ui.campaignId = (event.target as HTMLSelectElement).value;
    void (async () => {
      await refreshCampaign();
      render();
    })();
  });
  el("refresh-btn").addEventListener("click", () => {
    void (async () => {
      await refreshCampaignList();
      await refreshCampaign();
      render();
    })();
  });
  el<HTMLFormElement>("create-form").addEventListener("submit", onCreateCampaign);
  await refreshCampaignList();
  await refreshCampaign();
  render();
  console.log(`alpha knob range [${ALPHA_MIN}, ${ALPHA_MAX}]`);
}

if (typeof document !== "undefined" && document.getElementById("dashboard")) {
  void boot();
}
