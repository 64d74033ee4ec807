/** HTML renderers for ruling cards and the browse table.
 *
 * Pure string-in, string-out functions so they are trivially testable.
 * Everything that originated upstream (names, verdict texts, pattern
 * strings) goes through escapeHtml; the card must never echo source
 * page markup.
 */

import { t } from "./strings.js";
import type {
  ClassifyResponse,
  ExplanationPayload,
  RulingEntry,
  RulingsPage,
  TriggeredFeature,
  Verdict,
} from "./types.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function verdictClass(verdict: Verdict): string {
  return verdict === "Halal" ? "verdict-halal" : "verdict-haram";
}

export function renderVerdictBanner(verdict: Verdict, text: string): string {
  return (
    `<div class="verdict-banner ${verdictClass(verdict)}">` +
    `${escapeHtml(text)}</div>`
  );
}

export function renderProvenanceBadge(provenance: string): string {
  const label = provenance === "scholar" ? t("badge_scholar") : t("badge_machine");
  return `<span class="badge badge-${escapeHtml(provenance)}">${escapeHtml(label)}</span>`;
}

function renderEvidence(matches: TriggeredFeature["evidence"]): string {
  if (matches.length === 0) {
    return "";
  }
  const parts = matches.map(
    (m) => `${escapeHtml(m.pattern)} ×${m.count}`,
  );
  return ` <span class="evidence">(${parts.join(", ")})</span>`;
}

export function renderTriggeredList(triggered: TriggeredFeature[]): string {
  if (triggered.length === 0) {
    return `<p class="no-features">${t("no_triggered_features")}</p>`;
  }
  const items = triggered.map(
    (f) =>
      `<li class="priority-${f.priority}">` +
      `<span class="feature-name">${escapeHtml(f.feature)}</span> ` +
      `<span class="priority-tag">[${t(`priority_${f.priority}` as const)}]</span> ` +
      `${escapeHtml(f.description)}${renderEvidence(f.evidence)}</li>`,
  );
  return (
    `<h3>${t("triggered_features")}</h3>` +
    `<ul class="triggered">${items.join("")}</ul>`
  );
}

function renderWarnings(lowEvidence: boolean, highPriorityMajority: boolean): string {
  const warnings: string[] = [];
  if (lowEvidence) {
    warnings.push(
      `<p class="warning warning-low-evidence">${t("warning_low_evidence")}</p>`,
    );
  }
  if (highPriorityMajority) {
    warnings.push(
      `<p class="warning warning-high-priority">${t("warning_high_priority")}</p>`,
    );
  }
  return warnings.join("");
}

function renderExplanation(
  explanation: ExplanationPayload,
  lowEvidence: boolean,
): string {
  return (
    renderTriggeredList(explanation.triggered) +
    renderWarnings(lowEvidence, explanation.high_priority_majority)
  );
}

/** Card for a fresh classification (POST /api/classify response). */
export function renderClassifyCard(result: ClassifyResponse): string {
  const confidence =
    result.confidence === null
      ? ""
      : `<p class="confidence">${t("confidence")}: ${result.confidence.toFixed(4)}</p>`;
  const revision =
    result.revision === null
      ? ""
      : `<p class="revision">${t("revision")}: ${result.revision}</p>`;
  const cached = result.cached ? `<p class="cached">${t("cached")}</p>` : "";
  return (
    `<article class="card" data-ticker="${escapeHtml(result.ticker)}">` +
    renderVerdictBanner(result.verdict, result.verdict_text) +
    `<h2>${escapeHtml(result.ticker)} \u2014 ${escapeHtml(result.name)}</h2>` +
    renderProvenanceBadge(result.provenance) +
    confidence +
    revision +
    cached +
    renderExplanation(result.explanation, result.low_evidence) +
    `</article>`
  );
}

/** Card for a stored ruling (GET /api/rulings/{query} response). */
export function renderEntryCard(entry: RulingEntry): string {
  const lowEvidence = entry.features.values.every((v) => v === 0);
  return (
    `<article class="card" data-ticker="${escapeHtml(entry.ticker)}">` +
    renderVerdictBanner(entry.verdict, entry.verdict_text) +
    `<h2>${escapeHtml(entry.ticker)} \u2014 ${escapeHtml(entry.name)}</h2>` +
    renderProvenanceBadge(entry.provenance) +
    `<p class="revision">${t("revision")}: ${entry.revision}</p>` +
    `<p class="updated">${escapeHtml(entry.updated_at)}</p>` +
    renderExplanation(entry.explanation, lowEvidence) +
    `</article>`
  );
}

export function renderBrowseTable(page: RulingsPage): string {
  if (page.entries.length === 0) {
    return `<p class="browse-empty">${t("browse_empty")}</p>`;
  }
  const header =
    `<tr><th>${t("browse_col_ticker")}</th><th>${t("browse_col_name")}</th>` +
    `<th>${t("browse_col_verdict")}</th><th>${t("browse_col_provenance")}</th>` +
    `<th>${t("browse_col_revision")}</th><th>${t("browse_col_updated")}</th></tr>`;
  const rows = page.entries.map(
    (e) =>
      `<tr class="row-${e.provenance} ${verdictClass(e.verdict)}">` +
      `<td>${escapeHtml(e.ticker)}</td>` +
      `<td>${escapeHtml(e.name)}</td>` +
      `<td>${escapeHtml(e.verdict)}</td>` +
      `<td>${renderProvenanceBadge(e.provenance)}</td>` +
      `<td>${e.revision}</td>` +
      `<td>${escapeHtml(e.updated_at)}</td></tr>`,
  );
  const next =
    page.next_offset === null
      ? ""
      : `<button class="browse-next" data-offset="${page.next_offset}">` +
        `${t("browse_next")}</button>`;
  return (
    `<table class="browse"><thead>${header}</thead>` +
    `<tbody>${rows.join("")}</tbody></table>` +
    next
  );
}

export function renderNotFoundConfirm(query: string): string {
  return (
    `<div class="not-found">` +
    `<p>${t("not_found_title")}: <strong>${escapeHtml(query)}</strong>. ` +
    `${t("not_found_confirm")}</p>` +
    `<button class="confirm-classify">${t("classify_confirm_button")}</button>` +
    `<button class="cancel-classify">${t("classify_cancel_button")}</button>` +
    `</div>`
  );
}

export function renderRetryableError(message: string): string {
  return (
    `<div class="error-banner">` +
    `<p>${escapeHtml(message)}</p>` +
    `<button class="retry">${t("error_retry")}</button>` +
    `</div>`
  );
}

export function renderSourceUnavailable(): string {
  return `<div class="error-banner source-unavailable"><p>${t(
    "error_source_unavailable",
  )}</p></div>`;
}
