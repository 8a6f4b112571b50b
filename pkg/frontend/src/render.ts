/** Pure HTML-string renderers; no DOM access so they test without a browser. */

import type {
  ClustersResponse,
  MetricsReport,
  RelabelDiff,
  SentenceRecord,
} from "./types.js";
import type { PendingEdit, WorkbenchState } from "./workbench.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

/**
 * Sentence with its matched span wrapped in <mark>. Tokens and span come
 * from the server; the raw text is shown when nothing matched.
 */
export function renderSentence(record: SentenceRecord): string {
  const label = `<span class="label label-${escapeHtml(record.claim)}">${escapeHtml(record.claim)}</span>`;
  if (!record.span) {
    return `<div class="sentence">${label} ${escapeHtml(record.text)}</div>`;
  }
  const [lo, hi] = record.span;
  const parts = record.tokens.map((token, i) => {
    const safe = escapeHtml(token);
    return i >= lo && i < hi ? `<mark>${safe}</mark>` : safe;
  });
  return `<div class="sentence">${label} ${parts.join(" ")}</div>`;
}

export function renderCounts(counts: Record<string, number>): string {
  const rows = Object.entries(counts)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(
      ([claim, count]) =>
        `<tr><td>${escapeHtml(claim)}</td><td class="count" data-claim="${escapeHtml(claim)}">${count}</td></tr>`,
    );
  return `<table class="counts">${rows.join("")}</table>`;
}

export function renderVersionBadge(version: number | null): string {
  return version === null
    ? `<span class="badge">no grammar version</span>`
    : `<span class="badge">v${version}</span>`;
}

export function renderPending(pending: PendingEdit[]): string {
  if (!pending.length) return `<p class="empty">no pending edits</p>`;
  const rows = pending.map(
    (edit, i) =>
      `<li>${escapeHtml(edit.lexicon)}: "${escapeHtml(edit.phrase)}" ` +
      `<button class="remove-edit" data-index="${i}">remove</button></li>`,
  );
  return `<ul class="pending">${rows.join("")}</ul>`;
}

export function renderDiff(diff: RelabelDiff | null, sentences: Map<number, string>): string {
  if (!diff) return `<p class="empty">no relabel run yet</p>`;
  if (diff.size === 0) {
    return `<p class="empty">0 changes under v${diff.version}</p>`;
  }
  const deltas = Object.entries(diff.delta)
    .map(([claim, d]) => `${escapeHtml(claim)} ${d > 0 ? "+" : ""}${d}`)
    .join(", ");
  const rows = Object.entries(diff.changes).map(([sid, change]) => {
    const text = sentences.get(Number(sid)) ?? "";
    return (
      `<tr><td>${sid}</td><td>${escapeHtml(change.old)}</td>` +
      `<td>${escapeHtml(change.new)}</td><td>${escapeHtml(text)}</td></tr>`
    );
  });
  return (
    `<p>${diff.size} change${diff.size === 1 ? "" : "s"} under v${diff.version} (${deltas})</p>` +
    `<table class="diff"><tr><th>sentence</th><th>old</th><th>new</th><th>text</th></tr>${rows.join("")}</table>`
  );
}

export function renderClusters(clusters: ClustersResponse | null): string {
  if (!clusters) return `<p class="empty">no clusters requested</p>`;
  if (!clusters.clusters.length) return `<p class="empty">pool is empty</p>`;
  const cards = clusters.clusters.map((card) => {
    const exemplars = card.exemplars
      .map(
        (e) =>
          `<div class="exemplar" data-comment="${escapeHtml(e.comment_id)}">${renderSentence(e)}</div>`,
      )
      .join("");
    return (
      `<div class="cluster" data-cluster="${card.cluster_id}">` +
      `<h4>cluster ${card.cluster_id}: ${card.size} sentences, mostly ${escapeHtml(card.dominant_label)}</h4>` +
      exemplars +
      `</div>`
    );
  });
  return cards.join("");
}

export function renderMetrics(report: MetricsReport | null): string {
  if (!report) return `<p class="empty">no evaluation yet</p>`;
  const m = report.metrics;
  const rows = Object.entries(m.per_class).map(
    ([claim, stats]) =>
      `<tr><td>${escapeHtml(claim)}</td><td>${stats.precision.toFixed(3)}</td>` +
      `<td>${stats.recall.toFixed(3)}</td><td>${stats.f1.toFixed(3)}</td><td>${stats.support}</td></tr>`,
  );
  return (
    `<p>${escapeHtml(report.task)} / ${escapeHtml(report.strategy)}: ` +
    `macro-F1 ${m.macro_f1.toFixed(3)}, accuracy ${m.accuracy.toFixed(3)} on ${m.n} sentences</p>` +
    `<table class="metrics"><tr><th>class</th><th>P</th><th>R</th><th>F1</th><th>n</th></tr>${rows.join("")}</table>`
  );
}

export function renderBanner(state: WorkbenchState): string {
  if (!state.banner) return "";
  return (
    `<div class="banner" role="alert">${escapeHtml(state.banner)} ` +
    `<button id="banner-retry">retry</button>` +
    `<button id="banner-dismiss">dismiss</button></div>`
  );
}

export function renderJobStatus(state: WorkbenchState): string {
  if (!state.job) return "";
  const id = state.job.id ? ` ${state.job.id}` : "";
  return `<span class="job">${escapeHtml(state.job.kind)} job${id}: ${escapeHtml(state.job.status)}</span>`;
}
