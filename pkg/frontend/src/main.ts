/** DOM wiring; everything stateful lives in Workbench, everything visual in render. */

import { ApiClient } from "./api.js";
import {
  renderBanner,
  renderClusters,
  renderCounts,
  renderDiff,
  renderJobStatus,
  renderMetrics,
  renderPending,
  renderSentence,
  renderVersionBadge,
} from "./render.js";
import { Workbench } from "./workbench.js";

const bench = new Workbench(new ApiClient(""));

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function redraw(): void {
  const state = bench.state;
  el("banner-slot").innerHTML = renderBanner(state);
  el("version-slot").innerHTML = renderVersionBadge(state.version);
  el("job-slot").innerHTML = renderJobStatus(state);
  el("counts-slot").innerHTML = renderCounts(state.counts);
  el("pending-slot").innerHTML = renderPending(state.pending);

  const sentences = state.page ? state.page.items : [];
  el("sentences-slot").innerHTML = sentences.map(renderSentence).join("");
  el("page-info").textContent = state.page
    ? `page ${state.page.page}, ${state.page.total} total`
    : "";

  const textById = new Map<number, string>();
  for (const s of sentences) textById.set(s.sentence_id, s.text);
  el("diff-slot").innerHTML = renderDiff(state.lastDiff, textById);
  el("clusters-slot").innerHTML = renderClusters(state.clusters);
  el("metrics-slot").innerHTML = renderMetrics(state.metrics);

  const context = el("context-slot");
  if (state.commentContext) {
    context.innerHTML =
      `<h4>comment ${state.commentContext[0]?.comment_id ?? ""}</h4>` +
      state.commentContext.map(renderSentence).join("") +
      `<button id="context-close">close</button>`;
  } else {
    context.innerHTML = "";
  }

  for (const button of document.querySelectorAll<HTMLButtonElement>("button[data-mutating]")) {
    button.disabled = state.busy;
  }

  // lexicon options appear once versions load
  const select = el<HTMLSelectElement>("lexicon-select");
  if (select.options.length !== state.lexicons.length) {
    select.innerHTML = state.lexicons
      .map((name) => `<option value="${name}">${name}</option>`)
      .join("");
  }
}

function wire(): void {
  bench.onChange(redraw);

  el("queue-edit").addEventListener("click", () => {
    const lexicon = el<HTMLSelectElement>("lexicon-select").value;
    const phrase = el<HTMLInputElement>("phrase-input").value;
    bench.queueEdit(lexicon, phrase);
    el<HTMLInputElement>("phrase-input").value = "";
  });
  el("submit-edits").addEventListener("click", () => void bench.submitEdits());
  el("relabel").addEventListener("click", () => void bench.relabelAndReview());

  el("pending-slot").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("remove-edit")) {
      bench.removePending(Number(target.dataset.index));
    }
  });

  el("inline-slot").textContent = "";
  bench.onChange((state) => {
    el("inline-slot").textContent = state.inlineWarning ?? "";
  });

  el("filter-apply").addEventListener("click", () => {
    const label = el<HTMLInputElement>("filter-label").value.trim();
    const docket = el<HTMLInputElement>("filter-docket").value.trim();
    void bench.loadSentences({
      ...(label ? { label } : {}),
      ...(docket ? { docket } : {}),
    });
  });
  el("page-prev").addEventListener("click", () => {
    const page = Math.max(0, (bench.state.query.page ?? 0) - 1);
    void bench.loadSentences({ ...bench.state.query, page });
  });
  el("page-next").addEventListener("click", () => {
    const page = (bench.state.query.page ?? 0) + 1;
    void bench.loadSentences({ ...bench.state.query, page });
  });

  el("clusters-browse").addEventListener("click", () => {
    const k = Number(el<HTMLInputElement>("clusters-k").value);
    const pool = el<HTMLInputElement>("clusters-pool").value.trim() || "Neutral";
    void bench.browseClusters(k, pool);
  });
  el("clusters-slot").addEventListener("click", (event) => {
    const exemplar = (event.target as HTMLElement).closest<HTMLElement>(".exemplar");
    if (exemplar?.dataset.comment) void bench.openComment(exemplar.dataset.comment);
  });
  el("context-slot").addEventListener("click", (event) => {
    if ((event.target as HTMLElement).id === "context-close") bench.closeComment();
  });

  el("train").addEventListener("click", () => {
    const strategy = el<HTMLInputElement>("train-strategy").value.trim();
    const task = el<HTMLInputElement>("train-task").value.trim();
    void bench.trainAndPoll(strategy, task);
  });

  el("banner-slot").addEventListener("click", (event) => {
    const id = (event.target as HTMLElement).id;
    if (id === "banner-dismiss") bench.dismissBanner();
    if (id === "banner-retry") void bench.load();
  });

  void bench.load();
}

wire();
