/** Session state machine for the review loop; all mutation goes through the API client. */

import { ApiClient, ApiError } from "./api.js";
import type {
  ClustersResponse,
  Job,
  MetricsReport,
  RelabelDiff,
  SentenceRecord,
  SentencesPage,
  VersionMeta,
} from "./types.js";
import type { SentenceQuery as Query } from "./api.js";

export interface PendingEdit {
  lexicon: string;
  phrase: string;
}

export interface WorkbenchState {
  /** Latest grammar version on the server. */
  version: number | null;
  /** Version the active labels were produced under; null until known. */
  versions: VersionMeta[];
  lexicons: string[];
  page: SentencesPage | null;
  query: Query;
  /** Server-reported per-class counts; never computed client-side. */
  counts: Record<string, number>;
  pending: PendingEdit[];
  lastDiff: RelabelDiff | null;
  metrics: MetricsReport | null;
  clusters: ClustersResponse | null;
  /** Sentences of the comment opened from a cluster exemplar. */
  commentContext: SentenceRecord[] | null;
  /** One mutating request at a time; true disables all mutating controls. */
  busy: boolean;
  /** Job id and status shown while a mutation is in flight or polled. */
  job: { id: string; kind: string; status: string } | null;
  /** Non-blocking error banner; null hides it. */
  banner: string | null;
  /** Inline warning inside the cue editor (duplicate phrase and similar). */
  inlineWarning: string | null;
}

function initialState(): WorkbenchState {
  return {
    version: null,
    versions: [],
    lexicons: [],
    page: null,
    query: {},
    counts: {},
    pending: [],
    lastDiff: null,
    metrics: null,
    clusters: null,
    commentContext: null,
    busy: false,
    job: null,
    banner: null,
    inlineWarning: null,
  };
}

export class Workbench {
  state: WorkbenchState = initialState();
  private listeners: Array<(s: WorkbenchState) => void> = [];

  constructor(private api: ApiClient) {}

  onChange(listener: (s: WorkbenchState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private showBanner(exc: unknown): void {
    const message = exc instanceof ApiError ? `${exc.code}: ${exc.message}` : String(exc);
    this.state.banner = message;
    this.emit();
  }

  dismissBanner(): void {
    this.state.banner = null;
    this.emit();
  }

  /** Initial load: versions, lexicon names, first sentence page. */
  async load(): Promise<void> {
    try {
      const versions = await this.api.getVersions();
      this.state.versions = versions;
      this.state.version = versions.length ? versions[versions.length - 1]!.version : null;
      if (this.state.version !== null) {
        const detail = await this.api.getVersion(this.state.version);
        this.state.lexicons = Object.keys(detail.files.lexicons).sort();
      }
      await this.loadSentences({});
      this.state.banner = null;
    } catch (exc) {
      this.showBanner(exc);
    }
    this.emit();
  }

  async loadSentences(query: Query): Promise<void> {
    try {
      const page = await this.api.getSentences(query);
      this.state.query = query;
      this.state.page = page;
      this.state.counts = page.label_counts;
    } catch (exc) {
      this.showBanner(exc);
    }
    this.emit();
  }

  // -- cue editing ------------------------------------------------------------

  /** Queue a phrase addition; nothing reaches the server until submit. */
  queueEdit(lexicon: string, phrase: string): void {
    const trimmed = phrase.trim();
    if (!trimmed) {
      this.state.inlineWarning = "phrase must not be empty";
      this.emit();
      return;
    }
    this.state.pending.push({ lexicon, phrase: trimmed });
    this.state.inlineWarning = null;
    this.emit();
  }

  /** Drop a queued edit. Submitted versions are immutable; only the queue is editable. */
  removePending(index: number): void {
    this.state.pending.splice(index, 1);
    this.emit();
  }

  /**
   * Submit queued edits in order, one version per phrase. A duplicate
   * leaves its edit in the queue and shows the 409 inline; edits clear
   * only once their version exists on the server.
   */
  async submitEdits(): Promise<void> {
    if (this.state.busy || !this.state.pending.length) return;
    this.state.busy = true;
    this.state.inlineWarning = null;
    this.emit();
    try {
      while (this.state.pending.length) {
        const edit = this.state.pending[0]!;
        try {
          const created = await this.api.addPhrase(edit.lexicon, edit.phrase);
          this.state.pending.shift();
          this.state.version = created.version;
          this.state.versions.push(created.meta);
        } catch (exc) {
          if (exc instanceof ApiError && exc.status === 409) {
            this.state.inlineWarning = `${edit.phrase}: ${exc.message}`;
            break;
          }
          if (exc instanceof ApiError && exc.status === 400) {
            this.state.inlineWarning = `${edit.phrase}: ${exc.message}`;
            break;
          }
          this.showBanner(exc);
          break;
        }
      }
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  // -- relabel ----------------------------------------------------------------

  /** Relabel the whole corpus under the latest version and show the diff. */
  async relabelAndReview(): Promise<void> {
    if (this.state.busy || this.state.version === null) return;
    this.state.busy = true;
    this.emit();
    try {
      const diff = await this.api.relabel(this.state.version);
      this.state.lastDiff = diff;
      this.state.counts = diff.counts;
      this.state.job = { id: diff.job_id, kind: "relabel", status: "done" };
      if (this.state.page) await this.loadSentences(this.state.query);
    } catch (exc) {
      if (exc instanceof ApiError && exc.status === 409) {
        // a mutation is already in flight; surface its status instead
        this.state.job = { id: "", kind: "relabel", status: "blocked: " + exc.message };
      } else {
        this.showBanner(exc);
      }
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  // -- training ---------------------------------------------------------------

  /** Kick off a training job and poll it to completion. */
  async trainAndPoll(
    strategy: string,
    task: string,
    epochs?: number,
    sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
    pollMs = 500,
  ): Promise<void> {
    if (this.state.busy) return;
    this.state.busy = true;
    this.emit();
    try {
      const accepted = await this.api.train(strategy, task, epochs);
      let job: Job = {
        job_id: accepted.job_id,
        kind: "train",
        status: "running",
        result: null,
        error: null,
      };
      this.state.job = { id: job.job_id, kind: "train", status: job.status };
      this.emit();
      while (job.status === "running") {
        await sleep(pollMs);
        job = await this.api.getJob(accepted.job_id);
        this.state.job = { id: job.job_id, kind: "train", status: job.status };
        this.emit();
      }
      if (job.status === "done") {
        this.state.metrics = await this.api.getLatestMetrics();
      } else if (job.error) {
        this.state.banner = `${job.error.code}: ${job.error.message}`;
      }
    } catch (exc) {
      this.showBanner(exc);
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  // -- clusters ---------------------------------------------------------------

  async browseClusters(k: number, pool: string): Promise<void> {
    try {
      this.state.clusters = await this.api.getClusters(k, pool);
      this.state.banner = null;
    } catch (exc) {
      this.showBanner(exc);
    }
    this.emit();
  }

  /** Full comment context for an exemplar picked from a cluster card. */
  async openComment(commentId: string): Promise<void> {
    try {
      const page = await this.api.getSentences({ comment: commentId, page_size: 100 });
      this.state.commentContext = page.items;
    } catch (exc) {
      this.showBanner(exc);
    }
    this.emit();
  }

  closeComment(): void {
    this.state.commentContext = null;
    this.emit();
  }
}
