/**
 * In-memory stand-in for the labeling service, faithful to the documented
 * endpoints: same JSON shapes, same error codes, same version/relabel
 * semantics. Tests drive the workbench against it through a fetch shim and
 * audit the network log it keeps.
 */

import type { FetchLike } from "../src/api.js";
import type { SentenceRecord, VersionMeta } from "../src/types.js";

interface FakeSentence {
  record: SentenceRecord;
  /** claim/span under a grammar that has the extra cue phrase. */
  flipped?: { claim: string; span: [number, number] };
}

const CLAIMS = [
  "Neutral",
  "ExplicitSupport",
  "LikelyOpposition",
  "Burdensome",
];

function sentence(
  id: number,
  comment: string,
  index: number,
  tokens: string[],
  claim: string,
  span: [number, number] | null,
): FakeSentence {
  return {
    record: {
      sentence_id: id,
      comment_id: comment,
      index_in_comment: index,
      text: tokens.join(" ") + ".",
      tokens,
      docket_id: "D-0",
      claim,
      span,
      rule_id: span ? 1 : null,
    },
  };
}

export class FakeService {
  sentences: FakeSentence[];
  versions: VersionMeta[] = [
    { version: 1, note: "seed", parent: null, created_at: "2026-08-14T00:00:00Z" },
  ];
  lexicons = new Map<number, Map<string, string[]>>([
    [1, new Map([["POLARITY_NEG", ["bad", "harmful"]]])],
  ]);
  /** Grammar version the current labels were computed under. */
  labeledVersion = 1;
  jobs = new Map<string, { job_id: string; kind: string; status: string; result: unknown; error: unknown }>();
  latestReport: Record<string, unknown> | null = null;
  /** Every request seen, for the endpoint audit. */
  log: Array<{ method: string; path: string }> = [];
  /** Trainer jobs finish after this many polls. */
  trainPollsUntilDone = 2;
  private jobSeq = 0;
  private pendingTrainPolls = new Map<string, number>();

  constructor() {
    this.sentences = [
      sentence(0, "C-0", 0, ["we", "support", "the", "proposal", "as", "written"], "ExplicitSupport", [0, 2]),
      sentence(1, "C-0", 1, ["this", "overly", "harsh", "new", "rule", "is", "unwelcome"], "Neutral", null),
      sentence(2, "C-1", 0, ["the", "recordkeeping", "here", "is", "too", "costly"], "Burdensome", [4, 6]),
      sentence(3, "C-1", 1, ["our", "plant", "operates", "three", "shifts"], "Neutral", null),
      sentence(4, "C-1", 2, ["the", "filing", "window", "opens", "in", "march"], "Neutral", null),
    ];
    // under a grammar whose POLARITY_NEG contains "harsh", sentence 1 flips
    this.sentences[1]!.flipped = { claim: "LikelyOpposition", span: [2, 5] };
  }

  counts(): Record<string, number> {
    const out: Record<string, number> = {};
    for (const claim of CLAIMS) out[claim] = 0;
    for (const s of this.sentences) out[s.record.claim] = (out[s.record.claim] ?? 0) + 1;
    return out;
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const parsed = new URL(url, "http://service.test");
    const path = parsed.pathname;
    this.log.push({ method, path });
    const body = init?.body ? (JSON.parse(String(init.body)) as Record<string, unknown>) : {};

    if (method === "GET" && path === "/sentences") return this.getSentences(parsed.searchParams);
    if (method === "GET" && path === "/versions") return json(200, this.versions);
    if (method === "GET" && /^\/versions\/\d+$/.test(path)) {
      const v = Number(path.split("/")[2]);
      const lexicons = this.lexicons.get(v);
      if (!lexicons) return error(404, "unknown_version", `grammar version ${v} not found`);
      const files: Record<string, string> = {};
      for (const [name, phrases] of lexicons) files[name] = phrases.join("\n") + "\n";
      return json(200, {
        meta: this.versions[v - 1],
        files: { grammar: 'claim X -> "x"\n', lexicons: files },
      });
    }
    if (method === "GET" && path.startsWith("/jobs/")) {
      const id = path.split("/")[2]!;
      const job = this.jobs.get(id);
      if (!job) return error(404, "unknown_job", `job ${id} not found`);
      const remaining = this.pendingTrainPolls.get(id);
      if (remaining !== undefined) {
        if (remaining <= 1) {
          this.pendingTrainPolls.delete(id);
          job.status = "done";
          this.latestReport = trainReport();
          job.result = { report: this.latestReport, report_name: "claim-neutral-flat" };
        } else {
          this.pendingTrainPolls.set(id, remaining - 1);
        }
      }
      return json(200, job);
    }
    if (method === "GET" && path === "/metrics/latest") {
      if (!this.latestReport) return error(404, "no_reports", "no evaluation report has been produced yet");
      return json(200, this.latestReport);
    }
    if (method === "GET" && path === "/clusters") return this.getClusters(parsed.searchParams);
    if (method === "POST" && /^\/lexicons\/[^/]+\/entries$/.test(path)) {
      return this.postPhrase(decodeURIComponent(path.split("/")[2]!), body);
    }
    if (method === "POST" && path === "/relabel") return this.postRelabel(body);
    if (method === "POST" && path === "/train") return this.postTrain(body);
    return error(404, "unknown_route", `${method} ${path}`);
  };

  private getSentences(params: URLSearchParams): Response {
    const label = params.get("label");
    if (label !== null && !CLAIMS.includes(label)) {
      return error(400, "unknown_label", `unknown label '${label}'`);
    }
    const comment = params.get("comment");
    const docket = params.get("docket");
    const page = Number(params.get("page") ?? "0");
    const size = Number(params.get("page_size") ?? "50");
    let items = this.sentences.map((s) => s.record);
    if (label !== null) items = items.filter((r) => r.claim === label);
    if (comment !== null) items = items.filter((r) => r.comment_id === comment);
    if (docket !== null) items = items.filter((r) => r.docket_id === docket);
    return json(200, {
      page,
      page_size: size,
      total: items.length,
      label_counts: this.counts(),
      items: items.slice(page * size, (page + 1) * size),
    });
  }

  private getClusters(params: URLSearchParams): Response {
    const pool = params.get("pool") ?? "Neutral";
    const k = Number(params.get("k"));
    const members =
      pool === "all"
        ? this.sentences.map((s) => s.record)
        : this.sentences.filter((s) => s.record.claim === pool).map((s) => s.record);
    if (!members.length) return error(400, "empty_pool", `pool '${pool}' has no sentences`);
    if (k < 1 || k > members.length) return error(400, "bad_k", `k must lie in [1, ${members.length}]`);
    const clusters = [];
    for (let c = 0; c < k; c++) {
      const slice = members.filter((_, i) => i % k === c);
      clusters.push({
        cluster_id: c,
        size: slice.length,
        dominant_label: slice[0]!.claim,
        exemplars: [slice[0]!],
        sentence_ids: slice.map((r) => r.sentence_id),
      });
    }
    return json(200, { k, pool, clusters });
  }

  private postPhrase(lexicon: string, body: Record<string, unknown>): Response {
    const phrase = String(body.phrase ?? "").trim();
    if (!phrase) return error(400, "empty_phrase", "phrase must not be empty");
    const base = this.versions[this.versions.length - 1]!.version;
    const lexicons = this.lexicons.get(base)!;
    const entries = lexicons.get(lexicon);
    if (!entries) return error(404, "unknown_lexicon", `lexicon '${lexicon}' not found`);
    if (entries.includes(phrase)) {
      return error(409, "duplicate_phrase", `phrase '${phrase}' already in ${lexicon}`);
    }
    const version = base + 1;
    const next = new Map(lexicons);
    next.set(lexicon, [...entries, phrase]);
    this.lexicons.set(version, next);
    const meta: VersionMeta = {
      version,
      note: String(body.note ?? ""),
      parent: base,
      created_at: "2026-08-14T00:00:01Z",
    };
    this.versions.push(meta);
    return json(201, { version, parent: base, lexicon, phrase, meta });
  }

  private postRelabel(body: Record<string, unknown>): Response {
    const version = Number(body.version);
    if (!this.versions.some((m) => m.version === version)) {
      return error(404, "unknown_version", `grammar version ${version} not found`);
    }
    const cueAdded = this.lexicons.get(version)!.get("POLARITY_NEG")!.includes("harsh");
    const changes: Record<string, { old: string; new: string }> = {};
    const delta: Record<string, number> = {};
    for (const s of this.sentences) {
      const target = cueAdded && s.flipped ? s.flipped.claim : originalClaim(s);
      if (target !== s.record.claim) {
        changes[String(s.record.sentence_id)] = { old: s.record.claim, new: target };
        delta[s.record.claim] = (delta[s.record.claim] ?? 0) - 1;
        delta[target] = (delta[target] ?? 0) + 1;
        s.record.claim = target;
        s.record.span = cueAdded && s.flipped ? s.flipped.span : s.record.span;
      }
    }
    this.labeledVersion = version;
    this.jobSeq += 1;
    const job = {
      job_id: String(this.jobSeq),
      kind: "relabel",
      status: "done",
      result: null as unknown,
      error: null,
    };
    this.jobs.set(job.job_id, job);
    const diff = {
      version,
      size: Object.keys(changes).length,
      changes,
      delta,
      counts: this.counts(),
      job_id: job.job_id,
    };
    job.result = diff;
    return json(200, diff);
  }

  private postTrain(body: Record<string, unknown>): Response {
    if (body.strategy !== "flat" && body.strategy !== "ensemble") {
      return error(400, "invalid_task", `unknown strategy '${String(body.strategy)}'`);
    }
    this.jobSeq += 1;
    const job = {
      job_id: String(this.jobSeq),
      kind: "train",
      status: "running",
      result: null,
      error: null,
    };
    this.jobs.set(job.job_id, job);
    this.pendingTrainPolls.set(job.job_id, this.trainPollsUntilDone);
    return json(202, { job_id: job.job_id, status: "running" });
  }
}

function originalClaim(s: FakeSentence): string {
  // sentences that are argumentative under the seed grammar keep their claim
  if (s.flipped) return "Neutral";
  return s.record.claim;
}

function trainReport(): Record<string, unknown> {
  return {
    task: "claim+neutral",
    strategy: "flat",
    family: "ngram",
    seed: 0,
    config: { l2: 1e-4, learning_rate: 0.5, epochs: 100 },
    split_sizes: { train: 3, dev: 1, test: 1 },
    dev_macro_f1: null,
    trials: [],
    metrics: {
      n: 1,
      accuracy: 1.0,
      macro_precision: 1.0,
      macro_recall: 1.0,
      macro_f1: 1.0,
      classes: ["Neutral"],
      per_class: { Neutral: { precision: 1.0, recall: 1.0, f1: 1.0, support: 1 } },
    },
  };
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function error(status: number, code: string, message: string): Response {
  return json(status, { code, message });
}
