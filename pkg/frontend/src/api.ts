/** Thin typed client over the service's documented HTTP endpoints. */

import type {
  ClustersResponse,
  Job,
  MetricsReport,
  PhraseCreated,
  RelabelDiff,
  SentencesPage,
  TrainAccepted,
  VersionDetail,
  VersionMeta,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface SentenceQuery {
  label?: string;
  docket?: string;
  comment?: string;
  page?: number;
  page_size?: number;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (exc) {
      throw new ApiError(0, "network", `service unreachable: ${String(exc)}`);
    }
    if (!response.ok) {
      // every service error carries a flat {code, message} body
      let code = "http_error";
      let message = `${response.status} ${response.statusText}`;
      try {
        const parsed = (await response.json()) as { code?: string; message?: string };
        if (parsed.code) code = parsed.code;
        if (parsed.message) message = parsed.message;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  getSentences(query: SentenceQuery = {}): Promise<SentencesPage> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query)) {
      if (value !== undefined) params.set(key, String(value));
    }
    const qs = params.toString();
    return this.request<SentencesPage>("GET", qs ? `/sentences?${qs}` : "/sentences");
  }

  getVersions(): Promise<VersionMeta[]> {
    return this.request<VersionMeta[]>("GET", "/versions");
  }

  getVersion(version: number): Promise<VersionDetail> {
    return this.request<VersionDetail>("GET", `/versions/${version}`);
  }

  addPhrase(lexicon: string, phrase: string, note = ""): Promise<PhraseCreated> {
    return this.request<PhraseCreated>("POST", `/lexicons/${encodeURIComponent(lexicon)}/entries`, {
      phrase,
      note,
    });
  }

  relabel(version: number): Promise<RelabelDiff> {
    return this.request<RelabelDiff>("POST", "/relabel", { version });
  }

  train(strategy: string, task: string, epochs?: number, seed = 0): Promise<TrainAccepted> {
    const body: Record<string, unknown> = { strategy, task, seed };
    if (epochs !== undefined) body.epochs = epochs;
    return this.request<TrainAccepted>("POST", "/train", body);
  }

  getJob(jobId: string): Promise<Job> {
    return this.request<Job>("GET", `/jobs/${encodeURIComponent(jobId)}`);
  }

  getLatestMetrics(): Promise<MetricsReport> {
    return this.request<MetricsReport>("GET", "/metrics/latest");
  }

  getClusters(k: number, pool: string): Promise<ClustersResponse> {
    const params = new URLSearchParams({ k: String(k), pool });
    return this.request<ClustersResponse>("GET", `/clusters?${params.toString()}`);
  }
}
