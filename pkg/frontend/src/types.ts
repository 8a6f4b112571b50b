/** JSON shapes served by the labeling service. */

export interface SentenceRecord {
  sentence_id: number;
  comment_id: string;
  index_in_comment: number;
  text: string;
  /** Token list the span indexes into; the UI never tokenizes. */
  tokens: string[];
  docket_id: string | null;
  claim: string;
  span: [number, number] | null;
  rule_id: number | null;
}

export interface SentencesPage {
  page: number;
  page_size: number;
  total: number;
  label_counts: Record<string, number>;
  items: SentenceRecord[];
}

export interface VersionMeta {
  version: number;
  note: string;
  parent: number | null;
  created_at: string;
}

export interface VersionDetail {
  meta: VersionMeta;
  files: {
    grammar: string;
    lexicons: Record<string, string>;
  };
}

export interface PhraseCreated {
  version: number;
  parent: number;
  lexicon: string;
  phrase: string;
  meta: VersionMeta;
}

export interface RelabelDiff {
  version: number;
  size: number;
  changes: Record<string, { old: string; new: string }>;
  delta: Record<string, number>;
  counts: Record<string, number>;
  job_id: string;
}

export interface Job {
  job_id: string;
  kind: string;
  status: "running" | "done" | "failed";
  result: unknown;
  error: ApiErrorBody | null;
}

export interface TrainAccepted {
  job_id: string;
  status: string;
}

export interface ClusterCard {
  cluster_id: number;
  size: number;
  dominant_label: string;
  exemplars: SentenceRecord[];
  sentence_ids: number[];
}

export interface ClustersResponse {
  k: number;
  pool: string;
  clusters: ClusterCard[];
}

export interface ClassMetrics {
  precision: number;
  recall: number;
  f1: number;
  support: number;
}

export interface MetricsReport {
  task: string;
  strategy: string;
  family: string;
  seed: number;
  config: Record<string, unknown>;
  split_sizes: Record<string, number>;
  dev_macro_f1: number | null;
  trials: unknown[];
  metrics: {
    n: number;
    accuracy: number;
    macro_precision: number;
    macro_recall: number;
    macro_f1: number;
    classes: string[];
    per_class: Record<string, ClassMetrics>;
  };
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
