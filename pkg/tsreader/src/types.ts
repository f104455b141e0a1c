export const OBJECTIVES = ['ssp', 'sp', 'psd'] as const;
export type Objective = (typeof OBJECTIVES)[number];

export const HARDNESS_LEVELS = ['positive', 'hard', 'easy'] as const;
export type Hardness = (typeof HARDNESS_LEVELS)[number];

/** One training example exactly as stored on disk. */
export interface ShardRecord {
  record_index: number;
  objective: Objective;
  label: 0 | 1;
  hardness: Hardness;
  seq_a: string;
  seq_b: string;
  truncated: boolean;
  a_doc_id: string;
  a_paragraph_index: number;
  a_sentence_start: number;
  a_sentence_count: number;
  b_doc_id: string;
  b_paragraph_index: number;
  b_sentence_start: number;
  b_sentence_count: number;
}

export interface LossWeights {
  mlm_weight: number;
  token_detection_weight: number;
  objective_weight: number;
}

export interface ShardInfo {
  path: string;
  records: number;
  sha256: string;
}

export interface ObjectiveCounts {
  positive: number;
  hard: number;
  easy: number;
  total: number;
}

export interface ManifestCounts {
  total: number;
  by_label: Record<string, number>;
  by_objective: Record<Objective, ObjectiveCounts>;
}

export interface Manifest {
  format_version: number;
  global_seed: number;
  token_unit: string;
  sampling_config: Record<string, unknown>;
  loss_weights: LossWeights;
  counts: ManifestCounts;
  shards: ShardInfo[];
}
