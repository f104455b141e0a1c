import { ManifestError } from './errors.js';
import {
  HARDNESS_LEVELS,
  LossWeights,
  Manifest,
  ManifestCounts,
  OBJECTIVES,
  ShardInfo,
} from './types.js';

export const SUPPORTED_FORMAT_VERSION = 1;

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === 'object' && value !== null && !Array.isArray(value);
}

function isCount(value: unknown): value is number {
  return typeof value === 'number' && Number.isInteger(value) && value >= 0;
}

export function isLossWeights(value: unknown): value is LossWeights {
  if (!isRecord(value)) return false;
  return (
    typeof value.mlm_weight === 'number' &&
    typeof value.token_detection_weight === 'number' &&
    typeof value.objective_weight === 'number'
  );
}

export function isShardInfo(value: unknown): value is ShardInfo {
  if (!isRecord(value)) return false;
  return (
    typeof value.path === 'string' &&
    isCount(value.records) &&
    typeof value.sha256 === 'string' &&
    /^[0-9a-f]{64}$/.test(value.sha256)
  );
}

export function isManifestCounts(value: unknown): value is ManifestCounts {
  if (!isRecord(value) || !isCount(value.total) || !isRecord(value.by_label)) return false;
  if (!Object.values(value.by_label).every(isCount)) return false;
  if (!isRecord(value.by_objective)) return false;
  for (const objective of OBJECTIVES) {
    const bucket = value.by_objective[objective];
    if (!isRecord(bucket) || !isCount(bucket.total)) return false;
    for (const hardness of HARDNESS_LEVELS) {
      if (!isCount(bucket[hardness])) return false;
    }
  }
  return true;
}

/**
 * Validate raw JSON into a Manifest, or throw a ManifestError naming
 * what is wrong. `origin` labels the error message, usually the path.
 */
export function parseManifest(data: unknown, origin: string): Manifest {
  if (!isRecord(data)) {
    throw new ManifestError(`${origin}: manifest must be a JSON object`);
  }
  if (data.format_version !== SUPPORTED_FORMAT_VERSION) {
    throw new ManifestError(
      `${origin}: format_version ${JSON.stringify(data.format_version)} is not supported ` +
        `(expected ${SUPPORTED_FORMAT_VERSION})`,
    );
  }
  if (!Number.isInteger(data.global_seed)) {
    throw new ManifestError(`${origin}: global_seed must be an integer`);
  }
  if (typeof data.token_unit !== 'string') {
    throw new ManifestError(`${origin}: token_unit must be a string`);
  }
  if (!isRecord(data.sampling_config)) {
    throw new ManifestError(`${origin}: sampling_config must be an object`);
  }
  if (!isLossWeights(data.loss_weights)) {
    throw new ManifestError(`${origin}: loss_weights must hold three numeric weights`);
  }
  if (!isManifestCounts(data.counts)) {
    throw new ManifestError(`${origin}: counts are missing or malformed`);
  }
  if (!Array.isArray(data.shards) || !data.shards.every(isShardInfo)) {
    throw new ManifestError(`${origin}: shards must be a list of {path, records, sha256}`);
  }
  return {
    format_version: data.format_version,
    global_seed: data.global_seed as number,
    token_unit: data.token_unit,
    sampling_config: data.sampling_config,
    loss_weights: data.loss_weights,
    counts: data.counts,
    shards: data.shards,
  };
}

/** Sum of per-shard record counts promised by the manifest. */
export function totalRecords(manifest: Manifest): number {
  return manifest.shards.reduce((sum, shard) => sum + shard.records, 0);
}
