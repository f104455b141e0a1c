export {
  DigestMismatchError,
  ManifestError,
  ReaderError,
  ShardFormatError,
} from './errors.js';
export {
  SUPPORTED_FORMAT_VERSION,
  isLossWeights,
  isManifestCounts,
  isShardInfo,
  parseManifest,
  totalRecords,
} from './manifest.js';
export { MANIFEST_NAME, iterExamples, openManifest, readShard } from './reader.js';
export type { DatasetHandle, IterateOptions } from './reader.js';
export { HARDNESS_LEVELS, OBJECTIVES } from './types.js';
export type {
  Hardness,
  LossWeights,
  Manifest,
  ManifestCounts,
  Objective,
  ObjectiveCounts,
  ShardInfo,
  ShardRecord,
} from './types.js';
