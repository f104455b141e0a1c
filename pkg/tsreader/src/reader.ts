import { createHash } from 'node:crypto';
import fs from 'node:fs';
import path from 'node:path';
import zlib from 'node:zlib';

import { DigestMismatchError, ManifestError, ReaderError, ShardFormatError } from './errors.js';
import { parseManifest } from './manifest.js';
import {
  HARDNESS_LEVELS,
  Hardness,
  Manifest,
  OBJECTIVES,
  Objective,
  ShardRecord,
} from './types.js';

export const MANIFEST_NAME = 'manifest.json';

/** An opened shard directory: the manifest plus where its files live. */
export interface DatasetHandle {
  directory: string;
  manifest: Manifest;
}

export interface IterateOptions {
  /** Yield only records of this objective. */
  objective?: Objective;
  /** Check each shard's SHA-256 against the manifest (default true). */
  verifyDigests?: boolean;
}

const STRING_FIELDS = ['seq_a', 'seq_b', 'a_doc_id', 'b_doc_id'] as const;
const INT_FIELDS = [
  'record_index',
  'label',
  'a_paragraph_index',
  'a_sentence_start',
  'a_sentence_count',
  'b_paragraph_index',
  'b_sentence_start',
  'b_sentence_count',
] as const;

function parseRecord(data: unknown): ShardRecord {
  if (typeof data !== 'object' || data === null || Array.isArray(data)) {
    throw new Error('record is not an object');
  }
  const fields = data as Record<string, unknown>;
  for (const name of STRING_FIELDS) {
    if (typeof fields[name] !== 'string') throw new Error(`field ${name} must be a string`);
  }
  for (const name of INT_FIELDS) {
    if (!Number.isInteger(fields[name])) throw new Error(`field ${name} must be an integer`);
  }
  if (typeof fields.truncated !== 'boolean') throw new Error('field truncated must be a boolean');
  if (!OBJECTIVES.includes(fields.objective as Objective)) {
    throw new Error(`field objective must be one of ${OBJECTIVES.join(', ')}`);
  }
  if (!HARDNESS_LEVELS.includes(fields.hardness as Hardness)) {
    throw new Error(`field hardness must be one of ${HARDNESS_LEVELS.join(', ')}`);
  }
  const label = fields.label as number;
  if (label !== 0 && label !== 1) throw new Error('field label must be 0 or 1');
  if ((label === 1) !== (fields.hardness === 'positive')) {
    throw new Error(`label ${label} conflicts with hardness ${String(fields.hardness)}`);
  }
  if (fields.seq_a === '' || fields.seq_b === '') {
    throw new Error('sequences must be non-empty');
  }
  return {
    record_index: fields.record_index as number,
    objective: fields.objective as Objective,
    label,
    hardness: fields.hardness as Hardness,
    seq_a: fields.seq_a as string,
    seq_b: fields.seq_b as string,
    truncated: fields.truncated,
    a_doc_id: fields.a_doc_id as string,
    a_paragraph_index: fields.a_paragraph_index as number,
    a_sentence_start: fields.a_sentence_start as number,
    a_sentence_count: fields.a_sentence_count as number,
    b_doc_id: fields.b_doc_id as string,
    b_paragraph_index: fields.b_paragraph_index as number,
    b_sentence_start: fields.b_sentence_start as number,
    b_sentence_count: fields.b_sentence_count as number,
  };
}

/** File contents as text plus whether the byte stream ended cleanly. */
function loadShardText(filePath: string): { text: string; complete: boolean } {
  const raw = fs.readFileSync(filePath);
  if (!filePath.endsWith('.gz')) {
    return { text: raw.toString('utf8'), complete: true };
  }
  try {
    return { text: zlib.gunzipSync(raw).toString('utf8'), complete: true };
  } catch {
    // Tolerate a cut-off stream to recover the records before the cut.
    try {
      const partial = zlib.gunzipSync(raw, {
        finishFlush: zlib.constants.Z_SYNC_FLUSH,
      });
      return { text: partial.toString('utf8'), complete: false };
    } catch {
      return { text: '', complete: false };
    }
  }
}

/**
 * Yield the records of one shard file in stored order.
 *
 * Malformed lines, out-of-order indexes and truncated files throw a
 * ShardFormatError naming the shard and the record index where reading
 * stopped. With `expectedDigest` the raw file bytes are hashed first and
 * a mismatch throws a DigestMismatchError.
 */
export function* readShard(filePath: string, expectedDigest?: string): Generator<ShardRecord> {
  if (!fs.existsSync(filePath)) {
    throw new ReaderError(`${filePath}: shard file not found`);
  }
  if (expectedDigest !== undefined) {
    const actual = createHash('sha256').update(fs.readFileSync(filePath)).digest('hex');
    if (actual !== expectedDigest) {
      throw new DigestMismatchError(filePath, expectedDigest, actual);
    }
  }
  const { text, complete } = loadShardText(filePath);
  let index = 0;
  let offset = 0;
  while (offset < text.length) {
    const newline = text.indexOf('\n', offset);
    if (newline === -1) {
      throw new ShardFormatError(
        filePath,
        index,
        `file is truncated; last valid record index is ${index - 1}`,
      );
    }
    const line = text.slice(offset, newline);
    offset = newline + 1;
    let record: ShardRecord;
    try {
      record = parseRecord(JSON.parse(line));
    } catch (cause) {
      throw new ShardFormatError(filePath, index, (cause as Error).message);
    }
    if (record.record_index !== index) {
      throw new ShardFormatError(
        filePath,
        index,
        `record_index ${record.record_index} does not match position`,
      );
    }
    yield record;
    index += 1;
  }
  if (!complete) {
    throw new ShardFormatError(
      filePath,
      index,
      `compressed stream is truncated; last valid record index is ${index - 1}`,
    );
  }
}

/**
 * Open a shard directory (or a direct path to its manifest file) and
 * validate the manifest. No shard bytes are read yet.
 */
export function openManifest(target: string): DatasetHandle {
  let manifestPath = target;
  if (fs.existsSync(target) && fs.statSync(target).isDirectory()) {
    manifestPath = path.join(target, MANIFEST_NAME);
  }
  if (!fs.existsSync(manifestPath)) {
    throw new ManifestError(`${manifestPath}: manifest not found`);
  }
  let data: unknown;
  try {
    data = JSON.parse(fs.readFileSync(manifestPath, 'utf8'));
  } catch (cause) {
    throw new ManifestError(`${manifestPath}: not valid manifest JSON (${(cause as Error).message})`);
  }
  return {
    directory: path.dirname(manifestPath),
    manifest: parseManifest(data, manifestPath),
  };
}

/**
 * Iterate every record of every shard listed in the manifest, in
 * manifest order. Per-shard record counts are checked against the
 * manifest; digests too unless `verifyDigests` is false. The objective
 * filter applies after integrity checks, so filtering never skips them.
 */
export function* iterExamples(
  handle: DatasetHandle,
  options: IterateOptions = {},
): Generator<ShardRecord> {
  const verify = options.verifyDigests ?? true;
  for (const info of handle.manifest.shards) {
    const shardPath = path.join(handle.directory, info.path);
    let count = 0;
    for (const record of readShard(shardPath, verify ? info.sha256 : undefined)) {
      count += 1;
      if (options.objective === undefined || record.objective === options.objective) {
        yield record;
      }
    }
    if (count !== info.records) {
      throw new ShardFormatError(
        shardPath,
        count,
        `shard holds ${count} records but manifest says ${info.records}`,
      );
    }
  }
}
