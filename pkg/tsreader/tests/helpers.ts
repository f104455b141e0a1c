import fs from 'node:fs';
import os from 'node:os';
import path from 'node:path';
import { fileURLToPath } from 'node:url';

import type { ShardRecord } from '../src/index.js';

const HERE = path.dirname(fileURLToPath(import.meta.url));
export const FIXTURES = path.join(path.resolve(HERE, '..'), '.fixtures');

export interface Dump {
  global_seed: number;
  token_unit: string;
  loss_weights: { mlm_weight: number; token_detection_weight: number; objective_weight: number };
  counts: { total: number; by_label: Record<string, number>; by_objective: Record<string, Record<string, number>> };
  records: ShardRecord[];
}

export function loadDump(name: string): Dump {
  return JSON.parse(fs.readFileSync(path.join(FIXTURES, `${name}.json`), 'utf8')) as Dump;
}

/** Copy a fixture shard directory somewhere writable for tampering. */
export function copyShardDir(source: string): string {
  const target = fs.mkdtempSync(path.join(os.tmpdir(), 'shard-reader-'));
  fs.cpSync(source, target, { recursive: true });
  return target;
}

export function shardFiles(directory: string): string[] {
  return fs
    .readdirSync(directory)
    .filter((name) => name.startsWith('shard-'))
    .sort()
    .map((name) => path.join(directory, name));
}
