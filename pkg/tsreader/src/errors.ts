/** Base class for every failure this package raises on purpose. */
export class ReaderError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** The manifest is missing, malformed, or has an unsupported version. */
export class ManifestError extends ReaderError {}

/** A shard file holds something other than the records it promised. */
export class ShardFormatError extends ReaderError {
  readonly path: string;
  readonly recordIndex: number;

  constructor(path: string, recordIndex: number, reason: string) {
    super(`${path}: record ${recordIndex}: ${reason}`);
    this.path = path;
    this.recordIndex = recordIndex;
  }
}

/** Shard bytes do not hash to the digest the manifest promised. */
export class DigestMismatchError extends ReaderError {
  readonly path: string;
  readonly expected: string;
  readonly actual: string;

  constructor(path: string, expected: string, actual: string) {
    super(`${path}: content digest ${actual} does not match manifest ${expected}`);
    this.path = path;
    this.expected = expected;
    this.actual = actual;
  }
}
