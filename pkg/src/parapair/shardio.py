"""Shard serialization for pair examples.

Shards are newline-delimited JSON files named ``<prefix>-<index>.jsonl``
(optionally gzip-compressed with a ``.gz`` suffix), described by a
``manifest.json`` written last. Records are flat objects with a fixed
key order; every example is assigned to a shard by a stable hash of the
document id behind ``seq_a`` and shards are sorted internally, so the
bytes on disk depend only on the example multiset, the seed and the
sharding parameters.
"""

from __future__ import annotations

import gzip
import hashlib
import json
import math
import os
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .sampler import (
    Hardness,
    ObjectiveKind,
    PairExample,
    SamplingConfig,
    SpanRef,
    derive_doc_seed,
)

__all__ = [
    "DEFAULT_SHARD_SIZE",
    "DigestMismatchError",
    "FORMAT_VERSION",
    "LossWeightsMeta",
    "ManifestError",
    "ShardError",
    "ShardFormatError",
    "ShardInfo",
    "ShardManifest",
    "ShardRecord",
    "iter_manifest_examples",
    "read_manifest",
    "read_shard",
    "write_shards",
]

FORMAT_VERSION = 1
DEFAULT_SHARD_SIZE = 1000
MANIFEST_NAME = "manifest.json"

_RECORD_FIELDS = (
    "record_index",
    "objective",
    "label",
    "hardness",
    "seq_a",
    "seq_b",
    "truncated",
    "a_doc_id",
    "a_paragraph_index",
    "a_sentence_start",
    "a_sentence_count",
    "b_doc_id",
    "b_paragraph_index",
    "b_sentence_start",
    "b_sentence_count",
)


class ShardError(Exception):
    """Base class for shard reading and writing failures."""


class ShardFormatError(ShardError):
    """A shard file holds bytes that do not parse as valid records."""

    def __init__(self, path: str | Path, record_index: int, reason: str) -> None:
        self.path = str(path)
        self.record_index = record_index
        super().__init__(f"{path}, record {record_index}: {reason}")


class DigestMismatchError(ShardError):
    def __init__(self, path: str | Path, expected: str, actual: str) -> None:
        self.path = str(path)
        self.expected = expected
        self.actual = actual
        super().__init__(f"{path}: content digest {actual} does not match manifest {expected}")


class ManifestError(ShardError):
    """The manifest is missing, malformed, or has an unsupported version."""


@dataclass
class LossWeightsMeta:
    """Relative loss weights a trainer should apply to each head."""

    mlm_weight: float = 1.0
    token_detection_weight: float = 50.0
    objective_weight: float = 1.0

    def as_dict(self) -> dict:
        return {
            "mlm_weight": self.mlm_weight,
            "token_detection_weight": self.token_detection_weight,
            "objective_weight": self.objective_weight,
        }

    @classmethod
    def from_dict(cls, data: dict) -> LossWeightsMeta:
        return cls(
            mlm_weight=float(data["mlm_weight"]),
            token_detection_weight=float(data["token_detection_weight"]),
            objective_weight=float(data["objective_weight"]),
        )


@dataclass
class ShardRecord:
    """One stored example plus its position within its shard."""

    record_index: int
    example: PairExample

    def as_dict(self) -> dict:
        ex = self.example
        return {
            "record_index": self.record_index,
            "objective": ex.objective.value,
            "label": ex.label,
            "hardness": ex.hardness.value,
            "seq_a": ex.seq_a,
            "seq_b": ex.seq_b,
            "truncated": ex.truncated,
            "a_doc_id": ex.a_provenance.doc_id,
            "a_paragraph_index": ex.a_provenance.paragraph_index,
            "a_sentence_start": ex.a_provenance.sentence_start,
            "a_sentence_count": ex.a_provenance.sentence_count,
            "b_doc_id": ex.b_provenance.doc_id,
            "b_paragraph_index": ex.b_provenance.paragraph_index,
            "b_sentence_start": ex.b_provenance.sentence_start,
            "b_sentence_count": ex.b_provenance.sentence_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ShardRecord:
        missing = [name for name in _RECORD_FIELDS if name not in data]
        if missing:
            raise ValueError(f"missing fields: {', '.join(missing)}")
        for name in _RECORD_FIELDS:
            value = data[name]
            if name in ("seq_a", "seq_b", "objective", "hardness", "a_doc_id", "b_doc_id"):
                if not isinstance(value, str):
                    raise ValueError(f"field {name} must be a string")
            elif name == "truncated":
                if not isinstance(value, bool):
                    raise ValueError("field truncated must be a boolean")
            elif not isinstance(value, int) or isinstance(value, bool):
                raise ValueError(f"field {name} must be an integer")
        example = PairExample(
            objective=ObjectiveKind(data["objective"]),
            seq_a=data["seq_a"],
            seq_b=data["seq_b"],
            label=data["label"],
            hardness=Hardness(data["hardness"]),
            a_provenance=SpanRef(
                data["a_doc_id"],
                data["a_paragraph_index"],
                data["a_sentence_start"],
                data["a_sentence_count"],
            ),
            b_provenance=SpanRef(
                data["b_doc_id"],
                data["b_paragraph_index"],
                data["b_sentence_start"],
                data["b_sentence_count"],
            ),
            truncated=data["truncated"],
        )
        return cls(record_index=data["record_index"], example=example)


@dataclass
class ShardInfo:
    path: str
    records: int
    sha256: str

    def as_dict(self) -> dict:
        return {"path": self.path, "records": self.records, "sha256": self.sha256}


@dataclass
class ShardManifest:
    """Everything needed to consume a shard directory without guessing."""

    global_seed: int
    sampling_config: SamplingConfig
    loss_weights: LossWeightsMeta
    counts: dict
    shards: list[ShardInfo] = field(default_factory=list)
    token_unit: str = "whitespace"
    format_version: int = FORMAT_VERSION

    def as_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "global_seed": self.global_seed,
            "token_unit": self.token_unit,
            "sampling_config": self.sampling_config.as_dict(),
            "loss_weights": self.loss_weights.as_dict(),
            "counts": self.counts,
            "shards": [s.as_dict() for s in self.shards],
        }

    @property
    def total_records(self) -> int:
        return sum(s.records for s in self.shards)


def _canonical_line(record: ShardRecord) -> str:
    return json.dumps(record.as_dict(), ensure_ascii=False, separators=(",", ":")) + "\n"


def _sort_key(example: PairExample) -> tuple:
    a, b = example.a_provenance, example.b_provenance
    return (
        a.doc_id,
        example.objective.value,
        a.paragraph_index,
        a.sentence_start,
        a.sentence_count,
        b.doc_id,
        b.paragraph_index,
        b.sentence_start,
        b.sentence_count,
        example.hardness.value,
        example.label,
        example.seq_a,
        example.seq_b,
        example.truncated,
    )


def _count_examples(examples: list[PairExample]) -> dict:
    by_objective = {
        kind.value: {h.value: 0 for h in Hardness} | {"total": 0} for kind in ObjectiveKind
    }
    by_label = {"0": 0, "1": 0}
    for example in examples:
        bucket = by_objective[example.objective.value]
        bucket[example.hardness.value] += 1
        bucket["total"] += 1
        by_label[str(example.label)] += 1
    return {"total": len(examples), "by_label": by_label, "by_objective": by_objective}


def _atomic_write(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def write_shards(
    examples: Iterable[PairExample],
    out_dir: str | Path,
    config: SamplingConfig,
    shard_size: int = DEFAULT_SHARD_SIZE,
    prefix: str = "shard",
    compress: bool = False,
    loss_weights: LossWeightsMeta | None = None,
) -> ShardManifest:
    """Write ``examples`` into ``out_dir`` and return the manifest.

    The shard count is ``ceil(len(examples) / shard_size)``; each example
    lands in the shard selected by a stable hash of its ``seq_a`` document
    id, and every shard is sorted by provenance. Shard files are written
    through temporary names and the manifest only after every shard
    succeeded, so a crashed run never leaves a readable manifest behind.
    """
    if shard_size < 1:
        raise ValueError("shard_size must be >= 1")
    examples = list(examples)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    shard_count = math.ceil(len(examples) / shard_size)
    buckets: list[list[PairExample]] = [[] for _ in range(shard_count)]
    for example in examples:
        slot = derive_doc_seed(config.global_seed, example.a_provenance.doc_id) % shard_count
        buckets[slot].append(example)

    suffix = ".jsonl.gz" if compress else ".jsonl"
    written: list[Path] = []
    infos: list[ShardInfo] = []
    try:
        for index, bucket in enumerate(buckets):
            bucket.sort(key=_sort_key)
            lines = [
                _canonical_line(ShardRecord(record_index=i, example=example))
                for i, example in enumerate(bucket)
            ]
            payload = "".join(lines).encode("utf-8")
            if compress:
                # mtime pinned to zero keeps the gzip container byte-stable.
                payload = gzip.compress(payload, mtime=0)
            path = out_dir / f"{prefix}-{index:05d}{suffix}"
            _atomic_write(path, payload)
            written.append(path)
            infos.append(
                ShardInfo(
                    path=path.name,
                    records=len(bucket),
                    sha256=hashlib.sha256(payload).hexdigest(),
                )
            )
        manifest = ShardManifest(
            global_seed=config.global_seed,
            sampling_config=config,
            loss_weights=loss_weights or LossWeightsMeta(),
            counts=_count_examples(examples),
            shards=infos,
        )
        payload = json.dumps(manifest.as_dict(), ensure_ascii=False, indent=2).encode("utf-8") + b"\n"
        _atomic_write(out_dir / MANIFEST_NAME, payload)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        for stale in out_dir.glob("*.tmp"):
            stale.unlink(missing_ok=True)
        raise
    return manifest


def read_manifest(path: str | Path) -> ShardManifest:
    """Load and validate a manifest written by :func:`write_shards`."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.exists():
        raise ManifestError(f"{path}: manifest not found")
    try:
        data = json.loads(path.read_text("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{path}: not valid manifest JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ManifestError(
            f"{path}: format_version {version!r} is not supported (expected {FORMAT_VERSION})"
        )
    try:
        return ShardManifest(
            global_seed=data["global_seed"],
            sampling_config=SamplingConfig.from_dict(data["sampling_config"]),
            loss_weights=LossWeightsMeta.from_dict(data["loss_weights"]),
            counts=data["counts"],
            shards=[
                ShardInfo(path=s["path"], records=int(s["records"]), sha256=s["sha256"])
                for s in data["shards"]
            ],
            token_unit=data.get("token_unit", "whitespace"),
            format_version=version,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"{path}: manifest field error ({exc})") from exc


def _load_shard_text(path: Path) -> tuple[str, bool]:
    """File contents as text plus a flag for a cleanly terminated stream."""
    raw = path.read_bytes()
    if path.name.endswith(".gz"):
        decoder = zlib.decompressobj(wbits=31)
        try:
            data = decoder.decompress(raw)
        except zlib.error:
            return "", False
        return data.decode("utf-8"), decoder.eof
    return raw.decode("utf-8"), True


def read_shard(path: str | Path, expected_digest: str | None = None) -> Iterator[ShardRecord]:
    """Yield the records of one shard file in stored order.

    Malformed lines, out-of-order indexes and truncated files raise
    :class:`ShardFormatError` naming the shard and the record index where
    reading stopped. With ``expected_digest`` the raw file bytes are
    checked first and a mismatch raises :class:`DigestMismatchError`.
    """
    path = Path(path)
    if not path.exists():
        raise ShardError(f"{path}: shard file not found")
    if expected_digest is not None:
        actual = hashlib.sha256(path.read_bytes()).hexdigest()
        if actual != expected_digest:
            raise DigestMismatchError(path, expected_digest, actual)
    text, complete = _load_shard_text(path)
    index = 0
    buffered = text
    while buffered:
        line, newline, buffered = buffered.partition("\n")
        if not newline:
            # Bytes stop in the middle of a record.
            raise ShardFormatError(
                path, index, f"file is truncated; last valid record index is {index - 1}"
            )
        try:
            data = json.loads(line)
            if not isinstance(data, dict):
                raise ValueError("record is not an object")
            record = ShardRecord.from_dict(data)
        except (json.JSONDecodeError, ValueError) as exc:
            raise ShardFormatError(path, index, str(exc)) from exc
        if record.record_index != index:
            raise ShardFormatError(
                path, index, f"record_index {record.record_index} does not match position"
            )
        yield record
        index += 1
    if not complete:
        raise ShardFormatError(
            path, index, f"compressed stream is truncated; last valid record index is {index - 1}"
        )


def iter_manifest_examples(
    manifest: ShardManifest,
    directory: str | Path,
    objective: ObjectiveKind | None = None,
    verify_digests: bool = True,
) -> Iterator[ShardRecord]:
    """Iterate every record of every shard listed in ``manifest``.

    Shards are visited in manifest order. Record counts are checked
    against the manifest; digests too unless ``verify_digests`` is off.
    ``objective`` filters records after integrity checks.
    """
    directory = Path(directory)
    for info in manifest.shards:
        count = 0
        for record in read_shard(
            directory / info.path, expected_digest=info.sha256 if verify_digests else None
        ):
            count += 1
            if objective is None or record.example.objective is objective:
                yield record
        if count != info.records:
            raise ShardFormatError(
                directory / info.path,
                count,
                f"shard holds {count} records but manifest says {info.records}",
            )
