"""Dump a shard directory into a single JSON file.

The dump holds the manifest metadata plus every record in iteration
order, exactly as the library reads them back. Other implementations of
the shard format can diff their output against this file.

Usage: python3 scripts/dump_shards.py SHARD_DIR OUT_JSON
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from parapair.shardio import iter_manifest_examples, read_manifest


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("shard_dir", type=Path)
    parser.add_argument("out_json", type=Path)
    args = parser.parse_args()

    manifest = read_manifest(args.shard_dir)
    records = [
        record.as_dict() for record in iter_manifest_examples(manifest, args.shard_dir)
    ]
    dump = {
        "global_seed": manifest.global_seed,
        "token_unit": manifest.token_unit,
        "loss_weights": manifest.loss_weights.as_dict(),
        "counts": manifest.counts,
        "records": records,
    }
    with open(args.out_json, "w", encoding="utf-8") as handle:
        json.dump(dump, handle, ensure_ascii=False)
        handle.write("\n")
    print(f"{len(records)} records -> {args.out_json}")


if __name__ == "__main__":
    main()
