#!/usr/bin/env python3
"""Regenerate the bundled synthetic corpus fixture.

Writes ``fixtures/synthetic-100.jsonl``: 100 raw documents, each with 4
paragraphs of 6 sentences, built deterministically from a fixed seed so
the fixture never drifts. Sentences are plain prose that the default
cleaning settings keep intact (every paragraph is comfortably longer
than the minimum, and no sentence ends in an abbreviation).
"""

from __future__ import annotations

import json
import random
from pathlib import Path

SEED = 7
DOCUMENTS = 100
PARAGRAPHS_PER_DOCUMENT = 4
SENTENCES_PER_PARAGRAPH = 6

SUBJECTS = [
    "The harbor master", "A patient gardener", "The night librarian", "Our oldest neighbor",
    "The train conductor", "A quiet apprentice", "The lighthouse keeper", "The village baker",
    "A wandering surveyor", "The museum guide", "The weather observer", "A careful archivist",
]
VERBS = [
    "recorded", "measured", "repaired", "described", "collected", "sorted",
    "sketched", "counted", "inspected", "catalogued", "compared", "labeled",
]
OBJECTS = [
    "the copper instruments", "every fallen branch", "the tide tables", "the old ledgers",
    "the glass negatives", "the spare lanterns", "the grain samples", "the iron fittings",
    "the paper charts", "the wooden crates", "the signal flags", "the river soundings",
]
TAILS = [
    "before the morning fog lifted", "while the rain kept visitors away",
    "after the last ferry departed", "during the long winter evenings",
    "without missing a single entry", "and filed a short note about it",
    "though nobody asked for the results", "as the seasonal work demanded",
    "under the dim light of the back room", "long before the market opened",
]


def sentence(rng: random.Random) -> str:
    return (
        f"{rng.choice(SUBJECTS)} {rng.choice(VERBS)} {rng.choice(OBJECTS)} "
        f"{rng.choice(TAILS)}."
    )


def main() -> None:
    rng = random.Random(SEED)
    out_path = Path(__file__).resolve().parent.parent / "fixtures" / "synthetic-100.jsonl"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as handle:
        for doc_index in range(DOCUMENTS):
            paragraphs = [
                " ".join(sentence(rng) for _ in range(SENTENCES_PER_PARAGRAPH))
                for _ in range(PARAGRAPHS_PER_DOCUMENT)
            ]
            record = {
                "id": f"doc-{doc_index:03d}",
                "source": "synthetic",
                "text": "\n\n".join(paragraphs),
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"wrote {DOCUMENTS} documents to {out_path}")


if __name__ == "__main__":
    main()
