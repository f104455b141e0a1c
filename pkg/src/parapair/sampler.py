"""Labeled sentence-pair construction.

Three pair objectives are supported, named by the shape of the pair:

* ``ssp`` pairs two disjoint contiguous sentence spans drawn from the
  same paragraph.
* ``sp`` pairs a sentence span with the rest of its paragraph (the
  paragraph with that span removed).
* ``psd`` pairs two distinct whole paragraphs from the same document.

Each positive pair is accompanied by negatives: hard negatives come from
the same document, easy negatives from other documents via a reservoir-
sampled paragraph pool. Sampling for a document is driven entirely by a
generator seeded from ``(global_seed, objective, document id)``, so the
emitted examples do not depend on worker count or processing order.
"""

from __future__ import annotations

import hashlib
import random
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .corpus import Document, Paragraph

__all__ = [
    "DEFAULT_POOL_CAPACITY",
    "Hardness",
    "NegativePool",
    "ObjectiveKind",
    "PairExample",
    "PoolEntry",
    "SamplingConfig",
    "SpanRef",
    "build_negative_pool",
    "check_example",
    "derive_doc_seed",
    "draw_span",
    "generate_examples",
    "sample_document",
    "sample_psd",
    "sample_sp",
    "sample_ssp",
    "token_budgets",
]

DEFAULT_POOL_CAPACITY = 10000

_SEED_MASK = (1 << 64) - 1

# Where ssp hard negatives come from. The default draws them from other
# paragraphs of the same document; the alternative draws them from the
# paragraph the positive was taken from, accepting that such a pair can
# coincide with a valid positive.
SSP_HARD_FROM_OTHER_PARAGRAPHS = "other-paragraphs"
SSP_HARD_FROM_SAME_PARAGRAPH = "same-paragraph"


class ObjectiveKind(str, Enum):
    SSP = "ssp"
    SP = "sp"
    PSD = "psd"


class Hardness(str, Enum):
    POSITIVE = "positive"
    HARD = "hard"
    EASY = "easy"


@dataclass
class SamplingConfig:
    """Everything that parameterizes pair sampling.

    Span-length fields are closed intervals ``(low, high)`` in sentences.
    Token budgets are in whitespace tokens and bound the combined length
    of ``seq_a`` and ``seq_b`` for the corresponding objective.
    """

    ssp_a_sentences: tuple[int, int] = (1, 3)
    ssp_b_sentences: tuple[int, int] = (1, 5)
    sp_a_sentences: tuple[int, int] = (1, 3)
    max_hard_negatives: int = 2
    total_negatives: int = 4
    positives_per_unit: int = 1
    token_budget_ssp: int = 128
    token_budget_sp_psd: int = 256
    global_seed: int = 0
    ssp_hard_negative_source: str = SSP_HARD_FROM_OTHER_PARAGRAPHS

    def __post_init__(self) -> None:
        for name in ("ssp_a_sentences", "ssp_b_sentences", "sp_a_sentences"):
            interval = tuple(getattr(self, name))
            setattr(self, name, interval)
            if len(interval) != 2 or interval[0] < 1 or interval[0] > interval[1]:
                raise ValueError(f"{name} must be (low, high) with 1 <= low <= high")
        if self.max_hard_negatives < 0:
            raise ValueError("max_hard_negatives must be >= 0")
        if self.total_negatives < self.max_hard_negatives:
            raise ValueError("total_negatives must be >= max_hard_negatives")
        if self.positives_per_unit < 1:
            raise ValueError("positives_per_unit must be >= 1")
        if self.token_budget_ssp < 2:
            raise ValueError("token_budget_ssp must be >= 2")
        if self.token_budget_sp_psd < 4:
            raise ValueError("token_budget_sp_psd must be >= 4")
        if self.ssp_hard_negative_source not in (
            SSP_HARD_FROM_OTHER_PARAGRAPHS,
            SSP_HARD_FROM_SAME_PARAGRAPH,
        ):
            raise ValueError("unknown ssp_hard_negative_source")

    def as_dict(self) -> dict:
        return {
            "ssp_a_sentences": list(self.ssp_a_sentences),
            "ssp_b_sentences": list(self.ssp_b_sentences),
            "sp_a_sentences": list(self.sp_a_sentences),
            "max_hard_negatives": self.max_hard_negatives,
            "total_negatives": self.total_negatives,
            "positives_per_unit": self.positives_per_unit,
            "token_budget_ssp": self.token_budget_ssp,
            "token_budget_sp_psd": self.token_budget_sp_psd,
            "global_seed": self.global_seed,
            "ssp_hard_negative_source": self.ssp_hard_negative_source,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> SamplingConfig:
        kwargs = dict(data)
        for name in ("ssp_a_sentences", "ssp_b_sentences", "sp_a_sentences"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)


@dataclass(frozen=True)
class SpanRef:
    """A contiguous sentence range inside one paragraph of one document."""

    doc_id: str
    paragraph_index: int
    sentence_start: int
    sentence_count: int

    def __post_init__(self) -> None:
        if self.paragraph_index < 0 or self.sentence_start < 0 or self.sentence_count < 1:
            raise ValueError("span reference out of range")

    @property
    def sentence_end(self) -> int:
        return self.sentence_start + self.sentence_count


@dataclass
class PairExample:
    """One labeled text pair.

    ``a_provenance`` always names the sentences behind ``seq_a``. For the
    ``sp`` objective ``seq_b`` is a paragraph with a span cut out, and
    ``b_provenance`` names the removed span of that source paragraph; for
    the other objectives it names the sentences behind ``seq_b`` directly.
    """

    objective: ObjectiveKind
    seq_a: str
    seq_b: str
    label: int
    hardness: Hardness
    a_provenance: SpanRef
    b_provenance: SpanRef
    truncated: bool

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")
        if (self.label == 1) != (self.hardness is Hardness.POSITIVE):
            raise ValueError("label 1 must coincide with positive hardness")
        if not self.seq_a or not self.seq_b:
            raise ValueError("seq_a and seq_b must be non-empty")


@dataclass(frozen=True)
class PoolEntry:
    """A paragraph snapshot held by the negative pool."""

    doc_id: str
    paragraph_index: int
    sentences: tuple[str, ...]


@dataclass
class NegativePool:
    """A uniform reservoir sample of paragraphs seen so far."""

    capacity: int
    entries: list[PoolEntry] = field(default_factory=list)
    seen: int = 0

    def sample_entries(
        self,
        rng: random.Random,
        count: int,
        exclude_doc_id: str,
        min_sentences: int = 1,
    ) -> list[PoolEntry]:
        """Sample up to ``count`` distinct entries from other documents."""
        eligible = [
            entry
            for entry in self.entries
            if entry.doc_id != exclude_doc_id and len(entry.sentences) >= min_sentences
        ]
        if count <= 0 or not eligible:
            return []
        return rng.sample(eligible, min(count, len(eligible)))


def derive_doc_seed(global_seed: int, doc_id: str) -> int:
    """Derive a stable per-document seed from the run seed and document id.

    Uses a SHA-256 mix so the value is identical across processes and
    platform hash randomization; returns an unsigned 64-bit integer.
    """
    payload = struct.pack(">Q", global_seed & _SEED_MASK) + doc_id.encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")


def build_negative_pool(
    documents: Iterable[Document], capacity: int, rng: random.Random
) -> NegativePool:
    """Reservoir-sample paragraphs so each one seen is kept with equal probability."""
    if capacity < 1:
        raise ValueError("pool capacity must be >= 1")
    pool = NegativePool(capacity=capacity)
    for doc in documents:
        for paragraph in doc.paragraphs:
            entry = PoolEntry(
                doc_id=doc.id,
                paragraph_index=paragraph.index,
                sentences=tuple(s.text for s in paragraph.sentences),
            )
            if len(pool.entries) < capacity:
                pool.entries.append(entry)
            else:
                slot = rng.randint(0, pool.seen)
                if slot < capacity:
                    pool.entries[slot] = entry
            pool.seen += 1
    return pool


def _draw_range(available: int, interval: tuple[int, int], rng: random.Random) -> tuple[int, int]:
    count = min(rng.randint(interval[0], interval[1]), available)
    start = rng.randint(0, available - count)
    return start, count


def draw_span(
    doc_id: str, paragraph: Paragraph, interval: tuple[int, int], rng: random.Random
) -> SpanRef:
    """Draw a contiguous sentence span from ``paragraph``.

    The span length is uniform over ``interval``, clamped to the number of
    sentences available; the start is then uniform over the valid positions.
    """
    available = len(paragraph.sentences)
    if available < 1:
        raise ValueError("cannot draw a span from an empty paragraph")
    start, count = _draw_range(available, interval, rng)
    return SpanRef(doc_id, paragraph.index, start, count)


def token_budgets(objective: ObjectiveKind, config: SamplingConfig) -> tuple[int, int]:
    """Per-side whitespace-token budgets ``(a_budget, b_budget)``."""
    if objective is ObjectiveKind.SSP:
        budget = config.token_budget_ssp
        a_budget = budget // 2
    elif objective is ObjectiveKind.SP:
        budget = config.token_budget_sp_psd
        # seq_a is the short question-like side; keep most room for seq_b.
        a_budget = budget // 4
    else:
        budget = config.token_budget_sp_psd
        a_budget = budget // 2
    return a_budget, budget - a_budget


def _truncate(text: str, budget: int) -> tuple[str, bool]:
    tokens = text.split()
    if len(tokens) <= budget:
        return text, False
    return " ".join(tokens[:budget]), True


def _pair(
    objective: ObjectiveKind,
    seq_a: str,
    seq_b: str,
    hardness: Hardness,
    a_ref: SpanRef,
    b_ref: SpanRef,
    config: SamplingConfig,
) -> PairExample:
    a_budget, b_budget = token_budgets(objective, config)
    seq_a, a_clipped = _truncate(seq_a, a_budget)
    seq_b, b_clipped = _truncate(seq_b, b_budget)
    return PairExample(
        objective=objective,
        seq_a=seq_a,
        seq_b=seq_b,
        label=1 if hardness is Hardness.POSITIVE else 0,
        hardness=hardness,
        a_provenance=a_ref,
        b_provenance=b_ref,
        truncated=a_clipped or b_clipped,
    )


def _sentence_run(sentences: list, start: int, count: int) -> str:
    return " ".join(s.text for s in sentences[start : start + count])


def _complement_text(sentence_texts: list[str], start: int, count: int) -> str:
    return " ".join(sentence_texts[:start] + sentence_texts[start + count :])


def sample_ssp(
    doc: Document, pool: NegativePool, config: SamplingConfig, rng: random.Random
) -> list[PairExample]:
    """Sample span-vs-span pairs for every eligible paragraph of ``doc``.

    A paragraph is eligible when it has at least two sentences. For each
    positive the output list carries the positive first, then its hard
    negatives (spans from elsewhere in the document), then easy negatives
    (spans from pool paragraphs of other documents).
    """
    examples: list[PairExample] = []
    for paragraph in doc.paragraphs:
        total = len(paragraph.sentences)
        if total < 2:
            continue
        for _ in range(config.positives_per_unit):
            # The first span must leave at least one sentence on some side.
            a_count = min(rng.randint(*config.ssp_a_sentences), total - 1)
            a_start = rng.randint(0, total - a_count)
            sides = []
            if a_start > 0:
                sides.append((0, a_start))
            if a_start + a_count < total:
                sides.append((a_start + a_count, total))
            side_lo, side_hi = sides[rng.randint(0, len(sides) - 1)]
            offset, b_count = _draw_range(side_hi - side_lo, config.ssp_b_sentences, rng)
            b_start = side_lo + offset
            a_ref = SpanRef(doc.id, paragraph.index, a_start, a_count)
            b_ref = SpanRef(doc.id, paragraph.index, b_start, b_count)
            seq_a = _sentence_run(paragraph.sentences, a_start, a_count)
            examples.append(
                _pair(
                    ObjectiveKind.SSP,
                    seq_a,
                    _sentence_run(paragraph.sentences, b_start, b_count),
                    Hardness.POSITIVE,
                    a_ref,
                    b_ref,
                    config,
                )
            )
            hard_count = 0
            if config.ssp_hard_negative_source == SSP_HARD_FROM_OTHER_PARAGRAPHS:
                others = [p for p in doc.paragraphs if p.index != paragraph.index]
                for other in rng.sample(others, min(config.max_hard_negatives, len(others))):
                    span = draw_span(doc.id, other, config.ssp_b_sentences, rng)
                    examples.append(
                        _pair(
                            ObjectiveKind.SSP,
                            seq_a,
                            _sentence_run(other.sentences, span.sentence_start, span.sentence_count),
                            Hardness.HARD,
                            a_ref,
                            span,
                            config,
                        )
                    )
                    hard_count += 1
            else:
                for _ in range(config.max_hard_negatives):
                    span = draw_span(doc.id, paragraph, config.ssp_b_sentences, rng)
                    examples.append(
                        _pair(
                            ObjectiveKind.SSP,
                            seq_a,
                            _sentence_run(paragraph.sentences, span.sentence_start, span.sentence_count),
                            Hardness.HARD,
                            a_ref,
                            span,
                            config,
                        )
                    )
                    hard_count += 1
            for entry in pool.sample_entries(rng, config.total_negatives - hard_count, doc.id):
                start, count = _draw_range(len(entry.sentences), config.ssp_b_sentences, rng)
                examples.append(
                    _pair(
                        ObjectiveKind.SSP,
                        seq_a,
                        " ".join(entry.sentences[start : start + count]),
                        Hardness.EASY,
                        a_ref,
                        SpanRef(entry.doc_id, entry.paragraph_index, start, count),
                        config,
                    )
                )
    return examples


def sample_sp(
    doc: Document, pool: NegativePool, config: SamplingConfig, rng: random.Random
) -> list[PairExample]:
    """Sample span-vs-remainder pairs for every eligible paragraph of ``doc``.

    ``seq_b`` is always a paragraph with one contiguous span removed, so a
    ranker cannot win by spotting whether the second side is a complete
    paragraph. Positives remove the span that is ``seq_a``; negatives
    remove a random span from some other paragraph (same document for
    hard, pool documents for easy). Paragraphs need at least two
    sentences so the remainder is non-empty.
    """
    examples: list[PairExample] = []
    for paragraph in doc.paragraphs:
        total = len(paragraph.sentences)
        if total < 2:
            continue
        sentence_texts = [s.text for s in paragraph.sentences]
        for _ in range(config.positives_per_unit):
            a_count = min(rng.randint(*config.sp_a_sentences), total - 1)
            a_start = rng.randint(0, total - a_count)
            a_ref = SpanRef(doc.id, paragraph.index, a_start, a_count)
            seq_a = _sentence_run(paragraph.sentences, a_start, a_count)
            examples.append(
                _pair(
                    ObjectiveKind.SP,
                    seq_a,
                    _complement_text(sentence_texts, a_start, a_count),
                    Hardness.POSITIVE,
                    a_ref,
                    a_ref,
                    config,
                )
            )
            others = [
                p for p in doc.paragraphs if p.index != paragraph.index and len(p.sentences) >= 2
            ]
            hard_count = 0
            for other in rng.sample(others, min(config.max_hard_negatives, len(others))):
                texts = [s.text for s in other.sentences]
                cut_start, cut_count = _cut_range(len(texts), config.sp_a_sentences, rng)
                examples.append(
                    _pair(
                        ObjectiveKind.SP,
                        seq_a,
                        _complement_text(texts, cut_start, cut_count),
                        Hardness.HARD,
                        a_ref,
                        SpanRef(doc.id, other.index, cut_start, cut_count),
                        config,
                    )
                )
                hard_count += 1
            for entry in pool.sample_entries(
                rng, config.total_negatives - hard_count, doc.id, min_sentences=2
            ):
                texts = list(entry.sentences)
                cut_start, cut_count = _cut_range(len(texts), config.sp_a_sentences, rng)
                examples.append(
                    _pair(
                        ObjectiveKind.SP,
                        seq_a,
                        _complement_text(texts, cut_start, cut_count),
                        Hardness.EASY,
                        a_ref,
                        SpanRef(entry.doc_id, entry.paragraph_index, cut_start, cut_count),
                        config,
                    )
                )
    return examples


def _cut_range(total: int, interval: tuple[int, int], rng: random.Random) -> tuple[int, int]:
    # The removed span must leave a non-empty remainder.
    count = min(rng.randint(interval[0], interval[1]), total - 1)
    start = rng.randint(0, total - count)
    return start, count


def sample_psd(
    doc: Document, pool: NegativePool, config: SamplingConfig, rng: random.Random
) -> list[PairExample]:
    """Sample whole-paragraph pairs from ``doc``.

    A document with fewer than two paragraphs yields nothing. Positives
    pair two distinct paragraphs of ``doc``; every negative pairs the
    first paragraph with a pool paragraph from a different document, so
    all negatives are easy by construction.
    """
    if len(doc.paragraphs) < 2:
        return []
    examples: list[PairExample] = []
    for _ in range(config.positives_per_unit):
        first, second = rng.sample(doc.paragraphs, 2)
        a_ref = SpanRef(doc.id, first.index, 0, len(first.sentences))
        seq_a = first.text
        examples.append(
            _pair(
                ObjectiveKind.PSD,
                seq_a,
                second.text,
                Hardness.POSITIVE,
                a_ref,
                SpanRef(doc.id, second.index, 0, len(second.sentences)),
                config,
            )
        )
        for entry in pool.sample_entries(rng, config.total_negatives, doc.id):
            examples.append(
                _pair(
                    ObjectiveKind.PSD,
                    seq_a,
                    " ".join(entry.sentences),
                    Hardness.EASY,
                    a_ref,
                    SpanRef(entry.doc_id, entry.paragraph_index, 0, len(entry.sentences)),
                    config,
                )
            )
    return examples


_SAMPLERS = {
    ObjectiveKind.SSP: sample_ssp,
    ObjectiveKind.SP: sample_sp,
    ObjectiveKind.PSD: sample_psd,
}


def sample_document(
    doc: Document, objective: ObjectiveKind, pool: NegativePool, config: SamplingConfig
) -> list[PairExample]:
    """Sample one document with its own derived generator.

    The generator seed depends only on the run seed, the objective and the
    document id, which makes the result independent of scheduling.
    """
    rng = random.Random(derive_doc_seed(config.global_seed, f"{objective.value}:{doc.id}"))
    return _SAMPLERS[objective](doc, pool, config, rng)


_WORKER_STATE: dict = {}


def _init_worker(objective: ObjectiveKind, pool: NegativePool, config: SamplingConfig) -> None:
    _WORKER_STATE["context"] = (objective, pool, config)


def _sample_in_worker(doc: Document) -> list[PairExample]:
    objective, pool, config = _WORKER_STATE["context"]
    return sample_document(doc, objective, pool, config)


def generate_examples(
    documents: Iterable[Document],
    objective: ObjectiveKind,
    config: SamplingConfig,
    pool_capacity: int = DEFAULT_POOL_CAPACITY,
    workers: int = 1,
) -> list[PairExample]:
    """Build the negative pool, then sample every document.

    The pool is filled in a single sequential pass so its contents depend
    only on corpus order and the run seed. With ``workers > 1`` documents
    are sampled in separate processes; because each document owns its
    generator, the resulting multiset of examples is identical to the
    single-worker output.
    """
    docs = list(documents)
    pool_rng = random.Random(derive_doc_seed(config.global_seed, "::negative-pool::"))
    pool = build_negative_pool(docs, pool_capacity, pool_rng)
    if workers <= 1:
        examples: list[PairExample] = []
        for doc in docs:
            examples.extend(sample_document(doc, objective, pool, config))
        return examples
    chunksize = max(1, len(docs) // (workers * 4))
    examples = []
    with ProcessPoolExecutor(
        max_workers=workers, initializer=_init_worker, initargs=(objective, pool, config)
    ) as executor:
        for batch in executor.map(_sample_in_worker, docs, chunksize=chunksize):
            examples.extend(batch)
    return examples


def check_example(
    example: PairExample, documents: Mapping[str, Document], config: SamplingConfig
) -> None:
    """Verify one example against the corpus it was sampled from.

    Raises ``ValueError`` describing the first violated property: bad
    provenance, sequence text that does not match its provenance, blown
    token budgets, or a pair shape that is wrong for its objective and
    hardness. Passing silently means the example is internally consistent.
    """
    a_budget, b_budget = token_budgets(example.objective, config)
    budget = a_budget + b_budget
    a_tokens = len(example.seq_a.split())
    b_tokens = len(example.seq_b.split())
    if a_tokens > a_budget or b_tokens > b_budget or a_tokens + b_tokens > budget:
        raise ValueError("token budget exceeded")

    a_para = _resolve_paragraph(example.a_provenance, documents)
    b_para = _resolve_paragraph(example.b_provenance, documents)
    a_text = _sentence_run(
        a_para.sentences, example.a_provenance.sentence_start, example.a_provenance.sentence_count
    )
    expect_a, a_clipped = _truncate(a_text, a_budget)
    if example.seq_a != expect_a:
        raise ValueError("seq_a does not match its provenance")

    if example.objective is ObjectiveKind.SP:
        texts = [s.text for s in b_para.sentences]
        ref = example.b_provenance
        if ref.sentence_count >= len(texts):
            raise ValueError("removed span leaves no remainder")
        raw_b = _complement_text(texts, ref.sentence_start, ref.sentence_count)
    else:
        raw_b = _sentence_run(
            b_para.sentences, example.b_provenance.sentence_start, example.b_provenance.sentence_count
        )
    expect_b, b_clipped = _truncate(raw_b, b_budget)
    if example.seq_b != expect_b:
        raise ValueError("seq_b does not match its provenance")
    if example.truncated != (a_clipped or b_clipped):
        raise ValueError("truncated flag is wrong")

    a_ref, b_ref = example.a_provenance, example.b_provenance
    same_doc = a_ref.doc_id == b_ref.doc_id
    same_paragraph = same_doc and a_ref.paragraph_index == b_ref.paragraph_index
    if example.hardness is Hardness.EASY and same_doc:
        raise ValueError("easy negative must come from a different document")
    if example.hardness is Hardness.HARD and not same_doc:
        raise ValueError("hard negative must come from the same document")

    if example.objective is ObjectiveKind.SSP:
        if example.hardness is Hardness.POSITIVE:
            if not same_paragraph:
                raise ValueError("positive spans must share a paragraph")
            overlap = max(a_ref.sentence_start, b_ref.sentence_start) < min(
                a_ref.sentence_end, b_ref.sentence_end
            )
            if overlap:
                raise ValueError("positive spans must be disjoint")
        elif example.hardness is Hardness.HARD:
            expect_same = config.ssp_hard_negative_source == SSP_HARD_FROM_SAME_PARAGRAPH
            if same_paragraph != expect_same:
                raise ValueError("hard negative drawn from the wrong paragraph")
    elif example.objective is ObjectiveKind.SP:
        if example.hardness is Hardness.POSITIVE and b_ref != a_ref:
            raise ValueError("positive must remove exactly the seq_a span")
        if example.hardness is Hardness.HARD and same_paragraph:
            raise ValueError("hard negative must use a different paragraph")
    else:
        if a_ref.sentence_start != 0 or a_ref.sentence_count != len(a_para.sentences):
            raise ValueError("seq_a must be a whole paragraph")
        if b_ref.sentence_start != 0 or b_ref.sentence_count != len(b_para.sentences):
            raise ValueError("seq_b must be a whole paragraph")
        if example.hardness is Hardness.POSITIVE and (not same_doc or same_paragraph):
            raise ValueError("positive must pair two distinct paragraphs of one document")
        if example.hardness is Hardness.HARD:
            raise ValueError("this objective has no hard negatives")


def _resolve_paragraph(ref: SpanRef, documents: Mapping[str, Document]) -> Paragraph:
    doc = documents.get(ref.doc_id)
    if doc is None:
        raise ValueError(f"unknown document {ref.doc_id!r}")
    if ref.paragraph_index >= len(doc.paragraphs):
        raise ValueError(f"paragraph {ref.paragraph_index} out of range in {ref.doc_id!r}")
    paragraph = doc.paragraphs[ref.paragraph_index]
    if ref.sentence_end > len(paragraph.sentences):
        raise ValueError(f"sentence span out of range in {ref.doc_id!r}")
    return paragraph
