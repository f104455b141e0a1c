"""Sentence-pair training data pipeline and answer-sentence ranking evaluation."""

from __future__ import annotations

__version__ = "0.1.0"

from .corpus import (
    CleaningConfig,
    CorpusStats,
    Document,
    Paragraph,
    RawDocument,
    Sentence,
    clean_document,
    corpus_stats,
    segment_paragraph,
)
from .evaluation import (
    Candidate,
    Question,
    RankingReport,
    average_precision,
    clean_filter,
    dataset_stats,
    evaluate,
    extract_candidates,
    precision_at_1,
    reciprocal_rank,
    select_best,
    tfidf_score,
)
from .sampler import (
    Hardness,
    NegativePool,
    ObjectiveKind,
    PairExample,
    SamplingConfig,
    SpanRef,
    build_negative_pool,
    derive_doc_seed,
    draw_span,
    generate_examples,
    sample_psd,
    sample_sp,
    sample_ssp,
)
from .shardio import (
    LossWeightsMeta,
    ShardManifest,
    ShardRecord,
    iter_manifest_examples,
    read_manifest,
    read_shard,
    write_shards,
)

__all__ = [
    "__version__",
    "CleaningConfig",
    "CorpusStats",
    "Document",
    "Paragraph",
    "RawDocument",
    "Sentence",
    "clean_document",
    "corpus_stats",
    "segment_paragraph",
    "Candidate",
    "Question",
    "RankingReport",
    "average_precision",
    "clean_filter",
    "dataset_stats",
    "evaluate",
    "extract_candidates",
    "precision_at_1",
    "reciprocal_rank",
    "select_best",
    "tfidf_score",
    "Hardness",
    "NegativePool",
    "ObjectiveKind",
    "PairExample",
    "SamplingConfig",
    "SpanRef",
    "build_negative_pool",
    "derive_doc_seed",
    "draw_span",
    "generate_examples",
    "sample_psd",
    "sample_sp",
    "sample_ssp",
    "LossWeightsMeta",
    "ShardManifest",
    "ShardRecord",
    "iter_manifest_examples",
    "read_manifest",
    "read_shard",
    "write_shards",
]
