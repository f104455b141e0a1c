"""Answer-sentence ranking evaluation.

A dataset is an ordered list of questions, each with an ordered list of
candidate sentences. Candidates carry a binary relevance label and,
once a scorer has run, a real-valued score. Evaluation ranks each
question's candidates by score (ties broken by original position) and
macro-averages precision-at-1, average precision and reciprocal rank
over questions.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import RecordError, load_stopwords

__all__ = [
    "Candidate",
    "DatasetStats",
    "DocumentFrequencies",
    "EvaluationError",
    "QASet",
    "Question",
    "QuestionMetrics",
    "RankingReport",
    "average_precision",
    "clean_filter",
    "dataset_stats",
    "evaluate",
    "extract_candidates",
    "per_question_metrics",
    "precision_at_1",
    "rank_candidates",
    "read_qaset",
    "reciprocal_rank",
    "score_qaset_tfidf",
    "select_best",
    "summarize_metrics",
    "tfidf_score",
    "write_qaset",
    "write_report",
]


class EvaluationError(ValueError):
    """Raised when a dataset cannot be scored or evaluated as requested."""


@dataclass
class Question:
    id: str
    text: str


@dataclass
class Candidate:
    """One candidate answer sentence.

    ``label`` is 1 for a correct answer, 0 for an incorrect one and
    ``None`` when unlabeled (freshly extracted). ``score`` is ``None``
    until a scorer has run.
    """

    text: str
    label: int | None = None
    score: float | None = None

    def __post_init__(self) -> None:
        if self.label is not None and self.label not in (0, 1):
            raise ValueError("label must be 0, 1 or None")


QASet = list[tuple[Question, list[Candidate]]]


@dataclass
class RankingReport:
    """Macro-averaged ranking quality over a question set."""

    p_at_1: float
    map: float
    mrr: float
    question_count: int

    def as_dict(self) -> dict:
        return {
            "p_at_1": self.p_at_1,
            "map": self.map,
            "mrr": self.mrr,
            "question_count": self.question_count,
        }


@dataclass
class QuestionMetrics:
    question_id: str
    candidates: int
    positives: int
    p_at_1: float
    average_precision: float
    reciprocal_rank: float


@dataclass
class DatasetStats:
    questions: int
    candidates: int
    avg_candidates_per_question: float

    def as_dict(self) -> dict:
        return {
            "questions": self.questions,
            "candidates": self.candidates,
            "avg_candidates_per_question": self.avg_candidates_per_question,
        }


def rank_candidates(candidates: Sequence[Candidate]) -> list[int]:
    """Candidate indexes ordered by descending score.

    Ties keep the original candidate order, so equal scores never make
    the ranking ambiguous. All candidates must be scored.
    """
    if not candidates:
        raise EvaluationError("cannot rank an empty candidate list")
    for position, candidate in enumerate(candidates):
        if candidate.score is None:
            raise EvaluationError(f"candidate {position} has no score")
    return sorted(range(len(candidates)), key=lambda i: (-candidates[i].score, i))


def select_best(candidates: Sequence[Candidate]) -> int:
    """Index of the highest-scoring candidate (earliest wins ties)."""
    if not candidates:
        raise EvaluationError("cannot select from an empty candidate list")
    best = None
    best_score = -math.inf
    for position, candidate in enumerate(candidates):
        if candidate.score is None:
            raise EvaluationError(f"candidate {position} has no score")
        if candidate.score > best_score:
            best = position
            best_score = candidate.score
    return best


def average_precision(ranked_labels: Sequence[int]) -> float:
    """Average precision of a ranked binary label sequence.

    Precision is read off at every rank holding a positive and averaged
    over the total number of positives. A sequence without positives has
    no defined value and raises :class:`EvaluationError`.
    """
    positives = sum(1 for label in ranked_labels if label == 1)
    if positives == 0:
        raise EvaluationError("average precision needs at least one positive label")
    hits = 0
    total = 0.0
    for rank, label in enumerate(ranked_labels, start=1):
        if label == 1:
            hits += 1
            total += hits / rank
    return total / positives


def reciprocal_rank(ranked_labels: Sequence[int]) -> float:
    """1 over the rank of the first positive; 0.0 when nothing is positive."""
    for rank, label in enumerate(ranked_labels, start=1):
        if label == 1:
            return 1.0 / rank
    return 0.0


def _ranked_labels(candidates: Sequence[Candidate]) -> list[int]:
    labels = []
    for position in rank_candidates(candidates):
        label = candidates[position].label
        if label is None:
            raise EvaluationError(f"candidate {position} is unlabeled")
        labels.append(label)
    return labels


def per_question_metrics(qaset: QASet) -> list[QuestionMetrics]:
    """Per-question ranking metrics, in dataset order.

    Raises :class:`EvaluationError` naming the first question that has no
    candidates, unscored or unlabeled candidates, or no positive
    candidate (run :func:`clean_filter` to drop the latter).
    """
    rows = []
    for question, candidates in qaset:
        if not candidates:
            raise EvaluationError(f"question {question.id!r} has no candidates")
        try:
            labels = _ranked_labels(candidates)
        except EvaluationError as exc:
            raise EvaluationError(f"question {question.id!r}: {exc}") from exc
        if 1 not in labels:
            raise EvaluationError(
                f"question {question.id!r} has no positive candidate; "
                "apply clean_filter before evaluating"
            )
        rows.append(
            QuestionMetrics(
                question_id=question.id,
                candidates=len(candidates),
                positives=sum(labels),
                p_at_1=float(labels[0]),
                average_precision=average_precision(labels),
                reciprocal_rank=reciprocal_rank(labels),
            )
        )
    return rows


def precision_at_1(qaset: QASet) -> float:
    """Fraction of questions whose top-scored candidate is positive."""
    rows = per_question_metrics(qaset)
    if not rows:
        raise EvaluationError("cannot evaluate an empty question set")
    return sum(row.p_at_1 for row in rows) / len(rows)


def summarize_metrics(rows: Sequence[QuestionMetrics]) -> RankingReport:
    """Macro-average per-question metrics into one report."""
    if not rows:
        raise EvaluationError("cannot evaluate an empty question set")
    count = len(rows)
    return RankingReport(
        p_at_1=sum(r.p_at_1 for r in rows) / count,
        map=sum(r.average_precision for r in rows) / count,
        mrr=sum(r.reciprocal_rank for r in rows) / count,
        question_count=count,
    )


def evaluate(qaset: QASet) -> RankingReport:
    """Macro-average ranking metrics over all questions."""
    return summarize_metrics(per_question_metrics(qaset))


def clean_filter(qaset: QASet) -> QASet:
    """Keep only questions with at least one positive and one negative.

    Candidates must be labeled. Applying the filter twice changes
    nothing.
    """
    kept: QASet = []
    for question, candidates in qaset:
        labels = {c.label for c in candidates}
        if None in labels:
            raise EvaluationError(f"question {question.id!r} has an unlabeled candidate")
        if 0 in labels and 1 in labels:
            kept.append((question, candidates))
    return kept


def dataset_stats(qaset: QASet) -> DatasetStats:
    """Question and candidate counts; zeros for an empty dataset."""
    questions = len(qaset)
    candidates = sum(len(cands) for _, cands in qaset)
    return DatasetStats(
        questions=questions,
        candidates=candidates,
        avg_candidates_per_question=candidates / questions if questions else 0.0,
    )


_TOKEN_RE = re.compile(r"\w+")


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def extract_candidates(
    question: Question, sentences: Iterable[str], stopwords: frozenset[str] | None = None
) -> list[Candidate]:
    """Pick the sentences that share a non-stopword with the question.

    Overlap is computed on lowercased, punctuation-free word sets with
    the stopword list removed (the bundled English list by default).
    Returned candidates are unlabeled and unscored, in input order.
    """
    if stopwords is None:
        stopwords = load_stopwords()
    question_words = set(_tokens(question.text)) - stopwords
    selected = []
    for sentence in sentences:
        if question_words & (set(_tokens(sentence)) - stopwords):
            selected.append(Candidate(text=sentence))
    return selected


@dataclass
class DocumentFrequencies:
    """How many texts of a pool contain each term at least once."""

    term_documents: dict[str, int]
    documents: int

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> DocumentFrequencies:
        counts: Counter[str] = Counter()
        total = 0
        for text in texts:
            counts.update(set(_tokens(text)))
            total += 1
        return cls(term_documents=dict(counts), documents=total)

    def idf(self, term: str) -> float:
        # Smoothed so unseen terms stay finite and every weight is positive.
        return math.log((1 + self.documents) / (1 + self.term_documents.get(term, 0))) + 1.0


def _tfidf_vector(tokens: list[str], frequencies: DocumentFrequencies) -> dict[str, float]:
    return {term: count * frequencies.idf(term) for term, count in Counter(tokens).items()}


def _cosine(u: dict[str, float], v: dict[str, float]) -> float:
    if not u or not v:
        return 0.0
    dot = sum(weight * v[term] for term, weight in u.items() if term in v)
    norm_u = math.sqrt(sum(w * w for w in u.values()))
    norm_v = math.sqrt(sum(w * w for w in v.values()))
    if norm_u == 0.0 or norm_v == 0.0:
        return 0.0
    return dot / (norm_u * norm_v)


def tfidf_score(
    question: Question,
    candidates: Sequence[Candidate],
    corpus_df: DocumentFrequencies,
) -> list[Candidate]:
    """Score candidates by tf-idf cosine similarity to the question.

    Term weight is raw term frequency times ``ln((1 + N) / (1 + df)) + 1``
    where ``N`` is the document count behind ``corpus_df``. A candidate
    without tokens scores 0.0. Input candidates are not mutated.
    """
    question_vector = _tfidf_vector(_tokens(question.text), corpus_df)
    return [
        replace(candidate, score=_cosine(question_vector, _tfidf_vector(_tokens(candidate.text), corpus_df)))
        for candidate in candidates
    ]


def score_qaset_tfidf(qaset: QASet) -> QASet:
    """Score every candidate against its question with the tf-idf baseline.

    Document frequencies are built over the whole candidate pool of the
    dataset.
    """
    frequencies = DocumentFrequencies.from_texts(
        candidate.text for _, candidates in qaset for candidate in candidates
    )
    return [
        (question, tfidf_score(question, candidates, frequencies))
        for question, candidates in qaset
    ]


def read_qaset(path: str | Path, expect_columns: int | None = None) -> QASet:
    """Read a tab-separated question/candidate file.

    Rows are ``question_id\\tquestion_text\\tcandidate_text`` with an
    optional ``label`` column and an optional trailing ``score`` column
    (3, 4 or 5 columns; constant within a file). Questions group rows by
    id in first-seen order, keeping candidate order.
    """
    path = Path(path)
    order: list[str] = []
    questions: dict[str, Question] = {}
    candidates: dict[str, list[Candidate]] = {}
    columns = expect_columns
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if columns is None:
                columns = len(parts)
                if columns not in (3, 4, 5):
                    raise RecordError(str(path), line_number, f"expected 3-5 columns, found {columns}")
            if len(parts) != columns:
                raise RecordError(
                    str(path), line_number, f"expected {columns} columns, found {len(parts)}"
                )
            qid, qtext, ctext = parts[0], parts[1], parts[2]
            label: int | None = None
            score: float | None = None
            if columns >= 4:
                if parts[3] not in ("0", "1"):
                    raise RecordError(str(path), line_number, f"label must be 0 or 1, found {parts[3]!r}")
                label = int(parts[3])
            if columns == 5:
                try:
                    score = float(parts[4])
                except ValueError:
                    raise RecordError(str(path), line_number, f"score is not a number: {parts[4]!r}")
            if qid not in questions:
                order.append(qid)
                questions[qid] = Question(id=qid, text=qtext)
                candidates[qid] = []
            elif questions[qid].text != qtext:
                raise RecordError(str(path), line_number, f"question {qid!r} has conflicting text")
            candidates[qid].append(Candidate(text=ctext, label=label, score=score))
    return [(questions[qid], candidates[qid]) for qid in order]


def write_qaset(qaset: QASet, path: str | Path, scored: bool = False) -> int:
    """Write a question/candidate file; returns the row count.

    Labeled candidates produce 4 columns, or 5 with ``scored``; fully
    unlabeled datasets produce 3.
    """
    rows = 0
    labeled = any(c.label is not None for _, cands in qaset for c in cands)
    with open(path, "w", encoding="utf-8") as handle:
        for question, candidates in qaset:
            for candidate in candidates:
                parts = [question.id, question.text, candidate.text]
                if labeled or scored:
                    parts.append("" if candidate.label is None else str(candidate.label))
                if scored:
                    if candidate.score is None:
                        raise EvaluationError(f"question {question.id!r} has an unscored candidate")
                    parts.append(repr(candidate.score))
                handle.write("\t".join(parts) + "\n")
                rows += 1
    return rows


def write_report(
    report: RankingReport, path: str | Path, rows: Sequence[QuestionMetrics] | None = None
) -> None:
    """Write a report as ``metric<TAB>value`` lines, one metric per row."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"question_count\t{report.question_count}\n")
        handle.write(f"p_at_1\t{report.p_at_1:.6f}\n")
        handle.write(f"map\t{report.map:.6f}\n")
        handle.write(f"mrr\t{report.mrr:.6f}\n")
    if rows is not None:
        per_question_path = Path(path).with_name("per_question.tsv")
        with open(per_question_path, "w", encoding="utf-8") as handle:
            handle.write("question_id\tcandidates\tpositives\tp_at_1\tap\trr\n")
            for row in rows:
                handle.write(
                    f"{row.question_id}\t{row.candidates}\t{row.positives}"
                    f"\t{row.p_at_1:.6f}\t{row.average_precision:.6f}\t{row.reciprocal_rank:.6f}\n"
                )
