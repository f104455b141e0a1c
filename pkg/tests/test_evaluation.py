from __future__ import annotations

import itertools
import math
import random

import pytest

from oracles import (
    oracle_average_precision,
    oracle_rank,
    oracle_reciprocal_rank,
    oracle_report,
    random_qaset,
)
from parapair.corpus import RecordError, load_stopwords
from parapair.evaluation import (
    Candidate,
    DocumentFrequencies,
    EvaluationError,
    Question,
    average_precision,
    clean_filter,
    dataset_stats,
    evaluate,
    extract_candidates,
    precision_at_1,
    rank_candidates,
    read_qaset,
    reciprocal_rank,
    score_qaset_tfidf,
    select_best,
    tfidf_score,
    write_qaset,
)


def scored(labels, scores):
    return [Candidate(text=f"c{i}", label=l, score=s) for i, (l, s) in enumerate(zip(labels, scores))]


class TestAveragePrecision:
    # Expected values computed with oracle_average_precision and frozen.
    @pytest.mark.parametrize(
        "labels,expected",
        [
            ([0, 1, 0, 1], 0.5),
            ([1, 0, 0], 1.0),
            ([0, 1], 0.5),
            ([1], 1.0),
            ([1, 1, 0, 1], 0.9166666666666666),
            ([0, 1, 1, 0, 0, 1], 0.5555555555555555),
            ([1, 0, 1, 0, 1, 0], 0.7555555555555555),
        ],
    )
    def test_frozen_values(self, labels, expected):
        assert average_precision(labels) == pytest.approx(expected, abs=1e-15)

    def test_exhaustive_against_oracle(self):
        # Every binary label sequence up to length 6 with a positive.
        for length in range(1, 7):
            for labels in itertools.product((0, 1), repeat=length):
                if 1 not in labels:
                    with pytest.raises(EvaluationError):
                        average_precision(labels)
                else:
                    assert average_precision(labels) == pytest.approx(
                        oracle_average_precision(list(labels)), abs=1e-15
                    )

    def test_no_positive_is_an_error(self):
        with pytest.raises(EvaluationError):
            average_precision([0, 0, 0])
        with pytest.raises(EvaluationError):
            average_precision([])


class TestReciprocalRank:
    @pytest.mark.parametrize(
        "labels,expected",
        [
            ([1, 0, 0], 1.0),
            ([0, 0, 1], 0.3333333333333333),
            ([0, 1, 0, 1], 0.5),
            ([0, 0, 0], 0.0),
        ],
    )
    def test_frozen_values(self, labels, expected):
        assert reciprocal_rank(labels) == pytest.approx(expected, abs=1e-15)

    def test_exhaustive_against_oracle(self):
        for length in range(0, 7):
            for labels in itertools.product((0, 1), repeat=length):
                assert reciprocal_rank(labels) == oracle_reciprocal_rank(list(labels))


class TestRanking:
    def test_tie_keeps_earliest(self):
        assert select_best(scored([0, 1], [0.5, 0.5])) == 0
        assert rank_candidates(scored([0, 1, 0, 1], [0.1, 0.9, 0.9, 0.3])) == [1, 2, 3, 0]

    def test_random_against_oracle(self):
        rng = random.Random(42)
        for _ in range(500):
            count = rng.randint(1, 9)
            scores = [round(rng.random(), 1) for _ in range(count)]
            candidates = scored([0] * count, scores)
            expected = oracle_rank(scores)
            assert rank_candidates(candidates) == expected
            assert select_best(candidates) == expected[0]

    def test_empty_and_unscored_are_errors(self):
        with pytest.raises(EvaluationError):
            select_best([])
        with pytest.raises(EvaluationError):
            rank_candidates([])
        with pytest.raises(EvaluationError):
            select_best([Candidate(text="a", label=1)])


class TestEvaluate:
    def test_single_question_frozen_report(self):
        # Scores rank the labels as [0, 1, 0, 1].
        qaset = [(Question("q", "?"), scored([0, 1, 0, 1], [0.9, 0.8, 0.7, 0.6]))]
        report = evaluate(qaset)
        assert report.p_at_1 == 0.0
        assert report.map == pytest.approx(0.5, abs=1e-15)
        assert report.mrr == pytest.approx(0.5, abs=1e-15)
        assert report.question_count == 1

    def test_perfect_ranking(self):
        qaset = [
            (Question("q1", "?"), scored([1, 0, 0], [0.9, 0.2, 0.1])),
            (Question("q2", "?"), scored([1, 1, 0], [0.9, 0.8, 0.1])),
        ]
        report = evaluate(qaset)
        assert (report.p_at_1, report.map, report.mrr) == (1.0, 1.0, 1.0)

    def test_random_against_oracle(self):
        rng = random.Random(2024)
        for _ in range(2000):
            qaset = random_qaset(rng)
            report = evaluate(qaset)
            p1, map_, mrr = oracle_report(qaset)
            assert report.p_at_1 == pytest.approx(p1, abs=1e-12)
            assert report.map == pytest.approx(map_, abs=1e-12)
            assert report.mrr == pytest.approx(mrr, abs=1e-12)
            assert report.p_at_1 <= report.mrr + 1e-12
            assert precision_at_1(qaset) == report.p_at_1

    def test_no_positive_names_question_and_points_to_clean_filter(self):
        qaset = [(Question("q7", "?"), scored([0, 0], [0.5, 0.4]))]
        with pytest.raises(EvaluationError, match=r"q7.*clean_filter"):
            evaluate(qaset)

    def test_empty_inputs_are_errors(self):
        with pytest.raises(EvaluationError):
            evaluate([])
        with pytest.raises(EvaluationError, match="q1"):
            evaluate([(Question("q1", "?"), [])])

    def test_unlabeled_candidate_is_an_error(self):
        qaset = [(Question("q1", "?"), [Candidate(text="a", score=0.5)])]
        with pytest.raises(EvaluationError, match="q1"):
            evaluate(qaset)


class TestScalingInvariance:
    def test_monotone_transforms_keep_report(self):
        rng = random.Random(7)
        for _ in range(200):
            qaset = random_qaset(rng, positive_scores=True)
            base = evaluate(qaset)
            for transform in (lambda s: 2.0 * s + 1.0, lambda s: s**3):
                mapped = [
                    (q, [Candidate(c.text, c.label, transform(c.score)) for c in cands])
                    for q, cands in qaset
                ]
                assert evaluate(mapped) == base


class TestCleanFilter:
    def test_keeps_only_mixed_questions(self):
        all_pos = (Question("pos", "?"), scored([1, 1], [0.6, 0.5]))
        all_neg = (Question("neg", "?"), scored([0, 0], [0.6, 0.5]))
        mixed = (Question("mix", "?"), scored([1, 0], [0.6, 0.5]))
        filtered = clean_filter([all_pos, all_neg, mixed])
        assert [q.id for q, _ in filtered] == ["mix"]

    def test_idempotent(self):
        rng = random.Random(13)
        for _ in range(100):
            qaset = random_qaset(rng)
            once = clean_filter(qaset)
            assert clean_filter(once) == once

    def test_unlabeled_is_an_error(self):
        with pytest.raises(EvaluationError, match="q1"):
            clean_filter([(Question("q1", "?"), [Candidate(text="a")])])


class TestExtractCandidates:
    def test_stopword_only_overlap_is_not_selected(self):
        stopwords = frozenset({"where", "is", "it", "the"})
        question = Question("q", "where is it")
        assert extract_candidates(question, ["elsewhere entirely"], stopwords) == []
        assert extract_candidates(question, ["it is the thing"], stopwords) == []

    def test_shared_content_word_is_selected(self):
        stopwords = frozenset({"the", "did", "what"})
        question = Question("q", "What did the librarian sketch?")
        sentences = [
            "The librarian filed papers.",
            "A baker worked all night.",
            "Sketch artists visited.",
        ]
        picked = extract_candidates(question, sentences, stopwords)
        assert [c.text for c in picked] == ["The librarian filed papers.", "Sketch artists visited."]
        assert all(c.label is None and c.score is None for c in picked)

    def test_matching_is_case_and_punctuation_insensitive(self):
        question = Question("q", "LIBRARIAN?")
        picked = extract_candidates(question, ["the librarian!"], frozenset())
        assert len(picked) == 1

    def test_default_stopwords_are_bundled(self):
        words = load_stopwords()
        assert {"where", "is", "it"} <= words
        question = Question("q", "where is it")
        assert extract_candidates(question, ["where is it then"]) == []


def brute_force_tfidf_scores(question_text, candidate_texts, pool_texts):
    """Recompute tf-idf cosines from the documented formula, step by step."""
    import re

    def words(text):
        return re.findall(r"\w+", text.lower())

    pool_tokens = [set(words(t)) for t in pool_texts]
    n_docs = len(pool_texts)

    def idf(term):
        df = sum(1 for doc in pool_tokens if term in doc)
        return math.log((1 + n_docs) / (1 + df)) + 1.0

    def vector(text):
        tokens = words(text)
        vec = {}
        for term in tokens:
            vec[term] = vec.get(term, 0) + 1
        return {term: count * idf(term) for term, count in vec.items()}

    q_vec = vector(question_text)
    out = []
    for text in candidate_texts:
        c_vec = vector(text)
        dot = sum(q_vec[t] * c_vec[t] for t in q_vec if t in c_vec)
        nq = math.sqrt(sum(v * v for v in q_vec.values()))
        nc = math.sqrt(sum(v * v for v in c_vec.values()))
        out.append(dot / (nq * nc) if dot and nq and nc else 0.0)
    return out


class TestTfidf:
    SENTENCES = [
        "the river rose after heavy rain",
        "heavy rain flooded the lower fields",
        "the mill wheel turned all night",
        "rain fell on the river town",
        "a dry week followed the flood",
    ]

    def test_matches_brute_force_recomputation(self):
        frequencies = DocumentFrequencies.from_texts(self.SENTENCES)
        question = Question("q", "how heavy was the rain on the river")
        candidates = [Candidate(text=t, label=0) for t in self.SENTENCES]
        got = [c.score for c in tfidf_score(question, candidates, frequencies)]
        expected = brute_force_tfidf_scores(question.text, self.SENTENCES, self.SENTENCES)
        assert got == pytest.approx(expected, abs=1e-12)

    def test_identical_candidate_scores_highest(self):
        frequencies = DocumentFrequencies.from_texts(self.SENTENCES)
        question = Question("q", self.SENTENCES[0])
        candidates = [Candidate(text=t) for t in self.SENTENCES]
        scores = [c.score for c in tfidf_score(question, candidates, frequencies)]
        assert scores[0] == pytest.approx(1.0, abs=1e-12)
        assert scores[0] == max(scores)

    def test_empty_candidate_scores_zero(self):
        frequencies = DocumentFrequencies.from_texts(self.SENTENCES)
        question = Question("q", "rain")
        result = tfidf_score(question, [Candidate(text="...")], frequencies)
        assert result[0].score == 0.0

    def test_score_qaset_builds_pool_over_all_candidates(self):
        qaset = [
            (Question("q1", "heavy rain"), [Candidate(text=t, label=0) for t in self.SENTENCES[:3]]),
            (Question("q2", "river town"), [Candidate(text=t, label=0) for t in self.SENTENCES[3:]]),
        ]
        result = score_qaset_tfidf(qaset)
        pool = self.SENTENCES
        for (question, _), (_, scored_candidates) in zip(qaset, result):
            expected = brute_force_tfidf_scores(
                question.text, [c.text for c in scored_candidates], pool
            )
            assert [c.score for c in scored_candidates] == pytest.approx(expected, abs=1e-12)


class TestDatasetStats:
    def test_empty(self):
        stats = dataset_stats([])
        assert (stats.questions, stats.candidates, stats.avg_candidates_per_question) == (0, 0, 0.0)

    def test_counts(self):
        qaset = [
            (Question("q1", "?"), scored([1, 0], [0.2, 0.1])),
            (Question("q2", "?"), scored([1, 0, 0], [0.3, 0.2, 0.1])),
        ]
        stats = dataset_stats(qaset)
        assert stats.questions == 2
        assert stats.candidates == 5
        assert stats.avg_candidates_per_question == pytest.approx(2.5)


class TestQasetIO:
    def test_round_trip_labeled_and_scored(self, tmp_path):
        rng = random.Random(99)
        qaset = random_qaset(rng, max_questions=5)
        path = tmp_path / "data.tsv"
        write_qaset(qaset, path, scored=True)
        back = read_qaset(path)
        assert back == qaset

    def test_round_trip_unlabeled(self, tmp_path):
        qaset = [(Question("q1", "what"), [Candidate(text="a thing"), Candidate(text="another")])]
        path = tmp_path / "data.tsv"
        write_qaset(qaset, path)
        assert read_qaset(path) == qaset

    def test_bad_label_names_line(self, tmp_path):
        path = tmp_path / "data.tsv"
        path.write_text("q1\twhat\tanswer\t2\n", encoding="utf-8")
        with pytest.raises(RecordError, match="line 1"):
            read_qaset(path)

    def test_inconsistent_columns_rejected(self, tmp_path):
        path = tmp_path / "data.tsv"
        path.write_text("q1\twhat\tanswer\t1\nq1\twhat\tanswer\n", encoding="utf-8")
        with pytest.raises(RecordError, match="line 2"):
            read_qaset(path)

    def test_conflicting_question_text_rejected(self, tmp_path):
        path = tmp_path / "data.tsv"
        path.write_text("q1\twhat\ta\t1\nq1\twhich\tb\t0\n", encoding="utf-8")
        with pytest.raises(RecordError, match="conflicting"):
            read_qaset(path)

    def test_bad_score_names_line(self, tmp_path):
        path = tmp_path / "data.tsv"
        path.write_text("q1\twhat\ta\t1\tnot-a-number\n", encoding="utf-8")
        with pytest.raises(RecordError, match="line 1"):
            read_qaset(path)

    def test_groups_preserve_first_seen_order(self, tmp_path):
        path = tmp_path / "data.tsv"
        path.write_text(
            "q2\tsecond\tcand a\t1\nq1\tfirst\tcand b\t0\nq2\tsecond\tcand c\t0\n",
            encoding="utf-8",
        )
        qaset = read_qaset(path)
        assert [q.id for q, _ in qaset] == ["q2", "q1"]
        assert [c.text for c in qaset[0][1]] == ["cand a", "cand c"]
