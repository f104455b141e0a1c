from __future__ import annotations

import random

import pytest

from parapair.corpus import (
    CleaningConfig,
    CorpusStats,
    Document,
    EncodingError,
    Paragraph,
    RawDocument,
    RecordError,
    Sentence,
    clean_document,
    corpus_stats,
    load_abbreviations,
    normalize_whitespace,
    read_clean_documents,
    read_raw_documents,
    segment_paragraph,
    strip_markup,
    write_clean_documents,
)


def texts(sentences):
    return [s.text for s in sentences]


class TestSegmentation:
    def test_plain_sentences(self):
        got = segment_paragraph("One thing happened. Another followed. Then a third.")
        assert texts(got) == ["One thing happened.", "Another followed.", "Then a third."]

    def test_question_and_exclamation(self):
        got = segment_paragraph("Did it work? Yes! It did.")
        assert texts(got) == ["Did it work?", "Yes!", "It did."]

    def test_abbreviations_do_not_split(self):
        got = segment_paragraph("Dr. Smith arrived early. He sat down.")
        assert texts(got) == ["Dr. Smith arrived early.", "He sat down."]
        got = segment_paragraph("They cited Brown et al. Nobody disagreed.")
        assert texts(got) == ["They cited Brown et al. Nobody disagreed."]

    def test_single_letter_initials_do_not_split(self):
        got = segment_paragraph("Mary met J. Smith before noon. They talked.")
        assert texts(got) == ["Mary met J. Smith before noon.", "They talked."]

    def test_digit_can_start_a_sentence(self):
        got = segment_paragraph("Prices rose fast. 3 reasons follow.")
        assert texts(got) == ["Prices rose fast.", "3 reasons follow."]

    def test_lowercase_continuation_does_not_split(self):
        got = segment_paragraph("they waited for hours. then they left.")
        assert texts(got) == ["they waited for hours. then they left."]

    def test_closing_quote_after_period(self):
        got = segment_paragraph('He said "Stop." Then he left.')
        assert texts(got) == ['He said "Stop."', "Then he left."]

    def test_ellipsis_run_still_splits(self):
        got = segment_paragraph("Wait... Stop now.")
        assert texts(got) == ["Wait...", "Stop now."]

    def test_empty_input(self):
        assert segment_paragraph("") == []
        assert segment_paragraph("   \n  ") == []

    def test_join_reconstructs_normalized_text(self):
        samples = [
            "One thing.  Another\tthing. A third?",
            "Dr. Brown visited Mt. Hood. It rained! Badly.",
            "No terminal punctuation here",
            'She asked "Why?" Nobody answered.',
        ]
        for text in samples:
            got = segment_paragraph(text)
            assert " ".join(texts(got)) == normalize_whitespace(text)

    def test_bundled_abbreviation_list_backs_the_splitter(self):
        shipped = load_abbreviations()
        assert {"dr", "mr", "mrs", "etc", "e.g", "u.s"} <= shipped
        for abbrev in ("Mr", "Mrs", "Prof"):
            assert abbrev.lower() in shipped
            got = segment_paragraph(f"We met {abbrev}. Jones at noon. All went well.")
            assert texts(got) == [f"We met {abbrev}. Jones at noon.", "All went well."]


class TestStripMarkup:
    def test_tags_are_removed(self):
        assert normalize_whitespace(strip_markup("<p>Hello <b>there</b>.</p>")) == "Hello there ."

    def test_entities_are_unescaped(self):
        assert "&" in strip_markup("salt &amp; pepper")

    def test_header_like_lines_are_dropped(self):
        cleaned = strip_markup("INTRODUCTION\nThe body text continues here.")
        assert cleaned.split("\n")[0] == ""
        assert "body text" in cleaned

    def test_long_uppercase_lines_are_kept(self):
        line = "THIS UPPERCASE LINE IS LONG ENOUGH TO BE REAL CONTENT"
        assert line in strip_markup(line)

    def test_table_like_lines_are_dropped(self):
        assert "cell" not in strip_markup("cell\tcell\tcell\tcell")
        assert "cell" not in strip_markup("cell | cell | cell | cell")
        assert "alpha | beta" in strip_markup("alpha | beta")


def doc_of(doc_id, *blocks, source="test"):
    return RawDocument(id=doc_id, source=source, text="\n\n".join(blocks))


class TestCleaningThresholds:
    CFG = CleaningConfig()

    def test_paragraph_boundary(self):
        # 59 normalized chars fall, 60 survive; filler keeps the document alive.
        filler = "f" * 200
        doc = clean_document(doc_of("d", "x" * 59, "y" * 60, filler), self.CFG)
        assert doc is not None
        assert [p.char_count for p in doc.paragraphs] == [60, 200]

    def test_document_boundary(self):
        assert clean_document(doc_of("d", "z" * 199), self.CFG) is None
        kept = clean_document(doc_of("d", "z" * 200), self.CFG)
        assert kept is not None and kept.char_count == 200

    def test_document_total_counts_only_surviving_paragraphs(self):
        # Two short paragraphs summed would pass, but each one falls alone.
        assert clean_document(doc_of("d", "a" * 59, "b" * 59, "c" * 59, "e" * 59), self.CFG) is None
        # Survivors sum to 199, just under the document threshold.
        assert clean_document(doc_of("d", "a" * 100, "b" * 99), self.CFG) is None
        kept = clean_document(doc_of("d", "a" * 100, "b" * 100), self.CFG)
        assert kept is not None and kept.char_count == 200

    def test_short_paragraph_dropped_long_kept(self):
        doc = clean_document(doc_of("d", "x" * 59, "y" * 250), self.CFG)
        assert doc is not None
        assert len(doc.paragraphs) == 1
        assert doc.paragraphs[0].char_count == 250
        assert doc.paragraphs[0].index == 0

    def test_counts_ignore_whitespace_layout(self):
        base = ("ab " * 20).strip()
        assert len(base) == 59
        messy = base.replace(" ", "  \t ")
        doc = clean_document(doc_of("d", messy, "y" * 200), self.CFG)
        assert doc is not None
        assert len(doc.paragraphs) == 1  # the 59-char paragraph still falls

    def test_nothing_left_returns_none(self):
        assert clean_document(doc_of("d", "tiny"), self.CFG) is None
        assert clean_document(RawDocument("d", "s", ""), self.CFG) is None

    def test_markup_switch(self):
        tagged = "<td>" + "x" * 60 + "</td>"
        stripped = clean_document(doc_of("d", tagged, "y" * 200), self.CFG)
        assert len(stripped.paragraphs) == 2  # tag text survives, tags themselves go
        raw_cfg = CleaningConfig(strip_markup=False)
        kept = clean_document(doc_of("d", tagged, "y" * 200), raw_cfg)
        assert "<td>" in kept.paragraphs[0].text

    def test_deterministic(self):
        raw = doc_of("d", "One thing happened here today. " * 4, "Another paragraph of text. " * 4)
        assert clean_document(raw, self.CFG) == clean_document(raw, self.CFG)

    def test_bad_config_rejected(self):
        with pytest.raises(ValueError):
            CleaningConfig(min_paragraph_chars=-1)


def random_document(rng, doc_id):
    paragraphs = []
    for index in range(rng.randint(1, 5)):
        sentences = [
            Sentence(f"Sentence {i} of paragraph {index} in {doc_id}.")
            for i in range(rng.randint(1, 6))
        ]
        paragraphs.append(Paragraph(index=index, sentences=sentences))
    return Document(id=doc_id, source=rng.choice(["wiki", "news", "books"]), paragraphs=paragraphs)


class TestCorpusStats:
    def test_empty(self):
        stats = corpus_stats([])
        assert (stats.documents, stats.paragraphs, stats.sentences) == (0, 0, 0)
        assert stats.chars_by_source == {}
        assert stats.total_chars == 0

    def test_matches_brute_force_recount(self):
        rng = random.Random(5)
        docs = [random_document(rng, f"doc-{i}") for i in range(50)]
        stats = corpus_stats(docs)
        assert stats.documents == 50
        assert stats.paragraphs == sum(len(d.paragraphs) for d in docs)
        assert stats.sentences == sum(len(p.sentences) for d in docs for p in d.paragraphs)
        by_source: dict[str, int] = {}
        for doc in docs:
            chars = sum(len(" ".join(s.text for s in p.sentences)) for p in doc.paragraphs)
            by_source[doc.source] = by_source.get(doc.source, 0) + chars
        assert stats.chars_by_source == by_source

    def test_merge_is_associative_and_commutative(self):
        rng = random.Random(6)
        chunks = [
            corpus_stats([random_document(rng, f"d{i}-{j}") for j in range(rng.randint(0, 5))])
            for i in range(6)
        ]
        a, b, c = chunks[0], chunks[1], chunks[2]
        assert (a + b) + c == a + (b + c)
        assert a + b == b + a
        total = CorpusStats()
        for chunk in chunks:
            total = total + chunk
        rng.shuffle(chunks)
        shuffled = CorpusStats()
        for chunk in chunks:
            shuffled = shuffled + chunk
        assert total == shuffled


class TestReaders:
    def test_jsonl_documents(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text(
            '{"id": "a", "source": "wiki", "text": "Hello."}\n'
            '{"id": "b", "text": "World."}\n',
            encoding="utf-8",
        )
        docs = list(read_raw_documents(path))
        assert [(d.id, d.source, d.text) for d in docs] == [
            ("a", "wiki", "Hello."),
            ("b", "unknown", "World."),
        ]

    def test_invalid_utf8_reports_byte_offset(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_bytes(b'{"id": "a", "text": "ok"}\n\xff\xfe bad bytes\n')
        with pytest.raises(EncodingError) as err:
            list(read_raw_documents(path))
        assert err.value.byte_offset == 26

    def test_invalid_json_names_line(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text('{"id": "a", "text": "ok"}\nnot json\n', encoding="utf-8")
        with pytest.raises(RecordError, match="line 2"):
            list(read_raw_documents(path))

    def test_missing_fields_rejected(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text('{"source": "wiki", "text": "no id"}\n', encoding="utf-8")
        with pytest.raises(RecordError, match="'id'"):
            list(read_raw_documents(path))

    def test_duplicate_ids_rejected(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text(
            '{"id": "a", "text": "one"}\n{"id": "a", "text": "two"}\n', encoding="utf-8"
        )
        with pytest.raises(RecordError, match="duplicate"):
            list(read_raw_documents(path))

    def test_plain_text_directory(self, tmp_path):
        (tmp_path / "beta.txt").write_text("Second file.", encoding="utf-8")
        (tmp_path / "alpha.txt").write_text("First file.", encoding="utf-8")
        docs = list(read_raw_documents(tmp_path, source="local"))
        assert [(d.id, d.source) for d in docs] == [("alpha", "local"), ("beta", "local")]

    def test_clean_documents_round_trip(self, tmp_path):
        rng = random.Random(11)
        docs = [random_document(rng, f"doc-{i}") for i in range(10)]
        path = tmp_path / "clean.jsonl"
        assert write_clean_documents(docs, path) == 10
        assert list(read_clean_documents(path)) == docs
