"""Corpus ingestion and cleaning.

Raw documents come in as plain text (optionally with lightweight markup).
Cleaning strips markup, splits text into paragraphs on blank lines, drops
paragraphs and documents that are too short to be useful, and segments
each surviving paragraph into sentences with a rule-based splitter.

All character counts are taken over whitespace-normalized text, so the
thresholds do not depend on how the input was wrapped or indented.
"""

from __future__ import annotations

import html
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

__all__ = [
    "CleaningConfig",
    "CorpusStats",
    "Document",
    "EncodingError",
    "Paragraph",
    "RawDocument",
    "RecordError",
    "Sentence",
    "clean_document",
    "corpus_stats",
    "load_abbreviations",
    "load_stopwords",
    "normalize_whitespace",
    "read_clean_documents",
    "read_raw_documents",
    "segment_paragraph",
    "strip_markup",
    "write_clean_documents",
]


class EncodingError(ValueError):
    """Input bytes are not valid UTF-8."""

    def __init__(self, origin: str, byte_offset: int) -> None:
        self.origin = origin
        self.byte_offset = byte_offset
        super().__init__(f"{origin}: invalid UTF-8 at byte offset {byte_offset}")


class RecordError(ValueError):
    """A structured input record is malformed."""

    def __init__(self, origin: str, line_number: int, reason: str) -> None:
        self.origin = origin
        self.line_number = line_number
        super().__init__(f"{origin}, line {line_number}: {reason}")


@dataclass
class RawDocument:
    """A document as read from disk, before any cleaning."""

    id: str
    source: str
    text: str


@dataclass
class CleaningConfig:
    """Thresholds and switches for :func:`clean_document`.

    ``min_paragraph_chars`` and ``min_document_chars`` are measured on
    whitespace-normalized text. ``strip_markup`` enables removal of
    angle-bracket tags, short all-caps header lines, and table-like lines.
    """

    min_paragraph_chars: int = 60
    min_document_chars: int = 200
    strip_markup: bool = True

    def __post_init__(self) -> None:
        if self.min_paragraph_chars < 0 or self.min_document_chars < 0:
            raise ValueError("cleaning thresholds must be non-negative")


@dataclass
class Sentence:
    text: str


@dataclass
class Paragraph:
    """A cleaned paragraph: its position in the document plus its sentences."""

    index: int
    sentences: list[Sentence]

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)

    @property
    def char_count(self) -> int:
        # Sentences are whitespace-normalized, so joining with single
        # spaces reproduces the normalized paragraph text exactly.
        return len(self.text)


@dataclass
class Document:
    """A cleaned document ready for pair sampling."""

    id: str
    source: str
    paragraphs: list[Paragraph]

    @property
    def char_count(self) -> int:
        return sum(p.char_count for p in self.paragraphs)


_WHITESPACE_RE = re.compile(r"\s+")
_TAG_RE = re.compile(r"<[^>]*>")
_PARAGRAPH_SPLIT_RE = re.compile(r"\n\s*\n")

# A header line is short, contains letters, and none of them lowercase.
_HEADER_MAX_CHARS = 40
# A table-like line carries at least this many tab or pipe separators.
_TABLE_SEPARATOR_MIN = 3

_TERMINAL_PUNCT = ".!?"
_CLOSING_PUNCT = "\"')]"
_OPENING_PUNCT = "\"'(["


def normalize_whitespace(text: str) -> str:
    """Collapse all whitespace runs to single spaces and trim the ends."""
    return _WHITESPACE_RE.sub(" ", text).strip()


def _data_file_lines(name: str) -> list[str]:
    raw = resources.files("parapair").joinpath("data", name).read_text("utf-8")
    out = []
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def load_stopwords() -> frozenset[str]:
    """Return the bundled English stopword set (lowercase)."""
    return frozenset(_data_file_lines("stopwords_en.txt"))


def load_abbreviations() -> frozenset[str]:
    """Return the bundled abbreviation set (lowercase, no trailing period)."""
    return frozenset(_data_file_lines("abbreviations_en.txt"))


_ABBREVIATIONS = load_abbreviations()


def _looks_like_header(line: str) -> bool:
    stripped = line.strip()
    if not stripped or len(stripped) >= _HEADER_MAX_CHARS:
        return False
    if not any(ch.isalpha() for ch in stripped):
        return False
    return not any(ch.islower() for ch in stripped)


def _looks_like_table_row(line: str) -> bool:
    return line.count("\t") + line.count("|") >= _TABLE_SEPARATOR_MIN


def strip_markup(text: str) -> str:
    """Drop angle-bracket tags, header-like lines, and table-like lines.

    Removed lines are replaced with blank lines so that surrounding text
    does not merge into a single paragraph.
    """
    text = _TAG_RE.sub(" ", text)
    text = html.unescape(text)
    lines = []
    for line in text.split("\n"):
        if _looks_like_header(line) or _looks_like_table_row(line):
            lines.append("")
        else:
            lines.append(line)
    return "\n".join(lines)


def _word_before(text: str, index: int) -> str:
    """The token immediately preceding ``text[index]``, letters and dots only."""
    start = index
    while start > 0 and (text[start - 1].isalpha() or text[start - 1] == "."):
        start -= 1
    return text[start:index]


def _is_abbreviation(text: str, dot_index: int) -> bool:
    word = _word_before(text, dot_index)
    if not word:
        return False
    if len(word) == 1 and word.isupper():
        return True  # single-letter initial, as in "J. Smith"
    return word.lower() in _ABBREVIATIONS


def segment_paragraph(text: str) -> list[Sentence]:
    """Split one paragraph into sentences.

    A sentence boundary is terminal punctuation (``.``, ``!`` or ``?``,
    optionally followed by closing quotes or brackets) followed by
    whitespace and an uppercase letter or digit. Periods after known
    abbreviations or single-letter initials never end a sentence.

    Joining the returned sentences with single spaces reproduces the
    whitespace-normalized input exactly.
    """
    norm = normalize_whitespace(text)
    if not norm:
        return []
    n = len(norm)
    boundaries: list[int] = []
    i = 0
    while i < n:
        if norm[i] not in _TERMINAL_PUNCT:
            i += 1
            continue
        run_end = i
        while run_end + 1 < n and norm[run_end + 1] in _TERMINAL_PUNCT:
            run_end += 1
        close_end = run_end + 1
        while close_end < n and norm[close_end] in _CLOSING_PUNCT:
            close_end += 1
        if close_end < n and norm[close_end] == " ":
            next_char = close_end + 1
            while next_char < n and norm[next_char] in _OPENING_PUNCT:
                next_char += 1
            starts_sentence = next_char < n and (
                norm[next_char].isupper() or norm[next_char].isdigit()
            )
            is_plain_period = norm[i] == "." and run_end == i
            if starts_sentence and not (is_plain_period and _is_abbreviation(norm, i)):
                boundaries.append(close_end)
        i = run_end + 1
    sentences = []
    start = 0
    for boundary in boundaries:
        sentences.append(Sentence(norm[start:boundary]))
        start = boundary + 1  # skip the single separating space
    sentences.append(Sentence(norm[start:]))
    return sentences


def clean_document(raw: RawDocument, config: CleaningConfig) -> Document | None:
    """Clean one raw document.

    Returns ``None`` when nothing usable remains: either no paragraph
    reaches ``min_paragraph_chars`` or the surviving paragraphs total
    fewer than ``min_document_chars`` characters.
    """
    text = raw.text
    if config.strip_markup:
        text = strip_markup(text)
    paragraphs: list[Paragraph] = []
    for block in _PARAGRAPH_SPLIT_RE.split(text):
        norm = normalize_whitespace(block)
        if len(norm) < config.min_paragraph_chars:
            continue
        sentences = segment_paragraph(norm)
        if not sentences:
            continue
        paragraphs.append(Paragraph(index=len(paragraphs), sentences=sentences))
    if not paragraphs:
        return None
    if sum(p.char_count for p in paragraphs) < config.min_document_chars:
        return None
    return Document(id=raw.id, source=raw.source, paragraphs=paragraphs)


@dataclass
class CorpusStats:
    """Aggregate corpus counts; merging is associative and commutative."""

    documents: int = 0
    paragraphs: int = 0
    sentences: int = 0
    chars_by_source: dict[str, int] = field(default_factory=dict)

    @property
    def total_chars(self) -> int:
        return sum(self.chars_by_source.values())

    def merge(self, other: CorpusStats) -> CorpusStats:
        merged = dict(self.chars_by_source)
        for source, chars in other.chars_by_source.items():
            merged[source] = merged.get(source, 0) + chars
        return CorpusStats(
            documents=self.documents + other.documents,
            paragraphs=self.paragraphs + other.paragraphs,
            sentences=self.sentences + other.sentences,
            chars_by_source=merged,
        )

    def __add__(self, other: CorpusStats) -> CorpusStats:
        return self.merge(other)

    def as_dict(self) -> dict:
        return {
            "documents": self.documents,
            "paragraphs": self.paragraphs,
            "sentences": self.sentences,
            "total_chars": self.total_chars,
            "chars_by_source": dict(sorted(self.chars_by_source.items())),
        }


def corpus_stats(documents: Iterable[Document]) -> CorpusStats:
    """Fold a stream of cleaned documents into aggregate counts."""
    stats = CorpusStats()
    for doc in documents:
        stats.documents += 1
        stats.paragraphs += len(doc.paragraphs)
        stats.sentences += sum(len(p.sentences) for p in doc.paragraphs)
        stats.chars_by_source[doc.source] = (
            stats.chars_by_source.get(doc.source, 0) + doc.char_count
        )
    return stats


def _decode_utf8(data: bytes, origin: str) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(origin, exc.start) from exc


def read_raw_documents(path: str | Path, source: str = "unknown") -> Iterator[RawDocument]:
    """Read raw documents from ``path``.

    A regular file is treated as JSON lines with ``id``, ``source`` and
    ``text`` fields. A directory is treated as one plain-text document
    per ``*.txt`` file, with the file name (minus extension) as the id
    and ``source`` as the source label. Duplicate ids are rejected.
    """
    path = Path(path)
    seen: set[str] = set()
    if path.is_dir():
        for file in sorted(path.glob("*.txt")):
            doc_id = file.stem
            if doc_id in seen:
                raise RecordError(str(path), 0, f"duplicate document id {doc_id!r}")
            seen.add(doc_id)
            yield RawDocument(id=doc_id, source=source, text=_decode_utf8(file.read_bytes(), str(file)))
        return
    text = _decode_utf8(path.read_bytes(), str(path))
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(str(path), line_number, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise RecordError(str(path), line_number, "record is not an object")
        doc_id = record.get("id")
        body = record.get("text")
        if not isinstance(doc_id, str) or not doc_id:
            raise RecordError(str(path), line_number, "missing or empty 'id'")
        if not isinstance(body, str):
            raise RecordError(str(path), line_number, "missing 'text'")
        if doc_id in seen:
            raise RecordError(str(path), line_number, f"duplicate document id {doc_id!r}")
        seen.add(doc_id)
        yield RawDocument(id=doc_id, source=str(record.get("source", source)), text=body)


def write_clean_documents(documents: Iterable[Document], path: str | Path) -> int:
    """Write cleaned documents as JSON lines; returns the document count."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for doc in documents:
            record = {
                "id": doc.id,
                "source": doc.source,
                "paragraphs": [[s.text for s in p.sentences] for p in doc.paragraphs],
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_clean_documents(path: str | Path) -> Iterator[Document]:
    """Read documents previously written by :func:`write_clean_documents`."""
    path = Path(path)
    text = _decode_utf8(path.read_bytes(), str(path))
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(str(path), line_number, f"invalid JSON: {exc.msg}") from exc
        doc_id = record.get("id")
        paragraph_lists = record.get("paragraphs")
        if not isinstance(doc_id, str) or not isinstance(paragraph_lists, list):
            raise RecordError(str(path), line_number, "expected 'id' and 'paragraphs'")
        paragraphs = []
        for index, sentence_texts in enumerate(paragraph_lists):
            if not isinstance(sentence_texts, list) or not all(
                isinstance(s, str) for s in sentence_texts
            ):
                raise RecordError(str(path), line_number, f"paragraph {index} is not a list of strings")
            paragraphs.append(Paragraph(index=index, sentences=[Sentence(s) for s in sentence_texts]))
        yield Document(id=doc_id, source=str(record.get("source", "unknown")), paragraphs=paragraphs)
