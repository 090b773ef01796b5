"""Corpus ingestion: raw text collections to document/sentence streams.

Plain-text inputs use blank lines as document separators (the convention of
flattened newswire and WikiExtractor-style output). JSONL inputs carry one
document per line with fields ``{id?, text, lang?, source?}``. All text is
NFC-normalized on the way in.
"""

from __future__ import annotations

import json
import logging
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from .errors import InputDataError

log = logging.getLogger(__name__)

LANGS = ("en", "ar")
SOURCES = ("gigaword", "wiki", "oscar", "other")

# Alphabetic codepoint ranges used to tag a token's script.
_ARABIC_BLOCKS = (
    (0x0600, 0x06FF),
    (0x0750, 0x077F),
    (0x08A0, 0x08FF),
    (0xFB50, 0xFDFF),  # presentation forms A
    (0xFE70, 0xFEFF),  # presentation forms B
)
_LATIN_BLOCKS = (
    (0x0041, 0x005A),
    (0x0061, 0x007A),
    (0x00C0, 0x024F),
    (0x1E00, 0x1EFF),
    (0x2C60, 0x2C7F),
    (0xA720, 0xA7FF),
)

_AR_TERMINATORS = frozenset(".!?؟")  # includes Arabic question mark
_EN_TERMINATORS = frozenset(".!?")


@dataclass
class Document:
    """One source text with language tag and provenance."""

    id: str
    lang: str
    source: str
    text: str


@dataclass
class Sentence:
    """A sentence extracted from a document.

    ``tokens`` are the whitespace words of ``raw``; joining them with single
    spaces reproduces ``raw`` with collapsed whitespace. ``source`` is carried
    along from the document so downstream balancing can key on (lang, source).
    """

    doc_id: str
    index: int
    lang: str
    tokens: list[str]
    raw: str
    source: str = "other"

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "index": self.index,
            "lang": self.lang,
            "source": self.source,
            "raw": self.raw,
        }

    @classmethod
    def from_json(cls, rec: dict) -> "Sentence":
        raw = rec["raw"]
        return cls(
            doc_id=rec["doc_id"],
            index=int(rec["index"]),
            lang=rec["lang"],
            tokens=raw.split(),
            raw=raw,
            source=rec.get("source", "other"),
        )


@dataclass
class RecordError:
    """A skipped input record: file position and reason."""

    path: str
    ordinal: int
    byte_offset: int
    message: str


def _in_blocks(cp: int, blocks) -> bool:
    return any(lo <= cp <= hi for lo, hi in blocks)


def classify_script(piece: str) -> str:
    """Classify a token or vocabulary piece as 'en', 'ar', or 'other'.

    Decided by the majority script among alphabetic codepoints; a leading
    '##' continuation marker is ignored. Ties and all-non-alphabetic strings
    are 'other'.
    """
    if piece.startswith("##"):
        piece = piece[2:]
    latin = arabic = 0
    for ch in piece:
        if not ch.isalpha():
            continue
        cp = ord(ch)
        if _in_blocks(cp, _LATIN_BLOCKS):
            latin += 1
        elif _in_blocks(cp, _ARABIC_BLOCKS):
            arabic += 1
    if latin > arabic:
        return "en"
    if arabic > latin:
        return "ar"
    return "other"


def _load_abbreviations() -> frozenset[str]:
    text = (
        resources.files("biprep")
        .joinpath("data/english_abbreviations.txt")
        .read_text(encoding="utf-8")
    )
    entries = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.add(line.lower())
    return frozenset(entries)


_ABBREVIATIONS: frozenset[str] | None = None


def abbreviations() -> frozenset[str]:
    global _ABBREVIATIONS
    if _ABBREVIATIONS is None:
        _ABBREVIATIONS = _load_abbreviations()
    return _ABBREVIATIONS


def _trailing_word(text: str, end: int) -> str:
    # Word ending at text[end] inclusive, e.g. "Dr." for a period at `end`.
    j = end
    while j > 0 and not text[j - 1].isspace():
        j -= 1
    return text[j : end + 1]


def split_sentences(doc: Document) -> list[Sentence]:
    """Split a document into sentences at terminator punctuation.

    A terminator splits only when followed by whitespace or end of text, so
    decimals, URLs and abbreviation-internal periods survive. English periods
    additionally consult the abbreviation guard list. The terminator stays
    with the preceding sentence; empty segments are dropped. No characters
    are lost: concatenating the raw sentences and collapsing whitespace
    reproduces the document text with collapsed whitespace.
    """
    text = doc.text
    if doc.lang == "ar":
        terminators = _AR_TERMINATORS
        guard: frozenset[str] = frozenset()
    else:
        terminators = _EN_TERMINATORS
        guard = abbreviations()

    segments: list[str] = []
    start = 0
    for i, ch in enumerate(text):
        if ch not in terminators:
            continue
        nxt = text[i + 1] if i + 1 < len(text) else ""
        if nxt and not nxt.isspace():
            continue
        if ch == "." and guard and _trailing_word(text, i).lower() in guard:
            continue
        segments.append(text[start : i + 1])
        start = i + 1
    if start < len(text):
        segments.append(text[start:])

    sentences: list[Sentence] = []
    for seg in segments:
        raw = seg.strip()
        if not raw:
            continue
        sentences.append(
            Sentence(
                doc_id=doc.id,
                index=len(sentences),
                lang=doc.lang,
                tokens=raw.split(),
                raw=raw,
                source=doc.source,
            )
        )
    return sentences


def _validate_lang(lang: str) -> str:
    if lang not in LANGS:
        raise InputDataError(f"unsupported language tag {lang!r}; expected one of {LANGS}")
    return lang


def _plain_text_blocks(data: bytes) -> Iterator[tuple[int, int, bytes]]:
    """Yield (ordinal, byte_offset, block_bytes) for blank-line-delimited blocks."""
    ordinal = 0
    block_start = 0
    block_lines: list[bytes] = []
    offset = 0
    for line in data.splitlines(keepends=True):
        stripped = line.strip()
        if not stripped:
            if block_lines:
                yield ordinal, block_start, b"".join(block_lines)
                ordinal += 1
                block_lines = []
        else:
            if not block_lines:
                block_start = offset
            block_lines.append(line)
        offset += len(line)
    if block_lines:
        yield ordinal, block_start, b"".join(block_lines)


def ingest(
    path: str | Path,
    source: str = "other",
    lang: str = "en",
    fmt: str = "auto",
    errors: list[RecordError] | None = None,
    _seen_ids: set[str] | None = None,
) -> Iterator[Document]:
    """Stream documents from one plain-text or JSONL file.

    Document ids are ``<source>:<lang>:<file>:<ordinal>`` with the ordinal
    counting records in file order (including skipped ones, so ids stay
    stable when a bad record is fixed). Duplicate ids (possible only with
    caller-supplied JSONL ids) are record errors. Malformed records are
    reported into ``errors`` (and logged) rather than aborting the stream;
    an empty file yields an empty stream.
    """
    path = Path(path)
    if fmt == "auto":
        fmt = "jsonl" if path.suffix in (".jsonl", ".json") else "text"
    if fmt not in ("text", "jsonl"):
        raise InputDataError(f"unknown ingest format {fmt!r}")
    _validate_lang(lang)
    seen_ids = _seen_ids if _seen_ids is not None else set()

    def report(ordinal: int, offset: int, message: str) -> None:
        err = RecordError(str(path), ordinal, offset, message)
        log.warning("%s: record %d at byte %d: %s", path, ordinal, offset, message)
        if errors is not None:
            errors.append(err)

    data = path.read_bytes()
    fname = path.name

    if fmt == "text":
        for ordinal, offset, raw in _plain_text_blocks(data):
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                report(ordinal, offset + exc.start, f"malformed UTF-8: {exc.reason}")
                continue
            text = unicodedata.normalize("NFC", text).strip()
            if not text:
                continue
            yield Document(f"{source}:{lang}:{fname}:{ordinal}", lang, source, text)
        return

    offset = 0
    for ordinal, line in enumerate(data.splitlines(keepends=True)):
        line_offset = offset
        offset += len(line)
        stripped = line.strip()
        if not stripped:
            continue
        try:
            decoded = stripped.decode("utf-8")
        except UnicodeDecodeError as exc:
            report(ordinal, line_offset + exc.start, f"malformed UTF-8: {exc.reason}")
            continue
        try:
            rec = json.loads(decoded)
        except json.JSONDecodeError as exc:
            report(ordinal, line_offset, f"invalid JSON: {exc.msg}")
            continue
        if not isinstance(rec, dict) or "text" not in rec:
            report(ordinal, line_offset, "record missing 'text' field")
            continue
        text = unicodedata.normalize("NFC", str(rec["text"])).strip()
        if not text:
            report(ordinal, line_offset, "record has empty 'text'")
            continue
        rec_lang = rec.get("lang", lang)
        if rec_lang not in LANGS:
            report(ordinal, line_offset, f"unsupported language tag {rec_lang!r}")
            continue
        rec_source = rec.get("source", source)
        doc_id = str(rec["id"]) if "id" in rec else f"{rec_source}:{rec_lang}:{fname}:{ordinal}"
        if doc_id in seen_ids:
            report(ordinal, line_offset, f"duplicate document id {doc_id!r}")
            continue
        seen_ids.add(doc_id)
        yield Document(doc_id, rec_lang, rec_source, text)


def ingest_tree(
    root: str | Path,
    source: str = "other",
    lang: str = "en",
    fmt: str = "auto",
    errors: list[RecordError] | None = None,
) -> Iterator[Document]:
    """Ingest a file, or every file under a directory in sorted path order."""
    root = Path(root)
    if root.is_dir():
        paths = sorted(p for p in root.rglob("*") if p.is_file())
    else:
        paths = [root]
    seen_ids: set[str] = set()
    for p in paths:
        yield from ingest(p, source=source, lang=lang, fmt=fmt, errors=errors, _seen_ids=seen_ids)


def write_documents(docs: Iterable[Document], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            rec = {"id": doc.id, "lang": doc.lang, "source": doc.source, "text": doc.text}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            n += 1
    return n


def write_sentences(sentences: Iterable[Sentence], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sent in sentences:
            fh.write(json.dumps(sent.to_json(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_sentences(path: str | Path) -> Iterator[Sentence]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield Sentence.from_json(json.loads(line))
