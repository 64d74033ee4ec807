"""Website text preprocessing: HTML stripping, tokenization, stopword removal, stemming.

The pipeline turns a fetched project page into a sequence of lowercase
stems ready for keyword feature extraction. All functions are pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .porter import stem_word

MAX_DOCUMENT_BYTES = 4 * 1024 * 1024

#: stems are produced by :func:`preprocess`; plain ``list[str]`` keeps the
#: pipeline composable with ordinary sequence tooling
StemSequence = list


class DocumentTooLargeError(ValueError):
    """Raised when a document exceeds the configured size limit."""


@dataclass(frozen=True)
class RawDocument:
    """A fetched page body, prior to any preprocessing."""

    content: bytes
    content_kind: str = "html"  # "html" | "plain"
    source_url: str | None = None


# Tags whose boundaries separate words; anything else is treated as inline
# markup that contributes no whitespace.
_BLOCK_TAGS = frozenset(
    """
    address article aside blockquote body br caption dd details div dl dt
    fieldset figcaption figure footer form h1 h2 h3 h4 h5 h6 head header hr
    html li link main meta nav noscript ol option p pre section select
    summary table tbody td tfoot th thead title tr ul
    """.split()
)

_TAG_RE = re.compile(r"<\s*(/?)\s*([a-zA-Z][a-zA-Z0-9:-]*)[^>]*>")
_ENTITY_RE = re.compile(r"&(#[0-9]+|#[xX][0-9a-fA-F]+|[a-zA-Z][a-zA-Z0-9]*);")

_NAMED_ENTITIES = {
    "amp": "&",
    "lt": "<",
    "gt": ">",
    "quot": '"',
    "apos": "'",
    "nbsp": "\xa0",
}


def _decode_entities(text: str) -> str:
    def repl(m: re.Match) -> str:
        body = m.group(1)
        if body.startswith("#"):
            try:
                code = int(body[2:], 16) if body[1] in "xX" else int(body[1:])
                if 0 <= code <= 0x10FFFF and not 0xD800 <= code <= 0xDFFF:
                    return chr(code)
            except ValueError:
                pass
            return m.group(0)
        return _NAMED_ENTITIES.get(body.lower(), m.group(0))

    return _ENTITY_RE.sub(repl, text)


def _document_text(doc) -> str:
    if isinstance(doc, RawDocument):
        return doc.content.decode("utf-8", errors="replace")
    return doc


def strip_html(doc) -> str:
    """Extract visible text from an HTML document.

    Tolerant scan-and-skip pass: no DOM is built, unclosed or malformed
    tags never raise. Script/style bodies are dropped, block-tag
    boundaries become single spaces, and the entities amp/lt/gt/quot/
    apos/nbsp plus numeric references are decoded. Input without any
    ``<`` is returned unchanged apart from entity decoding.
    """
    text = _document_text(doc)
    if "<" not in text:
        return _decode_entities(text)

    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch != "<":
            out.append(ch)
            i += 1
            continue
        if text.startswith("<!--", i):
            end = text.find("-->", i + 4)
            out.append(" ")
            i = n if end < 0 else end + 3
            continue
        m = _TAG_RE.match(text, i)
        if m is None:
            nxt = text[i + 1 : i + 2]
            if nxt and (nxt.isalpha() or nxt in "/!?"):
                # truncated or attribute-mangled tag: skip to the next '>'
                end = text.find(">", i + 1)
                out.append(" ")
                i = n if end < 0 else end + 1
            else:
                out.append("<")
                i += 1
            continue
        closing, name = m.group(1) == "/", m.group(2).lower()
        if name in ("script", "style") and not closing:
            close = re.compile(rf"</\s*{name}[^>]*>", re.IGNORECASE).search(text, m.end())
            out.append(" ")
            i = n if close is None else close.end()
            continue
        if name in _BLOCK_TAGS:
            out.append(" ")
        i = m.end()
    decoded = _decode_entities("".join(out))
    return " ".join(decoded.split())


_TOKEN_RE = re.compile(r"[0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Split on non-alphanumerics, lowercase, and drop pure-digit tokens."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if not t.isdigit()]


def _stopwords_path() -> Path:
    return Path(str(resources.files("cryptohalal").joinpath("data/stopwords.txt")))


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stopword file: one word per line, ``#`` comments allowed."""
    if path is None:
        return _default_stopwords()
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


@lru_cache(maxsize=1)
def _default_stopwords() -> frozenset[str]:
    return load_stopwords(_stopwords_path())


def remove_stopwords(tokens: list[str], stopwords: frozenset[str] | None = None) -> list[str]:
    active = stopwords if stopwords is not None else _default_stopwords()
    return [t for t in tokens if t not in active]


def stem(tokens: list[str]) -> StemSequence:
    return [stem_word(t) for t in tokens]


def preprocess(
    doc: RawDocument,
    stopwords: frozenset[str] | None = None,
    size_limit: int = MAX_DOCUMENT_BYTES,
) -> StemSequence:
    """Full chain: strip HTML, tokenize, remove stopwords, stem."""
    if len(doc.content) > size_limit:
        raise DocumentTooLargeError(
            f"document is {len(doc.content)} bytes; limit is {size_limit}"
        )
    if doc.content_kind == "html":
        text = strip_html(doc)
    else:
        text = _document_text(doc)
    return stem(remove_stopwords(tokenize(text), stopwords))
