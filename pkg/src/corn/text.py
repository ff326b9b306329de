"""Deterministic tokenization, clause segmentation, and span enumeration.

Tokenization splits on whitespace and detaches punctuation into separate
tokens; it records character offsets so the raw sentence is always
recoverable. No external tokenizer models are involved, which keeps every
downstream artifact reproducible.
"""

from __future__ import annotations

import re
from collections.abc import Iterable
from dataclasses import dataclass

# A token is either a run of word characters or a single punctuation char.
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

DEFAULT_CLAUSE_DELIMITERS = frozenset({",", ";", "and", "but", "however"})
DEFAULT_MAX_SPAN_LEN = 6


@dataclass(frozen=True)
class Token:
    text: str
    index: int
    char_start: int
    char_end: int


@dataclass(frozen=True)
class TokenizedSentence:
    raw: str
    tokens: tuple[Token, ...]
    sentence_id: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    def token_texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def slice_text(self, start: int, end: int) -> str:
        """Raw text covered by tokens [start, end), original spacing kept."""
        if not 0 <= start < end <= len(self.tokens):
            raise IndexError(f"token range [{start}, {end}) out of bounds")
        return self.raw[self.tokens[start].char_start : self.tokens[end - 1].char_end]


@dataclass(frozen=True)
class Clause:
    sentence_id: str
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class SpanCandidate:
    start: int
    end: int
    text: str

    @property
    def length(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "SpanCandidate") -> bool:
        return self.start < other.end and other.start < self.end


def tokenize(raw: str, sentence_id: str = "") -> TokenizedSentence:
    """Split `raw` on whitespace, detaching punctuation as its own tokens.

    Deterministic and idempotent; empty or whitespace-only input yields a
    sentence with zero tokens.
    """
    tokens = tuple(
        Token(text=m.group(), index=i, char_start=m.start(), char_end=m.end())
        for i, m in enumerate(_TOKEN_RE.finditer(raw))
    )
    return TokenizedSentence(raw=raw, tokens=tokens, sentence_id=sentence_id)


def reconstruct(sentence: TokenizedSentence) -> str:
    """Rebuild the raw sentence from token texts plus the recorded gaps."""
    parts: list[str] = []
    cursor = 0
    for tok in sentence.tokens:
        parts.append(sentence.raw[cursor : tok.char_start])
        parts.append(tok.text)
        cursor = tok.char_end
    parts.append(sentence.raw[cursor:])
    return "".join(parts)


def is_punctuation(text: str) -> bool:
    return bool(text) and not any(ch.isalnum() for ch in text)


def segment_clauses(
    sentence: TokenizedSentence,
    delimiters: frozenset[str] | set[str] = DEFAULT_CLAUSE_DELIMITERS,
) -> list[Clause]:
    """Partition the token sequence into clauses at delimiter tokens.

    A delimiter token closes the running clause and attaches to it; clauses
    whose tokens are all delimiters are dropped. Clause text covers the
    clause's content tokens (leading/trailing delimiter tokens trimmed).
    """
    lowered = {d.lower() for d in delimiters}
    clauses: list[Clause] = []
    start = 0
    n = len(sentence.tokens)
    for i, tok in enumerate(sentence.tokens):
        if tok.text.lower() in lowered:
            _append_clause(clauses, sentence, start, i + 1, lowered)
            start = i + 1
    if start < n:
        _append_clause(clauses, sentence, start, n, lowered)
    return clauses


def _append_clause(
    clauses: list[Clause],
    sentence: TokenizedSentence,
    start: int,
    end: int,
    lowered: set[str],
) -> None:
    content = [
        i for i in range(start, end) if sentence.tokens[i].text.lower() not in lowered
    ]
    if not content:
        return
    text = sentence.slice_text(content[0], content[-1] + 1)
    clauses.append(
        Clause(sentence_id=sentence.sentence_id, start=start, end=end, text=text)
    )


def enumerate_spans(
    sentence: TokenizedSentence, max_len: int = DEFAULT_MAX_SPAN_LEN
) -> list[SpanCandidate]:
    """All contiguous token spans of length 1..min(max_len, n), by (start, length)."""
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    n = len(sentence.tokens)
    spans: list[SpanCandidate] = []
    for start in range(n):
        for length in range(1, min(max_len, n - start) + 1):
            end = start + length
            spans.append(
                SpanCandidate(start=start, end=end, text=sentence.slice_text(start, end))
            )
    return spans


def filter_boundary_spans(
    sentence: TokenizedSentence,
    spans: Iterable[SpanCandidate],
    delimiters: frozenset[str] | set[str] = DEFAULT_CLAUSE_DELIMITERS,
) -> list[SpanCandidate]:
    """Drop spans whose first or last token is punctuation or a delimiter word."""
    lowered = {d.lower() for d in delimiters}

    def excluded(index: int) -> bool:
        text = sentence.tokens[index].text
        return is_punctuation(text) or text.lower() in lowered

    return [s for s in spans if not excluded(s.start) and not excluded(s.end - 1)]


def find_term_occurrences(token_texts: list[str], term: str) -> list[tuple[int, int]]:
    """Token ranges where `term` occurs on token boundaries, case-insensitive."""
    words = term.lower().split()
    if not words:
        return []
    lowered = [t.lower() for t in token_texts]
    hits = []
    for i in range(len(lowered) - len(words) + 1):
        if lowered[i : i + len(words)] == words:
            hits.append((i, i + len(words)))
    return hits
