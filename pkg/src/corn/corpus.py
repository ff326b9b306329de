"""Pre-annotated review corpus input format.

One JSON object per line: {sentence_id, category, raw,
tokens: [{text, pos, head, dep}]}. POS tags and dependency heads are
produced offline by whatever tagger the corpus owner prefers; this module
only validates and normalizes them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .text import Token, TokenizedSentence


class CorpusSchemaError(Exception):
    pass


# Coarse POS buckets; Penn-style fine tags are folded in.
NOUN_TAGS = {"NOUN", "PROPN", "NN", "NNS", "NNP", "NNPS"}
ADJ_TAGS = {"ADJ", "JJ", "JJR", "JJS"}
VERB_TAGS = {"VERB", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ"}


def coarse_pos(tag: str | None) -> str:
    if tag is None:
        return "OTHER"
    tag = tag.upper()
    if tag in NOUN_TAGS:
        return "NOUN"
    if tag in ADJ_TAGS:
        return "ADJ"
    if tag in VERB_TAGS:
        return "VERB"
    return "OTHER"


@dataclass(frozen=True)
class AnnotatedToken:
    text: str
    index: int
    char_start: int
    char_end: int
    pos_tag: str | None
    head: int | None
    dep_rel: str | None

    @property
    def coarse(self) -> str:
        return coarse_pos(self.pos_tag)


@dataclass(frozen=True)
class AnnotatedSentence:
    sentence_id: str
    category: str
    raw: str
    tokens: tuple[AnnotatedToken, ...]

    def to_tokenized(self) -> TokenizedSentence:
        plain = tuple(
            Token(text=t.text, index=t.index, char_start=t.char_start, char_end=t.char_end)
            for t in self.tokens
        )
        return TokenizedSentence(raw=self.raw, tokens=plain, sentence_id=self.sentence_id)


def parse_corpus_record(obj: dict) -> AnnotatedSentence:
    try:
        sentence_id = str(obj["sentence_id"])
        category = str(obj["category"])
        raw = obj["raw"]
        raw_tokens = obj["tokens"]
    except (KeyError, TypeError) as exc:
        raise CorpusSchemaError(f"missing corpus field: {exc}") from exc
    if not isinstance(raw, str) or not isinstance(raw_tokens, list):
        raise CorpusSchemaError(f"bad corpus record for sentence {sentence_id!r}")

    tokens: list[AnnotatedToken] = []
    cursor = 0
    for i, t in enumerate(raw_tokens):
        if not isinstance(t, dict) or "text" not in t:
            raise CorpusSchemaError(f"token {i} of sentence {sentence_id!r} lacks text")
        text = str(t["text"])
        start = raw.find(text, cursor)
        if start < 0:
            raise CorpusSchemaError(
                f"token {text!r} not found in raw text of sentence {sentence_id!r}"
            )
        head = t.get("head")
        if head is not None:
            head = int(head)
            if head == i or not (-1 <= head < len(raw_tokens)):
                raise CorpusSchemaError(
                    f"token {i} of sentence {sentence_id!r} has invalid head {head}"
                )
            if head == -1:
                head = -1
        tokens.append(
            AnnotatedToken(
                text=text,
                index=i,
                char_start=start,
                char_end=start + len(text),
                pos_tag=t.get("pos"),
                head=head,
                dep_rel=t.get("dep"),
            )
        )
        cursor = start + len(text)
    return AnnotatedSentence(
        sentence_id=sentence_id, category=category, raw=raw, tokens=tuple(tokens)
    )


def load_corpus(path: str | Path) -> list[AnnotatedSentence]:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusSchemaError(f"{path}:{lineno}: invalid JSON") from exc
            sentences.append(parse_corpus_record(obj))
    return sentences
