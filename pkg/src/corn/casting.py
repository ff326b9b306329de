"""Casting AE/ASC/E2E into NLI queries and mapping predictions back.

AE asks "<domain> has <span>." for every candidate span and keeps the
entailed ones; ASC asks "<aspect> is great." and reads the sentiment off
the NLI label; E2E runs AE first and then the ASC-style prompt on each
kept span.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .labels import AeSpanLabel, AscLabel, BioLabel, E2eLabel, NliLabel
from .nli import NliDistribution, NliQuery
from .text import (
    DEFAULT_CLAUSE_DELIMITERS,
    DEFAULT_MAX_SPAN_LEN,
    SpanCandidate,
    TokenizedSentence,
    enumerate_spans,
    filter_boundary_spans,
)


class EmptyText(Exception):
    pass


class OverlappingSpans(Exception):
    pass


class Task(str, enum.Enum):
    AE = "ae"
    ASC = "asc"
    E2E = "e2e"
    E2E_STEP2 = "e2e_step2"


_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")


@dataclass(frozen=True)
class PromptConfig:
    domain_label: str = "The product"
    ae_template: str = "{domain} has {span}."
    asc_template: str = "{aspect} is great."

    def __post_init__(self) -> None:
        if sorted(_PLACEHOLDER_RE.findall(self.ae_template)) != ["domain", "span"]:
            raise ValueError("ae_template must use exactly {domain} and {span}")
        if _PLACEHOLDER_RE.findall(self.asc_template) != ["aspect"]:
            raise ValueError("asc_template must use exactly {aspect}")


def build_hypothesis(task: Task, cfg: PromptConfig, text: str) -> str:
    """Fill the task template with `text` (verbatim, no recasing).

    Output carries a single terminal period and no double spaces.
    """
    if not text or not text.strip():
        raise EmptyText("hypothesis text must be non-empty")
    if task == Task.AE:
        built = cfg.ae_template.format(domain=cfg.domain_label, span=text)
    elif task in (Task.ASC, Task.E2E_STEP2):
        built = cfg.asc_template.format(aspect=text)
    else:
        raise ValueError(f"no hypothesis template for task {task}")
    built = re.sub(r" {2,}", " ", built).strip()
    return built.rstrip(". ") + "."


_AE_MAP = {
    NliLabel.ENTAILMENT: AeSpanLabel.T,
    NliLabel.NEUTRAL: AeSpanLabel.O,
    NliLabel.CONTRADICTION: AeSpanLabel.O,
}
_ASC_MAP = {
    NliLabel.ENTAILMENT: AscLabel.POS,
    NliLabel.NEUTRAL: AscLabel.NEU,
    NliLabel.CONTRADICTION: AscLabel.NEG,
}
_E2E_STEP2_MAP = {
    NliLabel.ENTAILMENT: E2eLabel.T_POS,
    NliLabel.NEUTRAL: E2eLabel.T_NEU,
    NliLabel.CONTRADICTION: E2eLabel.T_NEG,
}


def map_nli(task: Task, label: NliLabel):
    """Total NLI -> task-label mapping for AE, ASC, and E2E step 2."""
    if task == Task.AE:
        return _AE_MAP[label]
    if task == Task.ASC:
        return _ASC_MAP[label]
    if task == Task.E2E_STEP2:
        return _E2E_STEP2_MAP[label]
    raise ValueError(f"task {task} has no direct NLI label mapping")


@dataclass(frozen=True)
class ScoredSpan:
    span: SpanCandidate
    distribution: NliDistribution
    hypothesis_text: str

    @property
    def entail_score(self) -> float:
        return self.distribution.p_entailment


def resolve_overlaps(spans: list[ScoredSpan]) -> list[ScoredSpan]:
    """Greedy conflict resolution: keep the higher-scoring span.

    Order: descending entail score, then longer span, then smaller start.
    A span is kept iff it shares no token with any already-kept span; the
    result is sorted by start and independent of input order.
    """
    ordered = sorted(
        spans,
        key=lambda s: (-s.entail_score, -(s.span.end - s.span.start), s.span.start),
    )
    kept: list[ScoredSpan] = []
    for candidate in ordered:
        if all(not candidate.span.overlaps(k.span) for k in kept):
            kept.append(candidate)
    kept.sort(key=lambda s: s.span.start)
    return kept


def spans_to_bio(n_tokens: int, kept_spans: list[ScoredSpan]) -> list[BioLabel]:
    """B on each span's first token, I on the rest, O elsewhere."""
    labels = [BioLabel.O] * n_tokens
    for scored in kept_spans:
        span = scored.span
        for i in range(span.start, span.end):
            if labels[i] != BioLabel.O:
                raise OverlappingSpans(f"token {i} covered twice")
        labels[span.start] = BioLabel.B
        for i in range(span.start + 1, span.end):
            labels[i] = BioLabel.I
    return labels


def predict_asc(
    sentence: TokenizedSentence,
    aspect: str,
    backend,
    cfg: PromptConfig = PromptConfig(),
) -> tuple[AscLabel, NliDistribution]:
    hypothesis = build_hypothesis(Task.ASC, cfg, aspect)
    (dist,) = backend.classify_batch(
        [NliQuery(premise=sentence.raw, hypothesis=hypothesis)]
    )
    return map_nli(Task.ASC, dist.argmax_label()), dist


@dataclass
class AeResult:
    bio: list[BioLabel]
    kept: list[ScoredSpan]


def predict_ae(
    sentence: TokenizedSentence,
    cfg: PromptConfig,
    backend,
    entail_threshold: float | None = None,
    max_span_len: int = DEFAULT_MAX_SPAN_LEN,
    drop_boundary_spans: bool = True,
    delimiters: frozenset[str] = DEFAULT_CLAUSE_DELIMITERS,
) -> AeResult:
    """Enumerate spans, classify each AE hypothesis, and keep entailed spans.

    A span counts as an aspect when entailment wins the argmax, or when a
    numeric `entail_threshold` is configured and its entailment probability
    reaches it. Overlap conflicts go to the higher-scoring span.
    """
    spans = enumerate_spans(sentence, max_span_len)
    if drop_boundary_spans:
        spans = filter_boundary_spans(sentence, spans, delimiters)
    if not spans:
        return AeResult(bio=[BioLabel.O] * len(sentence.tokens), kept=[])

    queries = [
        NliQuery(premise=sentence.raw, hypothesis=build_hypothesis(Task.AE, cfg, s.text))
        for s in spans
    ]
    distributions = backend.classify_batch(queries)
    entailed = []
    for span, query, dist in zip(spans, queries, distributions):
        if entail_threshold is None:
            is_aspect = map_nli(Task.AE, dist.argmax_label()) == AeSpanLabel.T
        else:
            is_aspect = dist.p_entailment >= entail_threshold
        if is_aspect:
            entailed.append(
                ScoredSpan(span=span, distribution=dist, hypothesis_text=query.hypothesis)
            )
    kept = resolve_overlaps(entailed)
    return AeResult(bio=spans_to_bio(len(sentence.tokens), kept), kept=kept)


@dataclass
class E2eResult:
    labels: list[E2eLabel]
    kept: list[ScoredSpan]
    span_labels: list[E2eLabel]


def predict_e2e(
    sentence: TokenizedSentence,
    cfg: PromptConfig,
    backend,
    entail_threshold: float | None = None,
    max_span_len: int = DEFAULT_MAX_SPAN_LEN,
    drop_boundary_spans: bool = True,
    delimiters: frozenset[str] = DEFAULT_CLAUSE_DELIMITERS,
) -> E2eResult:
    """Two-step E2E: AE keeps aspect spans, then each span's sentiment is
    read off the "<span> is great." query. Tokens outside kept spans are O."""
    ae = predict_ae(
        sentence,
        cfg,
        backend,
        entail_threshold=entail_threshold,
        max_span_len=max_span_len,
        drop_boundary_spans=drop_boundary_spans,
        delimiters=delimiters,
    )
    labels = [E2eLabel.O] * len(sentence.tokens)
    span_labels: list[E2eLabel] = []
    if ae.kept:
        queries = [
            NliQuery(
                premise=sentence.raw,
                hypothesis=build_hypothesis(Task.E2E_STEP2, cfg, s.span.text),
            )
            for s in ae.kept
        ]
        distributions = backend.classify_batch(queries)
        for scored, dist in zip(ae.kept, distributions):
            label = map_nli(Task.E2E_STEP2, dist.argmax_label())
            span_labels.append(label)
            for i in range(scored.span.start, scored.span.end):
                labels[i] = label
    return E2eResult(labels=labels, kept=ae.kept, span_labels=span_labels)


def prediction_record(sentence: TokenizedSentence, task: Task, labels, spans) -> dict:
    """JSONL record for one sentence's prediction: {sentence_id, task,
    tokens, labels, spans: [{start, end, score, label}]}."""
    return {
        "sentence_id": sentence.sentence_id,
        "task": task.value,
        "tokens": sentence.token_texts(),
        "labels": [str(l) for l in labels],
        "spans": spans,
    }
