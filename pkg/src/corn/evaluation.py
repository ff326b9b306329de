"""Gold-data schema, metric computation, and the SemEval XML converter.

Macro averages use the fixed class set of each task: a class that never
occurs in gold or predictions still participates with F1 = 0, which keeps
zero-shot systems that never emit some class comparable.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .labels import E2E_FROM_POLARITY, BioLabel, E2eLabel, Polarity
from .text import TokenizedSentence, Token, tokenize


class LengthMismatch(Exception):
    pass


class EmptyInput(Exception):
    pass


class MalformedGold(Exception):
    pass


class MalformedXml(Exception):
    pass


class OffsetOutOfRange(Exception):
    pass


@dataclass(frozen=True)
class GoldAspect:
    start: int
    end: int
    polarity: Polarity
    term: str = ""


@dataclass(frozen=True)
class GoldSentence:
    sentence_id: str
    raw: str
    tokens: tuple[str, ...]
    ae_labels: tuple[BioLabel, ...]
    aspects: tuple[GoldAspect, ...]
    e2e_labels: tuple[E2eLabel, ...]

    def __post_init__(self) -> None:
        n = len(self.tokens)
        if len(self.ae_labels) != n or len(self.e2e_labels) != n:
            raise MalformedGold(
                f"sentence {self.sentence_id!r}: label lengths != token count"
            )
        if derive_ae(n, self.aspects) != list(self.ae_labels):
            raise MalformedGold(
                f"sentence {self.sentence_id!r}: ae_labels not derivable from aspects"
            )
        if derive_e2e(n, self.aspects) != list(self.e2e_labels):
            raise MalformedGold(
                f"sentence {self.sentence_id!r}: e2e_labels not derivable from aspects"
            )

    def to_tokenized(self) -> TokenizedSentence:
        toks = []
        cursor = 0
        for i, text in enumerate(self.tokens):
            start = self.raw.find(text, cursor)
            if start < 0:
                raise MalformedGold(
                    f"sentence {self.sentence_id!r}: token {text!r} not in raw"
                )
            toks.append(Token(text=text, index=i, char_start=start, char_end=start + len(text)))
            cursor = start + len(text)
        return TokenizedSentence(raw=self.raw, tokens=tuple(toks), sentence_id=self.sentence_id)


def derive_ae(n_tokens: int, aspects: Sequence[GoldAspect]) -> list[BioLabel]:
    labels = [BioLabel.O] * n_tokens
    for a in aspects:
        if not 0 <= a.start < a.end <= n_tokens:
            raise MalformedGold(f"aspect span [{a.start}, {a.end}) out of range")
        labels[a.start] = BioLabel.B
        for i in range(a.start + 1, a.end):
            labels[i] = BioLabel.I
    return labels


def derive_e2e(n_tokens: int, aspects: Sequence[GoldAspect]) -> list[E2eLabel]:
    labels = [E2eLabel.O] * n_tokens
    for a in aspects:
        for i in range(a.start, a.end):
            labels[i] = E2E_FROM_POLARITY[a.polarity]
    return labels


def gold_from_aspects(
    sentence_id: str,
    raw: str,
    tokens: Sequence[str],
    aspects: Sequence[GoldAspect],
) -> GoldSentence:
    n = len(tokens)
    return GoldSentence(
        sentence_id=sentence_id,
        raw=raw,
        tokens=tuple(tokens),
        ae_labels=tuple(derive_ae(n, aspects)),
        aspects=tuple(aspects),
        e2e_labels=tuple(derive_e2e(n, aspects)),
    )


def gold_to_json_obj(g: GoldSentence) -> dict:
    return {
        "sentence_id": g.sentence_id,
        "raw": g.raw,
        "tokens": list(g.tokens),
        "ae_labels": [str(l) for l in g.ae_labels],
        "aspects": [
            {"start": a.start, "end": a.end, "polarity": a.polarity.value, "term": a.term}
            for a in g.aspects
        ],
        "e2e_labels": [str(l) for l in g.e2e_labels],
    }


def gold_from_json_obj(obj: dict) -> GoldSentence:
    try:
        tokens = tuple(str(t) for t in obj["tokens"])
        raw = obj.get("raw") or " ".join(tokens)
        aspects = tuple(
            GoldAspect(
                start=int(a["start"]),
                end=int(a["end"]),
                polarity=Polarity(a["polarity"]),
                term=a.get("term", ""),
            )
            for a in obj.get("aspects", [])
        )
        ae = obj.get("ae_labels")
        e2e = obj.get("e2e_labels")
        return GoldSentence(
            sentence_id=str(obj["sentence_id"]),
            raw=raw,
            tokens=tokens,
            ae_labels=tuple(BioLabel(l) for l in ae) if ae else tuple(derive_ae(len(tokens), aspects)),
            aspects=aspects,
            e2e_labels=tuple(E2eLabel(l) for l in e2e) if e2e else tuple(derive_e2e(len(tokens), aspects)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedGold(f"bad gold record: {exc}") from exc


def load_gold_jsonl(path: str | Path) -> list[GoldSentence]:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedGold(f"{path}:{lineno}: invalid JSON") from exc
            sentences.append(gold_from_json_obj(obj))
    return sentences


def write_gold_jsonl(sentences: Sequence[GoldSentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for g in sentences:
            fh.write(json.dumps(gold_to_json_obj(g), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Metrics


@dataclass(frozen=True)
class ClassStats:
    tp: int
    support_gold: int
    support_pred: int
    precision: float
    recall: float
    f1: float


@dataclass
class MetricReport:
    task: str
    accuracy: float | None
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class: dict[str, ClassStats]
    support_total: int
    extras: dict[str, float] = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "task": self.task,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "support_total": self.support_total,
            "per_class": {
                name: {
                    "tp": s.tp,
                    "support_gold": s.support_gold,
                    "support_pred": s.support_pred,
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                }
                for name, s in self.per_class.items()
            },
            "extras": self.extras,
        }

    def render_table(self) -> str:
        rows = [("class", "prec", "recall", "f1", "gold", "pred")]
        for name, s in self.per_class.items():
            rows.append(
                (name, f"{s.precision:.4f}", f"{s.recall:.4f}", f"{s.f1:.4f}",
                 str(s.support_gold), str(s.support_pred))
            )
        rows.append(("macro", f"{self.macro_precision:.4f}", f"{self.macro_recall:.4f}",
                     f"{self.macro_f1:.4f}", str(self.support_total), ""))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        header = [f"task: {self.task}"]
        if self.accuracy is not None:
            header.append(f"accuracy: {self.accuracy:.4f}")
        for key, value in self.extras.items():
            header.append(f"{key}: {value:.4f}")
        return "\n".join(header + lines)


def _confusion(preds: Sequence[str], gold: Sequence[str], classes: Sequence[str]) -> dict[str, ClassStats]:
    per_class = {}
    for cls in classes:
        tp = sum(1 for p, g in zip(preds, gold) if p == cls and g == cls)
        support_gold = sum(1 for g in gold if g == cls)
        support_pred = sum(1 for p in preds if p == cls)
        precision = tp / support_pred if support_pred else 0.0
        recall = tp / support_gold if support_gold else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls] = ClassStats(
            tp=tp,
            support_gold=support_gold,
            support_pred=support_pred,
            precision=precision,
            recall=recall,
            f1=f1,
        )
    return per_class


def _macro(per_class: dict[str, ClassStats]) -> tuple[float, float, float]:
    n = len(per_class)
    return (
        sum(s.precision for s in per_class.values()) / n,
        sum(s.recall for s in per_class.values()) / n,
        sum(s.f1 for s in per_class.values()) / n,
    )


def asc_metrics(preds: Sequence, gold: Sequence) -> MetricReport:
    """Accuracy and macro-P/R/F1 over the fixed class set {POS, NEU, NEG}."""
    if not preds or not gold:
        raise EmptyInput("asc metrics need at least one prediction")
    if len(preds) != len(gold):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(gold)} gold labels")
    p = [str(x) for x in preds]
    g = [str(x) for x in gold]
    per_class = _confusion(p, g, [c.value for c in Polarity])
    macro_p, macro_r, macro_f1 = _macro(per_class)
    accuracy = sum(1 for a, b in zip(p, g) if a == b) / len(g)
    return MetricReport(
        task="asc",
        accuracy=accuracy,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f1,
        per_class=per_class,
        support_total=len(g),
    )


def _flatten(preds: Sequence[Sequence], gold: Sequence[Sequence], task: str) -> tuple[list[str], list[str]]:
    if len(preds) != len(gold):
        raise LengthMismatch(f"{task}: {len(preds)} pred sentences vs {len(gold)} gold")
    flat_p: list[str] = []
    flat_g: list[str] = []
    for i, (ps, gs) in enumerate(zip(preds, gold)):
        if len(ps) != len(gs):
            raise LengthMismatch(f"{task}: sentence {i} has {len(ps)} vs {len(gs)} labels")
        flat_p.extend(str(x) for x in ps)
        flat_g.extend(str(x) for x in gs)
    if not flat_g:
        raise EmptyInput(f"{task} metrics need at least one token")
    return flat_p, flat_g


def ae_metrics(preds: Sequence[Sequence], gold: Sequence[Sequence]) -> MetricReport:
    """Token accuracy in both the {B, I, O} and collapsed {T, O} readings.

    Both variants are reported because B/I splits of the same extracted
    region change the first but not the second; macro-P/R/F1 are computed
    over {T, O}.
    """
    flat_p, flat_g = _flatten(preds, gold, "ae")
    accuracy_bio = sum(1 for a, b in zip(flat_p, flat_g) if a == b) / len(flat_g)
    collapse = {"B": "T", "I": "T", "O": "O"}
    cp = [collapse[x] for x in flat_p]
    cg = [collapse[x] for x in flat_g]
    accuracy_collapsed = sum(1 for a, b in zip(cp, cg) if a == b) / len(cg)
    per_class = _confusion(cp, cg, ["T", "O"])
    macro_p, macro_r, macro_f1 = _macro(per_class)
    return MetricReport(
        task="ae",
        accuracy=None,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f1,
        per_class=per_class,
        support_total=len(flat_g),
        extras={
            "token_accuracy_bio": accuracy_bio,
            "token_accuracy_collapsed": accuracy_collapsed,
        },
    )


def e2e_metrics(preds: Sequence[Sequence], gold: Sequence[Sequence]) -> MetricReport:
    """Token-level macro-P/R/F1 over the fixed set {T-POS, T-NEU, T-NEG, O}."""
    flat_p, flat_g = _flatten(preds, gold, "e2e")
    classes = [c.value for c in E2eLabel]
    per_class = _confusion(flat_p, flat_g, classes)
    macro_p, macro_r, macro_f1 = _macro(per_class)
    accuracy = sum(1 for a, b in zip(flat_p, flat_g) if a == b) / len(flat_g)
    return MetricReport(
        task="e2e",
        accuracy=accuracy,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f1,
        per_class=per_class,
        support_total=len(flat_g),
    )


# ---------------------------------------------------------------------------
# SemEval XML conversion

_SEMEVAL_POLARITY = {
    "positive": Polarity.POS,
    "neutral": Polarity.NEU,
    "negative": Polarity.NEG,
}


@dataclass
class ConversionReport:
    sentences: int = 0
    aspect_terms: int = 0
    snapped_offsets: int = 0
    dropped_conflicts: int = 0
    skipped_overlaps: int = 0
    skipped_sentences: int = 0

    def to_json_obj(self) -> dict:
        return dict(self.__dict__)


def convert_semeval(
    xml_path: str | Path, task: str = "e2e"
) -> tuple[list[GoldSentence], ConversionReport]:
    """SemEval aspect-term XML -> gold sentences on this package's tokenization.

    Character offsets that split a token snap outward to token boundaries
    (counted in the report); "conflict"-polarity terms are dropped. With
    task="asc", sentences without any usable aspect term are skipped.
    """
    try:
        root = ET.parse(str(xml_path)).getroot()
    except ET.ParseError as exc:
        raise MalformedXml(f"{xml_path}: {exc}") from exc

    report = ConversionReport()
    gold: list[GoldSentence] = []
    for sent_el in root.iter("sentence"):
        text_el = sent_el.find("text")
        if text_el is None or text_el.text is None:
            raise MalformedXml(f"sentence {sent_el.get('id')!r} lacks a text element")
        raw = text_el.text
        sentence = tokenize(raw, sentence_id=str(sent_el.get("id", "")))
        aspects: list[GoldAspect] = []
        for term_el in sent_el.iter("aspectTerm"):
            polarity_attr = term_el.get("polarity", "")
            if polarity_attr == "conflict":
                report.dropped_conflicts += 1
                continue
            if polarity_attr not in _SEMEVAL_POLARITY:
                raise MalformedXml(
                    f"sentence {sentence.sentence_id!r}: unknown polarity {polarity_attr!r}"
                )
            try:
                start_char = int(term_el.get("from"))
                end_char = int(term_el.get("to"))
            except (TypeError, ValueError) as exc:
                raise MalformedXml(
                    f"sentence {sentence.sentence_id!r}: bad from/to offsets"
                ) from exc
            if not 0 <= start_char < end_char <= len(raw):
                raise OffsetOutOfRange(
                    f"sentence {sentence.sentence_id!r}: offsets [{start_char}, {end_char})"
                )
            covered = [
                t for t in sentence.tokens
                if t.char_start < end_char and t.char_end > start_char
            ]
            if not covered:
                raise OffsetOutOfRange(
                    f"sentence {sentence.sentence_id!r}: offsets cover no token"
                )
            if covered[0].char_start != start_char or covered[-1].char_end != end_char:
                report.snapped_offsets += 1
            span = (covered[0].index, covered[-1].index + 1)
            if any(a.start < span[1] and span[0] < a.end for a in aspects):
                report.skipped_overlaps += 1
                continue
            aspects.append(
                GoldAspect(
                    start=span[0],
                    end=span[1],
                    polarity=_SEMEVAL_POLARITY[polarity_attr],
                    term=term_el.get("term", sentence.slice_text(*span)),
                )
            )
            report.aspect_terms += 1
        if task == "asc" and not aspects:
            report.skipped_sentences += 1
            continue
        aspects.sort(key=lambda a: a.start)
        gold.append(
            gold_from_aspects(sentence.sentence_id, raw, sentence.token_texts(), aspects)
        )
        report.sentences += 1
    return gold, report
