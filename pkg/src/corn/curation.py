"""Review-NLI curation: from annotated reviews to balanced pseudo-labeled pairs.

Pipeline: aspect extraction (double propagation) -> clause extraction ->
lexicon polarity -> premise composition (6..10 sentiment clauses with
distinct aspects) -> hypothesis sampling -> pseudo label from the
premise/hypothesis polarity matrix -> label balancing and splits.
Everything downstream of the rng seed is byte-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from .corpus import AnnotatedSentence
from .labels import NliLabel, Polarity
from .lexicon import OpinionLexicon, SeedAspectSet
from .propagation import extract_aspects
from .text import (
    DEFAULT_CLAUSE_DELIMITERS,
    Clause,
    find_term_occurrences,
    segment_clauses,
    tokenize,
)


class AspectNotInClause(Exception):
    pass


class PoolTooSmall(Exception):
    pass


class NoViableCategory(Exception):
    pass


NEGATORS = frozenset({"not", "no", "never"})
NEGATION_WINDOW = 3

_TRAILING_PUNCT_RE = re.compile(r"[\s.,;:!?]+$")


@dataclass(frozen=True)
class SentimentClause:
    clause: Clause
    aspect: str
    polarity: Polarity
    opinion_term: str | None
    category: str

    def __post_init__(self) -> None:
        if self.aspect.lower() not in self.clause.text.lower():
            raise AspectNotInClause(
                f"aspect {self.aspect!r} not in clause {self.clause.text!r}"
            )
        if (self.polarity == Polarity.NEU) != (self.opinion_term is None):
            raise ValueError("polarity is NEU exactly when there is no opinion term")


@dataclass(frozen=True)
class RnliMeta:
    category: str
    hypothesis_aspect: str
    premise_polarity: Polarity | None
    hypothesis_polarity: Polarity


@dataclass(frozen=True)
class RnliExample:
    premise: str
    hypothesis: str
    label: NliLabel
    meta: RnliMeta

    def to_json_obj(self) -> dict:
        return {
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "label": self.label.value,
            "meta": {
                "category": self.meta.category,
                "hypothesis_aspect": self.meta.hypothesis_aspect,
                "premise_polarity": (
                    self.meta.premise_polarity.value if self.meta.premise_polarity else None
                ),
                "hypothesis_polarity": self.meta.hypothesis_polarity.value,
            },
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RnliExample":
        meta = obj["meta"]
        return cls(
            premise=obj["premise"],
            hypothesis=obj["hypothesis"],
            label=NliLabel(obj["label"]),
            meta=RnliMeta(
                category=meta["category"],
                hypothesis_aspect=meta["hypothesis_aspect"],
                premise_polarity=(
                    Polarity(meta["premise_polarity"])
                    if meta.get("premise_polarity")
                    else None
                ),
                hypothesis_polarity=Polarity(meta["hypothesis_polarity"]),
            ),
        )


def clean_clause_text(text: str) -> str:
    """Strip trailing sentence punctuation so clauses join cleanly."""
    return _TRAILING_PUNCT_RE.sub("", text.strip())


def hypothesis_text(clause: SentimentClause) -> str:
    return clean_clause_text(clause.clause.text) + "."


def assign_polarity(
    clause: Clause,
    aspect: str,
    lexicon: OpinionLexicon,
    negation: bool = False,
) -> tuple[Polarity, str | None]:
    """Polarity of `aspect` in `clause` from lexicon hits outside the aspect.

    Single-polarity hits win outright (first in token order names the opinion
    term); with both polarities present the hit nearest the aspect wins and
    an exact distance tie goes pessimistically to NEG. No hit means NEU.
    With `negation` on, a negator within the 3 tokens before a hit flips it.
    """
    tokens = tokenize(clause.text).token_texts()
    occurrences = find_term_occurrences(tokens, aspect)
    if not occurrences:
        raise AspectNotInClause(f"aspect {aspect!r} not in clause {clause.text!r}")
    inside = {i for s, e in occurrences for i in range(s, e)}

    hits: list[tuple[int, Polarity, str]] = []
    for i, tok in enumerate(tokens):
        if i in inside:
            continue
        polarity = lexicon.polarity_of(tok)
        if polarity is None:
            continue
        if negation and _is_negated(tokens, i):
            polarity = Polarity.NEG if polarity == Polarity.POS else Polarity.POS
        hits.append((i, polarity, tok))

    pos_hits = [(i, t) for i, p, t in hits if p == Polarity.POS]
    neg_hits = [(i, t) for i, p, t in hits if p == Polarity.NEG]
    if not pos_hits and not neg_hits:
        return Polarity.NEU, None
    if pos_hits and not neg_hits:
        return Polarity.POS, pos_hits[0][1]
    if neg_hits and not pos_hits:
        return Polarity.NEG, neg_hits[0][1]

    def distance(i: int) -> int:
        return min(
            s - i if i < s else i - (e - 1) for s, e in occurrences if not s <= i < e
        )

    best_pos = min(pos_hits, key=lambda h: distance(h[0]))
    best_neg = min(neg_hits, key=lambda h: distance(h[0]))
    if distance(best_pos[0]) < distance(best_neg[0]):
        return Polarity.POS, best_pos[1]
    return Polarity.NEG, best_neg[1]  # tie -> NEG, pessimistic


def _is_negated(tokens: list[str], hit_index: int) -> bool:
    window = tokens[max(0, hit_index - NEGATION_WINDOW) : hit_index]
    return any(t.lower() in NEGATORS for t in window)


def compose_premise(
    pool: Sequence[SentimentClause],
    rng_seed: int,
    k_min: int = 6,
    k_max: int = 10,
) -> tuple[str, dict[str, Polarity]]:
    """Sample k in [k_min, k_max] clauses without replacement into a premise.

    Clauses in `pool` must carry distinct aspects (the premise map is a
    function aspect -> polarity). Deterministic given rng_seed.
    """
    if len(pool) < k_min:
        raise PoolTooSmall(f"need at least {k_min} clauses, got {len(pool)}")
    aspects = [c.aspect.lower() for c in pool]
    if len(set(aspects)) != len(aspects):
        raise ValueError("premise pool clauses must have distinct aspects")
    rng = random.Random(rng_seed)
    k = rng.randint(k_min, min(k_max, len(pool)))
    chosen = rng.sample(list(pool), k)
    premise = ". ".join(clean_clause_text(c.clause.text) for c in chosen) + "."
    premise_map = {c.aspect.lower(): c.polarity for c in chosen}
    return premise, premise_map


def label_pair(premise_map: Mapping[str, Polarity], hyp: SentimentClause) -> NliLabel:
    """Pseudo label for a hypothesis clause against a composed premise.

    Matrix on (p = premise polarity of the hypothesis aspect or absent,
    h = hypothesis polarity): absent -> neutral; h = NEU -> entailment;
    p = h -> entailment; p = NEU with opinionated h -> neutral;
    opposing POS/NEG -> contradiction. Total on all inputs.
    """
    p = premise_map.get(hyp.aspect.lower())
    h = hyp.polarity
    if p is None:
        return NliLabel.NEUTRAL
    if h == Polarity.NEU:
        return NliLabel.ENTAILMENT
    if p == h:
        return NliLabel.ENTAILMENT
    if p == Polarity.NEU:
        return NliLabel.NEUTRAL
    return NliLabel.CONTRADICTION


@dataclass(frozen=True)
class CurationConfig:
    per_category_cap: int = 50_000
    clause_cap: int = 10
    per_label_target: int = 100_000
    split: tuple[float, float, float] = (0.85, 0.05, 0.10)
    rng_seed: int = 0
    k_min: int = 6
    k_max: int = 10
    negation: bool = False
    max_propagation_iters: int = 10
    delimiters: frozenset[str] = DEFAULT_CLAUSE_DELIMITERS


def build_clause_pool(
    sentences: Sequence[AnnotatedSentence],
    aspects: set[str],
    lexicon: OpinionLexicon,
    config: CurationConfig,
) -> list[SentimentClause]:
    """Sentiment clauses for every (clause, aspect-in-clause) pair.

    A clause mentioning several aspects yields one entry per aspect. At most
    `clause_cap` distinct clauses are kept per (aspect, polarity) pair, and
    exact duplicates of (aspect, polarity, text) are dropped.
    """
    pool: list[SentimentClause] = []
    per_pair: Counter[tuple[str, Polarity]] = Counter()
    seen: set[tuple[str, Polarity, str]] = set()
    sorted_aspects = sorted(aspects)
    for sent in sentences:
        tokenized = sent.to_tokenized()
        for clause in segment_clauses(tokenized, config.delimiters):
            clause_tokens = tokenize(clause.text).token_texts()
            for aspect in sorted_aspects:
                if not find_term_occurrences(clause_tokens, aspect):
                    continue
                polarity, term = assign_polarity(
                    clause, aspect, lexicon, negation=config.negation
                )
                key = (aspect, polarity, clean_clause_text(clause.text).lower())
                if key in seen:
                    continue
                if per_pair[(aspect, polarity)] >= config.clause_cap:
                    continue
                seen.add(key)
                per_pair[(aspect, polarity)] += 1
                pool.append(
                    SentimentClause(
                        clause=clause,
                        aspect=aspect,
                        polarity=polarity,
                        opinion_term=term,
                        category=sent.category,
                    )
                )
    return pool


def _stable_category_seed(global_seed: int, category: str) -> int:
    digest = hashlib.sha256(category.encode("utf-8")).digest()
    return global_seed ^ int.from_bytes(digest[:8], "big")


@dataclass
class CurationResult:
    train: list[RnliExample]
    valid: list[RnliExample]
    holdout: list[RnliExample]
    stats: dict

    @property
    def all_examples(self) -> list[RnliExample]:
        return self.train + self.valid + self.holdout


def generate_examples(
    corpus: Sequence[AnnotatedSentence],
    seeds: Mapping[str, SeedAspectSet],
    lexicon: OpinionLexicon,
    config: CurationConfig,
) -> tuple[list[tuple[RnliExample, int]], list[str]]:
    """Per-category generation; returns (example, premise-clause-count) pairs
    plus the list of categories skipped for lacking a viable pool."""
    by_category: dict[str, list[AnnotatedSentence]] = {}
    for sent in corpus:
        by_category.setdefault(sent.category, []).append(sent)

    generated: list[tuple[RnliExample, int]] = []
    skipped: list[str] = []
    for category in sorted(by_category):
        sentences = by_category[category]
        seed_set = seeds.get(category, SeedAspectSet(category=category, aspects=frozenset()))
        aspects = extract_aspects(
            sentences, seed_set, lexicon, max_iters=config.max_propagation_iters
        )
        pool = build_clause_pool(sentences, aspects, lexicon, config)
        by_aspect: dict[str, list[SentimentClause]] = {}
        for sc in pool:
            by_aspect.setdefault(sc.aspect, []).append(sc)
        if len(by_aspect) < config.k_min or not pool:
            skipped.append(category)
            continue

        rng = random.Random(_stable_category_seed(config.rng_seed, category))
        sorted_pool_aspects = sorted(by_aspect)
        for _ in range(config.per_category_cap):
            round_pool = [rng.choice(by_aspect[a]) for a in sorted_pool_aspects]
            premise, premise_map = compose_premise(
                round_pool, rng.randrange(2**32), config.k_min, config.k_max
            )
            hyp = rng.choice(pool)
            label = label_pair(premise_map, hyp)
            example = RnliExample(
                premise=premise,
                hypothesis=hypothesis_text(hyp),
                label=label,
                meta=RnliMeta(
                    category=category,
                    hypothesis_aspect=hyp.aspect,
                    premise_polarity=premise_map.get(hyp.aspect.lower()),
                    hypothesis_polarity=hyp.polarity,
                ),
            )
            generated.append((example, len(premise_map)))

    if not generated:
        raise NoViableCategory(
            "no category has a clause pool with enough distinct aspects"
        )
    return generated, skipped


def balance_labels(
    generated: Sequence[tuple[RnliExample, int]],
    per_label_target: int,
    rng_seed: int,
) -> list[tuple[RnliExample, int]]:
    """Downsample so all three labels have exactly equal counts."""
    by_label: dict[NliLabel, list[tuple[RnliExample, int]]] = {l: [] for l in NliLabel}
    for item in generated:
        by_label[item[0].label].append(item)
    n = min(per_label_target, min(len(v) for v in by_label.values()))
    rng = random.Random(rng_seed ^ 0x5CA1AB1E)
    balanced: list[tuple[RnliExample, int]] = []
    for label in NliLabel:
        balanced.extend(rng.sample(by_label[label], n))
    return balanced


def split_examples(
    balanced: Sequence[tuple[RnliExample, int]],
    split: tuple[float, float, float],
    rng_seed: int,
) -> tuple[list[RnliExample], list[RnliExample], list[RnliExample]]:
    items = list(balanced)
    random.Random(rng_seed ^ 0x0DDBA11).shuffle(items)
    examples = [ex for ex, _ in items]
    n = len(examples)
    n_train = int(n * split[0])
    n_valid = int(n * split[1])
    return (
        examples[:n_train],
        examples[n_train : n_train + n_valid],
        examples[n_train + n_valid :],
    )


def generate_dataset(
    corpus: Sequence[AnnotatedSentence],
    seeds: Mapping[str, SeedAspectSet],
    lexicon: OpinionLexicon,
    config: CurationConfig = CurationConfig(),
) -> CurationResult:
    """Full curation run; see module docstring for the pipeline stages."""
    generated, skipped = generate_examples(corpus, seeds, lexicon, config)
    balanced = balance_labels(generated, config.per_label_target, config.rng_seed)
    train, valid, holdout = split_examples(balanced, config.split, config.rng_seed)

    examples = [ex for ex, _ in balanced]
    clause_counts = Counter(k for _, k in balanced)
    stats = {
        "examples_total": len(examples),
        "per_label": _count(examples, lambda e: e.label.value),
        "per_category": _count(examples, lambda e: e.meta.category),
        "per_premise_polarity": _count(
            examples,
            lambda e: e.meta.premise_polarity.value if e.meta.premise_polarity else "absent",
        ),
        "per_hypothesis_polarity": _count(examples, lambda e: e.meta.hypothesis_polarity.value),
        "premise_clause_counts": {str(k): clause_counts[k] for k in sorted(clause_counts)},
        "categories_skipped": skipped,
        "split": {"train": len(train), "valid": len(valid), "holdout": len(holdout)},
        "rng_seed": config.rng_seed,
    }
    return CurationResult(train=train, valid=valid, holdout=holdout, stats=stats)


def _count(examples: Sequence[RnliExample], key) -> dict[str, int]:
    counts = Counter(key(e) for e in examples)
    return {k: counts[k] for k in sorted(counts)}


def write_dataset(result: CurationResult, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, examples in (
        ("train", result.train),
        ("valid", result.valid),
        ("holdout", result.holdout),
    ):
        path = out / f"rnli.{name}.jsonl"
        with open(path, "w", encoding="utf-8") as fh:
            for ex in examples:
                fh.write(json.dumps(ex.to_json_obj(), ensure_ascii=False, sort_keys=True))
                fh.write("\n")
        paths[name] = path
    stats_path = out / "stats.json"
    stats_path.write_text(
        json.dumps(result.stats, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    paths["stats"] = stats_path
    return paths


def load_rnli_jsonl(path: str | Path) -> list[RnliExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                examples.append(RnliExample.from_json_obj(json.loads(line)))
    return examples
