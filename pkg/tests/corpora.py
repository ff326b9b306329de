"""Deterministic desk-scale fixtures: annotated corpora, gold files, lexicons.

Everything here is synthesized from word lists so tests rebuild identical
inputs on every run without shipping large data files.
"""

from __future__ import annotations

import json
from pathlib import Path

from corn.corpus import AnnotatedSentence, parse_corpus_record
from corn.evaluation import GoldAspect, GoldSentence, gold_from_aspects
from corn.labels import Polarity
from corn.lexicon import OpinionLexicon, SeedAspectSet

POSITIVE_TERMS = ["great", "good", "excellent", "superb", "fantastic", "love", "enjoy"]
NEGATIVE_TERMS = ["bad", "poor", "terrible", "awful", "disappointing", "hate"]

POS_ADJS = ["great", "excellent", "superb"]
POS_ADJS_B = ["good", "fantastic"]
NEG_ADJS = ["bad", "poor", "terrible"]
NEG_ADJS_B = ["awful", "disappointing"]

# 25 distinct subjects for the clause-cap aspect (each makes a distinct clause).
CAP_SUBJECTS = [
    "They", "We", "Kids", "Parents", "Critics", "Teachers", "Chefs", "Guests",
    "Bakers", "Cooks", "Neighbors", "Students", "Engineers", "Doctors", "Nurses",
    "Pilots", "Farmers", "Writers", "Artists", "Dancers", "Singers", "Painters",
    "Plumbers", "Tailors", "Barbers",
]

CATEGORY_ASPECTS = {
    "software": {
        "single": ["installer", "manual", "debugger", "dashboard", "toolbar",
                   "compiler", "wizard", "tutorial"],
        "multi": ["learning tool", "marketing plan", "update wizardry", "license key"],
        "cap": "toolkit",
    },
    "kitchen": {
        "single": ["kettle", "spatula", "grater", "skillet", "whisk",
                   "peeler", "ladle", "strainer"],
        "multi": ["cutting board", "mixing bowl", "knife block", "spice rack"],
        "cap": "blender",
    },
}


def fixture_lexicon() -> OpinionLexicon:
    return OpinionLexicon(
        positive=frozenset(POSITIVE_TERMS), negative=frozenset(NEGATIVE_TERMS)
    )


def fixture_seeds() -> dict[str, SeedAspectSet]:
    return {
        category: SeedAspectSet(
            category=category, aspects=frozenset(spec["multi"] + [spec["cap"]])
        )
        for category, spec in CATEGORY_ASPECTS.items()
    }


def _tok(text, pos, head, dep):
    return {"text": text, "pos": pos, "head": head, "dep": dep}


def _record(sid: str, category: str, tokens: list[dict]) -> dict:
    return {
        "sentence_id": sid,
        "category": category,
        "raw": " ".join(t["text"] for t in tokens),
        "tokens": tokens,
    }


def _predicate_sentence(sid, category, aspect_words, adj):
    # "The <aspect> is <adj> ." with the aspect head as subject of the adjective
    m = len(aspect_words)
    tokens = [_tok("The", "OTHER", m, "det")]
    for i, word in enumerate(aspect_words):
        if i < m - 1:
            tokens.append(_tok(word, "NOUN", m, "compound"))
        else:
            tokens.append(_tok(word, "NOUN", m + 2, "nsubj"))
    tokens.append(_tok("is", "VERB", m + 2, "cop"))
    tokens.append(_tok(adj, "ADJ", -1, "root"))
    tokens.append(_tok(".", "OTHER", m + 2, "punct"))
    return _record(sid, category, tokens)


def _amod_sentence(sid, category, aspect_words, adj):
    # "They shipped a <adj> <aspect> this week ."
    m = len(aspect_words)
    head_idx = 4 + m - 1
    tokens = [
        _tok("They", "OTHER", 1, "nsubj"),
        _tok("shipped", "VERB", -1, "root"),
        _tok("a", "OTHER", head_idx, "det"),
        _tok(adj, "ADJ", head_idx, "amod"),
    ]
    for i, word in enumerate(aspect_words):
        if i < m - 1:
            tokens.append(_tok(word, "NOUN", head_idx, "compound"))
        else:
            tokens.append(_tok(word, "NOUN", 1, "dobj"))
    tokens.extend([
        _tok("this", "OTHER", head_idx + 2, "det"),
        _tok("week", "NOUN", 1, "npadvmod"),
        _tok(".", "OTHER", 1, "punct"),
    ])
    return _record(sid, category, tokens)


def _verb_sentence(sid, category, aspect_words, subject, verb):
    # "<subject> <verb> the <aspect> ." with an opinion verb and dobj aspect
    m = len(aspect_words)
    head_idx = 3 + m - 1
    tokens = [
        _tok(subject, "OTHER", 1, "nsubj"),
        _tok(verb, "VERB", -1, "root"),
        _tok("the", "OTHER", head_idx, "det"),
    ]
    for i, word in enumerate(aspect_words):
        if i < m - 1:
            tokens.append(_tok(word, "NOUN", head_idx, "compound"))
        else:
            tokens.append(_tok(word, "NOUN", 1, "dobj"))
    tokens.append(_tok(".", "OTHER", 1, "punct"))
    return _record(sid, category, tokens)


_NEUTRAL_SHAPES = [
    ("comes", ["in", "a", "box"]),
    ("arrived", ["on", "Monday"]),
    ("sat", ["on", "the", "shelf"]),
]


def _neutral_sentence(sid, category, aspect_words, shape_idx):
    verb, tail = _NEUTRAL_SHAPES[shape_idx % len(_NEUTRAL_SHAPES)]
    m = len(aspect_words)
    tokens = [_tok("The", "OTHER", m, "det")]
    for i, word in enumerate(aspect_words):
        if i < m - 1:
            tokens.append(_tok(word, "NOUN", m, "compound"))
        else:
            tokens.append(_tok(word, "NOUN", m + 1, "nsubj"))
    tokens.append(_tok(verb, "VERB", -1, "root"))
    for word in tail:
        tokens.append(_tok(word, "OTHER", m + 1, "dep"))
    tokens.append(_tok(".", "OTHER", m + 1, "punct"))
    return _record(sid, category, tokens)


def build_fixture_corpus() -> list[dict]:
    """Two-category corpus; every (aspect, polarity) pair has several distinct
    clauses, and the per-category `cap` aspect has 25 positive ones."""
    records = []
    counter = 0

    def sid(category):
        nonlocal counter
        counter += 1
        return f"{category}-{counter:04d}"

    for category, spec in CATEGORY_ASPECTS.items():
        for aspect in spec["single"]:
            words = aspect.split()
            for adj in POS_ADJS:
                records.append(_predicate_sentence(sid(category), category, words, adj))
            for adj in POS_ADJS_B:
                records.append(_amod_sentence(sid(category), category, words, adj))
            for adj in NEG_ADJS:
                records.append(_predicate_sentence(sid(category), category, words, adj))
            for adj in NEG_ADJS_B:
                records.append(_amod_sentence(sid(category), category, words, adj))
            for i in range(3):
                records.append(_neutral_sentence(sid(category), category, words, i))
        for aspect in spec["multi"]:
            words = aspect.split()
            for subject in CAP_SUBJECTS[:4]:
                records.append(_verb_sentence(sid(category), category, words, subject, "love"))
            for subject in CAP_SUBJECTS[4:8]:
                records.append(_verb_sentence(sid(category), category, words, subject, "hate"))
            for i in range(3):
                records.append(_neutral_sentence(sid(category), category, words, i))
        cap_words = spec["cap"].split()
        for subject in CAP_SUBJECTS:  # 25 distinct positive clauses
            records.append(_verb_sentence(sid(category), category, cap_words, subject, "love"))
        for adj in NEG_ADJS:
            records.append(_predicate_sentence(sid(category), category, cap_words, adj))
        for i in range(3):
            records.append(_neutral_sentence(sid(category), category, cap_words, i))
    return records


def fixture_corpus_sentences() -> list[AnnotatedSentence]:
    return [parse_corpus_record(r) for r in build_fixture_corpus()]


def write_fixture_inputs(directory: Path) -> dict[str, Path]:
    """Write corpus/seeds/lexicon files for CLI-level tests."""
    directory.mkdir(parents=True, exist_ok=True)
    corpus_path = directory / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for record in build_fixture_corpus():
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    seeds_path = directory / "seeds.json"
    seeds_path.write_text(
        json.dumps({c: sorted(s.aspects) for c, s in fixture_seeds().items()}, indent=2),
        encoding="utf-8",
    )
    pos_path = directory / "positive-words.txt"
    pos_path.write_text("# positive opinion terms\n" + "\n".join(POSITIVE_TERMS) + "\n")
    neg_path = directory / "negative-words.txt"
    neg_path.write_text("# negative opinion terms\n" + "\n".join(NEGATIVE_TERMS) + "\n")
    return {
        "corpus": corpus_path,
        "seeds": seeds_path,
        "lexicon_pos": pos_path,
        "lexicon_neg": neg_path,
    }


# ---------------------------------------------------------------------------
# Hand-annotated mini corpus with a known double-propagation fixed point.

def propagation_mini_corpus() -> list[AnnotatedSentence]:
    records = [
        _record("dp-1", "camera", [
            _tok("The", "OTHER", 1, "det"),
            _tok("zoom", "NOUN", 3, "nsubj"),
            _tok("is", "VERB", 3, "cop"),
            _tok("great", "ADJ", -1, "root"),
            _tok(".", "OTHER", 3, "punct"),
        ]),
        _record("dp-2", "camera", [
            _tok("It", "OTHER", 1, "nsubj"),
            _tok("has", "VERB", -1, "root"),
            _tok("a", "OTHER", 4, "det"),
            _tok("great", "ADJ", 4, "amod"),
            _tok("lens", "NOUN", 1, "dobj"),
            _tok(".", "OTHER", 1, "punct"),
        ]),
        _record("dp-3", "camera", [
            _tok("The", "OTHER", 1, "det"),
            _tok("lens", "NOUN", 4, "nsubj"),
            _tok("and", "OTHER", 1, "cc"),
            _tok("shutter", "NOUN", 1, "conj"),
            _tok("work", "VERB", -1, "root"),
            _tok("fine", "ADJ", 4, "advmod"),
            _tok(".", "OTHER", 4, "punct"),
        ]),
        _record("dp-4", "camera", [
            _tok("The", "OTHER", 1, "det"),
            _tok("shutter", "NOUN", 3, "nsubj"),
            _tok("is", "VERB", 3, "cop"),
            _tok("sturdy", "ADJ", -1, "root"),
            _tok(".", "OTHER", 3, "punct"),
        ]),
        _record("dp-5", "camera", [
            _tok("This", "OTHER", 1, "det"),
            _tok("camera", "NOUN", 3, "nsubj"),
            _tok("is", "VERB", 3, "cop"),
            _tok("sturdy", "ADJ", -1, "root"),
            _tok(".", "OTHER", 3, "punct"),
        ]),
    ]
    return [parse_corpus_record(r) for r in records]


# Fixed point of the four propagation rules on the mini corpus, worked by hand:
# seed "zoom"; s2 amod(great->lens) adds "lens"; s3 conj(lens, shutter) adds
# "shutter"; s4 nsubj(shutter->sturdy) adds opinion "sturdy"; s5 then adds
# "camera".
PROPAGATION_EXPECTED = {"zoom", "lens", "shutter", "camera"}


def propagation_price_sentence() -> list[AnnotatedSentence]:
    record = _record("dp-price", "software", [
        _tok("The", "OTHER", 1, "det"),
        _tok("price", "NOUN", 6, "nsubj"),
        _tok("for", "OTHER", 1, "prep"),
        _tok("windows", "NOUN", 2, "pobj"),
        _tok("10", "OTHER", 3, "nummod"),
        _tok("is", "VERB", 6, "cop"),
        _tok("great", "ADJ", -1, "root"),
        _tok("!", "OTHER", 6, "punct"),
    ])
    return [parse_corpus_record(record)]


# ---------------------------------------------------------------------------
# Gold fixture for oracle round-trips: unique aspect texts per sentence,
# aspect lengths <= 6 tokens, all three polarities present.

_GOLD_ASPECTS = [
    "battery pack", "zoom ring", "wine list", "pasta bowl", "screen",
    "keyboard", "charger", "tripod", "lens cap", "menu", "dessert tray",
    "headphone jack", "volume dial", "carrying case", "drip tray",
    "steam wand", "power cord", "remote", "stand", "filter basket",
    "stainless steel mixing bowl set", "dual zone wine fridge", "juicer",
    "espresso tamper", "oven mitt",
]

_GOLD_SUBJECTS = ["I", "We", "They", "You", "Everyone"]
_GOLD_VERBS = ["tried", "tested", "used", "examined", "unpacked"]
_GOLD_TAILS = [
    ["at", "home"], ["last", "night"], ["this", "morning"], ["after", "lunch"],
    ["on", "vacation"],
]

_POLARITY_CYCLE = [Polarity.POS, Polarity.NEU, Polarity.NEG]


def build_gold_fixture(n: int = 50) -> list[GoldSentence]:
    sentences = []
    raws = set()
    for i in range(n):
        # index mixing keeps every sentence text distinct for n <= 125, so the
        # oracle table never sees one premise with two conflicting gold answers
        subject = _GOLD_SUBJECTS[i % len(_GOLD_SUBJECTS)]
        verb = _GOLD_VERBS[(i // 5) % len(_GOLD_VERBS)]
        tail = _GOLD_TAILS[(i // 25) % len(_GOLD_TAILS)]
        first = _GOLD_ASPECTS[i % len(_GOLD_ASPECTS)]
        tokens = [subject, verb, "the"] + first.split()
        aspects = [
            GoldAspect(
                start=3,
                end=3 + len(first.split()),
                polarity=_POLARITY_CYCLE[i % 3],
                term=first,
            )
        ]
        if i % 4 == 3:  # every fourth sentence carries a second aspect
            second = _GOLD_ASPECTS[(i + 7) % len(_GOLD_ASPECTS)]
            if not set(second.split()) & set(first.split()):
                start = len(tokens) + 2
                tokens += ["beside", "the"] + second.split()
                aspects.append(
                    GoldAspect(
                        start=start,
                        end=start + len(second.split()),
                        polarity=_POLARITY_CYCLE[(i + 1) % 3],
                        term=second,
                    )
                )
        tokens += tail + ["."]
        raw = " ".join(tokens)
        for aspect in aspects:  # fixture sanity: aspect text unique in sentence
            words = [t.lower() for t in tokens]
            needle = [w.lower() for w in aspect.term.split()]
            hits = sum(
                1
                for k in range(len(words) - len(needle) + 1)
                if words[k : k + len(needle)] == needle
            )
            assert hits == 1, f"aspect {aspect.term!r} ambiguous in {raw!r}"
        assert raw not in raws, f"duplicate fixture sentence: {raw!r}"
        raws.add(raw)
        sentences.append(gold_from_aspects(f"gold-{i:03d}", raw, tokens, aspects))
    return sentences
