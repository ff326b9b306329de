"""Double-propagation aspect extraction over dependency-annotated reviews.

Seeds initialize the aspect set and the opinion lexicon initializes the
opinion set; four rule families then propagate to a fixed point:

  R-OA  known opinion word modifying a noun (amod or subject relation)
        -> the noun becomes an aspect
  R-AO  adjective modifying a known aspect -> adjective joins the opinions
  R-AA  noun conjoined with a known aspect -> noun becomes an aspect
  R-OO  adjective conjoined with a known opinion word -> joins the opinions

The aspect set is monotone per iteration, so a fixed point always exists on
a finite corpus.
"""

from __future__ import annotations

from collections.abc import Sequence

from .corpus import AnnotatedSentence, AnnotatedToken
from .lexicon import OpinionLexicon, SeedAspectSet


class EmptyCorpus(Exception):
    pass


class MissingAnnotations(Exception):
    pass


MOD_RELATIONS = frozenset({"amod"})
SUBJECT_RELATIONS = frozenset({"nsubj", "nsubjpass", "csubj", "subj"})
CONJ_RELATIONS = frozenset({"conj"})


def extract_aspects(
    corpus: Sequence[AnnotatedSentence],
    seeds: SeedAspectSet,
    lexicon: OpinionLexicon,
    max_iters: int = 10,
) -> set[str]:
    """Propagate from seeds/lexicon to the aspect fixed point (or max_iters).

    Returns the lowercased, deduplicated aspect set (seeds included). New
    aspects picked up by propagation are single noun tokens; multi-word
    aspects enter only through the seeds.
    """
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if not corpus:
        raise EmptyCorpus("aspect extraction needs at least one sentence")
    for sent in corpus:
        for tok in sent.tokens:
            if tok.pos_tag is None or tok.head is None:
                raise MissingAnnotations(
                    f"token {tok.index} of sentence {sent.sentence_id!r} "
                    "lacks pos/head annotation"
                )

    aspects = {a.lower() for a in seeds.aspects}
    opinions = {t.lower() for t in lexicon.all_terms}

    for _ in range(max_iters):
        grew = False
        for sent in corpus:
            grew |= _apply_rules(sent, aspects, opinions)
        if not grew:
            break
    return aspects


def _apply_rules(sent: AnnotatedSentence, aspects: set[str], opinions: set[str]) -> bool:
    grew = False
    for tok in sent.tokens:
        if tok.head is None or tok.head < 0:
            continue
        parent = sent.tokens[tok.head]
        rel = (tok.dep_rel or "").lower()
        if rel in MOD_RELATIONS:
            # child modifies parent: "great battery" -> great amod-> battery
            grew |= _opinion_noun(tok, parent, aspects, opinions)
            grew |= _adjective_aspect(tok, parent, aspects, opinions)
        elif rel in SUBJECT_RELATIONS:
            # predicate construction: "battery nsubj-> great"
            grew |= _opinion_noun(parent, tok, aspects, opinions)
            grew |= _adjective_aspect(parent, tok, aspects, opinions)
        elif rel in CONJ_RELATIONS:
            grew |= _conjoined(tok, parent, aspects, opinions)
    return grew


def _opinion_noun(
    opinion_tok: AnnotatedToken,
    noun_tok: AnnotatedToken,
    aspects: set[str],
    opinions: set[str],
) -> bool:
    # R-OA
    if opinion_tok.text.lower() in opinions and noun_tok.coarse == "NOUN":
        return _add(aspects, noun_tok.text)
    return False


def _adjective_aspect(
    adj_tok: AnnotatedToken,
    aspect_tok: AnnotatedToken,
    aspects: set[str],
    opinions: set[str],
) -> bool:
    # R-AO
    if adj_tok.coarse == "ADJ" and aspect_tok.text.lower() in aspects:
        return _add(opinions, adj_tok.text)
    return False


def _conjoined(
    a: AnnotatedToken, b: AnnotatedToken, aspects: set[str], opinions: set[str]
) -> bool:
    grew = False
    if a.coarse == "NOUN" and b.coarse == "NOUN":
        # R-AA
        if a.text.lower() in aspects:
            grew |= _add(aspects, b.text)
        if b.text.lower() in aspects:
            grew |= _add(aspects, a.text)
    if a.coarse == "ADJ" and b.coarse == "ADJ":
        # R-OO
        if a.text.lower() in opinions:
            grew |= _add(opinions, b.text)
        if b.text.lower() in opinions:
            grew |= _add(opinions, a.text)
    return grew


def _add(target: set[str], term: str) -> bool:
    term = term.lower()
    if term in target:
        return False
    target.add(term)
    return True
