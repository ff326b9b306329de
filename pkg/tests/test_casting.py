import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corn.casting import (
    AeResult,
    EmptyText,
    OverlappingSpans,
    PromptConfig,
    ScoredSpan,
    Task,
    build_hypothesis,
    map_nli,
    predict_ae,
    predict_asc,
    predict_e2e,
    resolve_overlaps,
    spans_to_bio,
)
from corn.labels import AeSpanLabel, AscLabel, BioLabel, E2eLabel, NliLabel
from corn.nli import NliDistribution
from corn.text import SpanCandidate, tokenize

CFG = PromptConfig()


def scored(start, end, text, p_ent, p_neu=None):
    p_neu = (1.0 - p_ent) if p_neu is None else p_neu
    dist = NliDistribution(p_ent, p_neu, 1.0 - p_ent - p_neu)
    return ScoredSpan(
        span=SpanCandidate(start=start, end=end, text=text),
        distribution=dist,
        hypothesis_text=f"The product has {text}.",
    )


class UniformBackend:
    name = "uniform"

    def classify_batch(self, queries):
        third = 1.0 / 3.0  # sums to 1 - 1ulp, inside the distribution tolerance
        return [NliDistribution(third, third, third) for _ in queries]


class TableBackend:
    """Oracle keyed on hypothesis text alone; handy for single sentences."""

    name = "table"

    def __init__(self, answers):
        self.answers = answers

    def classify_batch(self, queries):
        return [
            NliDistribution.one_hot(self.answers.get(q.hypothesis, NliLabel.NEUTRAL))
            for q in queries
        ]


class TestBuildHypothesis:
    def test_ae_product_domain(self):
        cfg = PromptConfig(domain_label="The product")
        assert build_hypothesis(Task.AE, cfg, "Windows 8") == "The product has Windows 8."

    def test_asc(self):
        assert build_hypothesis(Task.ASC, CFG, "Windows 8") == "Windows 8 is great."

    def test_ae_restaurant_domain(self):
        cfg = PromptConfig(domain_label="Restaurant")
        assert build_hypothesis(Task.AE, cfg, "pizza") == "Restaurant has pizza."

    def test_single_terminal_period_no_double_spaces(self):
        built = build_hypothesis(Task.AE, CFG, "Windows 8 .")
        assert built == "The product has Windows 8."
        assert "  " not in build_hypothesis(Task.ASC, CFG, "a  b")

    def test_empty_text_rejected(self):
        with pytest.raises(EmptyText):
            build_hypothesis(Task.ASC, CFG, "  ")

    def test_template_placeholders_validated(self):
        with pytest.raises(ValueError):
            PromptConfig(ae_template="{domain} has something.")
        with pytest.raises(ValueError):
            PromptConfig(asc_template="{aspect} is {mood}.")


class TestMapNli:
    def test_full_table(self):
        expected = {
            (Task.AE, NliLabel.ENTAILMENT): AeSpanLabel.T,
            (Task.AE, NliLabel.NEUTRAL): AeSpanLabel.O,
            (Task.AE, NliLabel.CONTRADICTION): AeSpanLabel.O,
            (Task.ASC, NliLabel.ENTAILMENT): AscLabel.POS,
            (Task.ASC, NliLabel.NEUTRAL): AscLabel.NEU,
            (Task.ASC, NliLabel.CONTRADICTION): AscLabel.NEG,
            (Task.E2E_STEP2, NliLabel.ENTAILMENT): E2eLabel.T_POS,
            (Task.E2E_STEP2, NliLabel.NEUTRAL): E2eLabel.T_NEU,
            (Task.E2E_STEP2, NliLabel.CONTRADICTION): E2eLabel.T_NEG,
        }
        for (task, label), out in expected.items():
            assert map_nli(task, label) == out

    def test_injective_where_table_is(self):
        for task in (Task.ASC, Task.E2E_STEP2):
            outputs = [map_nli(task, l) for l in NliLabel]
            assert len(set(outputs)) == 3

    def test_e2e_task_has_no_direct_mapping(self):
        with pytest.raises(ValueError):
            map_nli(Task.E2E, NliLabel.ENTAILMENT)


class TestPredictAsc:
    def test_entailment_maps_to_pos(self):
        sentence = tokenize("I do enjoy Windows 8")
        backend = TableBackend({"Windows 8 is great.": NliLabel.ENTAILMENT})
        label, dist = predict_asc(sentence, "Windows 8", backend)
        assert label == AscLabel.POS
        assert dist.p_entailment == 1.0

    def test_uniform_tie_breaks_to_pos(self):
        label, _ = predict_asc(tokenize("meh"), "thing", UniformBackend())
        assert label == AscLabel.POS

    def test_contradiction_maps_to_neg(self):
        backend = TableBackend({"Windows 8 is great.": NliLabel.CONTRADICTION})
        label, _ = predict_asc(tokenize("ugh Windows 8"), "Windows 8", backend)
        assert label == AscLabel.NEG


class TestResolveOverlaps:
    def test_higher_score_wins(self):
        lo = scored(3, 4, "Windows", 0.80)
        hi = scored(3, 5, "Windows 8", 0.92)
        kept = resolve_overlaps([lo, hi])
        assert [k.span.text for k in kept] == ["Windows 8"]

    def test_disjoint_spans_both_kept(self):
        kept = resolve_overlaps([scored(0, 1, "a", 0.9), scored(3, 5, "b c", 0.8)])
        assert len(kept) == 2
        assert [k.span.start for k in kept] == [0, 3]

    def test_equal_scores_longer_wins(self):
        short = scored(1, 2, "b", 0.7)
        longer = scored(0, 2, "a b", 0.7)
        assert resolve_overlaps([short, longer])[0].span.text == "a b"

    def test_equal_score_and_length_smaller_start_wins(self):
        left = scored(0, 2, "a b", 0.7)
        right = scored(1, 3, "b c", 0.7)
        assert [k.span.text for k in resolve_overlaps([left, right])] == ["a b"]

    @given(st.permutations(range(6)), st.randoms(use_true_random=False))
    @settings(max_examples=50)
    def test_permutation_invariant_and_disjoint(self, order, rng):
        spans = []
        for i in range(6):
            start = rng.randrange(0, 8)
            end = start + rng.randrange(1, 4)
            spans.append(scored(start, end, f"t{start}-{end}", round(rng.random(), 2)))
        base = resolve_overlaps(spans)
        shuffled = resolve_overlaps([spans[i] for i in order])
        assert [(k.span.start, k.span.end) for k in base] == [
            (k.span.start, k.span.end) for k in shuffled
        ]
        for a, b in itertools.combinations(base, 2):
            assert not a.span.overlaps(b.span)


class TestSpansToBio:
    def test_single_span(self):
        labels = spans_to_bio(5, [scored(3, 5, "Windows 8", 1.0)])
        assert labels == [BioLabel.O, BioLabel.O, BioLabel.O, BioLabel.B, BioLabel.I]

    def test_no_spans_all_outside(self):
        assert spans_to_bio(4, []) == [BioLabel.O] * 4

    def test_two_spans(self):
        labels = spans_to_bio(5, [scored(0, 1, "a", 1.0), scored(3, 5, "b c", 1.0)])
        assert labels == [BioLabel.B, BioLabel.O, BioLabel.O, BioLabel.B, BioLabel.I]

    def test_overlap_rejected(self):
        with pytest.raises(OverlappingSpans):
            spans_to_bio(5, [scored(0, 2, "a b", 1.0), scored(1, 3, "b c", 1.0)])


FIG1 = "I do enjoy Windows 8"


class TestPredictAe:
    def test_figure_sentence(self):
        backend = TableBackend({"The product has Windows 8.": NliLabel.ENTAILMENT})
        result = predict_ae(tokenize(FIG1), CFG, backend)
        assert result.bio == [BioLabel.O, BioLabel.O, BioLabel.O, BioLabel.B, BioLabel.I]
        assert [k.span.text for k in result.kept] == ["Windows 8"]

    def test_nothing_entailed_all_outside(self):
        result = predict_ae(tokenize(FIG1), CFG, TableBackend({}))
        assert result.bio == [BioLabel.O] * 5
        assert result.kept == []

    def test_case_study_two_spans(self):
        sentence = tokenize("I was given a demonstration of Windows 8 .")
        backend = TableBackend({
            "The product has demonstration.": NliLabel.ENTAILMENT,
            "The product has Windows 8.": NliLabel.ENTAILMENT,
        })
        result = predict_ae(sentence, CFG, backend)
        assert result.bio == [
            BioLabel.O, BioLabel.O, BioLabel.O, BioLabel.O, BioLabel.B,
            BioLabel.O, BioLabel.B, BioLabel.I, BioLabel.O,
        ]

    def test_numeric_threshold_mode(self):
        class Soft:
            name = "soft"

            def classify_batch(self, queries):
                return [
                    NliDistribution(0.45, 0.5, 0.05)
                    if q.hypothesis == "The product has Windows 8."
                    else NliDistribution(0.05, 0.9, 0.05)
                    for q in queries
                ]

        sentence = tokenize(FIG1)
        by_argmax = predict_ae(sentence, CFG, Soft())
        assert by_argmax.kept == []
        by_threshold = predict_ae(sentence, CFG, Soft(), entail_threshold=0.4)
        assert [k.span.text for k in by_threshold.kept] == ["Windows 8"]

    def test_empty_sentence(self):
        result = predict_ae(tokenize(""), CFG, TableBackend({}))
        assert result == AeResult(bio=[], kept=[])

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_bio_well_formed_under_random_backends(self, seed):
        rng = random.Random(seed)

        class RandomBackend:
            name = "random"

            def classify_batch(self, queries):
                out = []
                for _ in queries:
                    p_ent = rng.random()
                    rest = 1.0 - p_ent
                    p_neu = rest * rng.random()
                    out.append(NliDistribution(p_ent, p_neu, rest - p_neu))
                return out

        n = rng.randint(0, 9)
        sentence = tokenize(" ".join(f"w{i}" for i in range(n)))
        result = predict_ae(sentence, CFG, RandomBackend())
        previous = BioLabel.O
        for label in result.bio:
            if label == BioLabel.I:
                assert previous in (BioLabel.B, BioLabel.I)
            previous = label


TABLE6_RAW = "I was given a demonstration of Windows 8 ."
TABLE6_GOLD = [
    E2eLabel.O, E2eLabel.O, E2eLabel.O, E2eLabel.O, E2eLabel.O, E2eLabel.O,
    E2eLabel.T_NEU, E2eLabel.T_NEU, E2eLabel.O,
]
TABLE6_CORN_PREDICTION = [
    E2eLabel.O, E2eLabel.O, E2eLabel.O, E2eLabel.O, E2eLabel.T_NEU, E2eLabel.O,
    E2eLabel.T_NEU, E2eLabel.T_NEU, E2eLabel.O,
]


def table6_backend():
    return TableBackend({
        "The product has demonstration.": NliLabel.ENTAILMENT,
        "The product has Windows 8.": NliLabel.ENTAILMENT,
        "demonstration is great.": NliLabel.NEUTRAL,
        "Windows 8 is great.": NliLabel.NEUTRAL,
    })


class TestPredictE2e:
    def test_case_study_trace(self):
        result = predict_e2e(tokenize(TABLE6_RAW), CFG, table6_backend())
        assert result.labels == TABLE6_CORN_PREDICTION

    def test_step1_all_outside_short_circuits(self):
        class ExplodingStep2(TableBackend):
            def classify_batch(self, queries):
                for q in queries:
                    assert "is great." not in q.hypothesis, "step 2 must not run"
                return super().classify_batch(queries)

        result = predict_e2e(tokenize(FIG1), CFG, ExplodingStep2({}))
        assert result.labels == [E2eLabel.O] * 5

    def test_o_positions_match_ae(self):
        rng = random.Random(4)

        class Half:
            name = "half"

            def classify_batch(self, queries):
                return [
                    NliDistribution.one_hot(
                        NliLabel.ENTAILMENT if rng.random() < 0.3 else NliLabel.NEUTRAL
                    )
                    for _ in queries
                ]

        for i in range(20):
            sentence = tokenize(" ".join(f"w{i}t{j}" for j in range(rng.randint(1, 8))))
            backend = Half()
            ae = predict_ae(sentence, CFG, backend)
            rng.seed(i)
            e2e = predict_e2e(sentence, CFG, backend)
            rng.seed(i)
            ae = predict_ae(sentence, CFG, backend)
            o_ae = {k for k, l in enumerate(ae.bio) if l == BioLabel.O}
            o_e2e = {k for k, l in enumerate(e2e.labels) if l == E2eLabel.O}
            assert o_ae == o_e2e
