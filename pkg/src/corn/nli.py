"""Core NLI query/distribution types and the model input format."""

from __future__ import annotations

from dataclasses import dataclass

from .labels import NliLabel

DISTRIBUTION_SUM_TOLERANCE = 1e-6

# Fixed argmax tie order.
_TIE_ORDER = (NliLabel.ENTAILMENT, NliLabel.NEUTRAL, NliLabel.CONTRADICTION)


class BackendUnavailable(Exception):
    pass


class MalformedResponse(Exception):
    pass


class UnknownPair(Exception):
    pass


@dataclass(frozen=True)
class NliDistribution:
    p_entailment: float
    p_neutral: float
    p_contradiction: float

    def __post_init__(self) -> None:
        probs = self.as_tuple()
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError(f"probabilities out of [0, 1]: {probs}")
        if abs(sum(probs) - 1.0) > DISTRIBUTION_SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {sum(probs)}, expected 1")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_entailment, self.p_neutral, self.p_contradiction)

    def prob(self, label: NliLabel) -> float:
        return {
            NliLabel.ENTAILMENT: self.p_entailment,
            NliLabel.NEUTRAL: self.p_neutral,
            NliLabel.CONTRADICTION: self.p_contradiction,
        }[label]

    def argmax_label(self) -> NliLabel:
        """Most probable label; ties break entailment > neutral > contradiction."""
        best = _TIE_ORDER[0]
        for label in _TIE_ORDER[1:]:
            if self.prob(label) > self.prob(best):
                best = label
        return best

    @classmethod
    def one_hot(cls, label: NliLabel) -> "NliDistribution":
        return cls(
            p_entailment=1.0 if label == NliLabel.ENTAILMENT else 0.0,
            p_neutral=1.0 if label == NliLabel.NEUTRAL else 0.0,
            p_contradiction=1.0 if label == NliLabel.CONTRADICTION else 0.0,
        )


@dataclass(frozen=True)
class NliQuery:
    premise: str
    hypothesis: str

    def __post_init__(self) -> None:
        if not self.premise:
            raise ValueError("premise must be non-empty")
        if not self.hypothesis:
            raise ValueError("hypothesis must be non-empty")


@dataclass(frozen=True)
class ModelInput:
    formatted: str


def format_model_input(query: NliQuery) -> ModelInput:
    """"[CLS]" + premise + "[SEP]" + hypothesis + "[SEP]", single-space joins.

    No escaping: a literal separator inside either side passes through
    verbatim, so the format is injective only on pairs that avoid it.
    """
    return ModelInput(
        formatted=f"[CLS] {query.premise} [SEP] {query.hypothesis} [SEP]"
    )
