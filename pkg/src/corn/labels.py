"""Closed label sets shared across the pipeline."""

import enum


class _StrEnum(str, enum.Enum):
    __str__ = str.__str__


class NliLabel(_StrEnum):
    ENTAILMENT = "entailment"
    NEUTRAL = "neutral"
    CONTRADICTION = "contradiction"


class Polarity(_StrEnum):
    POS = "POS"
    NEU = "NEU"
    NEG = "NEG"


# ASC predictions share the polarity vocabulary.
AscLabel = Polarity


class AeSpanLabel(_StrEnum):
    T = "T"
    O = "O"


class BioLabel(_StrEnum):
    B = "B"
    I = "I"
    O = "O"


class E2eLabel(_StrEnum):
    T_POS = "T-POS"
    T_NEU = "T-NEU"
    T_NEG = "T-NEG"
    O = "O"


E2E_FROM_POLARITY = {
    Polarity.POS: E2eLabel.T_POS,
    Polarity.NEU: E2eLabel.T_NEU,
    Polarity.NEG: E2eLabel.T_NEG,
}
