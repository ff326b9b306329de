"""Opinion lexicons and seed aspect sets, plus their file loaders."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .labels import Polarity


@dataclass(frozen=True)
class OpinionLexicon:
    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self) -> None:
        overlap = self.positive & self.negative
        if overlap:
            raise ValueError(f"terms in both lexicons: {sorted(overlap)[:5]}")

    def polarity_of(self, term: str) -> Polarity | None:
        term = term.lower()
        if term in self.positive:
            return Polarity.POS
        if term in self.negative:
            return Polarity.NEG
        return None

    @property
    def all_terms(self) -> frozenset[str]:
        return self.positive | self.negative

    @classmethod
    def from_files(cls, positive_path: str | Path, negative_path: str | Path) -> "OpinionLexicon":
        return cls(
            positive=load_term_file(positive_path),
            negative=load_term_file(negative_path),
        )


@dataclass(frozen=True)
class SeedAspectSet:
    category: str
    aspects: frozenset[str]

    def __post_init__(self) -> None:
        if any(not a.strip() for a in self.aspects):
            raise ValueError(f"empty seed aspect in category {self.category!r}")


def load_term_file(path: str | Path) -> frozenset[str]:
    """One lowercase term per line; '#'/';' comment lines and blanks skipped."""
    terms = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        terms.add(line.lower())
    return frozenset(terms)


def load_seed_aspects(path: str | Path) -> dict[str, SeedAspectSet]:
    """JSON mapping {category: [terms]} -> per-category seed sets."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("seed aspects file must be a JSON object {category: [terms]}")
    seeds = {}
    for category, terms in data.items():
        if not isinstance(terms, list):
            raise ValueError(f"seed aspects for {category!r} must be a list")
        seeds[category] = SeedAspectSet(
            category=category, aspects=frozenset(t.lower() for t in terms)
        )
    return seeds
