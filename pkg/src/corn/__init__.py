"""Zero-shot aspect-based sentiment analysis via review NLI.

Curates pseudo-labeled review-NLI data from annotated review corpora, casts
AE/ASC/E2E ABSA tasks into NLI queries against a pluggable classifier
backend, and scores predictions against gold data.
"""

__version__ = "0.1.0"

from .labels import AeSpanLabel, AscLabel, BioLabel, E2eLabel, NliLabel, Polarity

__all__ = [
    "AeSpanLabel",
    "AscLabel",
    "BioLabel",
    "E2eLabel",
    "NliLabel",
    "Polarity",
    "__version__",
]
