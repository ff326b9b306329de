"""Training and serving harness for review-NLI classifiers.

Consumes the RNLI JSONL files produced by the curation toolkit, post-trains
a small transformer encoder with a supervised contrastive objective (or a
cross-entropy head for the ablation), and serves predictions over the
classify HTTP protocol.
"""

__version__ = "0.1.0"

NLI_LABELS = ("entailment", "neutral", "contradiction")
