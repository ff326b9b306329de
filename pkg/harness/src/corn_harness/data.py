"""RNLI JSONL loading and the model input format.

The wire contract with the curation side is the file schema only:
{"premise", "hypothesis", "label", ...} per line. Corrupt records are
skipped and counted, never fatal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import NLI_LABELS

LABEL_TO_ID = {label: i for i, label in enumerate(NLI_LABELS)}


@dataclass(frozen=True)
class RnliRecord:
    premise: str
    hypothesis: str
    label_id: int


def format_input(premise: str, hypothesis: str) -> str:
    """Single-space-joined "[CLS] <premise> [SEP] <hypothesis> [SEP]"."""
    return f"[CLS] {premise} [SEP] {hypothesis} [SEP]"


def load_rnli(path: str | Path) -> tuple[list[RnliRecord], int]:
    """Parse an RNLI JSONL file; returns (records, skipped_count)."""
    records: list[RnliRecord] = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                premise = obj["premise"]
                hypothesis = obj["hypothesis"]
                label_id = LABEL_TO_ID[obj["label"]]
            except (json.JSONDecodeError, KeyError, TypeError):
                skipped += 1
                continue
            if not isinstance(premise, str) or not isinstance(hypothesis, str):
                skipped += 1
                continue
            records.append(RnliRecord(premise, hypothesis, label_id))
    return records, skipped
