"""Whitespace vocabulary over formatted inputs.

[CLS] and [SEP] arrive as ordinary whitespace tokens of the formatted
string, so they always earn vocabulary slots from the training data itself.
"""

from __future__ import annotations

import json
from collections import Counter
from collections.abc import Iterable
from pathlib import Path

PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"


class Vocab:
    def __init__(self, token_to_id: dict[str, int]):
        if token_to_id.get(PAD_TOKEN) != 0 or token_to_id.get(UNK_TOKEN) != 1:
            raise ValueError("vocab must map [PAD]->0 and [UNK]->1")
        self.token_to_id = dict(token_to_id)

    def __len__(self) -> int:
        return len(self.token_to_id)

    @property
    def pad_id(self) -> int:
        return 0

    def encode(self, text: str, max_len: int) -> list[int]:
        ids = [self.token_to_id.get(tok, 1) for tok in text.split()]
        return ids[:max_len]

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.token_to_id, ensure_ascii=False, sort_keys=True),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "Vocab":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def build(cls, texts: Iterable[str], max_size: int = 30_000, min_freq: int = 1) -> "Vocab":
        counts = Counter(tok for text in texts for tok in text.split())
        token_to_id = {PAD_TOKEN: 0, UNK_TOKEN: 1}
        # frequency then lexical order keeps the mapping reproducible
        for token, freq in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
            if freq < min_freq or len(token_to_id) >= max_size:
                break
            token_to_id[token] = len(token_to_id)
        return cls(token_to_id)
