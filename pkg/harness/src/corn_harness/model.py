"""Small transformer encoder trained from scratch.

No pretrained weights are downloadable in the build environment, so the
encoder name selects a size preset instead of a checkpoint; the
representation is the first position of the encoded sequence ([CLS]),
L2-normalized so dot products and prototype distances stay bounded.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn


@dataclass(frozen=True)
class EncoderSpec:
    d_model: int
    nhead: int
    num_layers: int
    dim_feedforward: int


ENCODER_PRESETS = {
    "tiny": EncoderSpec(d_model=32, nhead=4, num_layers=1, dim_feedforward=64),
    "mini": EncoderSpec(d_model=64, nhead=4, num_layers=2, dim_feedforward=128),
    "small": EncoderSpec(d_model=128, nhead=8, num_layers=4, dim_feedforward=256),
}


class Encoder(nn.Module):
    def __init__(self, vocab_size: int, spec: EncoderSpec, max_len: int = 512):
        super().__init__()
        self.spec = spec
        self.max_len = max_len
        self.token_embedding = nn.Embedding(vocab_size, spec.d_model, padding_idx=0)
        self.position_embedding = nn.Embedding(max_len, spec.d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=spec.d_model,
            nhead=spec.nhead,
            dim_feedforward=spec.dim_feedforward,
            batch_first=True,
            dropout=0.0,
        )
        self.transformer = nn.TransformerEncoder(layer, num_layers=spec.num_layers)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        """(B, L) padded token ids -> (B, d) normalized [CLS] representations."""
        positions = torch.arange(ids.shape[1], device=ids.device).unsqueeze(0)
        hidden = self.token_embedding(ids) + self.position_embedding(positions)
        padding_mask = ids.eq(0)
        hidden = self.transformer(hidden, src_key_padding_mask=padding_mask)
        cls = hidden[:, 0, :]
        return nn.functional.normalize(cls, p=2, dim=-1)


def pad_batch(id_lists: list[list[int]], device: torch.device | None = None) -> torch.Tensor:
    width = max(len(ids) for ids in id_lists)
    out = torch.zeros((len(id_lists), width), dtype=torch.long, device=device)
    for i, ids in enumerate(id_lists):
        out[i, : len(ids)] = torch.tensor(ids, dtype=torch.long)
    return out
