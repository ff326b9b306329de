"""Supervised contrastive loss in torch.

Same definition as the reference implementation it is validated against:
L_i = -(1/|A_i|) * sum_{j in A_i} log softmax_{k != i}(z_i.z_k / t)[j],
rows without positives contribute 0, and the mean runs over all N rows.
"""

from __future__ import annotations

import torch


def scl_loss(embeddings: torch.Tensor, labels: torch.Tensor, temperature: float) -> torch.Tensor:
    if embeddings.ndim != 2 or embeddings.shape[0] < 2:
        raise ValueError(f"need an (N>=2, d) embedding matrix, got {tuple(embeddings.shape)}")
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    n = embeddings.shape[0]
    logits = embeddings @ embeddings.T / temperature
    eye = torch.eye(n, dtype=torch.bool, device=embeddings.device)
    logits = logits.masked_fill(eye, float("-inf"))
    log_softmax = logits - torch.logsumexp(logits, dim=1, keepdim=True)

    positives = labels.unsqueeze(0).eq(labels.unsqueeze(1)) & ~eye
    counts = positives.sum(dim=1)
    safe_counts = counts.clamp(min=1)
    per_row = -(log_softmax.masked_fill(~positives, 0.0).sum(dim=1)) / safe_counts
    per_row = torch.where(counts > 0, per_row, torch.zeros_like(per_row))
    return per_row.sum() / n
