"""Post-training loop: contrastive (default) or cross-entropy objective.

Saves a self-contained checkpoint directory: config.json, vocab.json,
model.pt, prototypes.pt (and head.pt for the cross-entropy ablation), plus
a log.jsonl with one record per logged step and per validation pass.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn

from . import NLI_LABELS
from .data import RnliRecord, format_input, load_rnli
from .model import ENCODER_PRESETS, Encoder, pad_batch
from .scl import scl_loss
from .vocab import Vocab

log = logging.getLogger("corn_harness")


@dataclass
class TrainConfig:
    encoder: str = "mini"
    loss: str = "scl"  # "scl" or "ce" (the cross-entropy ablation)
    temperature: float = 0.1
    max_len: int = 512
    batch_size: int = 16
    learning_rate: float = 1e-5
    epochs: int = 10
    patience: int = 2
    fp16: bool = False
    seed: int = 0
    log_every: int = 1

    def __post_init__(self) -> None:
        if self.encoder not in ENCODER_PRESETS:
            raise ValueError(f"unknown encoder preset {self.encoder!r}")
        if self.loss not in ("scl", "ce"):
            raise ValueError(f"loss must be 'scl' or 'ce', got {self.loss!r}")
        for name in ("temperature", "max_len", "batch_size", "learning_rate", "epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class TrainResult:
    checkpoint_dir: Path
    step_losses: list[float]
    valid_losses: list[float]
    skipped_records: int


def _encode(records: list[RnliRecord], vocab: Vocab, max_len: int) -> list[list[int]]:
    return [
        vocab.encode(format_input(r.premise, r.hypothesis), max_len) for r in records
    ]


def _batch_loss(model, head, ids, labels, cfg: TrainConfig) -> torch.Tensor:
    z = model(ids)
    if cfg.loss == "scl":
        return scl_loss(z, labels, cfg.temperature)
    return nn.functional.cross_entropy(head(z), labels)


def compute_prototypes(
    model: Encoder,
    encoded: list[list[int]],
    labels: list[int],
    batch_size: int = 64,
) -> torch.Tensor:
    """Per-label means of the (normalized) representations."""
    model.eval()
    d = model.spec.d_model
    sums = torch.zeros((len(NLI_LABELS), d))
    counts = torch.zeros(len(NLI_LABELS))
    with torch.no_grad():
        for start in range(0, len(encoded), batch_size):
            ids = pad_batch(encoded[start : start + batch_size])
            z = model(ids)
            for row, label in zip(z, labels[start : start + batch_size]):
                sums[label] += row
                counts[label] += 1
    counts = counts.clamp(min=1)
    return sums / counts.unsqueeze(1)


def train(
    train_path: str | Path,
    valid_path: str | Path,
    out_dir: str | Path,
    cfg: TrainConfig = TrainConfig(),
) -> TrainResult:
    torch.manual_seed(cfg.seed)
    rng = random.Random(cfg.seed)

    train_records, skipped_train = load_rnli(train_path)
    valid_records, skipped_valid = load_rnli(valid_path)
    skipped = skipped_train + skipped_valid
    if skipped:
        log.warning("skipped %d corrupt RNLI records", skipped)
    if len(train_records) < 2:
        raise ValueError("need at least two usable training records")
    if not valid_records:
        valid_records = train_records  # tiny runs may not have a split

    vocab = Vocab.build(
        format_input(r.premise, r.hypothesis) for r in train_records
    )
    train_ids = _encode(train_records, vocab, cfg.max_len)
    valid_ids = _encode(valid_records, vocab, cfg.max_len)
    train_labels = [r.label_id for r in train_records]
    valid_labels = [r.label_id for r in valid_records]

    model = Encoder(len(vocab), ENCODER_PRESETS[cfg.encoder], max_len=cfg.max_len)
    head = nn.Linear(model.spec.d_model, len(NLI_LABELS)) if cfg.loss == "ce" else None
    params = list(model.parameters()) + (list(head.parameters()) if head else [])
    optimizer = torch.optim.Adam(params, lr=cfg.learning_rate)
    if cfg.fp16 and not torch.cuda.is_available():
        log.warning("fp16 requested but no GPU is available; training in fp32")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "log.jsonl"
    step_losses: list[float] = []
    valid_losses: list[float] = []
    best_valid = float("inf")
    bad_epochs = 0
    step = 0

    with open(log_path, "w", encoding="utf-8") as log_fh:
        for epoch in range(cfg.epochs):
            model.train()
            order = list(range(len(train_ids)))
            rng.shuffle(order)
            for start in range(0, len(order), cfg.batch_size):
                chosen = order[start : start + cfg.batch_size]
                if len(chosen) < 2:
                    continue
                ids = pad_batch([train_ids[i] for i in chosen])
                labels = torch.tensor([train_labels[i] for i in chosen])
                try:
                    loss = _batch_loss(model, head, ids, labels, cfg)
                    optimizer.zero_grad()
                    loss.backward()
                    optimizer.step()
                except RuntimeError as exc:
                    if "out of memory" in str(exc).lower():
                        raise RuntimeError(
                            "ran out of memory; lower --batch-size or --max-len"
                        ) from exc
                    raise
                step += 1
                if step % cfg.log_every == 0:
                    value = float(loss.detach())
                    step_losses.append(value)
                    log_fh.write(json.dumps({"step": step, "epoch": epoch, "loss": value}) + "\n")

            model.eval()
            with torch.no_grad():
                ids = pad_batch(valid_ids)
                labels = torch.tensor(valid_labels)
                valid_loss = float(_batch_loss(model, head, ids, labels, cfg))
            valid_losses.append(valid_loss)
            log_fh.write(json.dumps({"epoch": epoch, "valid_loss": valid_loss}) + "\n")
            log.info("epoch %d: valid loss %.6f", epoch, valid_loss)

            if valid_loss < best_valid - 1e-9:
                best_valid = valid_loss
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs > cfg.patience:
                    log.info("early termination after epoch %d", epoch)
                    break

    prototypes = compute_prototypes(model, valid_ids, valid_labels)
    torch.save(model.state_dict(), out / "model.pt")
    torch.save(prototypes, out / "prototypes.pt")
    if head is not None:
        torch.save(head.state_dict(), out / "head.pt")
    vocab.save(out / "vocab.json")
    (out / "config.json").write_text(
        json.dumps(asdict(cfg) | {"vocab_size": len(vocab)}, indent=2, sort_keys=True),
        encoding="utf-8",
    )
    return TrainResult(
        checkpoint_dir=out,
        step_losses=step_losses,
        valid_losses=valid_losses,
        skipped_records=skipped,
    )
