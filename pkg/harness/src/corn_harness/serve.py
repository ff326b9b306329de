"""Serve NLI predictions over the classify HTTP protocol.

Prediction head is nearest-prototype softmax for contrastively trained
checkpoints, or the linear head for the cross-entropy ablation; the wire
format matches the protocol the batch toolkit's HTTP backend speaks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import NLI_LABELS
from .data import format_input
from .model import ENCODER_PRESETS, Encoder, pad_batch
from .vocab import Vocab


class PairIn(BaseModel):
    premise: str = Field(min_length=1)
    hypothesis: str = Field(min_length=1)


class ClassifyRequest(BaseModel):
    pairs: list[PairIn] = Field(min_length=1)


class PredictionOut(BaseModel):
    entailment: float
    neutral: float
    contradiction: float


class ClassifyResponse(BaseModel):
    predictions: list[PredictionOut]


class HealthResponse(BaseModel):
    status: str
    model: str


@dataclass
class ModelBundle:
    name: str
    vocab: Vocab
    encoder: Encoder
    prototypes: torch.Tensor
    head: torch.nn.Linear | None
    max_len: int
    mode: str  # "proto" or "head"

    def classify(self, pairs: list[tuple[str, str]]) -> list[tuple[float, float, float]]:
        ids = pad_batch(
            [self.vocab.encode(format_input(p, h), self.max_len) for p, h in pairs]
        )
        with torch.no_grad():
            z = self.encoder(ids)
            if self.mode == "head" and self.head is not None:
                logits = self.head(z)
            else:
                logits = -torch.cdist(z, self.prototypes).pow(2)
            probs = torch.softmax(logits, dim=1)
        return [tuple(float(v) for v in row) for row in probs]


def load_bundle(checkpoint_dir: str | Path, mode: str | None = None) -> ModelBundle:
    directory = Path(checkpoint_dir)
    config = json.loads((directory / "config.json").read_text(encoding="utf-8"))
    vocab = Vocab.load(directory / "vocab.json")
    encoder = Encoder(
        len(vocab), ENCODER_PRESETS[config["encoder"]], max_len=config["max_len"]
    )
    encoder.load_state_dict(torch.load(directory / "model.pt", weights_only=True))
    encoder.eval()
    prototypes = torch.load(directory / "prototypes.pt", weights_only=True)
    head = None
    head_path = directory / "head.pt"
    if head_path.exists():
        head = torch.nn.Linear(encoder.spec.d_model, len(NLI_LABELS))
        head.load_state_dict(torch.load(head_path, weights_only=True))
        head.eval()
    if mode is None:
        mode = "head" if config.get("loss") == "ce" and head is not None else "proto"
    if mode == "head" and head is None:
        raise ValueError("checkpoint has no linear head; serve with the proto mode")
    return ModelBundle(
        name=f"{config['encoder']}-{config.get('loss', 'scl')}",
        vocab=vocab,
        encoder=encoder,
        prototypes=prototypes,
        head=head,
        max_len=config["max_len"],
        mode=mode,
    )


def create_app(bundle: ModelBundle | None) -> FastAPI:
    """`bundle=None` is the not-loaded state: classify answers 503."""
    app = FastAPI(title="corn-harness", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        if bundle is None:
            return HealthResponse(status="loading", model="")
        return HealthResponse(status="ok", model=bundle.name)

    @app.post("/v1/classify", response_model=ClassifyResponse)
    def classify(request: ClassifyRequest):
        if bundle is None:
            return JSONResponse(status_code=503, content={"detail": "model not loaded"})
        rows = bundle.classify([(p.premise, p.hypothesis) for p in request.pairs])
        return ClassifyResponse(
            predictions=[
                PredictionOut(entailment=e, neutral=n, contradiction=c)
                for e, n, c in rows
            ]
        )

    return app
