"""FastAPI service exposing the classify protocol and prediction endpoints.

The service wraps any backend (oracle, rule, or a further HTTP hop) behind
the wire format in `corn.protocol`, and adds /v1/predict so clients can run
the casting pipelines without shipping files around.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backends import NliBackend
from .casting import (
    PromptConfig,
    Task,
    predict_ae,
    predict_asc,
    predict_e2e,
)
from .nli import NliQuery, UnknownPair
from .protocol import (
    ClassifyRequest,
    ClassifyResponse,
    HealthResponse,
    PredictionOut,
)
from .text import DEFAULT_MAX_SPAN_LEN, tokenize


class SentenceIn(BaseModel):
    sentence_id: str = ""
    text: str = Field(min_length=1)
    aspects: list[str] = Field(default_factory=list)


class PredictRequest(BaseModel):
    task: Task
    sentences: list[SentenceIn] = Field(min_length=1)
    domain_label: str = "The product"
    max_span_len: int = Field(default=DEFAULT_MAX_SPAN_LEN, ge=1)


class SpanOut(BaseModel):
    start: int
    end: int
    score: float
    label: str


class AspectOut(BaseModel):
    aspect: str
    label: str
    distribution: PredictionOut


class SentencePrediction(BaseModel):
    sentence_id: str
    task: Task
    tokens: list[str]
    labels: list[str] = Field(default_factory=list)
    spans: list[SpanOut] = Field(default_factory=list)
    aspects: list[AspectOut] = Field(default_factory=list)


class PredictResponse(BaseModel):
    results: list[SentencePrediction]


def create_app(
    backend: NliBackend | None,
    prompt_config: PromptConfig = PromptConfig(),
) -> FastAPI:
    """App factory; `backend=None` models the not-yet-loaded state (503s)."""
    app = FastAPI(title="corn", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        if backend is None:
            return HealthResponse(status="loading", model="")
        return HealthResponse(status="ok", model=backend.name)

    @app.post("/v1/classify", response_model=ClassifyResponse)
    def classify(request: ClassifyRequest):
        if backend is None:
            return JSONResponse(status_code=503, content={"detail": "model not loaded"})
        queries = [NliQuery(premise=p.premise, hypothesis=p.hypothesis) for p in request.pairs]
        try:
            distributions = backend.classify_batch(queries)
        except UnknownPair as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        return ClassifyResponse(
            predictions=[
                PredictionOut(
                    entailment=d.p_entailment,
                    neutral=d.p_neutral,
                    contradiction=d.p_contradiction,
                )
                for d in distributions
            ]
        )

    @app.post("/v1/predict", response_model=PredictResponse)
    def predict(request: PredictRequest):
        if backend is None:
            return JSONResponse(status_code=503, content={"detail": "model not loaded"})
        cfg = PromptConfig(domain_label=request.domain_label)
        results = []
        for item in request.sentences:
            sentence = tokenize(item.text, sentence_id=item.sentence_id)
            if request.task == Task.ASC:
                aspects = []
                for aspect in item.aspects:
                    label, dist = predict_asc(sentence, aspect, backend, cfg)
                    aspects.append(
                        AspectOut(
                            aspect=aspect,
                            label=label.value,
                            distribution=PredictionOut(
                                entailment=dist.p_entailment,
                                neutral=dist.p_neutral,
                                contradiction=dist.p_contradiction,
                            ),
                        )
                    )
                results.append(
                    SentencePrediction(
                        sentence_id=item.sentence_id,
                        task=request.task,
                        tokens=sentence.token_texts(),
                        aspects=aspects,
                    )
                )
            elif request.task == Task.AE:
                result = predict_ae(sentence, cfg, backend, max_span_len=request.max_span_len)
                results.append(
                    SentencePrediction(
                        sentence_id=item.sentence_id,
                        task=request.task,
                        tokens=sentence.token_texts(),
                        labels=[str(l) for l in result.bio],
                        spans=[
                            SpanOut(start=s.span.start, end=s.span.end,
                                    score=s.entail_score, label="T")
                            for s in result.kept
                        ],
                    )
                )
            elif request.task == Task.E2E:
                result = predict_e2e(sentence, cfg, backend, max_span_len=request.max_span_len)
                results.append(
                    SentencePrediction(
                        sentence_id=item.sentence_id,
                        task=request.task,
                        tokens=sentence.token_texts(),
                        labels=[str(l) for l in result.labels],
                        spans=[
                            SpanOut(start=s.span.start, end=s.span.end,
                                    score=s.entail_score, label=str(label))
                            for s, label in zip(result.kept, result.span_labels)
                        ],
                    )
                )
            else:
                return JSONResponse(
                    status_code=400,
                    content={"detail": f"task {request.task} is not a prediction task"},
                )
        return PredictResponse(results=results)

    return app
