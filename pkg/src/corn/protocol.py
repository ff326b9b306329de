"""Pydantic models for the HTTP classify protocol, plus conformance checks.

Wire format (bit-exact):
  POST /v1/classify   {"pairs": [{"premise": "...", "hypothesis": "..."}]}
                   -> {"predictions": [{"entailment": x, "neutral": y,
                                        "contradiction": z}]}
  GET  /v1/health  -> {"status": "ok", "model": "<name>"}
Status 200 on success, 400 on a malformed request, 503 while no model is
loaded. Any server speaking this protocol is a valid backend.
"""

from __future__ import annotations

import random

from pydantic import BaseModel, Field

DISTRIBUTION_SUM_TOLERANCE = 1e-6


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


def conformance_pairs(n: int = 100, seed: int = 7) -> list[dict]:
    """Deterministic pseudo-random premise/hypothesis pairs for conformance."""
    rng = random.Random(seed)
    nouns = ["battery", "screen", "pasta", "service", "keyboard", "plot", "wine"]
    verbs = ["love", "hate", "bought", "tried", "returned", "kept"]
    pairs = []
    for _ in range(n):
        noun = rng.choice(nouns)
        premise = f"I {rng.choice(verbs)} the {noun} of this one."
        hypothesis = rng.choice([f"The product has {noun}.", f"{noun} is great."])
        pairs.append({"premise": premise, "hypothesis": hypothesis})
    return pairs


def run_conformance(client, unloaded_client=None) -> list[str]:
    """Protocol conformance against an httpx-compatible client.

    Returns a list of human-readable failures; an empty list means the
    server conforms. `unloaded_client`, when given, must point at a server
    without a loaded model and is checked for the 503 answer.
    """
    failures: list[str] = []

    response = client.get("/v1/health")
    if response.status_code != 200:
        failures.append(f"health: expected 200, got {response.status_code}")
    else:
        body = response.json()
        if body.get("status") != "ok" or "model" not in body:
            failures.append(f"health: bad body {body!r}")

    pairs = conformance_pairs()
    response = client.post("/v1/classify", json={"pairs": pairs})
    if response.status_code != 200:
        failures.append(f"classify: expected 200, got {response.status_code}")
    else:
        predictions = response.json().get("predictions")
        if not isinstance(predictions, list) or len(predictions) != len(pairs):
            failures.append("classify: prediction count mismatch")
        else:
            for i, p in enumerate(predictions):
                try:
                    total = float(p["entailment"]) + float(p["neutral"]) + float(p["contradiction"])
                except (KeyError, TypeError, ValueError):
                    failures.append(f"classify: prediction {i} malformed: {p!r}")
                    break
                if abs(total - 1.0) > DISTRIBUTION_SUM_TOLERANCE:
                    failures.append(f"classify: prediction {i} sums to {total}")
                    break

    for bad_payload in ({"pairs": []}, {"nope": 1}, {"pairs": [{"premise": "x"}]}):
        response = client.post("/v1/classify", json=bad_payload)
        if response.status_code != 400:
            failures.append(
                f"classify: malformed payload {bad_payload!r} -> "
                f"{response.status_code}, expected 400"
            )

    if unloaded_client is not None:
        response = unloaded_client.post(
            "/v1/classify", json={"pairs": [{"premise": "a", "hypothesis": "b"}]}
        )
        if response.status_code != 503:
            failures.append(f"unloaded classify: expected 503, got {response.status_code}")

    return failures
