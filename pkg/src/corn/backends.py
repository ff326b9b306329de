"""NLI classifier backends: gold-answer oracle, offline rule backend, HTTP client.

Every backend returns one probability triple per query, in query order, and
is deterministic for identical inputs (the HTTP client simply relays the
server's answers). Distributions are validated at the boundary.
"""

from __future__ import annotations

import os
import re
import time
from abc import ABC, abstractmethod
from collections.abc import Iterable, Mapping, Sequence

import httpx

from .casting import PromptConfig, Task, build_hypothesis
from .curation import AspectNotInClause, assign_polarity
from .evaluation import GoldSentence
from .labels import NliLabel, Polarity
from .lexicon import OpinionLexicon
from .nli import (
    BackendUnavailable,
    MalformedResponse,
    NliDistribution,
    NliQuery,
    UnknownPair,
)
from .text import Clause, find_term_occurrences, tokenize

DEFAULT_TIMEOUT_MS = 30_000
TIMEOUT_ENV_VAR = "CORN_HTTP_TIMEOUT_MS"

# ASC label -> the NLI answer that maps back to it.
_INVERSE_ASC = {
    Polarity.POS: NliLabel.ENTAILMENT,
    Polarity.NEU: NliLabel.NEUTRAL,
    Polarity.NEG: NliLabel.CONTRADICTION,
}


class NliBackend(ABC):
    name: str = "backend"

    @abstractmethod
    def classify_batch(self, queries: Sequence[NliQuery]) -> list[NliDistribution]:
        """One distribution per query, same order. Batch must be non-empty."""

    @staticmethod
    def _require_batch(queries: Sequence[NliQuery]) -> None:
        if not queries:
            raise ValueError("classify_batch requires a non-empty batch")


class OracleBackend(NliBackend):
    """Pure lookup over (premise, hypothesis) pairs.

    Strict mode raises UnknownPair on a miss; lenient mode answers with the
    configured default label (neutral unless told otherwise).
    """

    name = "oracle"

    def __init__(
        self,
        table: Mapping[tuple[str, str], NliLabel],
        strict: bool = False,
        default: NliLabel = NliLabel.NEUTRAL,
    ):
        self._table = dict(table)
        self._strict = strict
        self._default = default

    def __len__(self) -> int:
        return len(self._table)

    def classify_batch(self, queries: Sequence[NliQuery]) -> list[NliDistribution]:
        self._require_batch(queries)
        out = []
        for q in queries:
            key = (q.premise, q.hypothesis)
            if key in self._table:
                out.append(NliDistribution.one_hot(self._table[key]))
            elif self._strict:
                raise UnknownPair(f"no oracle answer for hypothesis {q.hypothesis!r}")
            else:
                out.append(NliDistribution.one_hot(self._default))
        return out


def oracle_from_gold(
    gold: Iterable[GoldSentence],
    cfg: PromptConfig = PromptConfig(),
    strict: bool = False,
) -> OracleBackend:
    """Oracle answering from gold annotations.

    AE queries on gold aspect spans are entailed and every other span is
    neutral (the lenient default); ASC / E2E-step-2 queries answer the
    inverse of the ASC label mapping, so casting them back reproduces gold.
    """
    table: dict[tuple[str, str], NliLabel] = {}
    for sentence in gold:
        premise = sentence.raw
        for aspect in sentence.aspects:
            term = " ".join(sentence.tokens[aspect.start : aspect.end])
            table[(premise, build_hypothesis(Task.AE, cfg, term))] = NliLabel.ENTAILMENT
            table[(premise, build_hypothesis(Task.ASC, cfg, term))] = _INVERSE_ASC[
                aspect.polarity
            ]
    return OracleBackend(table, strict=strict)


class RuleBackend(NliBackend):
    """Offline heuristic: substring aspect match plus lexicon polarity.

    Understands only hypotheses produced by this package's own templates.
    A smoke-test stand-in, explicitly not a faithful model substitute.
    """

    name = "rule"

    def __init__(
        self,
        lexicon: OpinionLexicon,
        cfg: PromptConfig = PromptConfig(),
        negation: bool = False,
    ):
        self._lexicon = lexicon
        self._cfg = cfg
        self._negation = negation
        self._ae_re = re.compile(
            "^"
            + re.escape(cfg.ae_template.format(domain=cfg.domain_label, span="\x00"))
            .replace("\x00", "(.+)")
            + "$"
        )
        self._asc_re = re.compile(
            "^" + re.escape(cfg.asc_template.format(aspect="\x00")).replace("\x00", "(.+)") + "$"
        )

    def classify_batch(self, queries: Sequence[NliQuery]) -> list[NliDistribution]:
        self._require_batch(queries)
        return [NliDistribution.one_hot(self._classify(q)) for q in queries]

    def _classify(self, query: NliQuery) -> NliLabel:
        ae = self._ae_re.match(query.hypothesis)
        premise_tokens = tokenize(query.premise).token_texts()
        if ae:
            term = ae.group(1).rstrip(".")
            if find_term_occurrences(premise_tokens, term):
                return NliLabel.ENTAILMENT
            return NliLabel.NEUTRAL
        asc = self._asc_re.match(query.hypothesis)
        if asc:
            term = asc.group(1)
            if not find_term_occurrences(premise_tokens, term):
                return NliLabel.NEUTRAL
            clause = Clause(sentence_id="", start=0, end=len(premise_tokens), text=query.premise)
            try:
                polarity, _ = assign_polarity(
                    clause, term, self._lexicon, negation=self._negation
                )
            except AspectNotInClause:
                return NliLabel.NEUTRAL
            return _INVERSE_ASC[polarity]
        return NliLabel.NEUTRAL


def http_timeout_ms() -> int:
    raw = os.environ.get(TIMEOUT_ENV_VAR, "")
    try:
        return int(raw) if raw else DEFAULT_TIMEOUT_MS
    except ValueError:
        return DEFAULT_TIMEOUT_MS


class HttpBackend(NliBackend):
    """Client for the batch classify protocol: POST {base_url}/v1/classify.

    Requests are chunked to `batch_size` pairs; connection failures and 5xx
    answers are retried `retries` times with exponential backoff before
    raising BackendUnavailable. Schema violations raise MalformedResponse.
    """

    name = "http"

    def __init__(
        self,
        base_url: str,
        batch_size: int = 32,
        retries: int = 3,
        backoff_seconds: float = 0.5,
        timeout_ms: int | None = None,
        client: httpx.Client | None = None,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self._base_url = base_url.rstrip("/")
        self._batch_size = batch_size
        self._retries = max(1, retries)
        self._backoff = backoff_seconds
        timeout = (timeout_ms if timeout_ms is not None else http_timeout_ms()) / 1000.0
        self._client = client or httpx.Client(timeout=timeout)

    def classify_batch(self, queries: Sequence[NliQuery]) -> list[NliDistribution]:
        self._require_batch(queries)
        out: list[NliDistribution] = []
        for i in range(0, len(queries), self._batch_size):
            out.extend(self._post_chunk(queries[i : i + self._batch_size]))
        return out

    def _post_chunk(self, chunk: Sequence[NliQuery]) -> list[NliDistribution]:
        payload = {
            "pairs": [{"premise": q.premise, "hypothesis": q.hypothesis} for q in chunk]
        }
        last_error: Exception | None = None
        for attempt in range(self._retries):
            if attempt:
                time.sleep(self._backoff * 2 ** (attempt - 1))
            try:
                response = self._client.post(f"{self._base_url}/v1/classify", json=payload)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code >= 500 or response.status_code == 503:
                last_error = BackendUnavailable(
                    f"server answered {response.status_code}"
                )
                continue
            if response.status_code != 200:
                raise MalformedResponse(
                    f"server rejected request with status {response.status_code}: "
                    f"{response.text[:200]}"
                )
            return self._parse(response, expected=len(chunk))
        raise BackendUnavailable(
            f"{self._base_url} unreachable after {self._retries} attempts: {last_error}"
        )

    @staticmethod
    def _parse(response: httpx.Response, expected: int) -> list[NliDistribution]:
        try:
            body = response.json()
        except ValueError as exc:
            raise MalformedResponse(f"response is not JSON: {exc}") from exc
        predictions = body.get("predictions") if isinstance(body, dict) else None
        if not isinstance(predictions, list) or len(predictions) != expected:
            raise MalformedResponse(
                f"expected {expected} predictions, got {predictions!r:.200}"
            )
        out = []
        for p in predictions:
            try:
                out.append(
                    NliDistribution(
                        p_entailment=float(p["entailment"]),
                        p_neutral=float(p["neutral"]),
                        p_contradiction=float(p["contradiction"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedResponse(f"bad prediction object {p!r}: {exc}") from exc
        return out

    def health(self) -> dict:
        try:
            response = self._client.get(f"{self._base_url}/v1/health")
            response.raise_for_status()
            return response.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise BackendUnavailable(f"health check failed: {exc}") from exc
