"""LLM provider abstraction: one interface, an HTTP client, and a mock.

Every model interaction in the system goes through ``complete(request)``,
which returns a dict already validated against the request's JSON schema.
The HTTP provider talks to any chat-completions-style endpoint; the mock
synthesizes deterministic responses keyed on (kind, rubric id, document
hash, seed) so the whole test suite runs with no network.

De-identification: requests carry draft text and rubric wording only —
callers never put student identifiers into prompts or context.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol

import httpx
import jsonschema

from .errors import ProviderError

# Request kinds understood by providers.
K_EXTRACT = "extract"
K_JUDGE = "judge"
K_GENERATE = "generate"
K_SEGMENT = "segment"
K_CLASSIFY = "classify"
K_RATE = "rate"


def sha_text(text: str) -> str:
    """Short stable content hash used for cache keys and mock keying."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def derive_seed(*parts: object) -> int:
    """Stable cross-process seed from arbitrary parts (no salted hash())."""
    blob = ":".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


@dataclass(frozen=True)
class ProviderConfig:
    """Connection and sampling settings for a chat-completions provider."""

    model_id: str = "mock"
    temperature: float = 0.05
    timeout: float = 60.0
    max_retries: int = 3
    base_url: str = ""
    api_key_env: str = "REDPEN_API_KEY"

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ProviderError(
                f"temperature must be within [0, 2], got {self.temperature}"
            )
        if self.max_retries < 0:
            raise ProviderError("max_retries must be nonnegative")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ProviderConfig":
        known = {k: data[k] for k in (
            "model_id", "temperature", "timeout", "max_retries", "base_url", "api_key_env"
        ) if k in data}
        return cls(**known)


@dataclass(frozen=True)
class ProviderRequest:
    """One model call.

    ``prompt`` is the fully rendered text an HTTP provider sends; ``context``
    is the structured data it was rendered from, which the mock provider
    uses directly.  ``schema`` is the JSON schema the response must satisfy.
    """

    kind: str
    prompt: str
    schema: dict[str, Any]
    context: dict[str, Any] = field(default_factory=dict)
    rubric_id: str | None = None
    doc_sha: str = ""
    seed: int = 0


class ChatProvider(Protocol):
    def complete(self, request: ProviderRequest) -> dict[str, Any]:
        """Return a schema-valid response dict or raise ProviderError."""
        ...


# ---------------------------------------------------------------------------
# HTTP provider
# ---------------------------------------------------------------------------

SYSTEM_PREAMBLE = (
    "You are a writing-feedback engine assisting a course grader. "
    "Always reply with a single JSON object that matches the requested "
    "schema exactly — no prose, no markdown fences."
)

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}
_FENCE_RE = re.compile(r"^\s*```(?:json)?\s*(.*?)\s*```\s*$", re.DOTALL)


def _parse_validated(raw: str, schema: dict[str, Any]) -> dict[str, Any]:
    stripped = raw.strip()
    fenced = _FENCE_RE.match(stripped)
    if fenced:
        stripped = fenced.group(1)
    data = json.loads(stripped)
    jsonschema.validate(data, schema)
    if not isinstance(data, dict):
        raise jsonschema.ValidationError("response must be a JSON object")
    return data


class HttpChatProvider:
    """Chat-completions client with transport retries and one repair retry.

    Transport errors and retryable statuses back off exponentially for up
    to ``max_retries`` attempts.  A response that fails JSON parsing or
    schema validation gets exactly one repair round-trip (the error is
    echoed back to the model); a second failure raises ProviderError.
    Safe for concurrent use.
    """

    def __init__(self, config: ProviderConfig, client: httpx.Client | None = None):
        if not config.base_url:
            raise ProviderError("HTTP provider requires base_url")
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout)

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise ProviderError(
                f"provider credential not set (export {self.config.api_key_env})"
            )
        return key

    def _send(self, messages: list[dict[str, str]], seed: int) -> str:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        body = {
            "model": self.config.model_id,
            "temperature": self.config.temperature,
            "seed": seed,
            "messages": messages,
        }
        headers = {"Authorization": f"Bearer {self._api_key()}"}
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries):
            try:
                response = self._client.post(url, json=body, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
            else:
                if response.status_code == 200:
                    try:
                        return response.json()["choices"][0]["message"]["content"]
                    except (KeyError, IndexError, ValueError) as exc:
                        raise ProviderError(
                            f"malformed completion envelope: {exc}"
                        ) from exc
                if response.status_code not in _RETRYABLE_STATUS:
                    raise ProviderError(
                        f"provider returned HTTP {response.status_code}: "
                        f"{response.text[:200]}"
                    )
                last_error = ProviderError(f"HTTP {response.status_code}")
            if attempt + 1 < self.config.max_retries:
                time.sleep(0.5 * 2**attempt)
        raise ProviderError(f"provider unreachable after retries: {last_error}")

    def complete(self, request: ProviderRequest) -> dict[str, Any]:
        messages = [
            {"role": "system", "content": SYSTEM_PREAMBLE},
            {"role": "user", "content": request.prompt},
        ]
        raw = self._send(messages, request.seed)
        try:
            return _parse_validated(raw, request.schema)
        except (json.JSONDecodeError, jsonschema.ValidationError) as first_error:
            repair = messages + [
                {"role": "assistant", "content": raw},
                {
                    "role": "user",
                    "content": (
                        "That reply was rejected: "
                        f"{str(first_error).splitlines()[0][:300]}. "
                        "Reply again with only a valid JSON object matching "
                        "the required schema."
                    ),
                },
            ]
            raw = self._send(repair, request.seed)
            try:
                return _parse_validated(raw, request.schema)
            except (json.JSONDecodeError, jsonschema.ValidationError) as exc:
                raise ProviderError(
                    f"{request.kind} response invalid after repair retry: {exc}"
                ) from exc


# ---------------------------------------------------------------------------
# Mock provider
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"[a-z0-9']+")

_STOPWORDS = frozenset(
    "a an the and or but of to in on for with is are was were be been this "
    "that it its as at by from not no do does did their there they you your "
    "we our i he she his her them then than so if about into out up down".split()
)

_CONSTRUCTIVE_VERBS = ("Consider", "Revisit", "Reexamine", "Take another look at")
_POSITIVE_OPENERS = ("Great job on", "Nice work on", "Well done on", "Strong work on")
_FOCI = (
    "the key requirement",
    "the missing detail",
    "what the criterion asks for",
    "the specific claim involved",
    "how the pieces connect",
    "the underlying mechanism",
)

_PRAISE_WORDS = ("great", "good job", "well done", "nice", "excellent", "strong work")
_PROBLEM_WORDS = (
    "missing", "lacks", "incorrect", "does not", "doesn't", "didn't",
    "no mention", "not address", "unclear", "confus", "wrong", "there are no",
    "forgot", "left out",
)
_SOLUTION_STARTS = (
    "consider", "try", "add", "discuss", "remember", "revisit", "explain",
    "include", "compare", "describe", "think about", "look at", "expand",
)
_SUMMARY_MARKERS = ("you mentioned", "you said", "you wrote", "you argued", "you state")
_MECHANICS_WORDS = ("grammar", "spelling", "typo", "punctuation", "citation")
_BAD_TONE_WORDS = ("terrible", "awful", "lazy", "stupid", "worthless", "pathetic")
_ANSWER_GIVEAWAYS = ("the answer is", "the correct answer", "you should write exactly")
_ACTION_VERBS = (
    "add", "discuss", "explain", "compare", "revise", "consider", "include",
    "describe", "define", "connect", "expand", "address",
)


def _tokens(text: str) -> set[str]:
    return {t for t in _TOKEN_RE.findall(text.casefold()) if t not in _STOPWORDS}


ScriptValue = "dict[str, Any] | Exception | Callable[[ProviderRequest], Any]"


class MockProvider:
    """Deterministic offline provider.

    Responses are a pure function of (kind, rubric_id, doc_sha, seed) plus
    the request's structured context — no network, no wall clock.  Tests
    can override any response via ``script``: keys are, from most to least
    specific, ``(kind, rubric_id, doc_sha, seed)``, ``(kind, rubric_id,
    doc_sha)``, ``(kind, rubric_id)``, or ``kind``; values are a response
    dict (schema-checked), an Exception to raise, or a callable taking the
    request.  All served requests are recorded in ``calls``.
    """

    def __init__(self, script: dict[Any, Any] | None = None):
        self.script = dict(script or {})
        self.calls: list[ProviderRequest] = []
        self._lock = threading.Lock()

    @staticmethod
    def key(request: ProviderRequest) -> tuple[str, str, str, int]:
        return (request.kind, request.rubric_id or "", request.doc_sha, request.seed)

    def _rng(self, request: ProviderRequest) -> random.Random:
        return random.Random(":".join(map(str, self.key(request))))

    def _scripted(self, request: ProviderRequest) -> Any | None:
        kind, rubric, sha, seed = self.key(request)
        for key in ((kind, rubric, sha, seed), (kind, rubric, sha), (kind, rubric), kind):
            if key in self.script:
                return self.script[key]
        return None

    def complete(self, request: ProviderRequest) -> dict[str, Any]:
        with self._lock:
            self.calls.append(request)
        value = self._scripted(request)
        if value is not None:
            if isinstance(value, Exception):
                raise value
            if callable(value):
                value = value(request)
                if isinstance(value, Exception):
                    raise value
            try:
                jsonschema.validate(value, request.schema)
            except jsonschema.ValidationError as exc:
                raise ProviderError(
                    f"{request.kind} response invalid after repair retry: "
                    f"{exc.message}"
                ) from exc
            return value
        response = self._synthesize(request)
        jsonschema.validate(response, request.schema)  # keep the mock honest
        return response

    # -- synthesized behaviors, one per kind --------------------------------

    def _synthesize(self, request: ProviderRequest) -> dict[str, Any]:
        ctx = request.context
        if request.kind == K_EXTRACT:
            return self._extract(ctx)
        if request.kind == K_JUDGE:
            return self._judge(request, ctx)
        if request.kind == K_GENERATE:
            return self._generate(request, ctx)
        if request.kind == K_SEGMENT:
            return self._segment(ctx)
        if request.kind == K_CLASSIFY:
            return self._classify(ctx)
        if request.kind == K_RATE:
            return self._rate(ctx)
        raise ProviderError(f"mock provider does not understand kind {request.kind!r}")

    def _extract(self, ctx: dict[str, Any]) -> dict[str, Any]:
        """Top 3 sentences by content-token overlap with the rubric."""
        rubric_tokens = _tokens(
            str(ctx.get("rubric_text", "")) + " " + str(ctx.get("context_terms", ""))
        )
        scored: list[tuple[int, int, str]] = []
        for index, sentence in enumerate(ctx.get("sentences", ())):
            overlap = len(_tokens(sentence) & rubric_tokens)
            if overlap >= 1:
                scored.append((-overlap, index, sentence))
        scored.sort()
        return {"quotes": [sentence for _, _, sentence in scored[:3]]}

    def _judge(self, request: ProviderRequest, ctx: dict[str, Any]) -> dict[str, Any]:
        excerpts = list(ctx.get("excerpts", ()))
        if not excerpts:
            return {"rationale": "no relevant sentences found", "met": False}
        met = self._rng(request).random() < 0.5
        topic = str(ctx.get("rubric_text", ""))[:60].strip() or "the criterion"
        rationale = (
            f"The highlighted text {'addresses' if met else 'does not fully address'} "
            f"{topic}"
        )
        return {"rationale": rationale, "met": met}

    def _generate(self, request: ProviderRequest, ctx: dict[str, Any]) -> dict[str, Any]:
        met = bool(ctx.get("met", False))
        attempt = int(ctx.get("attempt", 0))
        rubric_id = request.rubric_id or str(ctx.get("rubric_id", "rubric"))
        excerpt = str(ctx.get("rationale", "")).strip().rstrip(".!?")[:80]
        excerpt = excerpt or "the criterion"
        if attempt == 0:
            if met:
                return {"feedback": f"Great job on rubric {rubric_id}: {excerpt}!"}
            return {"feedback": f"Consider rubric {rubric_id}: {excerpt}?"}
        rng = self._rng(request)
        focus = _FOCI[(rng.randrange(len(_FOCI)) + attempt) % len(_FOCI)]
        if met:
            opener = _POSITIVE_OPENERS[attempt % len(_POSITIVE_OPENERS)]
            return {"feedback": f"{opener} rubric {rubric_id}: {excerpt} ({focus})!"}
        verb = _CONSTRUCTIVE_VERBS[attempt % len(_CONSTRUCTIVE_VERBS)]
        return {"feedback": f"{verb} rubric {rubric_id}: {excerpt} (focus on {focus})?"}

    def _segment(self, ctx: dict[str, Any]) -> dict[str, Any]:
        """Split on sentence-ish boundaries; link by token overlap ≥ 2."""
        message = str(ctx.get("message", ""))
        rubrics = [(str(r["id"]), _tokens(str(r["text"]))) for r in ctx.get("rubrics", ())]
        pieces = [p for p in re.split(r"(?<=[.!?])\s+", message) if p.strip()]
        if not pieces:
            pieces = [message]
        units = []
        for piece in pieces:
            piece_tokens = _tokens(piece)
            links = [rid for rid, rtoks in rubrics if len(piece_tokens & rtoks) >= 2]
            units.append({"text": piece, "rubric_ids": links})
        return {"units": units}

    def _classify(self, ctx: dict[str, Any]) -> dict[str, Any]:
        text = str(ctx.get("unit_text", ""))
        lowered = text.casefold()
        praise = any(w in lowered for w in _PRAISE_WORDS)
        problem = any(w in lowered for w in _PROBLEM_WORDS)
        solution = (
            "?" in text
            or "should" in lowered
            or any(lowered.startswith(v) or f" {v} " in lowered for v in _SOLUTION_STARTS)
        )
        summary = any(m in lowered for m in _SUMMARY_MARKERS)
        if not (praise or problem or solution or summary):
            summary = True
        mechanics = any(w in lowered for w in _MECHANICS_WORDS)
        return {
            "summary": summary,
            "praise": praise,
            "problem": problem,
            "solution": solution,
            "prose_mechanics_only": mechanics,
        }

    def _rate(self, ctx: dict[str, Any]) -> dict[str, Any]:
        text = str(ctx.get("unit_text", ""))
        lowered = text.casefold()
        tone = not any(w in lowered for w in _BAD_TONE_WORDS)
        accuracy = "factually wrong" not in lowered
        gives_answer = any(g in lowered for g in _ANSWER_GIVEAWAYS)
        independence = ("?" in text or "think about" in lowered or "how" in lowered
                        or "why" in lowered or "what" in lowered) and not gives_answer
        actionability = "?" in text or any(
            lowered.startswith(v) or f" {v} " in lowered for v in _ACTION_VERBS
        )
        return {
            "accuracy": accuracy,
            "tone": tone,
            "independence": independence,
            "actionability": actionability,
        }
