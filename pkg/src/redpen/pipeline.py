"""Per-rubric suggestion pipeline: extract evidence, judge, draft feedback.

For each rubric item the pipeline (1) asks the provider to quote the
sentences where the student addresses the criterion and grounds them into
character offsets, (2) asks for a met/not-met judgment with the rationale
written before the verdict, and (3) drafts a feedback suggestion whose
polarity matches the judgment — praise when met, a Socratic constructive
question when not.  Graders own everything downstream: no pipeline
operation ever writes ``final_text``.

With the mock provider every operation is a pure function of
(draft text, rubric set, seed), which the determinism tests rely on.
"""

from __future__ import annotations

import enum
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Any

from .anchoring import AnchorStatus, SpanAnchor, ground_quotes, segment_sentences, unanchored, validate_anchor
from .domain import Assignment, EssayDraft, RubricItem
from .errors import PipelineError, ProviderError
from .providers import (
    ChatProvider,
    K_EXTRACT,
    K_GENERATE,
    K_JUDGE,
    ProviderRequest,
    derive_seed,
    sha_text,
)

NO_EVIDENCE_RATIONALE = "no relevant sentences found"
STALE_SUGGESTION_TEXT = "Suggestion unavailable — regenerate to retry."


def _load_prompt(name: str) -> string.Template:
    text = resources.files("redpen.prompts").joinpath(f"{name}.txt").read_text("utf-8")
    return string.Template(text)


def prompt_version() -> str:
    return resources.files("redpen.prompts").joinpath("VERSION").read_text("utf-8").strip()


_TEMPLATES = {
    name: _load_prompt(name)
    for name in ("extract", "judge", "generate_constructive", "generate_positive")
}

EXTRACT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {"quotes": {"type": "array", "items": {"type": "string"}}},
    "required": ["quotes"],
    "additionalProperties": False,
}

JUDGE_SCHEMA: dict[str, Any] = {
    "type": "object",
    # Property order mirrors the required generation order: rationale first.
    "properties": {
        "rationale": {"type": "string", "minLength": 1},
        "met": {"type": "boolean"},
    },
    "required": ["rationale", "met"],
    "additionalProperties": False,
}

GENERATE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {"feedback": {"type": "string", "minLength": 1}},
    "required": ["feedback"],
    "additionalProperties": False,
}


class SuggestionKind(str, enum.Enum):
    AI_CONSTRUCTIVE = "ai_constructive"
    AI_POSITIVE = "ai_positive"
    HISTORIC = "historic"


@dataclass(frozen=True)
class Judgment:
    """Met/not-met verdict; the rationale is always produced first and is
    never empty."""

    met: bool
    rationale: str

    def __post_init__(self) -> None:
        if not self.rationale.strip():
            raise PipelineError("judgment rationale must be nonempty")

    def to_dict(self) -> dict[str, Any]:
        return {"rationale": self.rationale, "met": self.met}


@dataclass(frozen=True)
class FeedbackSuggestion:
    kind: SuggestionKind
    text: str
    stale: bool = False  # placeholder left behind by a failed regeneration

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise PipelineError("suggestion text must be nonempty")

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind.value, "text": self.text}
        if self.stale:
            doc["stale"] = True
        return doc


@dataclass(frozen=True)
class SuggestionBundle:
    """Everything the grader sees for one rubric item.

    ``final_text`` starts empty and is only ever written by grader actions
    in the grading service — never by pipeline code.  ``error`` is set when
    this rubric's provider calls failed; such bundles carry no judgment or
    AI suggestion but keep the (deterministic) historic suggestion.
    """

    rubric_id: str
    anchor: SpanAnchor
    judgment: Judgment | None
    ai_suggestion: FeedbackSuggestion | None
    historic_suggestion: FeedbackSuggestion | None = None
    final_text: str = ""
    adopted_from: str | None = None  # "ai" | "historic"
    history: tuple[FeedbackSuggestion, ...] = ()
    error: str | None = None

    def __post_init__(self) -> None:
        if self.error is None:
            if self.judgment is None or self.ai_suggestion is None:
                raise PipelineError(
                    f"rubric {self.rubric_id!r}: non-error bundle requires "
                    "judgment and ai_suggestion", rubric_id=self.rubric_id
                )
            expected = (
                SuggestionKind.AI_POSITIVE
                if self.judgment.met
                else SuggestionKind.AI_CONSTRUCTIVE
            )
            if self.ai_suggestion.kind is not expected:
                raise PipelineError(
                    f"rubric {self.rubric_id!r}: judgment.met={self.judgment.met} "
                    f"requires {expected.value}, got {self.ai_suggestion.kind.value}",
                    rubric_id=self.rubric_id,
                )
        if self.adopted_from not in (None, "ai", "historic"):
            raise PipelineError(f"bad adopted_from: {self.adopted_from!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "rubric_id": self.rubric_id,
            "anchor": self.anchor.to_dict(),
            "judgment": None if self.judgment is None else {
                "rationale": self.judgment.rationale, "met": self.judgment.met
            },
            "ai_suggestion": None if self.ai_suggestion is None else self.ai_suggestion.to_dict(),
            "historic_suggestion": None if self.historic_suggestion is None
            else self.historic_suggestion.to_dict(),
            "final_text": self.final_text,
            "adopted_from": self.adopted_from,
            "history": [s.to_dict() for s in self.history],
            "error": self.error,
        }


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    parallelism: int = 4


# ---------------------------------------------------------------------------
# Prompt assembly
# ---------------------------------------------------------------------------


def _notes_block(rubric: RubricItem) -> str:
    if rubric.refinement_notes is None:
        return "(no additional notes)"
    notes = rubric.refinement_notes.to_dict()
    if not notes:
        return "(no additional notes)"
    lines = [f"- {key.replace('_', ' ')}: {value}" for key, value in notes.items()]
    return "Notes on this criterion:\n" + "\n".join(lines)


def _anchor_excerpts(anchor: SpanAnchor, draft_text: str) -> list[str]:
    return [draft_text[start:end] for start, end in anchor.ranges]


def _highlight_block(anchor: SpanAnchor, draft_text: str) -> str:
    excerpts = _anchor_excerpts(anchor, draft_text)
    return "\n".join(f"- {e}" for e in excerpts) if excerpts else "(none found)"


# ---------------------------------------------------------------------------
# Pipeline operations
# ---------------------------------------------------------------------------


def extract_relevant_sentences(
    draft: EssayDraft,
    rubric: RubricItem,
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> SpanAnchor:
    """Ask the provider for evidence quotes and ground them into the draft.

    The quotes are matched to sentences by ``ground_quotes`` and the
    resulting anchor is normalized through ``validate_anchor``; an essay
    with no relevant sentences (or an empty essay) yields an unanchored
    result rather than an error.
    """
    doc_sha = sha_text(draft.text)
    sentences = [
        draft.text[span.start : span.end] for span in segment_sentences(draft.text)
    ]
    notes = rubric.refinement_notes
    prompt = _TEMPLATES["extract"].substitute(
        rubric_text=rubric.text,
        refinement_notes=_notes_block(rubric),
        essay_text=draft.text,
    )
    request = ProviderRequest(
        kind=K_EXTRACT,
        prompt=prompt,
        schema=EXTRACT_SCHEMA,
        context={
            "rubric_text": rubric.text,
            "context_terms": "" if notes is None else (notes.context_terms or ""),
            "sentences": sentences,
        },
        rubric_id=rubric.id,
        doc_sha=doc_sha,
        seed=derive_seed(seed, doc_sha, rubric.id, K_EXTRACT),
    )
    try:
        payload = provider.complete(request)
    except ProviderError as exc:
        raise PipelineError(str(exc), rubric_id=rubric.id) from exc
    anchor = ground_quotes(draft, payload["quotes"])
    return validate_anchor(anchor, draft)


def judge_rubric(
    draft: EssayDraft,
    rubric: RubricItem,
    anchor: SpanAnchor,
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> Judgment:
    """Judge the criterion from its anchored evidence.

    An unanchored anchor forces met=false with a fixed rationale and makes
    no provider call — absence of evidence cannot satisfy a criterion.
    """
    if anchor.status is AnchorStatus.UNANCHORED:
        return Judgment(met=False, rationale=NO_EVIDENCE_RATIONALE)
    doc_sha = sha_text(draft.text)
    prompt = _TEMPLATES["judge"].substitute(
        rubric_text=rubric.text,
        refinement_notes=_notes_block(rubric),
        highlighted=_highlight_block(anchor, draft.text),
    )
    request = ProviderRequest(
        kind=K_JUDGE,
        prompt=prompt,
        schema=JUDGE_SCHEMA,
        context={
            "rubric_text": rubric.text,
            "excerpts": _anchor_excerpts(anchor, draft.text),
        },
        rubric_id=rubric.id,
        doc_sha=doc_sha,
        seed=derive_seed(seed, doc_sha, rubric.id, K_JUDGE),
    )
    try:
        payload = provider.complete(request)
    except ProviderError as exc:
        raise PipelineError(str(exc), rubric_id=rubric.id) from exc
    return Judgment(met=bool(payload["met"]), rationale=payload["rationale"])


def generate_feedback(
    draft: EssayDraft,
    rubric: RubricItem,
    judgment: Judgment,
    anchor: SpanAnchor,
    exemplars: tuple[str, ...],
    provider: ChatProvider,
    *,
    seed: int = 0,
    attempt: int = 0,
) -> FeedbackSuggestion:
    """Draft the AI suggestion whose polarity matches the judgment.

    ``attempt`` distinguishes regenerations: each attempt is seeded
    separately so repeated calls produce different (but reproducible) text.
    """
    met = judgment.met
    template = _TEMPLATES["generate_positive" if met else "generate_constructive"]
    doc_sha = sha_text(draft.text)
    fields: dict[str, str] = {
        "rubric_text": rubric.text,
        "rationale": judgment.rationale,
        "highlighted": _highlight_block(anchor, draft.text),
        "exemplar_questions": "\n".join(f"- {q}" for q in exemplars),
    }
    if not met:
        fields["historic_examples"] = (
            "\n".join(f"- {h}" for h in rubric.historic_feedback) or "(none)"
        )
    prompt = template.substitute(fields)
    request = ProviderRequest(
        kind=K_GENERATE,
        prompt=prompt,
        schema=GENERATE_SCHEMA,
        context={
            "met": met,
            "rationale": judgment.rationale,
            "attempt": attempt,
            "rubric_id": rubric.id,
        },
        rubric_id=rubric.id,
        doc_sha=doc_sha,
        seed=derive_seed(seed, doc_sha, rubric.id, K_GENERATE, attempt),
    )
    try:
        payload = provider.complete(request)
    except ProviderError as exc:
        raise PipelineError(str(exc), rubric_id=rubric.id) from exc
    kind = SuggestionKind.AI_POSITIVE if met else SuggestionKind.AI_CONSTRUCTIVE
    return FeedbackSuggestion(kind=kind, text=payload["feedback"])


def historic_suggestion_for(rubric: RubricItem) -> FeedbackSuggestion | None:
    """The deterministic historic card: first curated comment, if any."""
    if not rubric.historic_feedback:
        return None
    return FeedbackSuggestion(kind=SuggestionKind.HISTORIC, text=rubric.historic_feedback[0])


def build_bundle(
    draft: EssayDraft,
    rubric: RubricItem,
    exemplars: tuple[str, ...],
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> SuggestionBundle:
    """Run extract → judge → generate for one rubric item."""
    anchor = extract_relevant_sentences(draft, rubric, provider, seed=seed)
    judgment = judge_rubric(draft, rubric, anchor, provider, seed=seed)
    suggestion = generate_feedback(
        draft, rubric, judgment, anchor, exemplars, provider, seed=seed, attempt=0
    )
    return SuggestionBundle(
        rubric_id=rubric.id,
        anchor=anchor,
        judgment=judgment,
        ai_suggestion=suggestion,
        historic_suggestion=historic_suggestion_for(rubric),
    )


def run_pipeline(
    draft: EssayDraft,
    assignment: Assignment,
    provider: ChatProvider,
    config: PipelineConfig | None = None,
) -> list[SuggestionBundle]:
    """One bundle per rubric item, in rubric order.

    Rubrics are processed concurrently; a failure on one rubric yields an
    error-flagged bundle for it and never disturbs the others.
    """
    config = config or PipelineConfig()

    def one(rubric: RubricItem) -> SuggestionBundle:
        try:
            return build_bundle(
                draft, rubric, assignment.exemplar_questions, provider, seed=config.seed
            )
        except PipelineError as exc:
            return SuggestionBundle(
                rubric_id=rubric.id,
                anchor=unanchored(draft.essay_id),
                judgment=None,
                ai_suggestion=None,
                historic_suggestion=historic_suggestion_for(rubric),
                error=str(exc),
            )

    if config.parallelism <= 1 or len(assignment.rubric_items) <= 1:
        return [one(rubric) for rubric in assignment.rubric_items]
    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        return list(pool.map(one, assignment.rubric_items))


def flip_judgment(
    bundle: SuggestionBundle,
    draft: EssayDraft,
    rubric: RubricItem,
    exemplars: tuple[str, ...],
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> SuggestionBundle:
    """Grader override: negate the judgment and regenerate with the new
    polarity.  Anchor and final_text are untouched; the old suggestion goes
    to history.  If regeneration fails the flip still happens, with a
    stale placeholder suggestion."""
    if bundle.judgment is None or bundle.ai_suggestion is None:
        raise PipelineError(
            f"rubric {bundle.rubric_id!r}: cannot flip an error bundle",
            rubric_id=bundle.rubric_id,
        )
    flipped = Judgment(met=not bundle.judgment.met, rationale=bundle.judgment.rationale)
    attempt = len(bundle.history) + 1
    try:
        suggestion = generate_feedback(
            draft, rubric, flipped, bundle.anchor, exemplars, provider,
            seed=seed, attempt=attempt,
        )
    except PipelineError:
        kind = (
            SuggestionKind.AI_POSITIVE if flipped.met else SuggestionKind.AI_CONSTRUCTIVE
        )
        suggestion = FeedbackSuggestion(kind=kind, text=STALE_SUGGESTION_TEXT, stale=True)
    return replace(
        bundle,
        judgment=flipped,
        ai_suggestion=suggestion,
        history=bundle.history + (bundle.ai_suggestion,),
    )


def regenerate_feedback(
    bundle: SuggestionBundle,
    draft: EssayDraft,
    rubric: RubricItem,
    exemplars: tuple[str, ...],
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> SuggestionBundle:
    """New AI suggestion for the current judgment; the old one is retained
    in history.  On provider failure the bundle is returned unchanged —
    the error propagates to the caller."""
    if bundle.judgment is None or bundle.ai_suggestion is None:
        raise PipelineError(
            f"rubric {bundle.rubric_id!r}: cannot regenerate an error bundle",
            rubric_id=bundle.rubric_id,
        )
    attempt = len(bundle.history) + 1
    suggestion = generate_feedback(
        draft, rubric, bundle.judgment, bundle.anchor, exemplars, provider,
        seed=seed, attempt=attempt,
    )
    return replace(
        bundle,
        ai_suggestion=suggestion,
        history=bundle.history + (bundle.ai_suggestion,),
    )


def bundles_to_json(bundles: list[SuggestionBundle]) -> str:
    """Canonical serialization used by the determinism checks."""
    import json

    return json.dumps([b.to_dict() for b in bundles], sort_keys=True, ensure_ascii=False)
