"""Grading workflow: sessions, action dispatch, finalize/export.

Single-writer rule: one grader holds an essay at a time (open acquires,
close/finalize release; a second grader gets 409).  Every mutation is an
event appended to the assignment's log; the state change is produced by
the same ``apply_event`` transition that offline replay uses, and the
event is validated against the state *before* it is appended, so the log
and the live state cannot diverge.

Baseline sessions never touch the suggestion pipeline: their session
payloads, views, and events carry no AI judgment or suggestion fields,
only empty per-rubric scaffolds plus a pointer to the rubric/historic
reference sheet.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping

from ..analytics import (
    EssayState,
    EventAction,
    GradingEvent,
    apply_event,
    corpus_adoption,
    freeform_box_id,
    replay_essay,
    rubric_box_id,
    summarize_log,
)
from ..anchoring import AnchorStatus, compute_diff, reanchor
from ..domain import Assignment, Condition, EssayDraft, Stage, load_draft_corpus
from ..errors import PipelineError, ServiceError, ValidationError
from ..pipeline import (
    PipelineConfig,
    SuggestionBundle,
    flip_judgment,
    prompt_version,
    regenerate_feedback,
    run_pipeline,
)
from ..providers import ChatProvider, sha_text
from ..scoring import score_essay
from .store import DocumentStore, Session

SESSION_ACTIONS = frozenset(
    {"flip", "adopt_ai", "adopt_historic", "edit_final_text", "regenerate",
     "reposition", "add_freeform", "delete_feedback", "set_score"}
)

BASELINE_FORBIDDEN = frozenset({"flip", "adopt_ai", "adopt_historic", "regenerate"})


@dataclass(frozen=True)
class ExportComment:
    box_id: str
    rubric_id: str | None
    excerpt: str
    final_text: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "box_id": self.box_id,
            "rubric_id": self.rubric_id,
            "excerpt": self.excerpt,
            "final_text": self.final_text,
        }


@dataclass(frozen=True)
class FeedbackExport:
    """What goes back to the student: grader-confirmed texts and the score."""

    essay_id: str
    student_id: str
    assignment_id: str
    score: str
    comments: tuple[ExportComment, ...]
    condition: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "essay_id": self.essay_id,
            "student_id": self.student_id,
            "assignment_id": self.assignment_id,
            "score": self.score,
            "comments": [c.to_dict() for c in self.comments],
            "condition": self.condition,
        }


def _suggestion_kind_label(kind_value: str) -> str:
    # "ai_constructive" -> "constructive", "ai_positive" -> "positive"
    return kind_value.removeprefix("ai_")


class GradingService:
    def __init__(
        self,
        store: DocumentStore,
        provider: ChatProvider,
        *,
        seed: int = 0,
        parallelism: int = 4,
        clock: Callable[[], float] = time.time,
    ) -> None:
        self.store = store
        self.provider = provider
        self.seed = seed
        self.parallelism = parallelism
        self.clock = clock
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # -- infrastructure ---------------------------------------------------

    def _essay_lock(self, essay_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(essay_id, threading.Lock())

    def _record(self, session: Session, action: EventAction,
                grader_id: str, payload: dict[str, Any]) -> GradingEvent:
        """Validate-then-append: apply_event runs first (it validates before
        mutating), so a rejected action leaves both state and log untouched."""
        log = self.store.log(session.assignment.id)
        essay_id = session.state.essay_id
        history = log.events_for_essay(essay_id)
        timestamp = self.clock()
        if history:
            timestamp = max(timestamp, history[-1].timestamp)
        event = GradingEvent(
            event_id=log.next_event_id(essay_id),
            timestamp=timestamp,
            grader_id=grader_id,
            essay_id=essay_id,
            action=action,
            payload=payload,
        )
        apply_event(session.state, event)
        log.append(event)
        return event

    def _require_session(self, essay_id: str) -> Session:
        session = self.store.session(essay_id)
        if session is None:
            raise ServiceError(f"no grading session for essay {essay_id!r}",
                               status_code=404)
        return session

    def _require_holder(self, session: Session, grader_id: str) -> None:
        if not session.state.is_open:
            raise ServiceError(
                f"grading session for {session.state.essay_id!r} is closed",
                status_code=409,
            )
        if session.state.grader_id != grader_id:
            raise ServiceError(
                f"essay {session.state.essay_id!r} is held by grader "
                f"{session.state.grader_id!r}",
                status_code=409,
            )

    # -- corpus -----------------------------------------------------------

    def import_drafts(self, source: str | Iterable[Mapping[str, Any]]) -> dict[str, Any]:
        """Ingest a JSONL corpus (path/text) or an iterable of records."""
        if isinstance(source, str):
            drafts, rejects = load_draft_corpus(source)
        else:
            drafts = [EssayDraft.from_dict(dict(r)) for r in source]
            rejects = []
        added, skipped = self.store.ingest_drafts(drafts)
        return {
            "imported": added,
            "rejected": rejects + skipped,
            "imported_count": len(added),
            "rejected_count": len(rejects) + len(skipped),
        }

    # -- pipeline ------------------------------------------------------------

    def _cache_key(self, assignment: Assignment) -> str:
        rubric_sha = sha_text("|".join(sorted(assignment.rubric_ids)))
        return f"{rubric_sha}:{prompt_version()}:{self.seed}"

    def bundles_for(self, draft: EssayDraft, assignment: Assignment) -> list[SuggestionBundle]:
        """Pipeline results, cached per (essay, rubric set, prompt version,
        seed) so reopening or precomputing never recomputes."""
        key = self._cache_key(assignment)
        cached = self.store.cached_bundles(draft.essay_id, key)
        if cached is not None:
            return list(cached)
        bundles = run_pipeline(
            draft, assignment, self.provider,
            PipelineConfig(seed=self.seed, parallelism=self.parallelism),
        )
        self.store.put_bundles(draft.essay_id, key, bundles)
        return bundles

    def precompute(self, essay_ids: Iterable[str]) -> dict[str, int]:
        """Warm the pipeline cache (feedback-writer essays only)."""
        computed = 0
        skipped = 0
        for essay_id in essay_ids:
            draft = self.store.draft(essay_id)
            if self.store.condition(draft.student_id, draft.assignment_id) is Condition.BASELINE:
                skipped += 1
                continue
            self.bundles_for(draft, self.store.assignment(draft.assignment_id))
            computed += 1
        return {"computed": computed, "skipped_baseline": skipped}

    # -- sessions ----------------------------------------------------------------

    def open_session(self, essay_id: str, grader_id: str) -> dict[str, Any]:
        with self._essay_lock(essay_id):
            existing = self.store.session(essay_id)
            if existing is not None:
                if existing.state.is_open:
                    if existing.state.grader_id == grader_id:
                        return self.session_view(essay_id)  # resume
                    raise ServiceError(
                        f"essay {essay_id!r} is held by grader "
                        f"{existing.state.grader_id!r}",
                        status_code=409,
                    )
                raise ServiceError(
                    f"essay {essay_id!r} has already been graded", status_code=409
                )
            draft = self.store.draft(essay_id)
            assignment = self.store.assignment(draft.assignment_id)
            condition = self.store.condition(draft.student_id, draft.assignment_id)
            bundles: dict[str, SuggestionBundle] = {}
            payload: dict[str, Any] = {
                "rubric_ids": assignment.rubric_ids,
                "condition": condition.value,
            }
            if condition is Condition.FEEDBACK_WRITER:
                for bundle in self.bundles_for(draft, assignment):
                    bundles[bundle.rubric_id] = bundle
                met = {
                    rid: int(b.judgment.met)
                    for rid, b in bundles.items()
                    if b.judgment is not None
                }
                ai = {
                    rid: {
                        "text": b.ai_suggestion.text,
                        "kind": _suggestion_kind_label(b.ai_suggestion.kind.value),
                        "stale": b.ai_suggestion.stale,
                    }
                    for rid, b in bundles.items()
                    if b.ai_suggestion is not None
                }
                payload.update(
                    {"rubric_count": len(met), "met": met, "ai": ai}
                )
            else:
                payload["rubric_count"] = 0
            session = Session(
                state=EssayState(essay_id=essay_id),
                draft=draft,
                assignment=assignment,
                bundles=bundles,
            )
            self._record(session, EventAction.OPEN, grader_id, payload)
            self.store.put_session(essay_id, session)
            return self.session_view(essay_id)

    def session_view(self, essay_id: str) -> dict[str, Any]:
        session = self._require_session(essay_id)
        state = session.state
        baseline = state.condition is Condition.BASELINE
        boxes = [
            box.to_dict()
            for box in sorted(
                state.boxes.values(), key=lambda b: (b.position, b.box_id)
            )
        ]
        view: dict[str, Any] = {
            "essay_id": essay_id,
            "student_id": session.draft.student_id,
            "assignment_id": session.assignment.id,
            "grader_id": state.grader_id,
            "condition": state.condition.value,
            "stage": session.draft.stage.value,
            "is_open": state.is_open,
            "score": state.score,
            "draft_text": session.draft.text,
            "rubric_items": [
                {"id": r.id, "text": r.text, "weight": str(r.weight)}
                for r in session.assignment.rubric_items
            ],
            "boxes": boxes,
        }
        if baseline:
            # No AI fields at all in baseline views; only the scaffold and a
            # pointer to the rubric + historic-feedback reference sheet.
            view["reference_url"] = f"/assignments/{session.assignment.id}/reference"
            return view
        view["met"] = dict(sorted(state.met.items()))
        view["ai_suggestions"] = {
            rid: dict(entry) for rid, entry in sorted(state.ai_suggestions.items())
        }
        view["bundles"] = {
            rid: bundle.to_dict() for rid, bundle in sorted(session.bundles.items())
        }
        view["historic_available"] = {
            r.id: len(r.historic_feedback) for r in session.assignment.rubric_items
        }
        return view

    # -- actions --------------------------------------------------------------------

    def apply_action(
        self, essay_id: str, grader_id: str, action: str, params: Mapping[str, Any]
    ) -> dict[str, Any]:
        if action not in SESSION_ACTIONS:
            raise ServiceError(f"unknown action {action!r}", status_code=400)
        with self._essay_lock(essay_id):
            session = self._require_session(essay_id)
            self._require_holder(session, grader_id)
            if (
                session.state.condition is Condition.BASELINE
                and action in BASELINE_FORBIDDEN
            ):
                raise ServiceError(
                    f"action {action!r} is not available in the baseline condition",
                    status_code=403,
                )
            handler = getattr(self, f"_act_{action}")
            try:
                handler(session, grader_id, dict(params))
            except ValidationError as exc:
                raise ServiceError(str(exc), status_code=400) from exc
        return self.session_view(essay_id)

    def _rubric_bundle(self, session: Session, params: Mapping[str, Any]) -> SuggestionBundle:
        rubric_id = str(params.get("rubric_id") or "")
        bundle = session.bundles.get(rubric_id)
        if bundle is None:
            raise ServiceError(f"no suggestions for rubric {rubric_id!r}",
                               status_code=400)
        return bundle

    def _act_flip(self, session: Session, grader_id: str, params: dict[str, Any]) -> None:
        bundle = self._rubric_bundle(session, params)
        rubric = session.assignment.rubric(bundle.rubric_id)
        try:
            flipped = flip_judgment(
                bundle, session.draft, rubric,
                session.assignment.exemplar_questions, self.provider,
                seed=self.seed,
            )
        except PipelineError as exc:
            raise ServiceError(str(exc), status_code=400) from exc
        assert flipped.judgment is not None and flipped.ai_suggestion is not None
        self._record(
            session, EventAction.FLIP, grader_id,
            {
                "rubric_id": flipped.rubric_id,
                "met": int(flipped.judgment.met),
                "text": flipped.ai_suggestion.text,
                "kind": _suggestion_kind_label(flipped.ai_suggestion.kind.value),
                "stale": flipped.ai_suggestion.stale,
            },
        )
        session.bundles[flipped.rubric_id] = flipped

    def _act_regenerate(self, session: Session, grader_id: str, params: dict[str, Any]) -> None:
        bundle = self._rubric_bundle(session, params)
        rubric = session.assignment.rubric(bundle.rubric_id)
        try:
            regenerated = regenerate_feedback(
                bundle, session.draft, rubric,
                session.assignment.exemplar_questions, self.provider,
                seed=self.seed,
            )
        except PipelineError as exc:
            raise ServiceError(str(exc), status_code=502) from exc
        assert regenerated.ai_suggestion is not None
        self._record(
            session, EventAction.REGENERATE, grader_id,
            {
                "rubric_id": regenerated.rubric_id,
                "text": regenerated.ai_suggestion.text,
                "kind": _suggestion_kind_label(regenerated.ai_suggestion.kind.value),
                "stale": regenerated.ai_suggestion.stale,
            },
        )
        session.bundles[regenerated.rubric_id] = regenerated

    def _act_adopt_ai(self, session: Session, grader_id: str, params: dict[str, Any]) -> None:
        bundle = self._rubric_bundle(session, params)
        if bundle.ai_suggestion is None:
            raise ServiceError(
                f"rubric {bundle.rubric_id!r} has no AI suggestion", status_code=400
            )
        if bundle.ai_suggestion.stale:
            raise ServiceError(
                f"rubric {bundle.rubric_id!r}: suggestion is a stale placeholder; "
                "regenerate before adopting",
                status_code=400,
            )
        self._record(
            session, EventAction.ADOPT_AI, grader_id,
            {
                "box_id": rubric_box_id(bundle.rubric_id),
                "text": bundle.ai_suggestion.text,
                "kind": _suggestion_kind_label(bundle.ai_suggestion.kind.value),
            },
        )
        session.bundles[bundle.rubric_id] = replace(
            bundle, final_text=bundle.ai_suggestion.text, adopted_from="ai"
        )

    def _act_adopt_historic(self, session: Session, grader_id: str, params: dict[str, Any]) -> None:
        bundle = self._rubric_bundle(session, params)
        if bundle.historic_suggestion is None:
            raise ServiceError(
                f"rubric {bundle.rubric_id!r} has no historic feedback",
                status_code=400,
            )
        self._record(
            session, EventAction.ADOPT_HISTORIC, grader_id,
            {
                "box_id": rubric_box_id(bundle.rubric_id),
                "text": bundle.historic_suggestion.text,
            },
        )
        session.bundles[bundle.rubric_id] = replace(
            bundle, final_text=bundle.historic_suggestion.text,
            adopted_from="historic",
        )

    def _act_edit_final_text(self, session: Session, grader_id: str, params: dict[str, Any]) -> None:
        box_id = str(params.get("box_id") or "")
        if "text" not in params:
            raise ServiceError("edit_final_text requires text", status_code=400)
        text = str(params["text"])
        self._record(
            session, EventAction.EDIT_FINAL_TEXT, grader_id,
            {"box_id": box_id, "text": text},
        )
        box = session.state.boxes[box_id]
        if box.rubric_id and box.rubric_id in session.bundles:
            session.bundles[box.rubric_id] = replace(
                session.bundles[box.rubric_id], final_text=text
            )

    def _act_reposition(self, session: Session, grader_id: str, params: dict[str, Any]) -> None:
        self._record(
            session, EventAction.REPOSITION, grader_id,
            {"box_id": str(params.get("box_id") or ""),
             "position": params.get("position")},
        )

    def _act_add_freeform(self, session: Session, grader_id: str, params: dict[str, Any]) -> None:
        existing = sum(
            1 for b in session.state.boxes.values() if b.rubric_id is None
        )
        box_id = freeform_box_id(existing + 1)
        self._record(
            session, EventAction.ADD_FREEFORM, grader_id,
            {"box_id": box_id, "text": str(params.get("text", ""))},
        )

    def _act_delete_feedback(self, session: Session, grader_id: str, params: dict[str, Any]) -> None:
        self._record(
            session, EventAction.DELETE_FEEDBACK, grader_id,
            {"box_id": str(params.get("box_id") or "")},
        )

    def _act_set_score(self, session: Session, grader_id: str, params: dict[str, Any]) -> None:
        if "score" not in params:
            raise ServiceError("set_score requires a score", status_code=400)
        self._record(
            session, EventAction.SET_SCORE, grader_id,
            {"score": str(params["score"])},
        )

    def suggest_score(self, essay_id: str) -> dict[str, Any]:
        """Offline rubric score for the essay (no session required)."""
        draft = self.store.draft(essay_id)
        assignment = self.store.assignment(draft.assignment_id)
        result = score_essay(draft, assignment, self.provider, seed=self.seed)
        return result.to_dict()

    # -- close / finalize ---------------------------------------------------------

    def close_session(self, essay_id: str, grader_id: str) -> dict[str, Any]:
        with self._essay_lock(essay_id):
            session = self._require_session(essay_id)
            self._require_holder(session, grader_id)
            self._record(session, EventAction.CLOSE, grader_id, {})
        return self.session_view(essay_id)

    def finalize_and_export(
        self, essay_id: str, grader_id: str
    ) -> tuple[FeedbackExport, list[str]]:
        """Close (if open), validate, and export the grader-confirmed
        feedback.  Requires a score; empty rubric boxes become warnings,
        not errors."""
        with self._essay_lock(essay_id):
            session = self._require_session(essay_id)
            state = session.state
            if state.is_open and state.grader_id != grader_id:
                raise ServiceError(
                    f"essay {essay_id!r} is held by grader {state.grader_id!r}",
                    status_code=409,
                )
            if state.score is None:
                raise ServiceError(
                    "a score must be set before finalizing", status_code=400
                )
            if state.exported:
                raise ServiceError(
                    f"essay {essay_id!r} was already exported", status_code=409
                )
            warnings = [
                f"rubric {box.rubric_id} has no feedback text"
                for box in sorted(state.boxes.values(), key=lambda b: b.box_id)
                if box.rubric_id is not None
                and not box.deleted
                and not box.final_text.strip()
            ]
            if state.is_open:
                self._record(session, EventAction.CLOSE, grader_id, {})
            self._record(session, EventAction.EXPORT, grader_id, {})
            comments = tuple(
                ExportComment(
                    box_id=box.box_id,
                    rubric_id=box.rubric_id,
                    excerpt=self._excerpt_for(session, box.rubric_id),
                    final_text=box.final_text,
                )
                for box in state.active_boxes()
            )
            export = FeedbackExport(
                essay_id=essay_id,
                student_id=session.draft.student_id,
                assignment_id=session.assignment.id,
                score=state.score,
                comments=comments,
                condition=state.condition.value,
            )
            self.store.put_export(essay_id, export.to_dict())
            return export, warnings

    def _excerpt_for(self, session: Session, rubric_id: str | None) -> str:
        if rubric_id is None:
            return ""
        bundle = session.bundles.get(rubric_id)
        if bundle is None or bundle.anchor.status is AnchorStatus.UNANCHORED:
            return ""
        return bundle.anchor.excerpt(session.draft.text)

    # -- revision context ------------------------------------------------------------

    def final_draft_context(self, essay_id: str) -> dict[str, Any]:
        """For a final-stage draft: the sentence diff against the student's
        first draft, plus the first round's highlights carried across the
        edit (so the grader sees what changed where feedback pointed)."""
        final = self.store.draft(essay_id)
        if final.stage is not Stage.FINAL:
            raise ServiceError(
                f"essay {essay_id!r} is a {final.stage.value} draft; revision "
                "context applies to final drafts",
                status_code=400,
            )
        first = self.store.find_draft(
            final.student_id, final.assignment_id, Stage.FIRST.value
        )
        if first is None:
            raise ServiceError(
                f"no first draft on file for student {final.student_id!r}",
                status_code=404,
            )
        assignment = self.store.assignment(final.assignment_id)
        diff = compute_diff(first, final)
        anchors: dict[str, Any] = {}
        condition = self.store.condition(final.student_id, final.assignment_id)
        if condition is Condition.FEEDBACK_WRITER:
            for bundle in self.bundles_for(first, assignment):
                if bundle.anchor.status is AnchorStatus.UNANCHORED:
                    continue
                anchors[bundle.rubric_id] = reanchor(bundle.anchor, diff).to_dict()
        return {
            "first_essay_id": first.essay_id,
            "final_essay_id": final.essay_id,
            "is_identity": diff.is_identity,
            "segments": [segment.to_dict() for segment in diff.segments],
            "anchors": anchors,
        }

    # -- analytics / replay ---------------------------------------------------------

    def replay_state(self, essay_id: str) -> EssayState:
        session = self._require_session(essay_id)
        log = self.store.log(session.assignment.id)
        return replay_essay(log.events_for_essay(essay_id))

    def usage_report(self, assignment_id: str) -> dict[str, Any]:
        return summarize_log(self.store.log(assignment_id)).to_dict()

    def adoption_report(self, assignment_id: str) -> dict[str, Any]:
        return corpus_adoption(self.store.log(assignment_id)).to_dict()

    def reference_sheet(self, assignment_id: str) -> dict[str, Any]:
        """Rubric text + historic feedback — the baseline grader's aid."""
        assignment = self.store.assignment(assignment_id)
        return {
            "assignment_id": assignment.id,
            "prompt_text": assignment.prompt_text,
            "rubric_items": [
                {
                    "id": r.id,
                    "text": r.text,
                    "weight": str(r.weight),
                    "historic_feedback": list(r.historic_feedback),
                }
                for r in assignment.rubric_items
            ],
        }
