"""Grading-session event logs and the analytics derived from them.

Every grader interaction is recorded as an append-only event.  One
transition function, :func:`apply_event`, is the single definition of how
an event changes essay state — the live service and offline replay both
call it, so replaying a log reproduces the service's state exactly.

Derived analytics:

* per-essay usage summaries (flips, adoptions, freeform additions, total
  feedback boxes, wall-clock grading seconds),
* corpus-level adoption rates (approved vs corrected judgments, comment
  provenance fractions, post-adoption edits),
* between-grader score variance.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .domain import Condition
from .errors import ParseError, ValidationError

# Maximum allowed backwards jump between consecutive timestamps of one
# essay's events (seconds) — tolerates modest clock skew across hosts.
CLOCK_SKEW_TOLERANCE = 5.0


class EventAction(str, Enum):
    OPEN = "open"
    FLIP = "flip"
    ADOPT_AI = "adopt_ai"
    ADOPT_HISTORIC = "adopt_historic"
    EDIT_FINAL_TEXT = "edit_final_text"
    REGENERATE = "regenerate"
    REPOSITION = "reposition"
    ADD_FREEFORM = "add_freeform"
    DELETE_FEEDBACK = "delete_feedback"
    SET_SCORE = "set_score"
    CLOSE = "close"
    EXPORT = "export"


# Actions that require (or surface) AI assistance; forbidden in baseline.
AI_ACTIONS = frozenset(
    {EventAction.FLIP, EventAction.ADOPT_AI, EventAction.ADOPT_HISTORIC,
     EventAction.REGENERATE}
)


@dataclass(frozen=True)
class GradingEvent:
    """One grader interaction.  ``event_id`` is a per-essay sequence
    starting at 1; ``payload`` carries everything replay needs (adopted
    texts are inlined so no provider is consulted during replay)."""

    event_id: int
    timestamp: float
    grader_id: str
    essay_id: str
    action: EventAction
    payload: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.event_id < 1:
            raise ValidationError("event_id must be >= 1")
        if not self.essay_id:
            raise ValidationError("event requires an essay_id")

    def to_dict(self) -> dict[str, Any]:
        return {
            "event_id": self.event_id,
            "timestamp": self.timestamp,
            "grader_id": self.grader_id,
            "essay_id": self.essay_id,
            "action": self.action.value,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GradingEvent":
        try:
            return cls(
                event_id=int(data["event_id"]),
                timestamp=float(data["timestamp"]),
                grader_id=str(data["grader_id"]),
                essay_id=str(data["essay_id"]),
                action=EventAction(data["action"]),
                payload=dict(data.get("payload") or {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed grading event: {exc}") from exc


class EventLog:
    """Append-only store of grading events for one assignment.

    Appends are validated: per-essay event ids must be the exact next in
    sequence (duplicates and out-of-order events are rejected) and
    timestamps may not step backwards by more than CLOCK_SKEW_TOLERANCE
    within an essay.
    """

    def __init__(self, events: Iterable[GradingEvent] = ()) -> None:
        self._events: list[GradingEvent] = []
        self._by_essay: dict[str, list[GradingEvent]] = {}
        self._lock = threading.Lock()
        for event in events:
            self.append(event)

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[GradingEvent]:
        return iter(list(self._events))

    def next_event_id(self, essay_id: str) -> int:
        return len(self._by_essay.get(essay_id, ())) + 1

    def events_for_essay(self, essay_id: str) -> list[GradingEvent]:
        return list(self._by_essay.get(essay_id, ()))

    def essay_ids(self) -> list[str]:
        return sorted(self._by_essay)

    def append(self, event: GradingEvent) -> None:
        with self._lock:
            history = self._by_essay.get(event.essay_id, [])
            expected = len(history) + 1
            if event.event_id != expected:
                raise ValidationError(
                    f"essay {event.essay_id}: expected event_id {expected}, "
                    f"got {event.event_id} (duplicate or out-of-order)"
                )
            if history and event.timestamp < history[-1].timestamp - CLOCK_SKEW_TOLERANCE:
                raise ValidationError(
                    f"essay {event.essay_id}: timestamp {event.timestamp} precedes "
                    f"previous event by more than {CLOCK_SKEW_TOLERANCE}s"
                )
            self._events.append(event)
            self._by_essay.setdefault(event.essay_id, []).append(event)

    # -- persistence --------------------------------------------------

    def dump_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for event in self._events:
                handle.write(json.dumps(event.to_dict(), ensure_ascii=False) + "\n")

    @classmethod
    def load_jsonl(cls, path: str | Path) -> "EventLog":
        log = cls()
        with open(path, "r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    data = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"line {line_no}: invalid JSON: {exc}") from exc
                log.append(GradingEvent.from_dict(data))
        return log


# ---------------------------------------------------------------------------
# Replayable essay state
# ---------------------------------------------------------------------------


@dataclass
class CommentBox:
    """One feedback box: a rubric slot or a freeform addition."""

    box_id: str
    rubric_id: str | None
    position: int
    final_text: str = ""
    source: str | None = None       # None (typed), "ai", or "historic"
    adopted_kind: str | None = None  # "constructive"/"positive" when source == "ai"
    edits_after_adoption: int = 0
    deleted: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "box_id": self.box_id,
            "rubric_id": self.rubric_id,
            "position": self.position,
            "final_text": self.final_text,
            "source": self.source,
            "adopted_kind": self.adopted_kind,
            "edits_after_adoption": self.edits_after_adoption,
            "deleted": self.deleted,
        }


@dataclass
class EssayState:
    """Replay-derived grading state for one essay."""

    essay_id: str
    grader_id: str = ""
    condition: Condition = Condition.FEEDBACK_WRITER
    rubric_count: int = 0
    boxes: dict[str, CommentBox] = field(default_factory=dict)
    met: dict[str, int] = field(default_factory=dict)
    ai_suggestions: dict[str, dict[str, Any]] = field(default_factory=dict)
    flip_counts: dict[str, int] = field(default_factory=dict)
    score: str | None = None
    opened_at: float | None = None
    closed_at: float | None = None
    is_open: bool = False
    exported: bool = False

    def active_boxes(self) -> list[CommentBox]:
        """Boxes that would export: nonempty text, not deleted, in
        display order (position, then box id for stability)."""
        return sorted(
            (
                box
                for box in self.boxes.values()
                if not box.deleted and box.final_text.strip()
            ),
            key=lambda box: (box.position, box.box_id),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "essay_id": self.essay_id,
            "grader_id": self.grader_id,
            "condition": self.condition.value,
            "rubric_count": self.rubric_count,
            "boxes": {bid: box.to_dict() for bid, box in sorted(self.boxes.items())},
            "met": dict(sorted(self.met.items())),
            "ai_suggestions": {k: dict(v) for k, v in sorted(self.ai_suggestions.items())},
            "flip_counts": dict(sorted(self.flip_counts.items())),
            "score": self.score,
            "opened_at": self.opened_at,
            "closed_at": self.closed_at,
            "is_open": self.is_open,
            "exported": self.exported,
        }


def rubric_box_id(rubric_id: str) -> str:
    return f"rubric:{rubric_id}"


def freeform_box_id(sequence: int) -> str:
    return f"freeform:{sequence}"


def _require_box(state: EssayState, payload: Mapping[str, Any]) -> CommentBox:
    box_id = payload.get("box_id")
    if not box_id or box_id not in state.boxes:
        raise ValidationError(f"unknown feedback box {box_id!r}")
    return state.boxes[box_id]


def _require_open(state: EssayState) -> None:
    if not state.is_open:
        raise ValidationError(f"essay {state.essay_id} has no open grading session")


def apply_event(state: EssayState, event: GradingEvent) -> EssayState:
    """Apply one event to the state, in place; returns the same state.

    This is the only transition function — the live service routes every
    mutation through it and offline replay re-runs it, which is what makes
    the two agree.  Validation happens before any mutation so a rejected
    event leaves the state untouched.  Baseline sessions reject
    AI-assistance actions (flip/adopt/regenerate).
    """
    action = event.action
    payload = event.payload
    if event.essay_id != state.essay_id:
        raise ValidationError(
            f"event for essay {event.essay_id} applied to state of {state.essay_id}"
        )

    if action is EventAction.OPEN:
        if state.opened_at is not None:
            raise ValidationError(f"essay {state.essay_id} was already opened")
        rubric_ids = list(payload.get("rubric_ids") or [])
        condition = Condition(payload.get("condition", Condition.FEEDBACK_WRITER.value))
        rubric_count = int(payload.get("rubric_count", len(rubric_ids)))
        met = {str(k): int(v) for k, v in (payload.get("met") or {}).items()}
        ai = {str(k): dict(v) for k, v in (payload.get("ai") or {}).items()}
        if condition is Condition.BASELINE and (met or ai):
            raise ValidationError("baseline sessions must not carry AI judgments")
        state.grader_id = event.grader_id
        state.condition = condition
        state.rubric_count = rubric_count
        state.boxes = {
            rubric_box_id(rid): CommentBox(
                box_id=rubric_box_id(rid), rubric_id=rid, position=i
            )
            for i, rid in enumerate(rubric_ids)
        }
        state.met = met
        state.ai_suggestions = ai
        state.flip_counts = {}
        state.opened_at = event.timestamp
        state.is_open = True
        return state

    if state.opened_at is None:
        raise ValidationError(f"essay {state.essay_id}: first event must open the session")
    if state.condition is Condition.BASELINE and action in AI_ACTIONS:
        raise ValidationError(f"action {action.value} is not available in the baseline condition")

    if action is EventAction.FLIP:
        _require_open(state)
        rubric_id = str(payload.get("rubric_id") or "")
        if rubric_box_id(rubric_id) not in state.boxes:
            raise ValidationError(f"unknown rubric {rubric_id!r}")
        new_met = payload.get("met")
        if new_met not in (0, 1):
            raise ValidationError("flip payload must carry the new met value (0/1)")
        state.met[rubric_id] = int(new_met)
        state.ai_suggestions[rubric_id] = {
            "text": str(payload.get("text", "")),
            "kind": str(payload.get("kind", "")),
            "stale": bool(payload.get("stale", False)),
        }
        state.flip_counts[rubric_id] = state.flip_counts.get(rubric_id, 0) + 1
        return state

    if action is EventAction.ADOPT_AI:
        _require_open(state)
        box = _require_box(state, payload)
        text = str(payload.get("text", ""))
        kind = str(payload.get("kind", ""))
        if not text.strip():
            raise ValidationError("adopt_ai payload must carry the adopted text")
        if kind not in ("constructive", "positive"):
            raise ValidationError(f"adopt_ai kind must be constructive/positive, got {kind!r}")
        box.final_text = text
        box.source = "ai"
        box.adopted_kind = kind
        box.edits_after_adoption = 0
        box.deleted = False
        return state

    if action is EventAction.ADOPT_HISTORIC:
        _require_open(state)
        box = _require_box(state, payload)
        text = str(payload.get("text", ""))
        if not text.strip():
            raise ValidationError("adopt_historic payload must carry the adopted text")
        box.final_text = text
        box.source = "historic"
        box.adopted_kind = None
        box.edits_after_adoption = 0
        box.deleted = False
        return state

    if action is EventAction.EDIT_FINAL_TEXT:
        _require_open(state)
        box = _require_box(state, payload)
        if "text" not in payload:
            raise ValidationError("edit_final_text payload must carry text")
        text = str(payload["text"])
        if box.source is not None and text != box.final_text:
            box.edits_after_adoption += 1
        box.final_text = text
        if text.strip():
            box.deleted = False
        return state

    if action is EventAction.REGENERATE:
        _require_open(state)
        rubric_id = str(payload.get("rubric_id") or "")
        if rubric_box_id(rubric_id) not in state.boxes:
            raise ValidationError(f"unknown rubric {rubric_id!r}")
        state.ai_suggestions[rubric_id] = {
            "text": str(payload.get("text", "")),
            "kind": str(payload.get("kind", "")),
            "stale": bool(payload.get("stale", False)),
        }
        return state

    if action is EventAction.REPOSITION:
        _require_open(state)
        box = _require_box(state, payload)
        position = payload.get("position")
        if not isinstance(position, int) or position < 0:
            raise ValidationError("reposition payload must carry a nonnegative position")
        box.position = position
        return state

    if action is EventAction.ADD_FREEFORM:
        _require_open(state)
        box_id = str(payload.get("box_id") or "")
        if not box_id:
            raise ValidationError("add_freeform payload must carry a box_id")
        if box_id in state.boxes:
            raise ValidationError(f"feedback box {box_id!r} already exists")
        text = str(payload.get("text", ""))
        state.boxes[box_id] = CommentBox(
            box_id=box_id,
            rubric_id=None,
            position=len(state.boxes),
            final_text=text,
        )
        return state

    if action is EventAction.DELETE_FEEDBACK:
        _require_open(state)
        box = _require_box(state, payload)
        box.deleted = True
        return state

    if action is EventAction.SET_SCORE:
        _require_open(state)
        raw = payload.get("score")
        if raw is None:
            raise ValidationError("set_score payload must carry a score")
        try:
            value = Fraction(str(raw))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"unparseable score {raw!r}") from exc
        if not 0 <= value <= 1:
            raise ValidationError(f"score must lie in [0, 1], got {value}")
        state.score = str(value)
        return state

    if action is EventAction.CLOSE:
        _require_open(state)
        state.is_open = False
        state.closed_at = event.timestamp
        return state

    if action is EventAction.EXPORT:
        if state.score is None:
            raise ValidationError("cannot export before a score is set")
        state.exported = True
        return state

    raise ValidationError(f"unhandled action {action!r}")  # pragma: no cover


def replay_essay(events: Sequence[GradingEvent]) -> EssayState:
    """Rebuild an essay's state from its event sequence."""
    if not events:
        raise ValidationError("cannot replay an empty event sequence")
    state = EssayState(essay_id=events[0].essay_id)
    for event in events:
        apply_event(state, event)
    return state


# ---------------------------------------------------------------------------
# Usage summaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EssayUsageSummary:
    """Per-essay interaction counters plus replay-derived totals."""

    essay_id: str
    grader_id: str
    condition: str
    flip_count: int
    historic_adds: int
    ai_constructive_adds: int
    ai_positive_adds: int
    additional_feedback_count: int
    total_feedback: int
    grading_seconds: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "essay_id": self.essay_id,
            "grader_id": self.grader_id,
            "condition": self.condition,
            "flip_count": self.flip_count,
            "historic_adds": self.historic_adds,
            "ai_constructive_adds": self.ai_constructive_adds,
            "ai_positive_adds": self.ai_positive_adds,
            "additional_feedback_count": self.additional_feedback_count,
            "total_feedback": self.total_feedback,
            "grading_seconds": self.grading_seconds,
        }


def summarize_essay(events: Sequence[GradingEvent]) -> EssayUsageSummary:
    """Counters are pure event counts (additive over any log partition);
    total_feedback is replay-derived: boxes left nonempty and undeleted."""
    state = replay_essay(events)
    flips = sum(1 for e in events if e.action is EventAction.FLIP)
    historic = sum(1 for e in events if e.action is EventAction.ADOPT_HISTORIC)
    ai_constructive = sum(
        1
        for e in events
        if e.action is EventAction.ADOPT_AI and e.payload.get("kind") == "constructive"
    )
    ai_positive = sum(
        1
        for e in events
        if e.action is EventAction.ADOPT_AI and e.payload.get("kind") == "positive"
    )
    additional = sum(1 for e in events if e.action is EventAction.ADD_FREEFORM)
    timestamps = [e.timestamp for e in events]
    return EssayUsageSummary(
        essay_id=state.essay_id,
        grader_id=state.grader_id,
        condition=state.condition.value,
        flip_count=flips,
        historic_adds=historic,
        ai_constructive_adds=ai_constructive,
        ai_positive_adds=ai_positive,
        additional_feedback_count=additional,
        total_feedback=len(state.active_boxes()),
        grading_seconds=max(timestamps) - min(timestamps),
    )


@dataclass(frozen=True)
class UsageReport:
    per_essay: tuple[EssayUsageSummary, ...]
    mean_flips: float
    mean_historic_adds: float
    mean_ai_constructive_adds: float
    mean_ai_positive_adds: float
    mean_additional_feedback: float
    mean_total_feedback: float
    mean_grading_seconds: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "essays": len(self.per_essay),
            "mean_flips": self.mean_flips,
            "mean_historic_adds": self.mean_historic_adds,
            "mean_ai_constructive_adds": self.mean_ai_constructive_adds,
            "mean_ai_positive_adds": self.mean_ai_positive_adds,
            "mean_additional_feedback": self.mean_additional_feedback,
            "mean_total_feedback": self.mean_total_feedback,
            "mean_grading_seconds": self.mean_grading_seconds,
            "per_essay": [s.to_dict() for s in self.per_essay],
        }


def summarize_log(log: EventLog) -> UsageReport:
    summaries = tuple(
        summarize_essay(log.events_for_essay(essay_id)) for essay_id in log.essay_ids()
    )
    if not summaries:
        raise ValidationError("event log contains no essays")
    n = len(summaries)

    def mean(pick) -> float:
        return sum(pick(s) for s in summaries) / n

    return UsageReport(
        per_essay=summaries,
        mean_flips=mean(lambda s: s.flip_count),
        mean_historic_adds=mean(lambda s: s.historic_adds),
        mean_ai_constructive_adds=mean(lambda s: s.ai_constructive_adds),
        mean_ai_positive_adds=mean(lambda s: s.ai_positive_adds),
        mean_additional_feedback=mean(lambda s: s.additional_feedback_count),
        mean_total_feedback=mean(lambda s: s.total_feedback),
        mean_grading_seconds=mean(lambda s: s.grading_seconds),
    )


# ---------------------------------------------------------------------------
# Corpus adoption
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdoptionReport:
    """Corpus-level provenance of judgments and final comments.

    A rubric judgment counts as corrected when its flip parity is odd
    (flipped an even number of times — including twice back and forth —
    leaves the original verdict standing, i.e. approved).  Comment counts
    classify final exported boxes by provenance.
    """

    essays: int
    judgments_total: int
    approved: int
    corrected: int
    approved_fraction: float
    comments_total: int
    historic_comments: int
    historic_fraction: float
    ai_comments: int
    ai_constructive_comments: int
    ai_positive_comments: int
    ai_fraction: float
    manual_comments: int
    post_adoption_edits: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "essays": self.essays,
            "judgments_total": self.judgments_total,
            "approved": self.approved,
            "corrected": self.corrected,
            "approved_fraction": self.approved_fraction,
            "comments_total": self.comments_total,
            "historic_comments": self.historic_comments,
            "historic_fraction": self.historic_fraction,
            "ai_comments": self.ai_comments,
            "ai_constructive_comments": self.ai_constructive_comments,
            "ai_positive_comments": self.ai_positive_comments,
            "ai_fraction": self.ai_fraction,
            "manual_comments": self.manual_comments,
            "post_adoption_edits": self.post_adoption_edits,
        }


def corpus_adoption(log: EventLog) -> AdoptionReport:
    essays = log.essay_ids()
    if not essays:
        raise ValidationError("event log contains no essays")
    judgments = 0
    corrected = 0
    comments = 0
    historic = 0
    ai_constructive = 0
    ai_positive = 0
    manual = 0
    edited_after_adoption = 0
    for essay_id in essays:
        events = log.events_for_essay(essay_id)
        state = replay_essay(events)
        judgments += state.rubric_count
        corrected += sum(1 for count in state.flip_counts.values() if count % 2 == 1)
        for box in state.active_boxes():
            comments += 1
            if box.source == "historic":
                historic += 1
            elif box.source == "ai":
                if box.adopted_kind == "positive":
                    ai_positive += 1
                else:
                    ai_constructive += 1
            else:
                manual += 1
        edited_after_adoption += sum(
            1 for box in state.boxes.values() if box.edits_after_adoption >= 1
        )
    approved = judgments - corrected
    ai_total = ai_constructive + ai_positive
    return AdoptionReport(
        essays=len(essays),
        judgments_total=judgments,
        approved=approved,
        corrected=corrected,
        approved_fraction=(approved / judgments) if judgments else 0.0,
        comments_total=comments,
        historic_comments=historic,
        historic_fraction=(historic / comments) if comments else 0.0,
        ai_comments=ai_total,
        ai_constructive_comments=ai_constructive,
        ai_positive_comments=ai_positive,
        ai_fraction=(ai_total / comments) if comments else 0.0,
        manual_comments=manual,
        post_adoption_edits=edited_after_adoption,
    )


# ---------------------------------------------------------------------------
# Between-grader variance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OutcomeRecord:
    grader_id: str
    essay_id: str
    score: float


@dataclass(frozen=True)
class GraderStats:
    grader_id: str
    n: int
    mean: float
    variance: float  # sample variance (0.0 when n < 2)


@dataclass(frozen=True)
class GraderVarianceReport:
    per_grader: tuple[GraderStats, ...]
    grand_mean: float
    variance_of_means: float  # sample variance across grader means

    def to_dict(self) -> dict[str, Any]:
        return {
            "per_grader": [
                {"grader_id": g.grader_id, "n": g.n, "mean": g.mean, "variance": g.variance}
                for g in self.per_grader
            ],
            "grand_mean": self.grand_mean,
            "variance_of_means": self.variance_of_means,
        }


def grader_variance(records: Iterable[OutcomeRecord]) -> GraderVarianceReport:
    """Summarize between-grader score spread: per-grader sample statistics
    plus the sample variance of the grader means (needs >= 2 graders)."""
    by_grader: dict[str, list[float]] = {}
    for record in records:
        by_grader.setdefault(record.grader_id, []).append(float(record.score))
    if len(by_grader) < 2:
        raise ValidationError("between-grader variance requires at least two graders")
    stats: list[GraderStats] = []
    for grader_id in sorted(by_grader):
        scores = by_grader[grader_id]
        n = len(scores)
        mean = sum(scores) / n
        variance = (
            sum((s - mean) ** 2 for s in scores) / (n - 1) if n >= 2 else 0.0
        )
        stats.append(GraderStats(grader_id=grader_id, n=n, mean=mean, variance=variance))
    means = [g.mean for g in stats]
    grand = sum(means) / len(means)
    var_of_means = sum((m - grand) ** 2 for m in means) / (len(means) - 1)
    return GraderVarianceReport(
        per_grader=tuple(stats), grand_mean=grand, variance_of_means=var_of_means
    )
