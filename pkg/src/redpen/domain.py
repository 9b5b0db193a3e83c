"""Core vocabulary: assignments, rubric items, essay drafts, study conditions.

Everything here is immutable after load and safe to share across threads.
Weights are kept as exact rationals so score aggregation never accumulates
float error.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable

from .errors import ParseError, ValidationError

EXEMPLAR_QUESTION_COUNT = 3

_REFINEMENT_FIELDS = (
    "context_terms",
    "term_explanations",
    "localization",
    "expected_depth",
    "acceptable_alternatives",
)


class Stage(str, enum.Enum):
    FIRST = "first"
    FINAL = "final"


class Condition(str, enum.Enum):
    """Which grading experience a student was assigned to."""

    FEEDBACK_WRITER = "feedback_writer"
    BASELINE = "baseline"


def parse_weight(value: Any) -> Fraction:
    """Accept ints, floats, and strings like "1/3"; reject negatives."""
    try:
        weight = Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"unparseable weight: {value!r}") from exc
    if weight < 0:
        raise ValidationError(f"weight must be nonnegative, got {value!r}")
    return weight


def _weight_to_json(weight: Fraction) -> int | float | str:
    if weight.denominator == 1:
        return int(weight)
    as_float = float(weight)
    if Fraction(as_float) == weight:
        return as_float
    return str(weight)  # e.g. "1/3"; round-trips exactly


@dataclass(frozen=True)
class RefinementNotes:
    """Free-text annotations recorded while adapting a rubric for the model.

    All fields optional; this mirrors the kinds of clarifications instructors
    add (context, terminology, localization, depth, accepted variants) without
    forcing a schema on them.
    """

    context_terms: str | None = None
    term_explanations: str | None = None
    localization: str | None = None
    expected_depth: str | None = None
    acceptable_alternatives: str | None = None

    def to_dict(self) -> dict[str, str]:
        return {k: v for k in _REFINEMENT_FIELDS if (v := getattr(self, k)) is not None}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RefinementNotes":
        unknown = set(data) - set(_REFINEMENT_FIELDS)
        if unknown:
            raise ValidationError(f"unknown refinement_notes fields: {sorted(unknown)}")
        return cls(**{k: data[k] for k in _REFINEMENT_FIELDS if k in data})


@dataclass(frozen=True)
class RubricItem:
    """One gradable criterion.

    ``text`` is the model-facing wording (already refined if refinement
    happened); ``historic_feedback`` holds reusable constructive comments
    curated by instructors — the corpus deliberately contains no praise.
    """

    id: str
    text: str
    weight: Fraction = Fraction(1)
    historic_feedback: tuple[str, ...] = ()
    refinement_notes: RefinementNotes | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("rubric id must be nonempty")
        if not self.text.strip():
            raise ValidationError(f"rubric {self.id!r}: text must be nonempty")
        if self.weight < 0:
            raise ValidationError(f"rubric {self.id!r}: weight must be nonnegative")
        for entry in self.historic_feedback:
            if not entry.strip():
                raise ValidationError(
                    f"rubric {self.id!r}: historic feedback entries must be nonempty"
                )

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "id": self.id,
            "text": self.text,
            "weight": _weight_to_json(self.weight),
        }
        if self.historic_feedback:
            doc["historic_feedback"] = list(self.historic_feedback)
        if self.refinement_notes is not None:
            doc["refinement_notes"] = self.refinement_notes.to_dict()
        return doc

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RubricItem":
        notes = data.get("refinement_notes")
        return cls(
            id=str(data["id"]),
            text=data["text"],
            weight=parse_weight(data.get("weight", 1)),
            historic_feedback=tuple(data.get("historic_feedback", ())),
            refinement_notes=RefinementNotes.from_dict(notes) if notes else None,
        )


@dataclass(frozen=True)
class Assignment:
    """A writing prompt plus its rubric and few-shot exemplar questions."""

    id: str
    prompt_text: str
    rubric_items: tuple[RubricItem, ...]
    exemplar_questions: tuple[str, ...]
    draft_stages: frozenset[Stage] = frozenset({Stage.FIRST, Stage.FINAL})

    def __post_init__(self) -> None:
        if not self.rubric_items:
            raise ValidationError(f"assignment {self.id!r}: needs at least one rubric item")
        seen: set[str] = set()
        for item in self.rubric_items:
            if item.id in seen:
                raise ValidationError(
                    f"assignment {self.id!r}: duplicate rubric id {item.id!r}"
                )
            seen.add(item.id)
        if len(self.exemplar_questions) != EXEMPLAR_QUESTION_COUNT:
            raise ValidationError(
                f"assignment {self.id!r}: expected {EXEMPLAR_QUESTION_COUNT} exemplar "
                f"questions, got {len(self.exemplar_questions)}"
            )

    def rubric(self, rubric_id: str) -> RubricItem:
        for item in self.rubric_items:
            if item.id == rubric_id:
                return item
        raise KeyError(rubric_id)

    @property
    def rubric_ids(self) -> list[str]:
        return [item.id for item in self.rubric_items]

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "prompt_text": self.prompt_text,
            "rubric_items": [item.to_dict() for item in self.rubric_items],
            "exemplar_questions": list(self.exemplar_questions),
            "draft_stages": sorted(stage.value for stage in self.draft_stages),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Assignment":
        try:
            items = tuple(RubricItem.from_dict(item) for item in data["rubric_items"])
            stages = data.get("draft_stages", ["first", "final"])
            return cls(
                id=str(data["id"]),
                prompt_text=data["prompt_text"],
                rubric_items=items,
                exemplar_questions=tuple(data["exemplar_questions"]),
                draft_stages=frozenset(Stage(s) for s in stages),
            )
        except KeyError as exc:
            raise ParseError(f"assignment document missing field: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed assignment document: {exc}") from exc


@dataclass(frozen=True)
class EssayDraft:
    """One submitted draft.

    Instances are plain records: corpus-level invariants (nonempty text,
    unique (student, assignment, stage)) are checked by ``validate_corpus``
    and at ingestion, so a malformed record can still be represented and
    reported rather than crashing the loader.
    """

    essay_id: str
    student_id: str
    assignment_id: str
    stage: Stage
    text: str
    submitted_at: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "essay_id": self.essay_id,
            "student_id": self.student_id,
            "assignment_id": self.assignment_id,
            "stage": self.stage.value,
            "text": self.text,
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EssayDraft":
        try:
            return cls(
                essay_id=str(data["essay_id"]),
                student_id=str(data["student_id"]),
                assignment_id=str(data["assignment_id"]),
                stage=Stage(data["stage"]),
                text=data["text"],
                submitted_at=data.get("submitted_at", ""),
            )
        except KeyError as exc:
            raise ParseError(f"draft record missing field: {exc}") from exc
        except ValueError as exc:
            raise ParseError(f"malformed draft record: {exc}") from exc


def load_assignment(source: str | Path | dict[str, Any]) -> Assignment:
    """Load and validate an assignment document (JSON file, text, or dict)."""
    if isinstance(source, dict):
        return Assignment.from_dict(source)
    try:
        is_file = Path(source).exists()
    except OSError:  # e.g. JSON text long enough to overflow a path name
        is_file = False
    if is_file:
        raw = Path(source).read_text(encoding="utf-8")
    else:
        raw = str(source)
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"assignment document is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("assignment document must be a JSON object")
    return Assignment.from_dict(data)


def load_assignment_catalog(source: str | Path) -> list[Assignment]:
    """Load a catalog file holding either one assignment or a list of them."""
    raw = Path(source).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"catalog is not valid JSON: {exc}") from exc
    docs = data if isinstance(data, list) else [data]
    return [Assignment.from_dict(doc) for doc in docs]


def load_draft_corpus(source: str | Path) -> tuple[list[EssayDraft], list[dict[str, Any]]]:
    """Read a JSONL draft corpus; returns (drafts, rejected-record reports)."""
    drafts: list[EssayDraft] = []
    rejected: list[dict[str, Any]] = []
    for lineno, line in enumerate(Path(source).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            drafts.append(EssayDraft.from_dict(json.loads(line)))
        except (json.JSONDecodeError, ParseError) as exc:
            rejected.append({"line": lineno, "reason": str(exc)})
    return drafts, rejected


@dataclass
class CorpusReport:
    """Outcome of validating a draft corpus against an assignment catalog.

    Report-only: validation never raises on bad entries.
    """

    orphans: list[str] = field(default_factory=list)  # essay_ids w/ unknown assignment
    duplicates: list[str] = field(default_factory=list)  # essay_ids repeating a key
    empty_texts: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.orphans or self.duplicates or self.empty_texts)

    def to_dict(self) -> dict[str, Any]:
        return {
            "clean": self.clean,
            "orphans": self.orphans,
            "duplicates": self.duplicates,
            "empty_texts": self.empty_texts,
        }


def validate_corpus(
    drafts: Iterable[EssayDraft],
    assignments: Assignment | Iterable[Assignment],
) -> CorpusReport:
    """Check every draft against the catalog; collect defects, never abort."""
    if isinstance(assignments, Assignment):
        assignments = [assignments]
    known = {a.id for a in assignments}
    report = CorpusReport()
    seen_keys: set[tuple[str, str, Stage]] = set()
    for draft in drafts:
        if draft.assignment_id not in known:
            report.orphans.append(draft.essay_id)
        key = (draft.student_id, draft.assignment_id, draft.stage)
        if key in seen_keys:
            report.duplicates.append(draft.essay_id)
        seen_keys.add(key)
        if not draft.text.strip():
            report.empty_texts.append(draft.essay_id)
    return report
