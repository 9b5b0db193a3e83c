"""In-memory document store with optional JSON persistence.

Holds assignments, drafts, the condition roster, per-assignment event
logs, live sessions, pipeline result caches, and finished exports.  The
store is deliberately dumb: all workflow rules live in the service.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ..analytics import EventLog
from ..domain import Assignment, Condition, EssayDraft
from ..errors import ServiceError, ValidationError


@dataclass
class Session:
    """Live grading session for one essay."""

    state: Any  # analytics.EssayState
    draft: EssayDraft
    assignment: Assignment
    bundles: dict[str, Any] = field(default_factory=dict)  # rubric_id -> SuggestionBundle
    warnings: list[str] = field(default_factory=list)


class DocumentStore:
    def __init__(self) -> None:
        self._assignments: dict[str, Assignment] = {}
        self._drafts: dict[str, EssayDraft] = {}
        self._roster: dict[tuple[str, str], Condition] = {}
        self._logs: dict[str, EventLog] = {}
        self._sessions: dict[str, Session] = {}
        self._pipeline_cache: dict[tuple[str, str], list[Any]] = {}
        self._exports: dict[str, dict[str, Any]] = {}
        self._lock = threading.Lock()

    # -- assignments ----------------------------------------------------

    def add_assignment(self, assignment: Assignment) -> None:
        self._assignments[assignment.id] = assignment

    def assignment(self, assignment_id: str) -> Assignment:
        try:
            return self._assignments[assignment_id]
        except KeyError:
            raise ServiceError(f"unknown assignment {assignment_id!r}", status_code=404)

    def assignments(self) -> list[Assignment]:
        return [self._assignments[k] for k in sorted(self._assignments)]

    # -- drafts -----------------------------------------------------------

    def add_draft(self, draft: EssayDraft) -> None:
        if draft.essay_id in self._drafts:
            raise ValidationError(f"duplicate essay_id {draft.essay_id!r}")
        self._drafts[draft.essay_id] = draft

    def draft(self, essay_id: str) -> EssayDraft:
        try:
            return self._drafts[essay_id]
        except KeyError:
            raise ServiceError(f"unknown essay {essay_id!r}", status_code=404)

    def drafts(self) -> list[EssayDraft]:
        return [self._drafts[k] for k in sorted(self._drafts)]

    def find_draft(
        self, student_id: str, assignment_id: str, stage: str
    ) -> EssayDraft | None:
        for draft in self._drafts.values():
            if (
                draft.student_id == student_id
                and draft.assignment_id == assignment_id
                and draft.stage.value == stage
            ):
                return draft
        return None

    # -- roster -----------------------------------------------------------

    def set_condition(
        self, student_id: str, assignment_id: str, condition: Condition
    ) -> None:
        self._roster[(student_id, assignment_id)] = condition

    def condition(self, student_id: str, assignment_id: str) -> Condition:
        return self._roster.get((student_id, assignment_id), Condition.FEEDBACK_WRITER)

    def roster_entries(self) -> list[dict[str, str]]:
        return [
            {"student_id": s, "assignment_id": a, "condition": c.value}
            for (s, a), c in sorted(self._roster.items())
        ]

    # -- event logs ---------------------------------------------------------

    def log(self, assignment_id: str) -> EventLog:
        with self._lock:
            return self._logs.setdefault(assignment_id, EventLog())

    def logs(self) -> dict[str, EventLog]:
        return dict(self._logs)

    # -- sessions -----------------------------------------------------------

    def session(self, essay_id: str) -> Session | None:
        return self._sessions.get(essay_id)

    def put_session(self, essay_id: str, session: Session) -> None:
        self._sessions[essay_id] = session

    # -- pipeline cache -------------------------------------------------------

    def cached_bundles(self, essay_id: str, cache_key: str) -> list[Any] | None:
        return self._pipeline_cache.get((essay_id, cache_key))

    def put_bundles(self, essay_id: str, cache_key: str, bundles: list[Any]) -> None:
        self._pipeline_cache[(essay_id, cache_key)] = bundles

    # -- exports ---------------------------------------------------------------

    def put_export(self, essay_id: str, export: dict[str, Any]) -> None:
        self._exports[essay_id] = export

    def export(self, essay_id: str) -> dict[str, Any] | None:
        return self._exports.get(essay_id)

    def exports(self) -> list[dict[str, Any]]:
        return [self._exports[k] for k in sorted(self._exports)]

    # -- persistence --------------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        root = Path(directory)
        root.mkdir(parents=True, exist_ok=True)
        (root / "assignments.json").write_text(
            json.dumps([a.to_dict() for a in self.assignments()], indent=2,
                       ensure_ascii=False),
            encoding="utf-8",
        )
        with open(root / "drafts.jsonl", "w", encoding="utf-8") as handle:
            for draft in self.drafts():
                handle.write(json.dumps(draft.to_dict(), ensure_ascii=False) + "\n")
        (root / "roster.json").write_text(
            json.dumps(self.roster_entries(), indent=2), encoding="utf-8"
        )
        (root / "exports.json").write_text(
            json.dumps(self.exports(), indent=2, ensure_ascii=False), encoding="utf-8"
        )
        events_dir = root / "events"
        events_dir.mkdir(exist_ok=True)
        for assignment_id, log in self._logs.items():
            log.dump_jsonl(events_dir / f"{assignment_id}.jsonl")

    @classmethod
    def load(cls, directory: str | Path) -> "DocumentStore":
        root = Path(directory)
        store = cls()
        assignments_path = root / "assignments.json"
        if assignments_path.exists():
            for record in json.loads(assignments_path.read_text(encoding="utf-8")):
                store.add_assignment(Assignment.from_dict(record))
        drafts_path = root / "drafts.jsonl"
        if drafts_path.exists():
            with open(drafts_path, "r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if line:
                        store.add_draft(EssayDraft.from_dict(json.loads(line)))
        roster_path = root / "roster.json"
        if roster_path.exists():
            for entry in json.loads(roster_path.read_text(encoding="utf-8")):
                store.set_condition(
                    entry["student_id"],
                    entry["assignment_id"],
                    Condition(entry["condition"]),
                )
        exports_path = root / "exports.json"
        if exports_path.exists():
            for export in json.loads(exports_path.read_text(encoding="utf-8")):
                store.put_export(export["essay_id"], export)
        events_dir = root / "events"
        if events_dir.is_dir():
            for path in sorted(events_dir.glob("*.jsonl")):
                store._logs[path.stem] = EventLog.load_jsonl(path)
        return store

    def ingest_drafts(
        self, drafts: Iterable[EssayDraft]
    ) -> tuple[list[str], list[dict[str, Any]]]:
        """Add drafts, skipping ids already present; returns (added ids,
        rejection reports)."""
        added: list[str] = []
        rejected: list[dict[str, Any]] = []
        for draft in drafts:
            if draft.assignment_id not in self._assignments:
                rejected.append(
                    {"essay_id": draft.essay_id,
                     "reason": f"unknown assignment {draft.assignment_id!r}"}
                )
                continue
            if draft.essay_id in self._drafts:
                rejected.append(
                    {"essay_id": draft.essay_id, "reason": "duplicate essay_id"}
                )
                continue
            self._drafts[draft.essay_id] = draft
            added.append(draft.essay_id)
        return added, rejected
