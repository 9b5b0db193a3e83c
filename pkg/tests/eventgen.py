"""Builders for large synthetic grading-event corpora used by the
analytics tests and the acceptance gate.

Two fixture logs are built deterministically (no randomness):

* ``usage_fixture_log`` — 100 essays whose interaction totals are chosen
  so the per-essay means land on the published two-decimal targets
  (flips 2.83, historic adoptions 1.92, AI-constructive 3.41,
  AI-positive 0.91, additional comments 1.27, total feedback 8.71).
* ``adoption_fixture_log`` — 694 essays / 24,270 judgments with exactly
  1,348 historic and 3,141 AI comments among 6,121 total, 2,747
  corrected judgments (88.7% approved), plus 100 double-flips that must
  count as approved.
"""

from __future__ import annotations

from redpen.analytics import EventAction, EventLog, GradingEvent


def allocate(total: int, essays: int) -> list[int]:
    """Spread ``total`` units over ``essays`` as evenly as possible:
    the first ``total % essays`` essays get one extra."""
    base, extra = divmod(total, essays)
    return [base + (1 if i < extra else 0) for i in range(essays)]


class EssayScript:
    """Emits a valid per-essay event sequence into a shared log."""

    def __init__(
        self,
        log: EventLog,
        essay_id: str,
        grader_id: str,
        rubric_ids: list[str],
        *,
        start_ts: float,
        condition: str = "feedback_writer",
    ) -> None:
        self.log = log
        self.essay_id = essay_id
        self.grader_id = grader_id
        self.rubric_ids = rubric_ids
        self.ts = start_ts
        self.next_id = 1
        self.freeform_count = 0
        self.condition = condition

    def emit(self, action: EventAction, payload: dict) -> None:
        self.log.append(
            GradingEvent(
                event_id=self.next_id,
                timestamp=self.ts,
                grader_id=self.grader_id,
                essay_id=self.essay_id,
                action=action,
                payload=payload,
            )
        )
        self.next_id += 1
        self.ts += 7.0

    def open(self) -> None:
        payload = {
            "rubric_ids": self.rubric_ids,
            "condition": self.condition,
            "rubric_count": len(self.rubric_ids),
        }
        if self.condition == "feedback_writer":
            payload["met"] = {rid: 0 for rid in self.rubric_ids}
            payload["ai"] = {
                rid: {"text": f"Consider {rid}?", "kind": "constructive", "stale": False}
                for rid in self.rubric_ids
            }
        self.emit(EventAction.OPEN, payload)

    def flip(self, rubric_id: str, times: int) -> None:
        met = 0
        for _ in range(times):
            met = 1 - met
            self.emit(
                EventAction.FLIP,
                {
                    "rubric_id": rubric_id,
                    "met": met,
                    "text": f"Regenerated for {rubric_id}",
                    "kind": "positive" if met else "constructive",
                    "stale": False,
                },
            )

    def adopt_historic(self, rubric_id: str) -> None:
        self.emit(
            EventAction.ADOPT_HISTORIC,
            {"box_id": f"rubric:{rubric_id}", "text": f"Curated advice for {rubric_id}."},
        )

    def adopt_ai(self, rubric_id: str, kind: str) -> None:
        self.emit(
            EventAction.ADOPT_AI,
            {
                "box_id": f"rubric:{rubric_id}",
                "text": f"{kind.title()} suggestion for {rubric_id}.",
                "kind": kind,
            },
        )

    def type_into(self, rubric_id: str) -> None:
        self.emit(
            EventAction.EDIT_FINAL_TEXT,
            {"box_id": f"rubric:{rubric_id}", "text": f"Hand-written note on {rubric_id}."},
        )

    def add_freeform(self) -> None:
        self.freeform_count += 1
        self.emit(
            EventAction.ADD_FREEFORM,
            {
                "box_id": f"freeform:{self.freeform_count}",
                "text": f"Overall remark {self.freeform_count}.",
            },
        )

    def finish(self, score: str = "3/4") -> None:
        self.emit(EventAction.SET_SCORE, {"score": score})
        self.emit(EventAction.CLOSE, {})
        self.emit(EventAction.EXPORT, {})


def usage_fixture_log() -> EventLog:
    """100-essay corpus hitting the published mean interaction counts."""
    essays = 100
    flips = allocate(283, essays)
    historic = allocate(192, essays)
    constructive = allocate(341, essays)
    positive = allocate(91, essays)
    additional = allocate(127, essays)
    typed = allocate(120, essays)  # direct-typed rubric boxes complete the total
    rubric_ids = [f"r{k:02d}" for k in range(10)]

    log = EventLog()
    for i in range(essays):
        script = EssayScript(
            log,
            essay_id=f"essay-{i:03d}",
            grader_id=f"grader-{i % 10}",
            rubric_ids=rubric_ids,
            start_ts=1_000.0 * i,
        )
        script.open()
        script.flip(rubric_ids[-1], flips[i])
        cursor = 0
        for _ in range(historic[i]):
            script.adopt_historic(rubric_ids[cursor])
            cursor += 1
        for _ in range(constructive[i]):
            script.adopt_ai(rubric_ids[cursor], "constructive")
            cursor += 1
        for _ in range(positive[i]):
            script.adopt_ai(rubric_ids[cursor], "positive")
            cursor += 1
        for _ in range(typed[i]):
            script.type_into(rubric_ids[cursor])
            cursor += 1
        for _ in range(additional[i]):
            script.add_freeform()
        script.finish()
    return log


USAGE_FIXTURE_TOTALS = {
    "flips": 283,
    "historic": 192,
    "ai_constructive": 341,
    "ai_positive": 91,
    "additional": 127,
    "total_feedback": 871,  # 192 + 341 + 91 + 127 + 120 typed
}


def adoption_fixture_log() -> EventLog:
    """694-essay corpus with exact judgment and comment provenance counts.

    693 essays carry 35 rubric judgments, one carries 15: 24,270 total.
    2,747 judgments are corrected (odd flip parity); the first 100 essays
    also double-flip one extra rubric, which must still count as approved.
    Final comments: 1,348 historic + 2,400 AI-constructive + 741
    AI-positive + 800 freeform + 832 hand-typed = 6,121.
    """
    essays = 694
    historic = allocate(1_348, essays)
    constructive = allocate(2_400, essays)
    positive = allocate(741, essays)
    freeform = allocate(800, essays)
    typed = allocate(832, essays)
    corrected = allocate(2_747, essays)

    log = EventLog()
    for i in range(essays):
        rubric_total = 15 if i == essays - 1 else 35
        rubric_ids = [f"r{k:02d}" for k in range(rubric_total)]
        script = EssayScript(
            log,
            essay_id=f"essay-{i:03d}",
            grader_id=f"grader-{i % 12}",
            rubric_ids=rubric_ids,
            start_ts=1_000.0 * i,
        )
        script.open()
        # Corrected judgments: one flip each, on rubrics clear of the
        # adoption boxes (which use the low indices).
        flip_start = rubric_total - corrected[i] - (1 if i < 100 else 0)
        for k in range(corrected[i]):
            script.flip(rubric_ids[flip_start + k], 1)
        if i < 100:  # flip-and-flip-back: approved, not corrected
            script.flip(rubric_ids[rubric_total - 1], 2)
        cursor = 0
        for _ in range(historic[i]):
            script.adopt_historic(rubric_ids[cursor])
            cursor += 1
        for _ in range(constructive[i]):
            script.adopt_ai(rubric_ids[cursor], "constructive")
            cursor += 1
        for _ in range(positive[i]):
            script.adopt_ai(rubric_ids[cursor], "positive")
            cursor += 1
        for _ in range(typed[i]):
            script.type_into(rubric_ids[cursor])
            cursor += 1
        for _ in range(freeform[i]):
            script.add_freeform()
        script.finish(score="2/3")
    return log


ADOPTION_FIXTURE_TOTALS = {
    "essays": 694,
    "judgments_total": 24_270,
    "corrected": 2_747,
    "approved": 21_523,
    "comments_total": 6_121,
    "historic_comments": 1_348,
    "ai_comments": 3_141,
    "ai_constructive_comments": 2_400,
    "ai_positive_comments": 741,
    "manual_comments": 1_632,
}
