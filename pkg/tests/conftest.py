from __future__ import annotations

import itertools
import os

import pytest

from redpen.domain import Condition, EssayDraft, Stage, load_assignment
from redpen.providers import MockProvider
from redpen.service.core import GradingService
from redpen.service.store import DocumentStore

FIRST_TEXT = (
    "School uniforms should be required in public schools. "
    "My thesis is that school uniforms benefit students. "
    "The strongest evidence is a 2019 district survey showing teasing "
    "reports fell by half, i.e. from 4.2 to 2.1 weekly reports. "
    "Uniform costs average 12.50 dollars per shirt. "
    "Critics raise counterarguments about personal expression, and I "
    "respond to them below. "
    "Clothing is one outlet among many, e.g. art, music, and clubs. "
    "Clear transitions connect each paragraph to the next. "
    "In conclusion, uniforms help students focus."
)

FINAL_TEXT = (
    "School uniforms should be required in public schools. "
    "My thesis is that school uniforms benefit students. "
    "The strongest evidence is a 2019 district survey showing teasing "
    "reports fell by half, i.e. from 4.2 to 2.1 weekly reports. "
    "A second survey in 2021 found similar results. "
    "Critics raise counterarguments about personal expression, and I "
    "respond to them below. "
    "Clear transitions connect each paragraph to the next. "
    "In conclusion, uniforms help students focus."
)

ASSIGNMENT_DOC = {
    "id": "asgn-uniforms",
    "prompt_text": "Should public schools require student uniforms? Argue a position.",
    "rubric_items": [
        {
            "id": "r-thesis",
            "text": "States a clear thesis that takes a position",
            "weight": 2,
            "historic_feedback": [
                "State your position in a single sentence in the first paragraph.",
                "Your thesis should name the policy you are defending.",
            ],
        },
        {
            "id": "r-evidence",
            "text": "Supports each claim with specific evidence or data",
            "weight": 1,
            "historic_feedback": [
                "Point to a concrete study, statistic, or example for each claim.",
            ],
        },
        {
            "id": "r-counter",
            "text": "Acknowledges counterarguments and answers them",
            "weight": 1,
            "historic_feedback": [
                "Name the strongest objection before you answer it.",
            ],
        },
        {
            "id": "r-transitions",
            "text": "Uses transitions to organize paragraphs",
            "weight": 1,
            "historic_feedback": [],
        },
        {
            "id": "r-citations",
            "text": "Cites sources for quoted material",
            "weight": 1,
            "historic_feedback": [
                "Add the source for every quotation and statistic.",
            ],
        },
    ],
    "exemplar_questions": [
        "Which sentence states your main claim?",
        "What is the strongest objection a reader could raise?",
        "What evidence could make your second point more convincing?",
    ],
}


@pytest.fixture()
def assignment():
    return load_assignment(ASSIGNMENT_DOC)


@pytest.fixture()
def first_draft():
    return EssayDraft(
        essay_id="essay-s1-first",
        student_id="stu-1",
        assignment_id="asgn-uniforms",
        stage=Stage.FIRST,
        text=FIRST_TEXT,
    )


@pytest.fixture()
def final_draft():
    return EssayDraft(
        essay_id="essay-s1-final",
        student_id="stu-1",
        assignment_id="asgn-uniforms",
        stage=Stage.FINAL,
        text=FINAL_TEXT,
    )


@pytest.fixture()
def provider():
    return MockProvider()


class TickingClock:
    """Deterministic clock: each call advances by ``step`` seconds."""

    def __init__(self, start: float = 1_000.0, step: float = 10.0) -> None:
        self._ticks = itertools.count()
        self.start = start
        self.step = step

    def __call__(self) -> float:
        return self.start + next(self._ticks) * self.step


@pytest.fixture()
def grading_setup(assignment, first_draft, final_draft):
    """(store, service) preloaded with the fixture corpus and a
    deterministic clock; provider is the offline mock."""
    store = DocumentStore()
    store.add_assignment(assignment)
    store.add_draft(first_draft)
    store.add_draft(final_draft)
    service = GradingService(store, MockProvider(), clock=TickingClock())
    return store, service


def live_tests_enabled() -> bool:
    return os.environ.get("REDPEN_LIVE_TESTS", "") == "1" and bool(
        os.environ.get("REDPEN_API_KEY", "")
    )


skip_unless_live = pytest.mark.skipif(
    not live_tests_enabled(),
    reason="live-provider test: set REDPEN_LIVE_TESTS=1 and REDPEN_API_KEY",
)


def live_provider():
    """Build the HTTP chat provider from the environment, or skip.

    Live tests additionally need REDPEN_BASE_URL (chat-completions endpoint)
    and REDPEN_MODEL (model identifier to request).
    """
    from redpen.providers import HttpChatProvider, ProviderConfig

    base_url = os.environ.get("REDPEN_BASE_URL", "")
    model_id = os.environ.get("REDPEN_MODEL", "")
    if not base_url or not model_id:
        pytest.skip("live-provider test: set REDPEN_BASE_URL and REDPEN_MODEL")
    return HttpChatProvider(ProviderConfig(base_url=base_url, model_id=model_id))


@pytest.fixture()
def baseline_roster(grading_setup):
    store, service = grading_setup
    store.set_condition("stu-1", "asgn-uniforms", Condition.BASELINE)
    return store, service
