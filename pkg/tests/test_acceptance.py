"""Acceptance gate: one test per release criterion.

Each criterion is a single test function (``test_cNN_*``), so a ``pytest -v``
run prints exactly one pass/fail line per criterion.  Criteria that need a
live chat provider carry ``skip_unless_live`` and are reported as skips in
offline runs; everything else runs against deterministic oracles, fixtures,
and the offline mock provider.

Numeric targets and tolerances are stated inline next to each assertion.
"""

from __future__ import annotations

import json
import random
import time
from fractions import Fraction
from itertools import product
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from redpen.analytics import (
    EventAction,
    EventLog,
    GradingEvent,
    corpus_adoption,
    freeform_box_id,
    rubric_box_id,
    summarize_log,
)
from redpen.anchoring import (
    SegmentKind,
    SpanAnchor,
    AnchorStatus,
    compute_diff,
    reanchor,
    segment_sentences,
    _diff_units,
)
from redpen.domain import Condition, EssayDraft, Stage, load_assignment
from redpen.errors import ValidationError
from redpen.pipeline import PipelineConfig, bundles_to_json, run_pipeline
from redpen.providers import MockProvider
from redpen.quality import (
    METRIC_NAMES,
    TYPE_NAMES,
    FeedbackMessage,
    IdeaUnit,
    aggregate,
    classify_type,
    cohen_kappa,
    evaluate_messages,
    gold_report,
    kappa_from_pairs,
    load_gold_messages,
    rate_quality,
)
from redpen.scoring import aggregate_score, score_essay
from redpen.service.app import create_app
from redpen.service.core import GradingService
from redpen.service.store import DocumentStore

from .conftest import ASSIGNMENT_DOC, TickingClock, live_provider, skip_unless_live
from .oracles import (
    kappa_2x2_closed_form,
    naive_lcs_length,
    naive_match_pairs,
    weighted_mean_by_hand,
)

DATA_DIR = Path(__file__).parent / "data"


def _report(line: str) -> None:
    # Shown in captured output (and on failure); the per-criterion pass/fail
    # line itself is the test's own -v result line.
    print(f"ACCEPTANCE {line}")


# ---------------------------------------------------------------------------
# c01 — sentence diff + anchor carry-over against the naive oracle
# ---------------------------------------------------------------------------

_C01_POOL = [
    f"Point {i} says {adj} things about topic {i % 7}."
    for i, adj in enumerate(
        [
            "useful", "vague", "strong", "weak", "clear", "odd", "bold",
            "subtle", "plain", "sharp", "broad", "narrow", "fresh", "stale",
            "firm", "loose", "quick", "slow", "deep", "flat", "wide", "thin",
            "warm", "cold", "new", "old", "fair", "harsh", "calm", "loud",
        ]
    )
]


def _c01_random_doc(rng: random.Random) -> str:
    # Mixed sizes: mostly small, some medium, a tail near the 200-sentence cap.
    bucket = rng.random()
    if bucket < 0.6:
        n = rng.randrange(0, 51)
    elif bucket < 0.9:
        n = rng.randrange(51, 121)
    else:
        n = rng.randrange(121, 201)
    out = ""
    for i in range(n):
        sep = rng.choice([" ", "  ", "\n", "\n\n"]) if i else ""
        out += sep + rng.choice(_C01_POOL)
    if rng.random() < 0.2:
        out += rng.choice([" ", "\n"])
    return out


def _c01_mutate(rng: random.Random, text: str) -> str:
    units = [u for u, _ in _diff_units(text)]
    sentences = [u.strip() for u in units if u.strip()]
    ops = rng.randrange(0, max(2, len(sentences) // 3) + 1)
    for _ in range(ops):
        roll = rng.random()
        if roll < 0.34 and sentences:
            sentences.pop(rng.randrange(len(sentences)))
        elif roll < 0.67:
            sentences.insert(
                rng.randrange(len(sentences) + 1), rng.choice(_C01_POOL)
            )
        elif sentences:
            sentences[rng.randrange(len(sentences))] = rng.choice(_C01_POOL)
    return " ".join(sentences)


def test_c01_diff_and_anchor_suite():
    """1,000 randomized draft pairs (≤200 sentences): exact reconstruction,
    oracle-equal LCS alignment, identity reanchoring; all inside 60 s."""
    rng = random.Random(0xD1FF)
    started = time.perf_counter()
    pairs_checked = 0
    for case in range(1_000):
        first = _c01_random_doc(rng)
        final = (
            _c01_mutate(rng, first) if rng.random() < 0.8 else _c01_random_doc(rng)
        )
        diff = compute_diff(first, final)

        # Reconstruction invariants: segment texts tile both drafts exactly,
        # and every stored offset range slices to the segment text.
        assert "".join(
            s.text for s in diff.segments if s.kind is not SegmentKind.ADDED
        ) == first
        assert "".join(
            s.text for s in diff.segments if s.kind is not SegmentKind.REMOVED
        ) == final
        for seg in diff.segments:
            if seg.kind in (SegmentKind.UNCHANGED, SegmentKind.REMOVED):
                assert first[seg.first_start : seg.first_end] == seg.text
            if seg.kind in (SegmentKind.UNCHANGED, SegmentKind.ADDED):
                assert final[seg.final_start : seg.final_end] == seg.text

        # Oracle equality: the unchanged region is exactly the unit sequence
        # the naive LCS matcher keeps (same tie-break contract), and its
        # cardinality is the LCS length (cross-checked on a subsample).
        first_units = [u for u, _ in _diff_units(first)]
        final_units = [u for u, _ in _diff_units(final)]
        oracle_pairs = naive_match_pairs(first_units, final_units)
        unchanged_text = "".join(
            s.text for s in diff.segments if s.kind is SegmentKind.UNCHANGED
        )
        assert unchanged_text == "".join(first_units[i] for i, _ in oracle_pairs)
        assert unchanged_text == "".join(final_units[j] for _, j in oracle_pairs)
        if case % 25 == 0:
            assert len(oracle_pairs) == naive_lcs_length(first_units, final_units)

        # Identity diff maps any grounded anchor onto itself.
        identity = compute_diff(first, first)
        assert identity.is_identity
        spans = segment_sentences(first)
        if spans:
            span = rng.choice(spans)
            anchor = SpanAnchor(
                "first", ((span.start, span.end),), AnchorStatus.GROUNDED
            )
            moved = reanchor(anchor, identity)
            assert moved.ranges == anchor.ranges
            assert moved.status is AnchorStatus.GROUNDED
        pairs_checked += 1

    elapsed = time.perf_counter() - started
    assert pairs_checked == 1_000
    assert elapsed < 60.0, f"diff/anchor suite took {elapsed:.1f}s (budget 60s)"
    _report(f"c01 diff/anchor: 1000 pairs oracle-equal in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# c02 — pipeline + scoring determinism on the fixture corpus
# ---------------------------------------------------------------------------


def _fixture_drafts() -> list[EssayDraft]:
    from .conftest import FINAL_TEXT, FIRST_TEXT

    return [
        EssayDraft("essay-s1-first", "stu-1", "asgn-uniforms", Stage.FIRST, FIRST_TEXT),
        EssayDraft("essay-s1-final", "stu-1", "asgn-uniforms", Stage.FINAL, FINAL_TEXT),
    ]


def test_c02_pipeline_and_scoring_determinism():
    """Mock provider + fixed seed: two full runs over the fixture corpus are
    byte-identical for both run_pipeline and score_essay."""
    assignment = load_assignment(ASSIGNMENT_DOC)
    drafts = _fixture_drafts()

    def run_once() -> bytes:
        blobs: list[str] = []
        for draft in drafts:
            provider = MockProvider()  # fresh provider: no shared state
            bundles = run_pipeline(
                draft, assignment, provider, PipelineConfig(seed=911, parallelism=4)
            )
            blobs.append(bundles_to_json(bundles))
            score = score_essay(draft, assignment, MockProvider(), seed=911)
            blobs.append(json.dumps(score.to_dict(), sort_keys=True))
        return "\n".join(blobs).encode("utf-8")

    first_run = run_once()
    second_run = run_once()
    assert first_run == second_run
    _report(f"c02 determinism: {len(first_run)} bytes identical across runs")


# ---------------------------------------------------------------------------
# c03 — weighted score aggregation against hand arithmetic
# ---------------------------------------------------------------------------


def test_c03_score_aggregation_oracle():
    """Exhaustive n≤5 grid (weights 0–3, every verdict vector) plus 10,000
    fuzz cases for scale and monotonicity invariants, exact on rationals."""
    exhaustive = 0
    for n in range(1, 6):
        for weights in product((0, 1, 2, 3), repeat=n):
            if sum(weights) == 0:
                with pytest.raises(ValidationError):
                    aggregate_score([1] * n, list(weights))
                continue
            for verdicts in product((0, 1), repeat=n):
                got = aggregate_score(list(verdicts), list(weights))
                assert got == weighted_mean_by_hand(verdicts, weights)
                exhaustive += 1

    rng = random.Random(0x5C04E)
    fuzz = 0
    for _ in range(10_000):
        n = rng.randrange(1, 9)
        weights = [
            Fraction(rng.randrange(0, 10), rng.randrange(1, 10)) for _ in range(n)
        ]
        if sum(weights) == 0:
            weights[rng.randrange(n)] += Fraction(1, 3)
        verdicts = [rng.randrange(2) for _ in range(n)]
        base = aggregate_score(verdicts, weights)

        # Scale invariance: multiplying all weights by k > 0 changes nothing.
        k = Fraction(rng.randrange(1, 12), rng.randrange(1, 12))
        assert aggregate_score(verdicts, [w * k for w in weights]) == base

        # Monotonicity: granting one unmet verdict never lowers the score,
        # and strictly raises it when that verdict carries positive weight.
        unmet = [i for i, v in enumerate(verdicts) if v == 0]
        if unmet:
            i = rng.choice(unmet)
            raised = list(verdicts)
            raised[i] = 1
            lifted = aggregate_score(raised, weights)
            assert lifted >= base
            if weights[i] > 0:
                assert lifted > base
        fuzz += 1

    assert fuzz == 10_000
    _report(f"c03 scoring oracle: {exhaustive} exhaustive + {fuzz} fuzz cases exact")


# ---------------------------------------------------------------------------
# c04 — Cohen's kappa against the 2×2 closed form
# ---------------------------------------------------------------------------


def test_c04_kappa_oracle():
    """All 2×2 confusion matrices with entries ≤ 30 (exhaustive) match the
    closed form within 1e−9; the canonical [[45,5],[5,45]] equals 0.8."""
    checked = 0
    for a in range(31):
        for b in range(31):
            for c in range(31):
                for d in range(31):
                    if a + b + c + d == 0:
                        continue  # no observations: rejected, not scored
                    got = cohen_kappa([[a, b], [c, d]])
                    want = kappa_2x2_closed_form(a, b, c, d)
                    if want is None:
                        assert got.kappa is None
                        assert got.pe == 1.0
                    else:
                        assert got.kappa is not None
                        assert abs(got.kappa - want) <= 1e-9
                    checked += 1
    with pytest.raises(ValidationError):
        cohen_kappa([[0, 0], [0, 0]])

    canonical = cohen_kappa([[45, 5], [5, 45]])
    assert canonical.kappa == 0.8
    assert canonical.kappa_fraction == Fraction(4, 5)
    _report(f"c04 kappa oracle: {checked} matrices within 1e-9; [[45,5],[5,45]] = 0.8")


# ---------------------------------------------------------------------------
# c05 — usage-report means on a log with known per-essay counts
# ---------------------------------------------------------------------------


def _spread(total: int, essays: int) -> list[int]:
    """Deterministic nonnegative integers summing to ``total``: the first
    ``total % essays`` essays take one extra on top of the common base."""
    base, extra = divmod(total, essays)
    return [base + (1 if i < extra else 0) for i in range(essays)]


def _append(log: EventLog, essay: str, action: EventAction, payload: dict) -> None:
    event_id = log.next_event_id(essay)
    log.append(
        GradingEvent(
            event_id=event_id,
            timestamp=float(event_id),
            grader_id="grader-x",
            essay_id=essay,
            action=action,
            payload=payload,
        )
    )


def test_c05_usage_means_fixture():
    """A 100-essay log built from known per-essay counts reproduces the
    target means (2.83, 1.92, 3.41, 0.91, 1.27, 8.71) to 2 decimals."""
    essays = 100
    flips = _spread(283, essays)
    historic = _spread(192, essays)
    ai_constructive = _spread(341, essays)
    ai_positive = _spread(91, essays)
    freeform = _spread(127, essays)
    typed = _spread(120, essays)
    rubric_ids = [f"r-{k:02d}" for k in range(10)]

    log = EventLog()
    for i in range(essays):
        essay = f"t5-e{i:03d}"
        _append(log, essay, EventAction.OPEN, {
            "rubric_ids": rubric_ids,
            "condition": Condition.FEEDBACK_WRITER.value,
        })
        for f in range(flips[i]):
            _append(log, essay, EventAction.FLIP, {
                "rubric_id": rubric_ids[f % len(rubric_ids)],
                "met": f % 2,
                "text": "Revised suggestion.",
                "kind": "constructive" if f % 2 == 0 else "positive",
            })
        cursor = 0
        for _ in range(historic[i]):
            _append(log, essay, EventAction.ADOPT_HISTORIC, {
                "box_id": rubric_box_id(rubric_ids[cursor]),
                "text": "Reused instructor comment.",
            })
            cursor += 1
        for j in range(ai_constructive[i] + ai_positive[i]):
            _append(log, essay, EventAction.ADOPT_AI, {
                "box_id": rubric_box_id(rubric_ids[cursor]),
                "text": "Adopted model suggestion.",
                "kind": "constructive" if j < ai_constructive[i] else "positive",
            })
            cursor += 1
        for _ in range(typed[i]):
            _append(log, essay, EventAction.EDIT_FINAL_TEXT, {
                "box_id": rubric_box_id(rubric_ids[cursor]),
                "text": "Typed comment.",
            })
            cursor += 1
        for n in range(freeform[i]):
            _append(log, essay, EventAction.ADD_FREEFORM, {
                "box_id": freeform_box_id(n + 1),
                "text": "Extra note.",
            })
        _append(log, essay, EventAction.CLOSE, {})

    report = summarize_log(log)
    # Per-essay counters must equal the construction plan exactly.
    for i, summary in enumerate(report.per_essay):
        assert summary.flip_count == flips[i]
        assert summary.historic_adds == historic[i]
        assert summary.ai_constructive_adds == ai_constructive[i]
        assert summary.ai_positive_adds == ai_positive[i]
        assert summary.additional_feedback_count == freeform[i]
        assert summary.total_feedback == (
            historic[i] + ai_constructive[i] + ai_positive[i] + typed[i] + freeform[i]
        )

    assert len(report.per_essay) == essays
    assert round(report.mean_flips, 2) == 2.83
    assert round(report.mean_historic_adds, 2) == 1.92
    assert round(report.mean_ai_constructive_adds, 2) == 3.41
    assert round(report.mean_ai_positive_adds, 2) == 0.91
    assert round(report.mean_additional_feedback, 2) == 1.27
    assert round(report.mean_total_feedback, 2) == 8.71
    _report("c05 usage means: 2.83/1.92/3.41/0.91/1.27/8.71 reproduced")


# ---------------------------------------------------------------------------
# c06 — adoption/approval totals on a corpus with known provenance
# ---------------------------------------------------------------------------


def test_c06_adoption_fixture():
    """A 694-essay corpus with known judgment and provenance counts yields
    exactly 1,348 historic and 3,141 AI comment adoptions and an 88.7%
    judgment approval rate (51.3% of comments AI-sourced)."""
    essays = 694
    rubric_counts = _spread(24_270, essays)
    corrected = _spread(2_747, essays)
    historic = _spread(1_348, essays)
    ai_constructive = _spread(2_400, essays)
    ai_positive = _spread(741, essays)
    manual = _spread(1_632, essays)

    log = EventLog()
    for i in range(essays):
        essay = f"ad-e{i:03d}"
        rubric_ids = [f"r-{k:02d}" for k in range(rubric_counts[i])]
        _append(log, essay, EventAction.OPEN, {
            "rubric_ids": rubric_ids,
            "condition": Condition.FEEDBACK_WRITER.value,
        })
        # One flip on each corrected rubric: odd parity = overridden verdict.
        for f in range(corrected[i]):
            _append(log, essay, EventAction.FLIP, {
                "rubric_id": rubric_ids[20 + f],
                "met": 0,
                "text": "Flipped suggestion.",
                "kind": "constructive",
            })
        cursor = 0
        for _ in range(historic[i]):
            _append(log, essay, EventAction.ADOPT_HISTORIC, {
                "box_id": rubric_box_id(rubric_ids[cursor]),
                "text": "Reused instructor comment.",
            })
            cursor += 1
        for j in range(ai_constructive[i] + ai_positive[i]):
            _append(log, essay, EventAction.ADOPT_AI, {
                "box_id": rubric_box_id(rubric_ids[cursor]),
                "text": "Adopted model suggestion.",
                "kind": "constructive" if j < ai_constructive[i] else "positive",
            })
            cursor += 1
        for _ in range(manual[i]):
            _append(log, essay, EventAction.EDIT_FINAL_TEXT, {
                "box_id": rubric_box_id(rubric_ids[cursor]),
                "text": "Typed comment.",
            })
            cursor += 1

    report = corpus_adoption(log)
    assert report.essays == essays
    assert report.judgments_total == 24_270
    assert report.corrected == 2_747
    assert report.approved == 21_523
    assert round(report.approved_fraction, 3) == 0.887  # 88.7% approved
    assert report.historic_comments == 1_348
    assert report.ai_comments == 3_141
    assert report.ai_constructive_comments == 2_400
    assert report.ai_positive_comments == 741
    assert report.manual_comments == 1_632
    assert report.comments_total == 6_121
    assert round(report.ai_fraction, 3) == 0.513  # 51.3% of comments
    # 1,348 of 6,121 comments = 22.0% historic (exact count is the target).
    assert round(report.historic_fraction, 3) == 0.220
    _report(
        "c06 adoption: 1348 historic (22.0%), 3141 AI (51.3%), 88.7% approved"
    )


# ---------------------------------------------------------------------------
# c07 — baseline sessions leak no AI fields
# ---------------------------------------------------------------------------

# JSON key markers that would reveal AI output in a response body.  The
# quoted-key form avoids false positives from ordinary prose.
_AI_FIELD_MARKERS = (
    '"met"',
    '"ai"',
    '"ai_suggestion"',
    '"ai_suggestions"',
    '"bundles"',
    '"judgment"',
    '"judgments"',
    '"rationale"',
    '"suggestion"',
    '"suggestions"',
    '"kind"',
    '"stale"',
    '"historic_available"',
)


def test_c07_baseline_payloads_carry_no_ai_fields():
    """500 baseline-session responses scanned: zero AI judgment/suggestion
    fields anywhere, and the provider is never called."""
    store = DocumentStore()
    store.add_assignment(load_assignment(ASSIGNMENT_DOC))
    essays = []
    for i in range(250):
        essay_id = f"essay-b{i:03d}"
        student = f"stu-b{i:03d}"
        store.add_draft(EssayDraft(
            essay_id=essay_id,
            student_id=student,
            assignment_id="asgn-uniforms",
            stage=Stage.FIRST,
            text=f"Draft {i}. Uniforms help focus. A survey backs this. So it stands.",
        ))
        store.set_condition(student, "asgn-uniforms", Condition.BASELINE)
        essays.append(essay_id)

    provider = MockProvider()
    service = GradingService(store, provider, clock=TickingClock())
    client = TestClient(create_app(service))

    responses: list[str] = []
    for essay_id in essays:
        opened = client.post(
            f"/sessions/{essay_id}/open", json={"grader_id": "grader-7"}
        )
        assert opened.status_code == 200
        viewed = client.get(f"/sessions/{essay_id}")
        assert viewed.status_code == 200
        responses.extend([opened.text, viewed.text])

    assert len(responses) == 500
    leaks = [
        (index, marker)
        for index, body in enumerate(responses)
        for marker in _AI_FIELD_MARKERS
        if marker in body
    ]
    assert leaks == [], f"AI fields leaked into baseline responses: {leaks[:5]}"
    assert provider.calls == []  # the pipeline never ran for baseline essays
    _report("c07 gating: 500 baseline responses, zero AI fields, zero provider calls")


# ---------------------------------------------------------------------------
# c08 — event replay reproduces live state; exports are grader-confirmed
# ---------------------------------------------------------------------------


class _ShadowBox:
    """The test's own record of what the grader confirmed for one box."""

    def __init__(self, box_id: str, position: int) -> None:
        self.box_id = box_id
        self.position = position
        self.text = ""
        self.deleted = False


def test_c08_event_replay_and_export_integrity():
    """100 randomized grader sessions: replaying the event log reproduces
    the live session state exactly, and every export contains exactly the
    texts the simulated grader confirmed, in display order."""
    rng = random.Random(0xE8)
    store = DocumentStore()
    store.add_assignment(load_assignment(ASSIGNMENT_DOC))
    for i in range(100):
        store.add_draft(EssayDraft(
            essay_id=f"essay-r{i:03d}",
            student_id=f"stu-r{i:03d}",
            assignment_id="asgn-uniforms",
            stage=Stage.FIRST,
            text=(
                f"Essay {i} argues for uniforms. Evidence comes from a survey. "
                "Critics disagree and I answer them. Transitions are used. "
                "Sources are cited."
            ),
        ))
    service = GradingService(store, MockProvider(), clock=TickingClock())

    rubric_ids = [item["id"] for item in ASSIGNMENT_DOC["rubric_items"]]
    with_historic = [
        item["id"] for item in ASSIGNMENT_DOC["rubric_items"]
        if item["historic_feedback"]
    ]
    text_pool = ["Needs one more source.", "Strong close.", "Tighten this.", ""]

    for i in range(100):
        essay = f"essay-r{i:03d}"
        grader = f"grader-{i % 7}"
        view = service.open_session(essay, grader)
        shadow: dict[str, _ShadowBox] = {
            box["box_id"]: _ShadowBox(box["box_id"], box["position"])
            for box in view["boxes"]
        }
        freeform_count = 0

        for _ in range(rng.randrange(4, 15)):
            action = rng.choice((
                "flip", "regenerate", "adopt_ai", "adopt_historic",
                "edit_final_text", "add_freeform", "delete_feedback",
                "reposition", "set_score",
            ))
            if action in ("flip", "regenerate"):
                view = service.apply_action(
                    essay, grader, action, {"rubric_id": rng.choice(rubric_ids)}
                )
            elif action == "adopt_ai":
                rid = rng.choice(rubric_ids)
                adopted = view["ai_suggestions"][rid]["text"]
                view = service.apply_action(essay, grader, "adopt_ai", {"rubric_id": rid})
                box = shadow[rubric_box_id(rid)]
                box.text = adopted
                box.deleted = False
            elif action == "adopt_historic":
                rid = rng.choice(with_historic)
                adopted = view["bundles"][rid]["historic_suggestion"]["text"]
                view = service.apply_action(
                    essay, grader, "adopt_historic", {"rubric_id": rid}
                )
                box = shadow[rubric_box_id(rid)]
                box.text = adopted
                box.deleted = False
            elif action == "edit_final_text":
                box = shadow[rng.choice(sorted(shadow))]
                text = rng.choice(text_pool)
                view = service.apply_action(
                    essay, grader, "edit_final_text",
                    {"box_id": box.box_id, "text": text},
                )
                box.text = text
                if text.strip():
                    box.deleted = False
            elif action == "add_freeform":
                freeform_count += 1
                box_id = freeform_box_id(freeform_count)
                text = f"Freeform note {freeform_count}."
                new_box = _ShadowBox(box_id, position=len(shadow))
                view = service.apply_action(
                    essay, grader, "add_freeform", {"text": text}
                )
                new_box.text = text
                shadow[box_id] = new_box
            elif action == "delete_feedback":
                box = shadow[rng.choice(sorted(shadow))]
                view = service.apply_action(
                    essay, grader, "delete_feedback", {"box_id": box.box_id}
                )
                box.deleted = True
            elif action == "reposition":
                box = shadow[rng.choice(sorted(shadow))]
                position = rng.randrange(0, 8)
                view = service.apply_action(
                    essay, grader, "reposition",
                    {"box_id": box.box_id, "position": position},
                )
                box.position = position
            else:
                view = service.apply_action(
                    essay, grader, "set_score",
                    {"score": f"{rng.randrange(0, 5)}/4"},
                )

        service.apply_action(essay, grader, "set_score", {"score": "3/4"})

        # Replay-vs-live equality before finalizing…
        live = store.session(essay).state
        assert service.replay_state(essay).to_dict() == live.to_dict()

        # …and the export carries exactly the grader-confirmed texts.
        export, _warnings = service.finalize_and_export(essay, grader)
        expected = [
            box.text
            for box in sorted(shadow.values(), key=lambda b: (b.position, b.box_id))
            if not box.deleted and box.text.strip()
        ]
        assert [c.final_text for c in export.comments] == expected

        # Replay also reproduces the post-export state.
        live = store.session(essay).state
        assert live.exported and not live.is_open
        assert service.replay_state(essay).to_dict() == live.to_dict()

    _report("c08 explicit insertion: 100 replayed sessions, exports grader-confirmed")


# ---------------------------------------------------------------------------
# c09 — feedback-quality evaluation on the double-annotated gold set
# ---------------------------------------------------------------------------


def _load_gold():
    doc = json.loads((DATA_DIR / "quality_gold.json").read_text(encoding="utf-8"))
    assignment = load_assignment(doc["assignment"])
    gold = load_gold_messages(doc["messages"])
    second = load_gold_messages(
        [{**m, "units": m["annotator_b"]} for m in doc["messages"]]
    )
    return doc, assignment, gold, second


def test_c09_feedback_eval_mock_invariants():
    """The 100-message gold set is well-formed and double-annotated with
    κ ≥ 0.6 per metric; mock-provider evaluation satisfies the metric
    applicability rule, exact tiling, and aggregate permutation invariance
    on 100% of messages."""
    doc, assignment, gold, second = _load_gold()
    assert len(gold) == 100

    # Gold-set integrity: both annotators tile every message exactly and
    # respect the applicability rule for independence/actionability.
    for annotation in (gold, second):
        for message in annotation:
            assert "".join(u.text for u in message.units) == message.message.text
            for unit in message.units:
                applicable = (
                    unit.types.problem or unit.types.solution
                ) and not unit.prose_mechanics_only
                has_extra = (
                    unit.quality.independence is not None
                    and unit.quality.actionability is not None
                )
                lacks_extra = (
                    unit.quality.independence is None
                    and unit.quality.actionability is None
                )
                assert has_extra if applicable else lacks_extra

    # Inter-annotator agreement per quality metric (paired on shared units).
    for name in METRIC_NAMES:
        rater_a: list[int] = []
        rater_b: list[int] = []
        for message_a, message_b in zip(gold, second):
            for unit_a, unit_b in zip(message_a.units, message_b.units):
                value_a = getattr(unit_a.quality, name)
                value_b = getattr(unit_b.quality, name)
                if value_a is not None and value_b is not None:
                    rater_a.append(int(value_a))
                    rater_b.append(int(value_b))
        result = kappa_from_pairs(rater_a, rater_b)
        assert result.kappa is not None and result.kappa >= 0.6, (
            f"{name}: inter-annotator kappa {result.kappa}"
        )

    # Mock-provider evaluation invariants on every message.
    messages = [g.message for g in gold]
    produced = evaluate_messages(messages, assignment, MockProvider(), seed=0)
    assert set(produced) == {m.message_id for m in messages}
    for message in messages:
        units = produced[message.message_id]
        assert units, f"{message.message_id}: no units produced"
        assert "".join(u.text for u in units) == message.text
        for unit in units:
            unit.validate()  # applicability + rated-unit invariants
            assert unit.types is not None and unit.quality is not None
            assert unit.flags == ()
            if unit.metrics_applicable:
                assert unit.quality.independence is not None
                assert unit.quality.actionability is not None
            else:
                assert unit.quality.independence is None
                assert unit.quality.actionability is None

    # Aggregation is order-independent: any permutation of the corpus
    # produces the identical report.
    baseline_report = aggregate(messages, produced, assignment).to_dict()
    shuffler = random.Random(99)
    for _ in range(3):
        shuffled = list(messages)
        shuffler.shuffle(shuffled)
        assert aggregate(shuffled, produced, assignment).to_dict() == baseline_report

    _report("c09 (mock): 100/100 messages satisfy applicability + permutation invariants")


@skip_unless_live
@pytest.mark.live_provider
def test_c09_feedback_eval_live_agreement():
    """Live provider on the gold set: segmentation+linking accuracy ≥ 0.85
    and κ ≥ 0.6 for every quality metric."""
    _doc, assignment, gold, _second = _load_gold()
    provider = live_provider()
    produced = evaluate_messages(
        [g.message for g in gold], assignment, provider, seed=0
    )
    report = gold_report(produced, gold)
    assert report.segmentation_accuracy >= 0.85, (
        f"segmentation+linking accuracy {report.segmentation_accuracy:.3f} < 0.85"
    )
    for name in METRIC_NAMES:
        result = report.metric_kappa.get(name)
        assert result is not None and result.kappa is not None, f"{name}: no pairs"
        assert result.kappa >= 0.6, f"{name}: kappa {result.kappa:.3f} < 0.6"
    _report(
        f"c09 (live): segmentation {report.segmentation_accuracy:.3f}, "
        f"kappas {[round(report.metric_kappa[n].kappa, 3) for n in METRIC_NAMES]}"
    )


# ---------------------------------------------------------------------------
# c10 — labeled-example regression for type and quality classifiers
# ---------------------------------------------------------------------------


def _load_labeled_examples():
    doc = json.loads(
        (DATA_DIR / "labeled_feedback_examples.json").read_text(encoding="utf-8")
    )
    return load_assignment(doc["assignment"]), doc["records"]


def test_c10_labeled_examples_fixture_integrity():
    """The labeled-example fixture holds 26 feedback texts carrying 29
    expected type/metric tags, all well-formed."""
    assignment, records = _load_labeled_examples()
    assert len(records) == 26
    assert len(assignment.rubric_items) == 5
    checks = 0
    for record in records:
        assert record["text"].strip()
        expected = record["expected"]
        assert set(expected) <= {"types", "metrics"}
        for type_name in expected.get("types", ()):
            assert type_name in TYPE_NAMES
            checks += 1
        for metric_name, value in expected.get("metrics", {}).items():
            assert metric_name in METRIC_NAMES
            assert value in (0, 1)
            checks += 1
    assert checks == 29
    _report("c10 fixture: 26 labeled examples, 29 expected tags")


@skip_unless_live
@pytest.mark.live_provider
def test_c10_labeled_examples_live_regression():
    """Live provider reproduces ≥ 90% of the labeled example tags."""
    assignment, records = _load_labeled_examples()
    provider = live_provider()
    hits = 0
    total = 0
    misses: list[str] = []
    for record in records:
        message = FeedbackMessage(
            essay_id=record["id"],
            text=record["text"],
            condition=Condition.FEEDBACK_WRITER,
        )
        unit = IdeaUnit(message_id=message.message_id, text=message.text)
        unit = classify_type(unit, message, provider, seed=0)
        if unit.types is not None and unit.types.any:
            unit = rate_quality(unit, message, assignment, provider, seed=0)
        expected = record["expected"]
        for type_name in expected.get("types", ()):
            total += 1
            if unit.types is not None and getattr(unit.types, type_name):
                hits += 1
            else:
                misses.append(f"{record['id']}:{type_name}")
        for metric_name, value in expected.get("metrics", {}).items():
            total += 1
            got = (
                getattr(unit.quality, metric_name)
                if unit.quality is not None
                else None
            )
            if got == value:
                hits += 1
            else:
                misses.append(f"{record['id']}:{metric_name}={got}")
    assert total == 29
    fraction = hits / total
    assert fraction >= 0.9, (
        f"labeled-example agreement {fraction:.2%} < 90%; misses: {misses}"
    )
    _report(f"c10 (live): {hits}/{total} tags reproduced ({fraction:.0%})")
