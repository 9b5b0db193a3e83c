#!/usr/bin/env python3
"""Generate tests/data/quality_gold.json: a double-annotated feedback corpus.

One hundred grader-written feedback messages for a fictional persuasive-essay
assignment, each segmented into idea units with adjudicated gold labels
(rubric links, type flags, binary quality ratings) plus an independent second
annotator's labels for agreement checks.

The file is deterministic for a fixed SEED; regenerating it with an unchanged
script is a no-op.  The script verifies its own output before writing:

* unit texts tile each message exactly (concatenation round-trips),
* independence/actionability are present iff the unit states a problem or a
  solution and is not purely about prose mechanics (both annotators),
* label marginals are not degenerate, and
* inter-annotator Cohen's kappa is >= 0.70 for every type flag and quality
  metric that admits disagreement.
"""

from __future__ import annotations

import json
import random
import sys
from dataclasses import dataclass
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from redpen.quality import kappa_from_pairs  # noqa: E402

SEED = 20240917
OUT_PATH = REPO / "tests" / "data" / "quality_gold.json"

MESSAGE_COUNT = 100
FEEDBACK_WRITER_MESSAGES = 75
FEEDBACK_WRITER_ESSAYS = 28
BASELINE_ESSAYS = 12

ASSIGNMENT = {
    "id": "gold-fourday",
    "prompt_text": (
        "Should Oakdale High adopt a four-day school week? Take a position "
        "and defend it using the assigned district report, the parent "
        "survey, and at least one additional reading."
    ),
    "rubric_items": [
        {
            "id": "r-thesis",
            "text": "The essay states a clear, arguable thesis in the opening paragraph.",
            "weight": 2,
        },
        {
            "id": "r-evidence",
            "text": "Claims are supported with specific evidence from the assigned readings.",
            "weight": 1,
        },
        {
            "id": "r-counterargument",
            "text": "The essay presents at least one opposing view and responds to it.",
            "weight": 1,
        },
        {
            "id": "r-organization",
            "text": "Paragraphs follow a logical order with clear transitions.",
            "weight": 1,
        },
        {
            "id": "r-citations",
            "text": "Sources are cited in the format required by the assignment sheet.",
            "weight": 1,
        },
        {
            "id": "r-conclusion",
            "text": "The conclusion restates the argument and explains why it matters.",
            "weight": 1,
        },
    ],
    "exemplar_questions": [
        "What would a school day look like under your proposal?",
        "Which stakeholder loses the most, and how do you answer them?",
        "What evidence would change your mind?",
    ],
}

RUBRIC_IDS = [item["id"] for item in ASSIGNMENT["rubric_items"]]


@dataclass(frozen=True)
class UnitTemplate:
    """One reusable idea-unit with its adjudicated labels.

    ``types`` is a subset of {"summary", "praise", "problem", "solution"};
    ``acc``/``tone`` are always rated; ``ind``/``act`` must be given exactly
    when the unit is applicable (problem or solution, not mechanics-only).
    """

    text: str
    types: frozenset[str]
    links: frozenset[str]
    acc: int
    tone: int
    ind: int | None = None
    act: int | None = None
    mech: bool = False
    slot: tuple[str, ...] = ()

    @property
    def applicable(self) -> bool:
        return bool(self.types & {"problem", "solution"}) and not self.mech


def T(
    text: str,
    types: str,
    links: str = "",
    acc: int = 1,
    tone: int = 1,
    ind: int | None = None,
    act: int | None = None,
    mech: bool = False,
    slot: tuple[str, ...] = (),
) -> UnitTemplate:
    return UnitTemplate(
        text=text,
        types=frozenset(t for t in types.split("+") if t),
        links=frozenset(l for l in links.split(",") if l),
        acc=acc,
        tone=tone,
        ind=ind,
        act=act,
        mech=mech,
        slot=slot,
    )


TOPICS = ("costs", "attendance", "childcare", "teacher morale", "athletics")

# Pool of idea units.  Labels are the adjudicated gold standard; a second
# annotator's pass is derived from them below with controlled disagreement.
TEMPLATES: list[UnitTemplate] = [
    # --- thesis ---
    T(
        "You open by summarizing the debate, but you never commit to a side on the four-day week.",
        "problem", "r-thesis", ind=1, act=1,
    ),
    T(
        "State your position on the schedule change in the first paragraph so the reader knows where you stand.",
        "solution", "r-thesis", ind=1, act=1,
    ),
    T(
        "Your thesis drifts between saving money and improving learning; pick the claim you can best support and cut the other.",
        "problem+solution", "r-thesis", ind=0, act=1,
    ),
    T(
        "Strong thesis — it takes a clear position and previews your two main reasons.",
        "praise", "r-thesis",
    ),
    T(
        "Your opening paragraph argues the school should keep the five-day week.",
        "summary", "r-thesis",
    ),
    T(
        "The essay never states a thesis.",
        "problem", "r-thesis", acc=0, tone=0, ind=1, act=0,
    ),
    # --- evidence ---
    T(
        "You claim attendance improved in other districts but give no numbers from the readings.",
        "problem", "r-evidence", ind=1, act=1,
    ),
    T(
        "Quote the district report's attendance figures to back up your second paragraph.",
        "solution", "r-evidence", ind=0, act=1,
    ),
    T(
        "The cost-savings claim rests on one blog post; find support in the assigned study instead.",
        "problem+solution", "r-evidence", tone=0, ind=0, act=1,
    ),
    T(
        "Good use of the survey data to support your point about student fatigue.",
        "praise", "r-evidence",
    ),
    T(
        "Your evidence about childcare costs actually supports the opposing side.",
        "problem", "r-evidence", acc=0, ind=1, act=0,
    ),
    T(
        "Which of the assigned readings could support this paragraph?",
        "solution", "r-evidence", ind=1, act=0,
    ),
    T(
        "You cite the two districts that tried the shorter week.",
        "summary", "r-evidence", acc=0,
    ),
    # --- counterargument ---
    T(
        "You never address the strongest objection: what families do with children on the fifth day.",
        "problem", "r-counterargument", ind=1, act=1,
    ),
    T(
        "Add a paragraph that presents the childcare objection and answers it with your cost evidence.",
        "solution", "r-counterargument", ind=0, act=1,
    ),
    T(
        "You mention opponents only to dismiss them; summarize their best point fairly before responding.",
        "problem+solution", "r-counterargument", tone=0, ind=1, act=1,
    ),
    T(
        "Nice job presenting the objection about teacher pay in its strongest form before answering it.",
        "praise", "r-counterargument",
    ),
    T(
        "Your response to the attendance objection misreads it; the concern is about parents' schedules, not students'.",
        "problem", "r-counterargument", acc=0, ind=1, act=0,
    ),
    T(
        "The third paragraph concedes the transition would be hard for working parents.",
        "summary", "r-counterargument",
    ),
    # --- organization ---
    T(
        "Paragraph four jumps from budgets to sports with no transition.",
        "problem", "r-organization", ind=1, act=1,
    ),
    T(
        "Move the cost analysis ahead of the morale discussion so each point builds on the last.",
        "solution", "r-organization", ind=0, act=1,
    ),
    T(
        "The essay flows well; each paragraph opens by linking back to the previous point.",
        "praise", "r-organization",
    ),
    T(
        "The middle section repeats the savings argument three times.",
        "problem", "r-organization", acc=0, tone=0, ind=1, act=0,
    ),
    T(
        "Try outlining your paragraphs in one sentence each, then reorder the outline until the argument builds.",
        "solution", "r-organization", ind=1, act=1,
    ),
    # --- citations ---
    T(
        "The quote in paragraph two has no citation.",
        "problem", "r-citations", ind=1, act=1,
    ),
    T(
        "Cite the attendance report in the format the assignment sheet shows.",
        "solution", "r-citations", tone=0, ind=0, act=1,
    ),
    T(
        "Several citations carry page numbers that do not match the reading.",
        "problem", "r-citations", acc=0, ind=1, act=1,
    ),
    T(
        "Every source you quote is cited, and the format matches the sheet.",
        "praise", "r-citations",
    ),
    T(
        "You cite the district report and the parent survey.",
        "summary", "r-citations",
    ),
    # --- conclusion ---
    T(
        "The conclusion introduces a brand-new argument about teacher burnout.",
        "problem", "r-conclusion", ind=1, act=1,
    ),
    T(
        "End by answering the question you opened with: what should the school board do on Monday?",
        "solution", "r-conclusion", ind=1, act=1,
    ),
    T(
        "Your final paragraph ties the evidence back to the thesis cleanly.",
        "praise", "r-conclusion",
    ),
    T(
        "The essay simply stops after the last body paragraph.",
        "problem", "r-conclusion", tone=0, ind=1, act=0,
    ),
    T(
        "Your closing predicts the board will vote for the change.",
        "summary", "r-conclusion",
    ),
    # --- cross-rubric and unlinked ---
    T(
        "Great work overall — this draft is a clear step up from your last one.",
        "praise",
    ),
    T(
        "Your voice stays confident throughout.",
        "praise",
    ),
    T(
        "Several sentences run on; split them with periods rather than commas.",
        "problem+solution", mech=True,
    ),
    T(
        "Subject–verb agreement slips in the second paragraph.",
        "problem", mech=True,
    ),
    T(
        "Watch the spelling of 'curriculum'; it appears three different ways on one page.",
        "problem", tone=0, mech=True,
    ),
    T(
        "You argue the shorter week helps students, teachers, and the budget.",
        "summary",
    ),
    T(
        "When you add the survey numbers, cite the report they come from.",
        "solution", "r-evidence,r-citations", ind=0, act=1,
    ),
    T(
        "Your conclusion argues the opposite of your thesis.",
        "problem", "r-thesis,r-conclusion", acc=0, ind=1, act=1,
    ),
    T(
        "Two paragraphs address the reader as 'you guys'.",
        "problem", tone=0, mech=True,
    ),
    T(
        "Your evidence section is the strongest part, though the quotes crowd out your own analysis.",
        "praise+problem", "r-evidence", ind=1, act=0,
    ),
    T(
        "You cover costs, attendance, and morale — a sensible scope for five pages.",
        "summary+praise",
    ),
    T(
        "How would a parent who works Fridays read your proposal?",
        "solution", "r-counterargument", ind=1, act=0,
    ),
    T(
        "The section on {topic} needs one concrete example from the readings.",
        "problem", "r-evidence", ind=1, act=1, slot=TOPICS,
    ),
    T(
        "The paragraph on {topic} is persuasive and well supported.",
        "praise", "r-evidence", slot=TOPICS,
    ),
]

TYPE_NAMES = ("summary", "praise", "problem", "solution")
METRIC_NAMES = ("accuracy", "tone", "independence", "actionability")


def render(template: UnitTemplate, rng: random.Random) -> UnitTemplate:
    if not template.slot:
        return template
    filled = template.text.replace("{topic}", rng.choice(template.slot))
    return UnitTemplate(
        text=filled,
        types=template.types,
        links=template.links,
        acc=template.acc,
        tone=template.tone,
        ind=template.ind,
        act=template.act,
        mech=template.mech,
    )


def unit_record(template: UnitTemplate, text: str) -> dict:
    quality: dict[str, int | None] = {
        "accuracy": template.acc,
        "tone": template.tone,
    }
    if template.applicable:
        quality["independence"] = template.ind
        quality["actionability"] = template.act
    record = {
        "text": text,
        "rubric_ids": sorted(template.links),
        "types": {name: (name in template.types) for name in TYPE_NAMES},
        "quality": quality,
    }
    if template.mech:
        record["prose_mechanics_only"] = True
    return record


def second_annotator(units: list[dict], rng: random.Random) -> list[dict]:
    """Derive the second annotator's labels with controlled disagreement.

    Applicability-determining fields (prose_mechanics_only, and problem or
    solution flags where flipping one would change applicability) are kept
    identical — the annotation protocol adjudicated those before rating — so
    both annotators rate the same metric set for every unit.
    """
    out: list[dict] = []
    for unit in units:
        types = dict(unit["types"])
        if rng.random() < 0.04:
            types["summary"] = not types["summary"]
        if rng.random() < 0.04:
            types["praise"] = not types["praise"]
        if types["problem"] and types["solution"]:
            which = rng.random()
            if which < 0.05:
                types["problem"] = False
            elif which < 0.10:
                types["solution"] = False
        quality = dict(unit["quality"])
        for name in ("accuracy", "tone"):
            if rng.random() < 0.05:
                quality[name] = 1 - quality[name]
        for name in ("independence", "actionability"):
            if name in quality and rng.random() < 0.06:
                quality[name] = 1 - quality[name]
        record = {
            "text": unit["text"],
            "rubric_ids": list(unit["rubric_ids"]),
            "types": types,
            "quality": quality,
        }
        if unit.get("prose_mechanics_only"):
            record["prose_mechanics_only"] = True
        out.append(record)
    return out


def build_messages(rng: random.Random) -> list[dict]:
    by_rubric: dict[str, list[UnitTemplate]] = {rid: [] for rid in RUBRIC_IDS}
    generic: list[UnitTemplate] = []
    for template in TEMPLATES:
        if len(template.links) == 1:
            by_rubric[next(iter(template.links))].append(template)
        else:
            generic.append(template)

    slots: list[tuple[str, str, str | None]] = []
    fw_essays = [f"gold-e-{i:02d}" for i in range(1, FEEDBACK_WRITER_ESSAYS + 1)]
    base_essays = [
        f"gold-e-{i:02d}"
        for i in range(
            FEEDBACK_WRITER_ESSAYS + 1, FEEDBACK_WRITER_ESSAYS + BASELINE_ESSAYS + 1
        )
    ]
    rubric_cycle = 0
    while len(slots) < FEEDBACK_WRITER_MESSAGES:
        essay = fw_essays[len(slots) % len(fw_essays)]
        if rng.random() < 0.8:
            rubric: str | None = RUBRIC_IDS[rubric_cycle % len(RUBRIC_IDS)]
            rubric_cycle += 1
        else:
            rubric = None
        slots.append((essay, "feedback_writer", rubric))
    while len(slots) < MESSAGE_COUNT:
        essay = base_essays[(len(slots) - FEEDBACK_WRITER_MESSAGES) % len(base_essays)]
        rubric = (
            RUBRIC_IDS[rng.randrange(len(RUBRIC_IDS))] if rng.random() < 0.6 else None
        )
        slots.append((essay, "baseline", rubric))
    rng.shuffle(slots)

    messages: list[dict] = []
    for index, (essay_id, condition, rubric_id) in enumerate(slots, start=1):
        n_units = rng.choices((1, 2, 3), weights=(55, 33, 12))[0]
        pool = by_rubric[rubric_id] if rubric_id is not None else generic
        chosen: list[UnitTemplate] = []
        seen_texts: set[str] = set()
        while len(chosen) < n_units:
            source = pool
            if chosen and rng.random() < 0.3:
                source = generic if rubric_id is not None else TEMPLATES
            candidate = render(rng.choice(source), rng)
            if candidate.text in seen_texts:
                continue
            seen_texts.add(candidate.text)
            chosen.append(candidate)
        unit_texts = [
            template.text if i == 0 else " " + template.text
            for i, template in enumerate(chosen)
        ]
        units = [
            unit_record(template, text)
            for template, text in zip(chosen, unit_texts)
        ]
        messages.append(
            {
                "message_id": f"gm-{index:03d}",
                "essay_id": essay_id,
                "condition": condition,
                "rubric_id": rubric_id,
                "text": "".join(unit_texts),
                "units": units,
                "annotator_b": second_annotator(units, rng),
            }
        )
    return messages


def applicability_ok(unit: dict) -> bool:
    types = unit["types"]
    applicable = (types["problem"] or types["solution"]) and not unit.get(
        "prose_mechanics_only", False
    )
    has_extra = (
        unit["quality"].get("independence") is not None
        and unit["quality"].get("actionability") is not None
    )
    lacks_extra = (
        unit["quality"].get("independence") is None
        and unit["quality"].get("actionability") is None
    )
    return has_extra if applicable else lacks_extra


def verify(messages: list[dict]) -> dict[str, float]:
    assert len(messages) == MESSAGE_COUNT
    for message in messages:
        for key in ("units", "annotator_b"):
            units = message[key]
            assert units, f"{message['message_id']}: empty {key}"
            assert "".join(u["text"] for u in units) == message["text"], (
                f"{message['message_id']}: {key} does not tile the text"
            )
            assert not units[0]["text"].startswith(" ")
            assert all(u["text"].startswith(" ") for u in units[1:])
            for unit in units:
                assert applicability_ok(unit), (
                    f"{message['message_id']}: {key} violates metric applicability"
                )
        for a, b in zip(message["units"], message["annotator_b"]):
            assert a["text"] == b["text"]
            assert a.get("prose_mechanics_only", False) == b.get(
                "prose_mechanics_only", False
            )

    kappas: dict[str, float] = {}
    for name in TYPE_NAMES:
        pairs = [
            (int(a["types"][name]), int(b["types"][name]))
            for message in messages
            for a, b in zip(message["units"], message["annotator_b"])
        ]
        ones = sum(a for a, _ in pairs)
        assert 0.08 <= ones / len(pairs) <= 0.92, f"type {name} marginal degenerate"
        result = kappa_from_pairs([a for a, _ in pairs], [b for _, b in pairs])
        assert result.kappa is not None and result.kappa >= 0.70, (
            f"type {name}: kappa {result.kappa}"
        )
        kappas[f"type:{name}"] = result.kappa
    for name in METRIC_NAMES:
        pairs = [
            (a["quality"][name], b["quality"][name])
            for message in messages
            for a, b in zip(message["units"], message["annotator_b"])
            if a["quality"].get(name) is not None
        ]
        assert len(pairs) >= 40, f"metric {name}: too few rated units"
        ones = sum(a for a, _ in pairs)
        assert 0.10 <= ones / len(pairs) <= 0.90, f"metric {name} marginal degenerate"
        result = kappa_from_pairs([a for a, _ in pairs], [b for _, b in pairs])
        assert result.kappa is not None and result.kappa >= 0.70, (
            f"metric {name}: kappa {result.kappa}"
        )
        kappas[f"metric:{name}"] = result.kappa
    return kappas


def main() -> None:
    rng = random.Random(SEED)
    messages = build_messages(rng)
    kappas = verify(messages)
    document = {
        "assignment": ASSIGNMENT,
        "messages": messages,
    }
    OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
    OUT_PATH.write_text(
        json.dumps(document, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    counts = {
        "messages": len(messages),
        "units": sum(len(m["units"]) for m in messages),
        "essays": len({m["essay_id"] for m in messages}),
    }
    print(f"wrote {OUT_PATH} ({counts})")
    for name, value in sorted(kappas.items()):
        print(f"  inter-annotator kappa {name}: {value:.3f}")


if __name__ == "__main__":
    main()
