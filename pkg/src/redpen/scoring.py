"""Rubric scoring: binary verdicts, weighted totals, gold-label agreement.

Scoring reuses the pipeline's extract and judge steps (no feedback
generation) and aggregates per-rubric 0/1 verdicts into a weighted total.
Totals are exact rationals — ``fractions.Fraction`` end to end — so scale
and monotonicity properties hold with no floating-point slack.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .domain import Assignment, EssayDraft, Stage
from .errors import ValidationError
from .pipeline import extract_relevant_sentences, judge_rubric
from .providers import ChatProvider


@dataclass(frozen=True)
class RubricVerdict:
    """One satisfied/missing judgment: met is 0 or 1."""

    rubric_id: str
    met: int
    rationale: str = ""

    def __post_init__(self) -> None:
        if self.met not in (0, 1):
            raise ValidationError(f"verdict met must be 0 or 1, got {self.met!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"rubric_id": self.rubric_id, "met": self.met, "rationale": self.rationale}


@dataclass(frozen=True)
class EssayScore:
    """Weighted total over one essay's rubric verdicts, as an exact fraction.

    ``partial`` marks scores where some rubric's provider calls failed and
    its verdict was conservatively defaulted to 0.
    """

    essay_id: str
    stage: Stage
    verdicts: tuple[RubricVerdict, ...]
    total: Fraction
    partial: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.total <= 1:
            raise ValidationError(f"total must lie in [0,1], got {self.total}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "essay_id": self.essay_id,
            "stage": self.stage.value,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "total": str(self.total),
            "total_float": float(self.total),
            "partial": self.partial,
        }


@dataclass(frozen=True)
class AgreementReport:
    """Agreement of machine verdicts against expert gold labels.

    The per-class recalls are both reported: ``recall_met`` is recall of
    gold "satisfied" judgments, ``recall_missing`` of gold "missing" ones.
    """

    n_judgments: int
    accuracy: float
    recall_met: float
    recall_missing: float
    per_rubric_accuracy: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_judgments": self.n_judgments,
            "accuracy": self.accuracy,
            "recall_met": self.recall_met,
            "recall_missing": self.recall_missing,
            "per_rubric_accuracy": dict(sorted(self.per_rubric_accuracy.items())),
        }


def aggregate_score(
    verdicts: Sequence[int | bool],
    weights: Sequence[Fraction | int | float | str],
) -> Fraction:
    """Weighted mean of 0/1 verdicts: Σ(wᵢ·metᵢ) / Σwᵢ, exactly.

    Weights must be nonnegative with a positive sum; verdict count must
    match weight count.  Zero-weight items never affect the result.
    """
    if len(verdicts) != len(weights):
        raise ValidationError(
            f"{len(verdicts)} verdicts vs {len(weights)} weights"
        )
    total_weight = Fraction(0)
    hit_weight = Fraction(0)
    for verdict, weight in zip(verdicts, weights):
        met = int(verdict)
        if met not in (0, 1):
            raise ValidationError(f"verdicts must be 0/1, got {verdict!r}")
        w = Fraction(weight)
        if w < 0:
            raise ValidationError(f"weights must be nonnegative, got {weight!r}")
        total_weight += w
        if met:
            hit_weight += w
    if total_weight == 0:
        raise ValidationError("weights sum to zero; no rubric can contribute")
    return hit_weight / total_weight


def score_essay(
    draft: EssayDraft,
    assignment: Assignment,
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> EssayScore:
    """Extract + judge each rubric and aggregate into a weighted total.

    A provider failure on one rubric defaults that verdict to 0 (missing)
    and flags the score as partial, rather than failing the whole essay.
    """
    verdicts: list[RubricVerdict] = []
    partial = False
    for rubric in assignment.rubric_items:
        try:
            anchor = extract_relevant_sentences(draft, rubric, provider, seed=seed)
            judgment = judge_rubric(draft, rubric, anchor, provider, seed=seed)
            verdicts.append(
                RubricVerdict(rubric.id, int(judgment.met), judgment.rationale)
            )
        except Exception as exc:  # per-rubric isolation, conservatively unmet
            partial = True
            verdicts.append(
                RubricVerdict(rubric.id, 0, f"scoring error, defaulted to missing: {exc}")
            )
    total = aggregate_score(
        [v.met for v in verdicts], [r.weight for r in assignment.rubric_items]
    )
    return EssayScore(
        essay_id=draft.essay_id,
        stage=draft.stage,
        verdicts=tuple(verdicts),
        total=total,
        partial=partial,
    )


VerdictMap = Mapping[tuple[str, str], int]


def _as_verdict_map(source: VerdictMap | Iterable[tuple[str, str, int]]) -> dict[tuple[str, str], int]:
    if isinstance(source, Mapping):
        return {k: int(v) for k, v in source.items()}
    return {(essay, rubric): int(met) for essay, rubric, met in source}


def evaluate_against_gold(
    machine: VerdictMap | Iterable[tuple[str, str, int]],
    gold: VerdictMap | Iterable[tuple[str, str, int]],
) -> AgreementReport:
    """Compare machine verdicts to expert labels over matching
    (essay_id, rubric_id) keys.  Raises on a key mismatch — silent partial
    comparison would misreport agreement."""
    machine_map = _as_verdict_map(machine)
    gold_map = _as_verdict_map(gold)
    if set(machine_map) != set(gold_map):
        missing = set(gold_map) ^ set(machine_map)
        sample = sorted(missing)[:3]
        raise ValidationError(
            f"machine and gold keys differ ({len(missing)} mismatched; e.g. {sample})"
        )
    if not gold_map:
        raise ValidationError("no judgments to compare")

    matches = 0
    met_total = met_hit = 0
    missing_total = missing_hit = 0
    by_rubric: dict[str, list[int]] = {}
    for key, gold_met in gold_map.items():
        predicted = machine_map[key]
        agree = int(predicted == gold_met)
        matches += agree
        by_rubric.setdefault(key[1], []).append(agree)
        if gold_met == 1:
            met_total += 1
            met_hit += agree
        else:
            missing_total += 1
            missing_hit += agree
    n = len(gold_map)
    return AgreementReport(
        n_judgments=n,
        accuracy=matches / n,
        recall_met=met_hit / met_total if met_total else 1.0,
        recall_missing=missing_hit / missing_total if missing_total else 1.0,
        per_rubric_accuracy={
            rubric: sum(hits) / len(hits) for rubric, hits in by_rubric.items()
        },
    )
