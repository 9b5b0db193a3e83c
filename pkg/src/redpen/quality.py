"""Feedback-quality analysis: idea units, type/quality ratings, aggregates.

Final (grader-confirmed) feedback messages are segmented into idea units —
minimal stretches addressing a single issue — linked to rubric items,
classified into four non-exclusive types (summary, praise, problem,
solution), and rated on four binary quality metrics.  Two of the metrics
(independence, actionability) apply only to problem/solution units that
are not purely about prose mechanics; the applicability rule is enforced
here regardless of what a provider returns.

Also home to the agreement statistics (Cohen's kappa, computed exactly on
integers) and the descriptive Welch comparison between conditions.
"""

from __future__ import annotations

import math
import re
import string
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from typing import Any, Hashable, Iterable, Mapping, Sequence

from scipy import stats as _scipy_stats

from .anchoring import similarity
from .domain import Assignment, Condition
from .errors import ValidationError
from .providers import (
    ChatProvider,
    K_CLASSIFY,
    K_RATE,
    K_SEGMENT,
    ProviderError,
    ProviderRequest,
    derive_seed,
    sha_text,
)

TYPE_NAMES = ("summary", "praise", "problem", "solution")
METRIC_NAMES = ("accuracy", "tone", "independence", "actionability")

# Minimum text similarity for pairing a produced unit with a gold unit.
GOLD_MATCH_THRESHOLD = 0.8


def _template(name: str) -> string.Template:
    return string.Template(
        resources.files("redpen.prompts").joinpath(f"{name}.txt").read_text("utf-8")
    )


SEGMENT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "units": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "text": {"type": "string", "minLength": 1},
                    "rubric_ids": {"type": "array", "items": {"type": "string"}},
                },
                "required": ["text", "rubric_ids"],
                "additionalProperties": False,
            },
        }
    },
    "required": ["units"],
    "additionalProperties": False,
}

CLASSIFY_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "summary": {"type": "boolean"},
        "praise": {"type": "boolean"},
        "problem": {"type": "boolean"},
        "solution": {"type": "boolean"},
        "prose_mechanics_only": {"type": "boolean"},
    },
    "required": ["summary", "praise", "problem", "solution", "prose_mechanics_only"],
    "additionalProperties": False,
}

RATE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "accuracy": {"type": "boolean"},
        "tone": {"type": "boolean"},
        "independence": {"type": ["boolean", "null"]},
        "actionability": {"type": ["boolean", "null"]},
    },
    "required": ["accuracy", "tone", "independence", "actionability"],
    "additionalProperties": False,
}


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeedbackMessage:
    """One final feedback comment a student received."""

    essay_id: str
    text: str
    condition: Condition
    rubric_id: str | None = None  # absent for freeform comments
    message_id: str = ""

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValidationError("feedback message text must be nonempty")
        if not self.message_id:
            derived = f"{self.essay_id}:{self.rubric_id or 'freeform'}:{sha_text(self.text)}"
            object.__setattr__(self, "message_id", derived)


@dataclass(frozen=True)
class TypeFlags:
    summary: bool = False
    praise: bool = False
    problem: bool = False
    solution: bool = False

    @property
    def any(self) -> bool:
        return self.summary or self.praise or self.problem or self.solution

    def to_dict(self) -> dict[str, bool]:
        return {name: getattr(self, name) for name in TYPE_NAMES}


@dataclass(frozen=True)
class QualityRatings:
    """Binary quality ratings; None marks a metric that does not apply."""

    accuracy: int
    tone: int
    independence: int | None = None
    actionability: int | None = None

    def __post_init__(self) -> None:
        for name in METRIC_NAMES:
            value = getattr(self, name)
            if value is not None and value not in (0, 1):
                raise ValidationError(f"{name} rating must be 0/1/None, got {value!r}")

    def to_dict(self) -> dict[str, int | None]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


@dataclass(frozen=True)
class IdeaUnit:
    """Minimal feedback segment addressing a single issue.

    ``flags`` records degraded processing: "unsegmented" (provider failed,
    unit spans the whole message), "unclassifiable", "rating_error".
    """

    message_id: str
    text: str
    rubric_links: frozenset[str] = frozenset()
    types: TypeFlags | None = None
    quality: QualityRatings | None = None
    prose_mechanics_only: bool = False
    flags: tuple[str, ...] = ()

    @property
    def metrics_applicable(self) -> bool:
        """Whether independence/actionability apply to this unit."""
        return (
            self.types is not None
            and (self.types.problem or self.types.solution)
            and not self.prose_mechanics_only
        )

    def validate(self) -> None:
        """Check the stored-unit invariants; raises ValidationError."""
        if self.quality is not None:
            if self.types is None or not self.types.any:
                raise ValidationError(
                    f"rated unit {self.text[:40]!r} must have at least one type flag"
                )
            has_extra = (
                self.quality.independence is not None
                and self.quality.actionability is not None
            )
            lacks_extra = (
                self.quality.independence is None
                and self.quality.actionability is None
            )
            if self.metrics_applicable and not has_extra:
                raise ValidationError(
                    "independence/actionability must be present on applicable units"
                )
            if not self.metrics_applicable and not lacks_extra:
                raise ValidationError(
                    "independence/actionability must be absent on inapplicable units"
                )

    def to_dict(self) -> dict[str, Any]:
        return {
            "message_id": self.message_id,
            "text": self.text,
            "rubric_links": sorted(self.rubric_links),
            "types": None if self.types is None else self.types.to_dict(),
            "quality": None if self.quality is None else self.quality.to_dict(),
            "prose_mechanics_only": self.prose_mechanics_only,
            "flags": list(self.flags),
        }


# ---------------------------------------------------------------------------
# Segmentation / classification / rating
# ---------------------------------------------------------------------------


def _rubric_list_block(assignment: Assignment) -> str:
    return "\n".join(f"- {r.id}: {r.text}" for r in assignment.rubric_items)


def segment_and_link(
    message: FeedbackMessage,
    assignment: Assignment,
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> list[IdeaUnit]:
    """Split a message into idea units linked to rubric items.

    The provider proposes unit texts in order; they are then re-tiled onto
    the exact message text (order-preserving cover repair) so that
    concatenating the returned units reproduces the message verbatim.
    Units whose text cannot be located are dropped and their span absorbed
    by the following unit.  Provider failure degrades to a single
    whole-message unit flagged "unsegmented".
    """
    doc_sha = sha_text(message.text)
    known_ids = set(assignment.rubric_ids)
    request = ProviderRequest(
        kind=K_SEGMENT,
        prompt=_template("segment").substitute(
            rubric_list=_rubric_list_block(assignment), message=message.text
        ),
        schema=SEGMENT_SCHEMA,
        context={
            "message": message.text,
            "rubrics": [{"id": r.id, "text": r.text} for r in assignment.rubric_items],
        },
        rubric_id=message.rubric_id,
        doc_sha=doc_sha,
        seed=derive_seed(seed, doc_sha, K_SEGMENT),
    )
    try:
        payload = provider.complete(request)
    except ProviderError:
        return [
            IdeaUnit(
                message_id=message.message_id,
                text=message.text,
                rubric_links=frozenset([message.rubric_id] if message.rubric_id else []),
                flags=("unsegmented",),
            )
        ]

    # Cover repair: locate each proposed unit in order and tile the message.
    located: list[tuple[int, frozenset[str]]] = []  # (match_end, links)
    cursor = 0
    for raw in payload["units"]:
        needle = raw["text"].strip()
        links = frozenset(rid for rid in raw["rubric_ids"] if rid in known_ids)
        position = message.text.find(needle, cursor) if needle else -1
        if position < 0:
            if located:
                # Unlocatable: fold its links into the previous unit.
                end, prev_links = located[-1]
                located[-1] = (end, prev_links | links)
            continue
        located.append((position + len(needle), links))
        cursor = position + len(needle)
    if not located:
        return [
            IdeaUnit(
                message_id=message.message_id,
                text=message.text,
                rubric_links=frozenset([message.rubric_id] if message.rubric_id else []),
                flags=("unsegmented",),
            )
        ]
    units: list[IdeaUnit] = []
    start = 0
    for i, (end, links) in enumerate(located):
        end = len(message.text) if i == len(located) - 1 else end
        units.append(
            IdeaUnit(
                message_id=message.message_id,
                text=message.text[start:end],
                rubric_links=links,
            )
        )
        start = end
    return units


def classify_type(
    unit: IdeaUnit,
    message: FeedbackMessage,
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> IdeaUnit:
    """Set the four type flags (non-exclusive) and the prose-mechanics flag.

    Provider failure marks the unit unclassifiable instead of raising.
    """
    doc_sha = sha_text(unit.text)
    request = ProviderRequest(
        kind=K_CLASSIFY,
        prompt=_template("classify").substitute(
            unit_text=unit.text, message=message.text
        ),
        schema=CLASSIFY_SCHEMA,
        context={"unit_text": unit.text, "message": message.text},
        rubric_id=message.rubric_id,
        doc_sha=doc_sha,
        seed=derive_seed(seed, doc_sha, K_CLASSIFY),
    )
    try:
        payload = provider.complete(request)
    except ProviderError:
        return replace(unit, flags=unit.flags + ("unclassifiable",))
    types = TypeFlags(**{name: bool(payload[name]) for name in TYPE_NAMES})
    if not types.any:
        return replace(unit, flags=unit.flags + ("unclassifiable",))
    return replace(
        unit, types=types, prose_mechanics_only=bool(payload["prose_mechanics_only"])
    )


def rate_quality(
    unit: IdeaUnit,
    message: FeedbackMessage,
    assignment: Assignment,
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> IdeaUnit:
    """Rate accuracy/tone always, independence/actionability when applicable.

    The applicability rule is enforced here: whatever the provider returns,
    non-applicable metrics are stored as None and applicable ones must be
    present (a missing value on an applicable unit flags a rating error).
    """
    if unit.types is None:
        raise ValidationError("rate_quality requires classified units")
    applicable = unit.metrics_applicable
    doc_sha = sha_text(unit.text)
    rubric_texts = "\n".join(
        f"- {r.id}: {r.text}"
        for r in assignment.rubric_items
        if r.id in unit.rubric_links
    ) or "(none linked)"
    request = ProviderRequest(
        kind=K_RATE,
        prompt=_template("rate").substitute(
            unit_text=unit.text,
            essay_excerpt=message.text,
            rubric_text=rubric_texts,
            independence_applicable="rate it" if applicable else "NOT APPLICABLE",
            actionability_applicable="rate it" if applicable else "NOT APPLICABLE",
        ),
        schema=RATE_SCHEMA,
        context={
            "unit_text": unit.text,
            "types": unit.types.to_dict(),
            "prose_mechanics_only": unit.prose_mechanics_only,
        },
        rubric_id=message.rubric_id,
        doc_sha=doc_sha,
        seed=derive_seed(seed, doc_sha, K_RATE),
    )
    try:
        payload = provider.complete(request)
    except ProviderError:
        return replace(unit, flags=unit.flags + ("rating_error",))
    if applicable and (payload["independence"] is None or payload["actionability"] is None):
        return replace(unit, flags=unit.flags + ("rating_error",))
    ratings = QualityRatings(
        accuracy=int(payload["accuracy"]),
        tone=int(payload["tone"]),
        independence=int(payload["independence"]) if applicable else None,
        actionability=int(payload["actionability"]) if applicable else None,
    )
    rated = replace(unit, quality=ratings)
    rated.validate()
    return rated


def evaluate_message(
    message: FeedbackMessage,
    assignment: Assignment,
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> list[IdeaUnit]:
    """Full chain for one message: segment+link, classify, rate."""
    units = segment_and_link(message, assignment, provider, seed=seed)
    out: list[IdeaUnit] = []
    for unit in units:
        unit = classify_type(unit, message, provider, seed=seed)
        if unit.types is not None:
            unit = rate_quality(unit, message, assignment, provider, seed=seed)
        out.append(unit)
    return out


def evaluate_messages(
    messages: Sequence[FeedbackMessage],
    assignment: Assignment,
    provider: ChatProvider,
    *,
    seed: int = 0,
) -> dict[str, list[IdeaUnit]]:
    """Evaluate a corpus; returns units keyed by message_id."""
    return {
        message.message_id: evaluate_message(message, assignment, provider, seed=seed)
        for message in messages
    }


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    if n == 0:
        return 0.0, 0.0
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


@dataclass(frozen=True)
class ConditionAggregate:
    """Descriptive statistics for one condition's feedback corpus."""

    condition: str
    essay_count: int
    unit_count: int
    word_count_mean: float
    word_count_sd: float
    coverage_mean: float
    coverage_sd: float
    type_count_means: dict[str, float] = field(default_factory=dict)
    type_count_sds: dict[str, float] = field(default_factory=dict)
    metric_means: dict[str, float] = field(default_factory=dict)
    metric_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "condition": self.condition,
            "essay_count": self.essay_count,
            "unit_count": self.unit_count,
            "word_count": {"mean": self.word_count_mean, "sd": self.word_count_sd},
            "rubric_coverage": {"mean": self.coverage_mean, "sd": self.coverage_sd},
            "type_counts": {
                name: {"mean": self.type_count_means[name], "sd": self.type_count_sds[name]}
                for name in TYPE_NAMES
            },
            "quality_metrics": {
                name: {"mean": self.metric_means.get(name), "n": self.metric_counts.get(name, 0)}
                for name in METRIC_NAMES
            },
        }


@dataclass(frozen=True)
class EvalAggregate:
    conditions: dict[str, ConditionAggregate]

    def to_dict(self) -> dict[str, Any]:
        return {name: agg.to_dict() for name, agg in sorted(self.conditions.items())}


def aggregate(
    messages: Sequence[FeedbackMessage],
    units_by_message: Mapping[str, Sequence[IdeaUnit]],
    assignment: Assignment,
) -> EvalAggregate:
    """Aggregate per condition; deterministic and order-independent.

    Per essay: word count is whitespace words over its concatenated final
    feedback; coverage is distinct linked rubrics over the assignment's
    rubric count; type counts are units carrying each flag.  Quality means
    are over rated units (per metric, where present).
    """
    rubric_total = len(assignment.rubric_items)
    by_condition: dict[str, dict[str, list[FeedbackMessage]]] = {}
    for message in messages:
        by_condition.setdefault(message.condition.value, {}).setdefault(
            message.essay_id, []
        ).append(message)

    out: dict[str, ConditionAggregate] = {}
    for condition, essays in by_condition.items():
        word_counts: list[float] = []
        coverages: list[float] = []
        type_counts: dict[str, list[float]] = {name: [] for name in TYPE_NAMES}
        metric_hits: dict[str, int] = {name: 0 for name in METRIC_NAMES}
        metric_ns: dict[str, int] = {name: 0 for name in METRIC_NAMES}
        unit_count = 0
        for essay_id in sorted(essays):
            essay_messages = essays[essay_id]
            words = sum(len(m.text.split()) for m in essay_messages)
            word_counts.append(float(words))
            essay_units = [
                unit
                for m in essay_messages
                for unit in units_by_message.get(m.message_id, ())
            ]
            unit_count += len(essay_units)
            linked = {rid for unit in essay_units for rid in unit.rubric_links}
            coverages.append(len(linked) / rubric_total if rubric_total else 0.0)
            for name in TYPE_NAMES:
                type_counts[name].append(
                    float(
                        sum(
                            1
                            for unit in essay_units
                            if unit.types is not None and getattr(unit.types, name)
                        )
                    )
                )
            for unit in essay_units:
                if unit.quality is None:
                    continue
                for name in METRIC_NAMES:
                    value = getattr(unit.quality, name)
                    if value is not None:
                        metric_ns[name] += 1
                        metric_hits[name] += value
        word_mean, word_sd = _mean_sd(word_counts)
        cov_mean, cov_sd = _mean_sd(coverages)
        type_means: dict[str, float] = {}
        type_sds: dict[str, float] = {}
        for name in TYPE_NAMES:
            mean, sd = _mean_sd(type_counts[name])
            type_means[name] = mean
            type_sds[name] = sd
        out[condition] = ConditionAggregate(
            condition=condition,
            essay_count=len(essays),
            unit_count=unit_count,
            word_count_mean=word_mean,
            word_count_sd=word_sd,
            coverage_mean=cov_mean,
            coverage_sd=cov_sd,
            type_count_means=type_means,
            type_count_sds=type_sds,
            metric_means={
                name: (metric_hits[name] / metric_ns[name]) if metric_ns[name] else 0.0
                for name in METRIC_NAMES
            },
            metric_counts=metric_ns,
        )
    return EvalAggregate(conditions=out)


# ---------------------------------------------------------------------------
# Cohen's kappa
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KappaResult:
    matrix: tuple[tuple[int, ...], ...]
    n: int
    po: float
    pe: float
    kappa: float | None
    kappa_fraction: Fraction | None = None
    undefined_reason: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "matrix": [list(row) for row in self.matrix],
            "n": self.n,
            "po": self.po,
            "pe": self.pe,
            "kappa": self.kappa,
            "undefined_reason": self.undefined_reason,
        }


def cohen_kappa(matrix: Sequence[Sequence[int]]) -> KappaResult:
    """κ = (pₒ − pₑ)/(1 − pₑ) computed exactly on the confusion counts.

    ``matrix[i][j]`` counts items rater A labeled i and rater B labeled j.
    With N the total, D the diagonal sum, and E = Σᵢ rowᵢ·colᵢ, this equals
    (N·D − E)/(N² − E) in integer arithmetic.  When expected agreement is
    1 (pₑ = 1, i.e. N² = E — both raters constant) kappa is undefined and
    the result says so instead of dividing by zero.
    """
    rows = [list(map(int, row)) for row in matrix]
    k = len(rows)
    if k == 0 or any(len(row) != k for row in rows):
        raise ValidationError("confusion matrix must be square and nonempty")
    if any(cell < 0 for row in rows for cell in row):
        raise ValidationError("confusion matrix counts must be nonnegative")
    n = sum(sum(row) for row in rows)
    if n == 0:
        raise ValidationError("confusion matrix must contain at least one count")
    diagonal = sum(rows[i][i] for i in range(k))
    row_sums = [sum(row) for row in rows]
    col_sums = [sum(rows[i][j] for i in range(k)) for j in range(k)]
    expected = sum(row_sums[i] * col_sums[i] for i in range(k))
    po = diagonal / n
    pe = expected / (n * n)
    frozen = tuple(tuple(row) for row in rows)
    if n * n == expected:
        return KappaResult(
            matrix=frozen,
            n=n,
            po=po,
            pe=1.0,
            kappa=None,
            undefined_reason=(
                "expected agreement is 1 (degenerate marginals: both raters "
                "assign a single label), so kappa is undefined"
            ),
        )
    exact = Fraction(n * diagonal - expected, n * n - expected)
    return KappaResult(
        matrix=frozen, n=n, po=po, pe=pe, kappa=float(exact), kappa_fraction=exact
    )


def kappa_from_pairs(
    rater_a: Sequence[Hashable], rater_b: Sequence[Hashable]
) -> KappaResult:
    """Build the confusion matrix from paired labels and compute kappa."""
    if len(rater_a) != len(rater_b):
        raise ValidationError("paired label sequences must have equal length")
    labels = sorted(set(rater_a) | set(rater_b), key=repr)
    index = {label: i for i, label in enumerate(labels)}
    k = len(labels)
    matrix = [[0] * k for _ in range(k)]
    for a, b in zip(rater_a, rater_b):
        matrix[index[a]][index[b]] += 1
    return cohen_kappa(matrix)


# ---------------------------------------------------------------------------
# Welch comparison between conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WelchResult:
    mean_a: float
    mean_b: float
    mean_diff: float
    t: float | None
    df: float | None
    p_value: float | None
    note: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean_a": self.mean_a,
            "mean_b": self.mean_b,
            "mean_diff": self.mean_diff,
            "t": self.t,
            "df": self.df,
            "p_value": self.p_value,
            "note": self.note,
        }


def welch_from_stats(
    mean_a: float, sd_a: float, n_a: int, mean_b: float, sd_b: float, n_b: int
) -> WelchResult:
    """Welch two-sample t from summary statistics.

    Degrees of freedom via Welch–Satterthwaite; two-sided p from the t
    distribution.  Groups with n < 2 (or both variances zero) cannot
    support the statistic — the result carries means and a note instead.
    """
    diff = mean_a - mean_b
    if n_a < 2 or n_b < 2:
        return WelchResult(mean_a, mean_b, diff, None, None, None,
                           note="n < 2 in a group; statistic undefined")
    va = (sd_a**2) / n_a
    vb = (sd_b**2) / n_b
    if va + vb == 0:
        return WelchResult(mean_a, mean_b, diff, None, None, None,
                           note="zero variance in both groups; statistic undefined")
    t = diff / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (
        (va**2) / (n_a - 1) + (vb**2) / (n_b - 1)
    )
    p = 2.0 * float(_scipy_stats.t.sf(abs(t), df))
    return WelchResult(mean_a, mean_b, diff, t, df, p)


def welch_from_samples(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    mean_a, sd_a = _mean_sd([float(x) for x in a])
    mean_b, sd_b = _mean_sd([float(x) for x in b])
    return welch_from_stats(mean_a, sd_a, len(a), mean_b, sd_b, len(b))


def _binary_sd(p: float, n: int) -> float:
    if n < 2:
        return 0.0
    return math.sqrt(p * (1.0 - p) * n / (n - 1))


def compare_conditions(a: ConditionAggregate, b: ConditionAggregate) -> dict[str, WelchResult]:
    """Per-metric descriptive comparison of two condition aggregates.

    Continuous rows (word count, coverage, type counts) use the stored
    mean/sd with essay counts; binary quality metrics use the proportion
    with the exact binomial sample variance p(1−p)·n/(n−1).
    """
    if a.essay_count == 0 or b.essay_count == 0:
        raise ValidationError("both aggregates must cover at least one essay")
    report: dict[str, WelchResult] = {
        "word_count": welch_from_stats(
            a.word_count_mean, a.word_count_sd, a.essay_count,
            b.word_count_mean, b.word_count_sd, b.essay_count,
        ),
        "rubric_coverage": welch_from_stats(
            a.coverage_mean, a.coverage_sd, a.essay_count,
            b.coverage_mean, b.coverage_sd, b.essay_count,
        ),
    }
    for name in TYPE_NAMES:
        report[f"type_{name}"] = welch_from_stats(
            a.type_count_means[name], a.type_count_sds[name], a.essay_count,
            b.type_count_means[name], b.type_count_sds[name], b.essay_count,
        )
    for name in METRIC_NAMES:
        pa, na = a.metric_means.get(name, 0.0), a.metric_counts.get(name, 0)
        pb, nb = b.metric_means.get(name, 0.0), b.metric_counts.get(name, 0)
        report[name] = welch_from_stats(pa, _binary_sd(pa, na), na, pb, _binary_sd(pb, nb), nb)
    return report


# ---------------------------------------------------------------------------
# Gold-set agreement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GoldUnit:
    text: str
    rubric_ids: frozenset[str]
    types: TypeFlags
    prose_mechanics_only: bool
    quality: QualityRatings


@dataclass(frozen=True)
class GoldMessage:
    message: FeedbackMessage
    units: tuple[GoldUnit, ...]


def load_gold_messages(records: Iterable[dict[str, Any]]) -> list[GoldMessage]:
    """Parse gold-set records (already JSON-decoded)."""
    gold: list[GoldMessage] = []
    for record in records:
        message = FeedbackMessage(
            essay_id=record["essay_id"],
            text=record["text"],
            condition=Condition(record["condition"]),
            rubric_id=record.get("rubric_id"),
            message_id=record.get("message_id", ""),
        )
        units = tuple(
            GoldUnit(
                text=u["text"],
                rubric_ids=frozenset(u.get("rubric_ids", ())),
                types=TypeFlags(**{n: bool(u["types"][n]) for n in TYPE_NAMES}),
                prose_mechanics_only=bool(u.get("prose_mechanics_only", False)),
                quality=QualityRatings(
                    accuracy=u["quality"]["accuracy"],
                    tone=u["quality"]["tone"],
                    independence=u["quality"].get("independence"),
                    actionability=u["quality"].get("actionability"),
                ),
            )
            for u in record["units"]
        )
        gold.append(GoldMessage(message=message, units=units))
    return gold


@dataclass(frozen=True)
class GoldReport:
    n_messages: int
    segmentation_accuracy: float
    type_kappa: dict[str, KappaResult]
    metric_kappa: dict[str, KappaResult]
    metric_accuracy: dict[str, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_messages": self.n_messages,
            "segmentation_accuracy": self.segmentation_accuracy,
            "type_kappa": {k: v.kappa for k, v in self.type_kappa.items()},
            "metric_kappa": {k: v.kappa for k, v in self.metric_kappa.items()},
            "metric_accuracy": self.metric_accuracy,
        }


def _match_units(
    produced: Sequence[IdeaUnit], gold: Sequence[GoldUnit]
) -> list[tuple[IdeaUnit, GoldUnit]]:
    """Greedy in-order pairing of produced units to gold units by text
    similarity (threshold GOLD_MATCH_THRESHOLD)."""
    pairs: list[tuple[IdeaUnit, GoldUnit]] = []
    next_gold = 0
    for unit in produced:
        for j in range(next_gold, len(gold)):
            if similarity(unit.text, gold[j].text) >= GOLD_MATCH_THRESHOLD:
                pairs.append((unit, gold[j]))
                next_gold = j + 1
                break
    return pairs


def gold_report(
    produced: Mapping[str, Sequence[IdeaUnit]], gold: Sequence[GoldMessage]
) -> GoldReport:
    """Score produced units against the double-annotated gold set.

    Segmentation+linking accuracy per message = correctly produced units
    (text-matched to a gold unit with identical rubric links) over
    max(#produced, #gold), averaged over messages.  Type flags and quality
    metrics are compared on text-matched pairs via Cohen's kappa (and raw
    accuracy for the metrics).
    """
    seg_scores: list[float] = []
    type_pairs: dict[str, tuple[list[int], list[int]]] = {
        n: ([], []) for n in TYPE_NAMES
    }
    metric_pairs: dict[str, tuple[list[int], list[int]]] = {
        n: ([], []) for n in METRIC_NAMES
    }
    for gold_message in gold:
        units = list(produced.get(gold_message.message.message_id, ()))
        pairs = _match_units(units, gold_message.units)
        correct = sum(
            1 for unit, gold_unit in pairs if unit.rubric_links == gold_unit.rubric_ids
        )
        denom = max(len(units), len(gold_message.units), 1)
        seg_scores.append(correct / denom)
        for unit, gold_unit in pairs:
            if unit.types is not None:
                for name in TYPE_NAMES:
                    type_pairs[name][0].append(int(getattr(gold_unit.types, name)))
                    type_pairs[name][1].append(int(getattr(unit.types, name)))
            if unit.quality is not None:
                for name in METRIC_NAMES:
                    gold_value = getattr(gold_unit.quality, name)
                    mine = getattr(unit.quality, name)
                    if gold_value is not None and mine is not None:
                        metric_pairs[name][0].append(int(gold_value))
                        metric_pairs[name][1].append(int(mine))

    def kappas(pairs: dict[str, tuple[list[int], list[int]]]) -> dict[str, KappaResult]:
        out: dict[str, KappaResult] = {}
        for name, (gold_labels, mine_labels) in pairs.items():
            if gold_labels:
                out[name] = kappa_from_pairs(gold_labels, mine_labels)
        return out

    return GoldReport(
        n_messages=len(gold),
        segmentation_accuracy=(sum(seg_scores) / len(seg_scores)) if seg_scores else 0.0,
        type_kappa=kappas(type_pairs),
        metric_kappa=kappas(metric_pairs),
        metric_accuracy={
            name: (
                sum(int(a == b) for a, b in zip(ga, mb)) / len(ga)
                if (ga := metric_pairs[name][0]) and (mb := metric_pairs[name][1])
                else 0.0
            )
            for name in METRIC_NAMES
        },
    )
