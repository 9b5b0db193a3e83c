"""Sentence segmentation, quote grounding, draft diffs, and reanchoring.

Feedback is always tied to a highlighted region of the student's text, so
this module owns every deterministic operation that maps between quoted
strings and character offsets:

- ``segment_sentences``: rule-based splitter (terminal punctuation with an
  abbreviation allowlist and a decimal guard; paragraph breaks always end a
  sentence).
- ``ground_quotes``: locate model-quoted sentences in a draft, tolerating
  the small rewordings models introduce, via normalized LCS similarity.
- ``validate_anchor``: clip and merge anchor ranges into a well-formed state.
- ``compute_diff``: sentence-level diff between two drafts with an exact
  reconstruction guarantee (see ``DraftDiff``).
- ``reanchor``: carry an anchor from the first draft to the final draft
  across that diff.

Everything here is a pure function over immutable inputs.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Any, Sequence, TYPE_CHECKING

from ._native import lcs_length, lcs_match_pairs
from .errors import AnchorError, ValidationError

if TYPE_CHECKING:
    from .domain import EssayDraft

# A quote must reach this similarity against some sentence of the draft or
# it is dropped; if every quote drops, the anchor is unanchored.
GROUNDING_THRESHOLD = 0.85


class AnchorStatus(str, enum.Enum):
    GROUNDED = "grounded"  # every kept quote equals its sentence verbatim
    REPAIRED = "repaired"  # at least one fuzzy match, clip, or merge happened
    UNANCHORED = "unanchored"  # nothing to point at


class SegmentKind(str, enum.Enum):
    UNCHANGED = "unchanged"
    ADDED = "added"
    REMOVED = "removed"


@dataclass(frozen=True)
class SentenceSpan:
    """Half-open character range of one sentence, with its ordinal position."""

    start: int
    end: int
    index: int


@dataclass(frozen=True)
class SpanAnchor:
    """Where evidence text lives in a specific draft.

    ``ranges`` holds (start, end) character offsets, sorted and disjoint;
    empty iff status is unanchored.
    """

    draft_id: str
    ranges: tuple[tuple[int, int], ...]
    status: AnchorStatus

    def excerpt(self, draft_text: str) -> str:
        """The draft text under this anchor (ranges joined by an ellipsis)."""
        return " … ".join(draft_text[s:e] for s, e in self.ranges)

    def to_dict(self) -> dict[str, Any]:
        return {
            "draft_id": self.draft_id,
            "ranges": [list(r) for r in self.ranges],
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SpanAnchor":
        return cls(
            draft_id=str(data["draft_id"]),
            ranges=tuple((int(s), int(e)) for s, e in data["ranges"]),
            status=AnchorStatus(data["status"]),
        )


def unanchored(draft_id: str) -> SpanAnchor:
    return SpanAnchor(draft_id, (), AnchorStatus.UNANCHORED)


@dataclass(frozen=True)
class DiffSegment:
    """One run of the diff.  ``text`` is exact draft text, never normalized.

    Offsets locate the segment in the side(s) it exists on: unchanged
    segments carry both, removed only first_*, added only final_*.
    """

    kind: SegmentKind
    text: str
    first_start: int | None = None
    first_end: int | None = None
    final_start: int | None = None
    final_end: int | None = None

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind.value, "text": self.text}
        if self.first_start is not None:
            doc["first_range"] = [self.first_start, self.first_end]
        if self.final_start is not None:
            doc["final_range"] = [self.final_start, self.final_end]
        return doc


@dataclass(frozen=True)
class DraftDiff:
    """Sentence-level diff with exact reconstruction:

    - concatenating unchanged+removed segment texts in order reproduces the
      first draft byte-for-byte;
    - concatenating unchanged+added segment texts reproduces the final draft.
    """

    first_draft_id: str
    final_draft_id: str
    segments: tuple[DiffSegment, ...]

    @property
    def is_identity(self) -> bool:
        return all(seg.kind is SegmentKind.UNCHANGED for seg in self.segments)

    def to_dict(self) -> dict[str, Any]:
        return {
            "first_draft_id": self.first_draft_id,
            "final_draft_id": self.final_draft_id,
            "segments": [seg.to_dict() for seg in self.segments],
        }


# ---------------------------------------------------------------------------
# Sentence segmentation
# ---------------------------------------------------------------------------

# Words whose trailing period does not end a sentence.  Compared casefolded,
# without the trailing period.
ABBREVIATIONS = frozenset(
    {
        "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st",
        "vs", "etc", "e.g", "i.e", "cf", "al", "ca", "approx",
        "fig", "figs", "eq", "eqs", "sec", "ch", "pp", "no", "nos",
        "vol", "dept", "univ", "inc", "ltd", "co", "corp",
        "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept",
        "oct", "nov", "dec", "mon", "tue", "wed", "thu", "fri", "sat", "sun",
        "u.s", "u.k", "ph.d", "b.a", "m.a", "b.s", "m.s",
    }
)

# Terminal punctuation, optionally repeated (!?, ..., etc.), optionally
# followed by closing quotes/brackets.
_TERMINAL_RE = re.compile(r"[.!?…]+[\"'”’)\]»]*")
_PARAGRAPH_RE = re.compile(r"\n[ \t]*\n+")
_WORD_BEFORE_DOT_RE = re.compile(r"([A-Za-z][\w.]*)\.$")


def _is_abbreviation_dot(text: str, dot_index: int) -> bool:
    match = _WORD_BEFORE_DOT_RE.search(text[: dot_index + 1])
    return match is not None and match.group(1).casefold() in ABBREVIATIONS


def _is_decimal_dot(text: str, dot_index: int) -> bool:
    return (
        0 < dot_index < len(text) - 1
        and text[dot_index - 1].isdigit()
        and text[dot_index + 1].isdigit()
    )


def _chunk_boundaries(chunk: str, base: int, out: list[tuple[int, int]]) -> None:
    """Append trimmed (start, end) sentence ranges of one paragraph chunk."""
    sentence_start = 0

    def emit(raw_start: int, raw_end: int) -> None:
        piece = chunk[raw_start:raw_end]
        lead = len(piece) - len(piece.lstrip())
        trail = len(piece) - len(piece.rstrip())
        if raw_start + lead < raw_end - trail:
            out.append((base + raw_start + lead, base + raw_end - trail))

    for match in _TERMINAL_RE.finditer(chunk):
        end = match.end()
        if end < len(chunk) and not chunk[end].isspace():
            continue  # mid-token punctuation, e.g. the dot in "3.50"
        if match.group(0) == "." and (
            _is_decimal_dot(chunk, match.start()) or _is_abbreviation_dot(chunk, match.start())
        ):
            continue
        emit(sentence_start, end)
        sentence_start = end
    emit(sentence_start, len(chunk))


def segment_sentences(text: str) -> list[SentenceSpan]:
    """Split text into ordered, disjoint sentence spans.

    Rules: a sentence ends at a run of ``.``/``!``/``?``/``…`` (plus any
    trailing closing quotes or brackets) followed by whitespace or end of
    text; a bare period that terminates an allowlisted abbreviation or sits
    between two digits does not split; a paragraph break (blank line)
    always splits.  Spans exclude surrounding whitespace, cover all
    non-whitespace content, and carry their ordinal ``index``.
    """
    ranges: list[tuple[int, int]] = []
    cursor = 0
    for para_break in _PARAGRAPH_RE.finditer(text):
        _chunk_boundaries(text[cursor : para_break.start()], cursor, ranges)
        cursor = para_break.end()
    _chunk_boundaries(text[cursor:], cursor, ranges)
    return [SentenceSpan(start, end, i) for i, (start, end) in enumerate(ranges)]


# ---------------------------------------------------------------------------
# Normalization and similarity
# ---------------------------------------------------------------------------

_PUNCT_FOLD = str.maketrans(
    {
        "‘": "'", "’": "'", "‚": "'", "‛": "'",
        "“": '"', "”": '"', "„": '"', "«": '"', "»": '"',
        "‐": "-", "‑": "-", "‒": "-", "–": "-",
        "—": "-", "―": "-", "−": "-",
        " ": " ", " ": " ", " ": " ",
        "…": "...",
    }
)

_WS_RUN_RE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Casefold, fold typographic punctuation to ASCII, collapse whitespace."""
    return _WS_RUN_RE.sub(" ", text.translate(_PUNCT_FOLD)).strip().casefold()


def similarity(a: str, b: str) -> float:
    """Dice-style LCS similarity on normalized text: 2·LCS / (|a|+|b|) ∈ [0,1]."""
    na, nb = normalize_text(a), normalize_text(b)
    if not na and not nb:
        return 1.0
    if not na or not nb:
        return 0.0
    if na == nb:
        return 1.0
    return 2.0 * lcs_length(na, nb) / (len(na) + len(nb))


# ---------------------------------------------------------------------------
# Quote grounding
# ---------------------------------------------------------------------------


def _merge_ranges(ranges: list[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    merged: list[tuple[int, int]] = []
    for start, end in sorted(ranges):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(end, merged[-1][1]))
        else:
            merged.append((start, end))
    return tuple(merged)


def _best_sentence(
    quote: str, text: str, spans: Sequence[SentenceSpan]
) -> tuple[SentenceSpan, bool] | None:
    """Best-matching sentence for a quote, or None below threshold.

    Returns (span, exact) where exact means verbatim equality with the
    sentence text.  Ties break toward the earliest sentence (strict ``>``
    over the in-order scan).
    """
    target = normalize_text(quote)
    if not target:
        return None
    best: SentenceSpan | None = None
    best_score = 0.0
    for span in spans:
        sentence = text[span.start : span.end]
        if sentence == quote:
            return span, True
        candidate = normalize_text(sentence)
        m, n = len(target), len(candidate)
        if m + n == 0 or 2.0 * min(m, n) / (m + n) < GROUNDING_THRESHOLD:
            continue  # length mismatch alone caps similarity below threshold
        if candidate == target:
            score = 1.0
        else:
            score = 2.0 * lcs_length(target, candidate) / (m + n)
        if score > best_score:
            best_score = score
            best = span
    if best is None or best_score < GROUNDING_THRESHOLD:
        return None
    return best, False


def ground_quotes(draft: "EssayDraft | str", quoted: Sequence[str]) -> SpanAnchor:
    """Anchor model-quoted sentences into a draft.

    Each quote is matched to its best sentence by normalized LCS similarity
    (``similarity``); matches at or above ``GROUNDING_THRESHOLD`` keep that
    sentence's range.  Quotes below threshold are dropped.  Status is
    ``grounded`` when every kept quote equals its sentence verbatim,
    ``repaired`` when any match was fuzzy, ``unanchored`` when every quote
    dropped.  Never raises.
    """
    draft_id, text = _draft_parts(draft)
    spans = segment_sentences(text)
    ranges: list[tuple[int, int]] = []
    any_fuzzy = False
    for quote in quoted:
        quote = quote.strip()
        if not quote:
            continue
        hit = _best_sentence(quote, text, spans)
        if hit is None:
            continue
        span, exact = hit
        ranges.append((span.start, span.end))
        any_fuzzy = any_fuzzy or not exact
    if not ranges:
        return unanchored(draft_id)
    status = AnchorStatus.REPAIRED if any_fuzzy else AnchorStatus.GROUNDED
    return SpanAnchor(draft_id, _merge_ranges(ranges), status)


def _draft_parts(draft: "EssayDraft | str") -> tuple[str, str]:
    if isinstance(draft, str):
        return "draft", draft
    return draft.essay_id, draft.text


def validate_anchor(anchor: SpanAnchor, draft: "EssayDraft | str") -> SpanAnchor:
    """Coerce an anchor into a well-formed state for the given draft.

    Out-of-bounds ranges are clipped, empty/inverted ranges dropped,
    overlapping ranges merged; if anything had to change the status
    degrades to ``repaired``, and if nothing survives the result is
    ``unanchored``.  Raises AnchorError on a draft id mismatch.
    """
    draft_id, text = _draft_parts(draft)
    if not isinstance(draft, str) and anchor.draft_id != draft_id:
        raise AnchorError(
            f"anchor is for draft {anchor.draft_id!r}, not {draft_id!r}"
        )
    limit = len(text)
    clipped: list[tuple[int, int]] = []
    touched = False
    for start, end in anchor.ranges:
        new_start, new_end = max(0, start), min(end, limit)
        if (new_start, new_end) != (start, end):
            touched = True
        if new_start < new_end:
            clipped.append((new_start, new_end))
        else:
            touched = True
    merged = _merge_ranges(clipped)
    if list(merged) != clipped:  # merging or reordering happened
        touched = True
    if not merged:
        return unanchored(anchor.draft_id)
    if anchor.status is AnchorStatus.UNANCHORED:
        # Ranges appeared on an anchor claiming none existed: repaired.
        return SpanAnchor(anchor.draft_id, merged, AnchorStatus.REPAIRED)
    status = AnchorStatus.REPAIRED if touched else anchor.status
    return SpanAnchor(anchor.draft_id, merged, status)


# ---------------------------------------------------------------------------
# Draft diffs
# ---------------------------------------------------------------------------


def _diff_units(text: str) -> list[tuple[str, int]]:
    """Decompose text into (unit_text, start_offset) pieces.

    A unit is one sentence plus the whitespace that precedes it; trailing
    whitespace after the last sentence sticks to the last unit.  The units
    concatenate back to the exact input, which is what gives DraftDiff its
    reconstruction guarantee.  Text with no sentences (e.g. whitespace
    only) is a single unit; empty text has none.
    """
    spans = segment_sentences(text)
    if not spans:
        return [(text, 0)] if text else []
    units: list[tuple[str, int]] = []
    cursor = 0
    for span in spans:
        units.append((text[cursor : span.end], cursor))
        cursor = span.end
    if cursor < len(text):  # trailing whitespace
        last_text, last_start = units[-1]
        units[-1] = (last_text + text[cursor:], last_start)
    return units


def diff_texts(first_text: str, final_text: str) -> tuple[DiffSegment, ...]:
    """Sentence-level diff of two raw texts.

    Units are matched by exact string equality (whitespace included) using
    a longest-common-subsequence alignment; within any changed region,
    removed segments precede added ones, and adjacent segments of the same
    kind are merged.
    """
    first_units = _diff_units(first_text)
    final_units = _diff_units(final_text)
    pairs = lcs_match_pairs([u for u, _ in first_units], [u for u, _ in final_units])

    raw: list[tuple[SegmentKind, str, int | None, int | None]] = []

    def flush_gap(i0: int, i1: int, j0: int, j1: int) -> None:
        for k in range(i0, i1):
            unit, start = first_units[k]
            raw.append((SegmentKind.REMOVED, unit, start, None))
        for k in range(j0, j1):
            unit, start = final_units[k]
            raw.append((SegmentKind.ADDED, unit, None, start))

    prev_i, prev_j = 0, 0
    for i, j in pairs:
        flush_gap(prev_i, i, prev_j, j)
        unit, first_start = first_units[i]
        raw.append((SegmentKind.UNCHANGED, unit, first_start, final_units[j][1]))
        prev_i, prev_j = i + 1, j + 1
    flush_gap(prev_i, len(first_units), prev_j, len(final_units))

    segments: list[DiffSegment] = []
    for kind, text, first_start, final_start in raw:
        if segments and segments[-1].kind is kind:
            prev = segments[-1]
            segments[-1] = DiffSegment(
                kind=kind,
                text=prev.text + text,
                first_start=prev.first_start,
                first_end=None if prev.first_end is None else prev.first_end + len(text),
                final_start=prev.final_start,
                final_end=None if prev.final_end is None else prev.final_end + len(text),
            )
        else:
            segments.append(
                DiffSegment(
                    kind=kind,
                    text=text,
                    first_start=first_start,
                    first_end=None if first_start is None else first_start + len(text),
                    final_start=final_start,
                    final_end=None if final_start is None else final_start + len(text),
                )
            )
    return tuple(segments)


def compute_diff(first: "EssayDraft | str", final: "EssayDraft | str") -> DraftDiff:
    """Diff two drafts of the same (student, assignment).

    Accepts EssayDraft objects (identity-checked) or raw strings (for
    tests and tooling; no identity to check).
    """
    if isinstance(first, str) or isinstance(final, str):
        first_id, first_text = "first", first if isinstance(first, str) else first.text
        final_id, final_text = "final", final if isinstance(final, str) else final.text
    else:
        if (first.student_id, first.assignment_id) != (final.student_id, final.assignment_id):
            raise ValidationError(
                "diff requires drafts from the same student and assignment"
            )
        first_id, first_text = first.essay_id, first.text
        final_id, final_text = final.essay_id, final.text
    return DraftDiff(first_id, final_id, diff_texts(first_text, final_text))


# ---------------------------------------------------------------------------
# Reanchoring across a diff
# ---------------------------------------------------------------------------


def reanchor(anchor: SpanAnchor, diff: DraftDiff) -> SpanAnchor:
    """Carry a first-draft anchor over to the final draft.

    Each range keeps the parts of it that fall inside unchanged segments,
    shifted to final-draft offsets; parts inside removed segments are
    dropped.  The original status is preserved when every range survives
    whole (so on an identity diff this is the identity); any partial loss
    degrades the status to ``repaired``; losing everything yields
    ``unanchored``.  Raises AnchorError if the anchor is not on the diff's
    first draft.
    """
    if anchor.draft_id != diff.first_draft_id:
        raise AnchorError(
            f"anchor is for draft {anchor.draft_id!r}, "
            f"not the diff's first draft {diff.first_draft_id!r}"
        )
    if anchor.status is AnchorStatus.UNANCHORED:
        return unanchored(diff.final_draft_id)

    unchanged = [
        (seg.first_start, seg.first_end, seg.final_start)
        for seg in diff.segments
        if seg.kind is SegmentKind.UNCHANGED
    ]
    mapped: list[tuple[int, int]] = []
    lost_any = False
    for start, end in anchor.ranges:
        covered = 0
        for seg_first_start, seg_first_end, seg_final_start in unchanged:
            assert seg_first_start is not None and seg_first_end is not None
            assert seg_final_start is not None
            lo = max(start, seg_first_start)
            hi = min(end, seg_first_end)
            if lo < hi:
                delta = seg_final_start - seg_first_start
                mapped.append((lo + delta, hi + delta))
                covered += hi - lo
        if covered < end - start:
            lost_any = True

    if not mapped:
        return unanchored(diff.final_draft_id)
    status = AnchorStatus.REPAIRED if lost_any else anchor.status
    return SpanAnchor(diff.final_draft_id, _merge_ranges(mapped), status)
