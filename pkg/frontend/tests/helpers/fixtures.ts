/** Handcrafted session views matching the service's serialized shapes. */

import type {
  BaselineSessionView,
  BundleView,
  CommentBoxView,
  FeedbackWriterSessionView,
  FinalContextView,
} from "../../src/api/types";

export const DRAFT_TEXT =
  "The essay opens with a clear claim. Evidence follows in the second paragraph. A counterpoint is missing.";

// Sentence offsets inside DRAFT_TEXT:
//   [0, 35)   "The essay opens with a clear claim."
//   [36, 77)  "Evidence follows in the second paragraph."
export const RANGE_A: [number, number] = [0, 35];
export const RANGE_B: [number, number] = [22, 77]; // overlaps RANGE_A on [22, 35)

/** The blank per-rubric box every session starts with. */
function emptyBox(rubricId: string, position: number): CommentBoxView {
  return {
    box_id: `rubric:${rubricId}`,
    rubric_id: rubricId,
    position,
    final_text: "",
    source: null,
    adopted_kind: null,
    edits_after_adoption: 0,
    deleted: false,
  };
}

function bundle(partial: Partial<BundleView> & Pick<BundleView, "rubric_id">): BundleView {
  return {
    anchor: { draft_id: "e-1", ranges: [], status: "unanchored" },
    judgment: null,
    ai_suggestion: null,
    historic_suggestion: null,
    final_text: "",
    adopted_from: null,
    history: [],
    error: null,
    ...partial,
  };
}

export function makeFeedbackWriterView(): FeedbackWriterSessionView {
  return {
    essay_id: "e-1",
    student_id: "s-1",
    assignment_id: "asgn-x",
    grader_id: "grader-1",
    condition: "feedback_writer",
    stage: "first",
    is_open: true,
    score: null,
    draft_text: DRAFT_TEXT,
    rubric_items: [
      { id: "r-a", text: "States a clear thesis.", weight: "2" },
      { id: "r-b", text: "Supports claims with evidence.", weight: "1" },
      { id: "r-c", text: "Addresses a counterargument.", weight: "1" },
      { id: "r-err", text: "Uses varied sentence structure.", weight: "1" },
    ],
    boxes: [
      {
        box_id: "rubric:r-a",
        rubric_id: "r-a",
        position: 0,
        final_text: "Great thesis.",
        source: "ai",
        adopted_kind: "positive",
        edits_after_adoption: 1,
        deleted: false,
      },
      emptyBox("r-b", 1),
      emptyBox("r-c", 2),
      emptyBox("r-err", 3),
      {
        box_id: "freeform:1",
        rubric_id: null,
        position: 4,
        final_text: "Overall: promising draft.",
        source: null,
        adopted_kind: null,
        edits_after_adoption: 0,
        deleted: false,
      },
    ],
    met: { "r-a": 1, "r-b": 0, "r-c": 0 },
    ai_suggestions: {
      "r-a": {
        text: "Strong, arguable thesis right up front.",
        kind: "positive",
        stale: false,
      },
      "r-b": {
        text: "Name the source for the statistic in paragraph two.",
        kind: "constructive",
        stale: false,
      },
      "r-c": {
        text: "Add a counterargument paragraph.",
        kind: "constructive",
        stale: true,
      },
    },
    bundles: {
      "r-a": bundle({
        rubric_id: "r-a",
        anchor: { draft_id: "e-1", ranges: [RANGE_A], status: "grounded" },
        judgment: { rationale: "The opening sentence states a position.", met: true },
        ai_suggestion: {
          kind: "ai_positive",
          text: "Strong, arguable thesis right up front.",
        },
        historic_suggestion: {
          kind: "historic",
          text: "State your position in one sentence.",
        },
        final_text: "Great thesis.",
        adopted_from: "ai",
      }),
      "r-b": bundle({
        rubric_id: "r-b",
        anchor: { draft_id: "e-1", ranges: [RANGE_B], status: "repaired" },
        judgment: { rationale: "Evidence is mentioned but not sourced.", met: false },
        ai_suggestion: {
          kind: "ai_constructive",
          text: "Name the source for the statistic in paragraph two.",
        },
      }),
      "r-c": bundle({
        rubric_id: "r-c",
        judgment: { rationale: "No counterargument appears.", met: false },
        ai_suggestion: {
          kind: "ai_constructive",
          text: "Add a counterargument paragraph.",
          stale: true,
        },
      }),
      "r-err": bundle({
        rubric_id: "r-err",
        historic_suggestion: {
          kind: "historic",
          text: "Vary how your sentences begin.",
        },
        error: "provider failed after retries",
      }),
    },
    historic_available: { "r-a": 2, "r-b": 0, "r-c": 0, "r-err": 1 },
  };
}

export function makeBaselineView(): BaselineSessionView {
  return {
    essay_id: "e-2",
    student_id: "s-2",
    assignment_id: "asgn-x",
    grader_id: "grader-1",
    condition: "baseline",
    stage: "first",
    is_open: true,
    score: null,
    draft_text: DRAFT_TEXT,
    rubric_items: [
      { id: "r-a", text: "States a clear thesis.", weight: "2" },
      { id: "r-b", text: "Supports claims with evidence.", weight: "1" },
    ],
    boxes: [
      emptyBox("r-a", 0),
      {
        box_id: "rubric:r-b",
        rubric_id: "r-b",
        position: 1,
        final_text: "Please cite your statistics.",
        source: null,
        adopted_kind: null,
        edits_after_adoption: 0,
        deleted: false,
      },
      {
        box_id: "freeform:1",
        rubric_id: null,
        position: 2,
        final_text: "Watch comma splices throughout.",
        source: null,
        adopted_kind: null,
        edits_after_adoption: 0,
        deleted: false,
      },
    ],
    reference_url: "/assignments/asgn-x/reference",
  };
}

export function makeFinalContext(): FinalContextView {
  return {
    first_essay_id: "e-1",
    final_essay_id: "e-9",
    is_identity: false,
    segments: [
      { kind: "unchanged", text: "The essay opens with a clear claim. ", first_range: [0, 36], final_range: [0, 36] },
      { kind: "removed", text: "Evidence follows in the second paragraph. ", first_range: [36, 78] },
      { kind: "added", text: "A survey of two hundred students backs the claim. ", final_range: [36, 86] },
      { kind: "unchanged", text: "A counterpoint is missing.", first_range: [78, 104], final_range: [86, 112] },
    ],
    anchors: {
      "r-a": { draft_id: "e-9", ranges: [[0, 35]], status: "grounded" },
    },
  };
}
