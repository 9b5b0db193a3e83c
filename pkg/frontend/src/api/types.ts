/**
 * JSON contracts for the grading service HTTP API.
 *
 * Every shape here mirrors a payload the Python service serializes; the
 * client and UI never invent fields of their own.  Session views form a
 * discriminated union on `condition`: baseline views carry only the
 * scaffold plus a reference-sheet link, feedback-writer views add the
 * judgment map, suggestion texts, and full per-rubric bundles.
 */

export type Condition = "baseline" | "feedback_writer";

export type DraftStage = "first" | "final";

/** Grader-facing suggestion flavor ("ai_" prefix already stripped). */
export type SuggestionKindLabel = "constructive" | "positive";

/** Pipeline-facing suggestion flavor, as stored inside bundles. */
export type SuggestionKind = "ai_constructive" | "ai_positive" | "historic";

export type AnchorStatus = "grounded" | "repaired" | "unanchored";

export type SegmentKind = "unchanged" | "added" | "removed";

export interface HealthInfo {
  status: string;
  lcs_backend: string;
  prompt_version: string;
}

export interface RubricItemView {
  id: string;
  text: string;
  weight: string;
}

export interface CommentBoxView {
  box_id: string;
  rubric_id: string | null;
  position: number;
  final_text: string;
  source: "ai" | "historic" | null;
  adopted_kind: SuggestionKindLabel | null;
  edits_after_adoption: number;
  deleted: boolean;
}

/** Live suggestion text for one rubric, as shown to the grader. */
export interface AiSuggestionView {
  text: string;
  kind: SuggestionKindLabel;
  stale: boolean;
}

/** Character ranges into the session's draft text. */
export interface AnchorView {
  draft_id: string;
  ranges: [number, number][];
  status: AnchorStatus;
}

export interface JudgmentView {
  rationale: string;
  met: boolean;
}

export interface SuggestionView {
  kind: SuggestionKind;
  text: string;
  stale?: boolean;
}

/** Everything the pipeline produced for one rubric item. */
export interface BundleView {
  rubric_id: string;
  anchor: AnchorView;
  judgment: JudgmentView | null;
  ai_suggestion: SuggestionView | null;
  historic_suggestion: SuggestionView | null;
  final_text: string;
  adopted_from: "ai" | "historic" | null;
  history: SuggestionView[];
  error: string | null;
}

interface SessionViewBase {
  essay_id: string;
  student_id: string;
  assignment_id: string;
  grader_id: string;
  stage: DraftStage;
  is_open: boolean;
  score: string | null;
  draft_text: string;
  rubric_items: RubricItemView[];
  boxes: CommentBoxView[];
}

export interface BaselineSessionView extends SessionViewBase {
  condition: "baseline";
  reference_url: string;
}

export interface FeedbackWriterSessionView extends SessionViewBase {
  condition: "feedback_writer";
  met: Record<string, 0 | 1>;
  ai_suggestions: Record<string, AiSuggestionView>;
  bundles: Record<string, BundleView>;
  historic_available: Record<string, number>;
}

export type SessionView = BaselineSessionView | FeedbackWriterSessionView;

export function isFeedbackWriterView(
  view: SessionView,
): view is FeedbackWriterSessionView {
  return view.condition === "feedback_writer";
}

export interface DiffSegmentView {
  kind: SegmentKind;
  text: string;
  first_range?: [number, number];
  final_range?: [number, number];
}

/** Sentence diff of a final draft against the same student's first draft. */
export interface FinalContextView {
  first_essay_id: string;
  final_essay_id: string;
  is_identity: boolean;
  segments: DiffSegmentView[];
  anchors: Record<string, AnchorView>;
}

export interface RubricVerdictView {
  rubric_id: string;
  met: number;
  rationale: string;
}

export interface ScoreSuggestionView {
  essay_id: string;
  stage: DraftStage;
  verdicts: RubricVerdictView[];
  total: string;
  total_float: number;
  partial: boolean;
}

export interface ExportCommentView {
  box_id: string;
  rubric_id: string | null;
  excerpt: string;
  final_text: string;
}

export interface FeedbackExportView {
  essay_id: string;
  student_id: string;
  assignment_id: string;
  score: string;
  comments: ExportCommentView[];
  condition: Condition;
}

export interface FinalizeResult {
  export: FeedbackExportView;
  warnings: string[];
}

export interface ReferenceRubricItemView extends RubricItemView {
  historic_feedback: string[];
}

/** Rubric text plus historic comments — the baseline grader's aid. */
export interface ReferenceSheetView {
  assignment_id: string;
  prompt_text: string;
  rubric_items: ReferenceRubricItemView[];
}

export interface RubricItemDoc {
  id: string;
  text: string;
  weight?: number | string;
  historic_feedback?: string[];
}

export interface AssignmentDoc {
  id: string;
  prompt_text: string;
  rubric_items: RubricItemDoc[];
  exemplar_questions: string[];
}

export interface DraftRecord {
  essay_id: string;
  student_id: string;
  assignment_id: string;
  stage: DraftStage;
  text: string;
  submitted_at?: string;
}

export interface RosterEntry {
  student_id: string;
  assignment_id: string;
  condition: Condition;
}

export interface ImportReceipt {
  imported: string[];
  rejected: unknown[];
  imported_count: number;
  rejected_count: number;
}

/** One grader mutation, dispatched to POST /sessions/{id}/actions. */
export type GraderAction =
  | { action: "flip"; params: { rubric_id: string } }
  | { action: "regenerate"; params: { rubric_id: string } }
  | { action: "adopt_ai"; params: { rubric_id: string } }
  | { action: "adopt_historic"; params: { rubric_id: string } }
  | { action: "edit_final_text"; params: { box_id: string; text: string } }
  | { action: "add_freeform"; params: { text: string } }
  | { action: "delete_feedback"; params: { box_id: string } }
  | { action: "reposition"; params: { box_id: string; position: number } }
  | { action: "set_score"; params: { score: string } };

export type GraderActionName = GraderAction["action"];

/** The id of the comment box tied to one rubric item. */
export function rubricBoxId(rubricId: string): string {
  return `rubric:${rubricId}`;
}
