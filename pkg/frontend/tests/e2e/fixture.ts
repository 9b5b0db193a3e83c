/**
 * Corpus the e2e server is seeded with: one assignment, one student, a
 * first and a final draft.  The final draft drops one sentence and adds
 * another so the revision diff has both added and removed segments.
 */

import type { AssignmentDoc, DraftRecord, RosterEntry } from "../../src/api/types";

export const ASSIGNMENT_ID = "asgn-ui";
export const STUDENT_ID = "s-100";
export const FIRST_ESSAY_ID = "e-first-100";
export const FINAL_ESSAY_ID = "e-final-100";
export const GRADER_ID = "grader-ui";

export const REMOVED_SENTENCE =
  "Some students say uniforms limit self-expression.";
export const ADDED_SENTENCE =
  "Recent district surveys found fewer dress-code disputes after uniform adoption.";

const SHARED_OPENING =
  "School uniforms should be required in public schools. " +
  "Uniforms reduce visible income differences between students. ";
const SHARED_MIDDLE =
  "A shared dress code also makes mornings simpler for families. ";

export const FIRST_DRAFT_TEXT =
  SHARED_OPENING +
  `${REMOVED_SENTENCE} ` +
  SHARED_MIDDLE +
  "Critics argue that uniforms do nothing for learning outcomes.";

export const FINAL_DRAFT_TEXT =
  SHARED_OPENING +
  SHARED_MIDDLE +
  `${ADDED_SENTENCE} ` +
  "Critics argue that uniforms do nothing for learning outcomes, but the savings in time and conflict are real.";

export const FIXTURE_ASSIGNMENT: AssignmentDoc = {
  id: ASSIGNMENT_ID,
  prompt_text: "Argue for or against requiring school uniforms.",
  rubric_items: [
    {
      id: "r-thesis",
      text: "States a clear position on school uniforms in the opening sentence.",
      weight: 2,
      historic_feedback: [
        "Try stating your position in one sentence at the end of the introduction.",
        "Your opening should tell the reader exactly where you stand.",
      ],
    },
    {
      id: "r-evidence",
      text: "Backs every claim about uniforms with specific evidence such as income data or learning outcomes.",
      weight: 1,
      historic_feedback: [
        "Add a concrete example or statistic to back up each claim.",
      ],
    },
    {
      id: "r-counter",
      text: "Acknowledges critics who argue against school uniforms.",
      weight: 1,
    },
  ],
  exemplar_questions: [
    "What is the single sentence that states the essay's position?",
    "Which claim has the weakest supporting evidence?",
    "Where could the writer acknowledge the other side?",
  ],
};

export const FIXTURE_DRAFTS: DraftRecord[] = [
  {
    essay_id: FIRST_ESSAY_ID,
    student_id: STUDENT_ID,
    assignment_id: ASSIGNMENT_ID,
    stage: "first",
    text: FIRST_DRAFT_TEXT,
    submitted_at: "2026-03-02T10:00:00Z",
  },
  {
    essay_id: FINAL_ESSAY_ID,
    student_id: STUDENT_ID,
    assignment_id: ASSIGNMENT_ID,
    stage: "final",
    text: FINAL_DRAFT_TEXT,
    submitted_at: "2026-03-16T10:00:00Z",
  },
];

export const FIXTURE_ROSTER: RosterEntry[] = [
  {
    student_id: STUDENT_ID,
    assignment_id: ASSIGNMENT_ID,
    condition: "feedback_writer",
  },
];
