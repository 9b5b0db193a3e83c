/**
 * Pure presentation helpers: map judgment and suggestion states onto
 * stable tone names, colors, and labels.  Keeping these as plain
 * functions makes the "flip recolors the card" behavior testable without
 * a stylesheet: panels write both a `data-tone`/`data-kind` attribute and
 * the literal color returned here.
 */

import type { SuggestionKindLabel } from "../api/types";

export type JudgmentTone = "met" | "missing" | "none";

/** Tone for a rubric's met/not-met verdict (undefined = no judgment). */
export function judgmentTone(met: 0 | 1 | undefined): JudgmentTone {
  switch (met) {
    case 1:
      return "met";
    case 0:
      return "missing";
    default:
      return "none";
  }
}

export function judgmentLabel(tone: JudgmentTone): string {
  switch (tone) {
    case "met":
      return "Met";
    case "missing":
      return "Needs work";
    case "none":
      return "No judgment";
  }
}

export function toneColor(tone: JudgmentTone): string {
  switch (tone) {
    case "met":
      return "#1a7f37";
    case "missing":
      return "#b35900";
    case "none":
      return "#6e7781";
  }
}

export function kindLabel(kind: SuggestionKindLabel): string {
  switch (kind) {
    case "constructive":
      return "Constructive";
    case "positive":
      return "Positive";
  }
}

export function kindColor(kind: SuggestionKindLabel): string {
  switch (kind) {
    case "constructive":
      return "#b35900";
    case "positive":
      return "#1a7f37";
  }
}

/** The opposite verdict — what a flip will turn `met` into. */
export function flippedKind(kind: SuggestionKindLabel): SuggestionKindLabel {
  switch (kind) {
    case "constructive":
      return "positive";
    case "positive":
      return "constructive";
  }
}
