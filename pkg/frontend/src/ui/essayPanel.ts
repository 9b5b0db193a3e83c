/**
 * Left panel: the draft text with per-rubric evidence highlights.
 *
 * Anchor ranges from different rubrics may overlap, so the text is split
 * at every range boundary and each slice is marked with the full set of
 * rubrics covering it.  Clicking a highlight navigates to the first of
 * those rubrics' cards; `focusRubric` scrolls the first highlight of a
 * rubric into view for the reverse direction.
 */

import type { SessionView } from "../api/types";
import { isFeedbackWriterView } from "../api/types";
import { judgmentTone, toneColor } from "./tones";

export interface RubricAnchorRanges {
  rubricId: string;
  ranges: [number, number][];
}

export interface HighlightSegment {
  start: number;
  end: number;
  /** Rubrics covering this slice, in rubric display order; empty = plain text. */
  rubricIds: string[];
}

/**
 * Tile [0, textLength) into segments split at every anchor boundary.
 * Order of `anchors` decides the order of each segment's `rubricIds`.
 */
export function computeHighlightSegments(
  textLength: number,
  anchors: RubricAnchorRanges[],
): HighlightSegment[] {
  const boundaries = new Set<number>([0, textLength]);
  const clamped: { start: number; end: number; rubricId: string }[] = [];
  for (const anchor of anchors) {
    for (const [rawStart, rawEnd] of anchor.ranges) {
      const start = Math.max(0, Math.min(textLength, rawStart));
      const end = Math.max(0, Math.min(textLength, rawEnd));
      if (start >= end) {
        continue;
      }
      clamped.push({ start, end, rubricId: anchor.rubricId });
      boundaries.add(start);
      boundaries.add(end);
    }
  }
  const cuts = [...boundaries].sort((a, b) => a - b);
  const segments: HighlightSegment[] = [];
  for (let i = 0; i + 1 < cuts.length; i += 1) {
    const start = cuts[i]!;
    const end = cuts[i + 1]!;
    const rubricIds: string[] = [];
    for (const range of clamped) {
      if (range.start <= start && end <= range.end && !rubricIds.includes(range.rubricId)) {
        rubricIds.push(range.rubricId);
      }
    }
    segments.push({ start, end, rubricIds });
  }
  return segments;
}

export interface EssayPanelDelegate {
  onHighlightClick(rubricId: string): void;
}

export class EssayPanel {
  private readonly root: HTMLElement;
  private delegate: EssayPanelDelegate | null = null;

  constructor(root: HTMLElement) {
    this.root = root;
    this.root.classList.add("essay-panel");
    this.root.style.whiteSpace = "pre-wrap";
    this.root.addEventListener("click", (event) => {
      const target = event.target;
      if (!(target instanceof Element)) {
        return;
      }
      const mark = target.closest("mark[data-rubrics]");
      if (!(mark instanceof HTMLElement)) {
        return;
      }
      const primary = mark.dataset.rubricPrimary;
      if (primary && this.delegate) {
        this.delegate.onHighlightClick(primary);
      }
    });
  }

  setDelegate(delegate: EssayPanelDelegate): void {
    this.delegate = delegate;
  }

  render(view: SessionView): void {
    this.root.textContent = "";
    const text = view.draft_text;
    if (!text) {
      const empty = document.createElement("p");
      empty.className = "essay-empty";
      empty.textContent = "(empty draft)";
      this.root.append(empty);
      return;
    }
    if (!isFeedbackWriterView(view)) {
      this.root.append(document.createTextNode(text));
      return;
    }
    const anchors: RubricAnchorRanges[] = view.rubric_items
      .map((item) => view.bundles[item.id])
      .filter((bundle) => bundle !== undefined)
      .filter((bundle) => bundle.anchor.status !== "unanchored")
      .map((bundle) => ({
        rubricId: bundle.rubric_id,
        ranges: bundle.anchor.ranges,
      }));
    for (const segment of computeHighlightSegments(text.length, anchors)) {
      const slice = text.slice(segment.start, segment.end);
      const primary = segment.rubricIds[0];
      if (primary === undefined) {
        this.root.append(document.createTextNode(slice));
        continue;
      }
      const mark = document.createElement("mark");
      mark.textContent = slice;
      mark.dataset.rubrics = segment.rubricIds.join(" ");
      mark.dataset.rubricPrimary = primary;
      mark.title = `Evidence for ${segment.rubricIds.join(", ")}`;
      mark.style.backgroundColor = `${toneColor(judgmentTone(view.met[primary]))}22`;
      mark.style.cursor = "pointer";
      this.root.append(mark);
    }
  }

  /** Scroll the rubric's first highlight into view; false if it has none. */
  focusRubric(rubricId: string): boolean {
    let target: HTMLElement | null = null;
    for (const mark of this.root.querySelectorAll<HTMLElement>("mark[data-rubrics]")) {
      if ((mark.dataset.rubrics ?? "").split(" ").includes(rubricId)) {
        target = mark;
        break;
      }
    }
    if (target === null) {
      return false;
    }
    for (const mark of this.root.querySelectorAll<HTMLElement>("mark.nav-focus")) {
      mark.classList.remove("nav-focus");
    }
    target.classList.add("nav-focus");
    target.scrollIntoView({ block: "center" });
    return true;
  }
}
