/**
 * Revision panel: how the final draft differs from the first.
 *
 * Segments come straight from the service's sentence diff; added text
 * renders as <ins>, removed text as <del>, unchanged text as plain
 * spans, each tagged with `data-kind` so state is inspectable without a
 * stylesheet.
 */

import type { FinalContextView, SegmentKind } from "../api/types";

export class DiffPanel {
  private readonly root: HTMLElement;

  constructor(root: HTMLElement) {
    this.root = root;
    this.root.classList.add("diff-panel");
  }

  render(context: FinalContextView): void {
    this.root.textContent = "";
    this.root.append(heading("Changes since the first draft"));

    const counts = countSegments(context);
    const summary = document.createElement("p");
    summary.className = "diff-summary";
    summary.textContent = context.is_identity
      ? "No changes: the final draft matches the first."
      : `${counts.added} added · ${counts.removed} removed · ${counts.unchanged} unchanged`;
    this.root.append(summary);

    const body = document.createElement("div");
    body.className = "diff-body";
    body.style.whiteSpace = "pre-wrap";
    for (const segment of context.segments) {
      body.append(segmentNode(segment.kind, segment.text));
    }
    this.root.append(body);
  }

  /** Shown for first drafts, where there is no earlier draft to compare. */
  renderEmpty(reason: string): void {
    this.root.textContent = "";
    this.root.append(heading("Changes since the first draft"));
    const p = document.createElement("p");
    p.className = "diff-empty";
    p.textContent = reason;
    this.root.append(p);
  }
}

export interface SegmentCounts {
  added: number;
  removed: number;
  unchanged: number;
}

export function countSegments(context: FinalContextView): SegmentCounts {
  const counts: SegmentCounts = { added: 0, removed: 0, unchanged: 0 };
  for (const segment of context.segments) {
    counts[segment.kind] += 1;
  }
  return counts;
}

function segmentNode(kind: SegmentKind, text: string): HTMLElement {
  let node: HTMLElement;
  switch (kind) {
    case "added":
      node = document.createElement("ins");
      node.style.backgroundColor = "#d1f0d9";
      node.style.textDecoration = "none";
      break;
    case "removed":
      node = document.createElement("del");
      node.style.backgroundColor = "#f7d4d0";
      break;
    case "unchanged":
      node = document.createElement("span");
      break;
  }
  node.className = "diff-seg";
  node.dataset.kind = kind;
  node.textContent = text;
  return node;
}

function heading(text: string): HTMLElement {
  const h = document.createElement("h3");
  h.textContent = text;
  return h;
}
