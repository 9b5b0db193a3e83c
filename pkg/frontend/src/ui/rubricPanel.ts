/**
 * Right panel: one card per rubric item, plus the freeform comments at
 * the end.
 *
 * Every card carries the feedback box that ships to the student.  The
 * service creates one empty box per rubric when the session opens, so
 * the box always exists; it just starts blank.  In the feedback-writer
 * condition the card additionally shows the judgment chip, the AI
 * suggestion (with flip / regenerate / adopt controls), and the
 * historic suggestion when the feedback bank has one — adopting either
 * fills the empty box.  Baseline cards show the rubric wording and the
 * box alone: baseline graders write every comment by hand.
 */

import type {
  CommentBoxView,
  GraderAction,
  SessionView,
  SuggestionKindLabel,
} from "../api/types";
import { isFeedbackWriterView, rubricBoxId } from "../api/types";
import {
  judgmentLabel,
  judgmentTone,
  kindColor,
  kindLabel,
  toneColor,
} from "./tones";

export interface RubricPanelDelegate {
  onAction(action: GraderAction): void;
  onCardSelect(rubricId: string): void;
}

export class RubricPanel {
  private readonly root: HTMLElement;
  private delegate: RubricPanelDelegate | null = null;

  constructor(root: HTMLElement) {
    this.root = root;
    this.root.classList.add("rubric-panel");
  }

  setDelegate(delegate: RubricPanelDelegate): void {
    this.delegate = delegate;
  }

  render(view: SessionView, interactive: boolean): void {
    const pending = this.collectPendingEdits();
    this.root.textContent = "";
    for (const item of view.rubric_items) {
      this.root.append(this.renderCard(view, item.id, item.text, item.weight, interactive, pending));
    }
    this.root.append(this.renderFreeformSection(view, interactive, pending));
  }

  /** Scroll the rubric's card into view; false if the card is missing. */
  focusCard(rubricId: string): boolean {
    const target = this.root.querySelector<HTMLElement>(
      `[data-rubric-card="${rubricId}"]`,
    );
    if (target === null) {
      return false;
    }
    for (const card of this.root.querySelectorAll<HTMLElement>(".nav-focus")) {
      card.classList.remove("nav-focus");
    }
    target.classList.add("nav-focus");
    target.scrollIntoView({ block: "nearest" });
    return true;
  }

  // -- cards -----------------------------------------------------------

  private renderCard(
    view: SessionView,
    rubricId: string,
    rubricText: string,
    weight: string,
    interactive: boolean,
    pending: Map<string, string>,
  ): HTMLElement {
    const card = document.createElement("section");
    card.className = "rubric-card";
    card.dataset.rubricCard = rubricId;

    const header = document.createElement("header");
    header.className = "rubric-card-header";
    header.style.cursor = "pointer";
    header.addEventListener("click", () => {
      this.delegate?.onCardSelect(rubricId);
    });

    const idSpan = document.createElement("span");
    idSpan.className = "rubric-id";
    idSpan.textContent = rubricId;
    const weightSpan = document.createElement("span");
    weightSpan.className = "rubric-weight";
    weightSpan.textContent = `×${weight}`;
    header.append(idSpan, weightSpan);

    if (isFeedbackWriterView(view)) {
      header.append(this.renderJudgmentChip(view.met[rubricId]));
    }

    const text = document.createElement("p");
    text.className = "rubric-text";
    text.textContent = rubricText;
    header.append(text);
    card.append(header);

    if (isFeedbackWriterView(view)) {
      const bundle = view.bundles[rubricId];
      if (bundle?.error) {
        card.append(note("error-note", `Suggestions unavailable: ${bundle.error}`));
      }
      const suggestion = view.ai_suggestions[rubricId];
      if (suggestion) {
        card.append(
          this.renderAiCard(rubricId, suggestion.text, suggestion.kind, suggestion.stale,
            bundle?.judgment?.rationale ?? null, interactive),
        );
      }
      if (bundle?.historic_suggestion) {
        card.append(this.renderHistoricCard(rubricId, bundle.historic_suggestion.text, interactive));
      }
    }
    card.append(this.renderFinalBox(view, rubricId, interactive, pending));
    return card;
  }

  private renderJudgmentChip(met: 0 | 1 | undefined): HTMLElement {
    const tone = judgmentTone(met);
    const chip = document.createElement("span");
    chip.className = "judgment-chip";
    chip.dataset.tone = tone;
    chip.textContent = judgmentLabel(tone);
    chip.style.backgroundColor = toneColor(tone);
    chip.style.color = "#ffffff";
    return chip;
  }

  private renderAiCard(
    rubricId: string,
    suggestionText: string,
    kind: SuggestionKindLabel,
    stale: boolean,
    rationale: string | null,
    interactive: boolean,
  ): HTMLElement {
    const aiCard = document.createElement("div");
    aiCard.className = "ai-card";
    aiCard.dataset.kind = kind;
    aiCard.style.borderLeft = `4px solid ${kindColor(kind)}`;

    const badge = document.createElement("span");
    badge.className = "kind-badge";
    badge.textContent = kindLabel(kind);
    badge.style.color = kindColor(kind);
    aiCard.append(badge);

    if (stale) {
      const staleBadge = document.createElement("span");
      staleBadge.className = "stale-badge";
      staleBadge.textContent = "stale";
      aiCard.append(staleBadge);
    }

    const text = document.createElement("p");
    text.className = "ai-text";
    text.textContent = suggestionText;
    aiCard.append(text);

    if (rationale !== null) {
      aiCard.append(note("judgment-rationale", rationale));
    }

    const actions = document.createElement("div");
    actions.className = "ai-actions";
    actions.append(
      this.actionButton("flip", "Flip judgment", interactive, {
        action: "flip",
        params: { rubric_id: rubricId },
      }),
      this.actionButton("regenerate", "Regenerate", interactive, {
        action: "regenerate",
        params: { rubric_id: rubricId },
      }),
      this.actionButton("adopt-ai", "Adopt suggestion", interactive && !stale, {
        action: "adopt_ai",
        params: { rubric_id: rubricId },
      }),
    );
    aiCard.append(actions);
    return aiCard;
  }

  private renderHistoricCard(
    rubricId: string,
    historicText: string,
    interactive: boolean,
  ): HTMLElement {
    const historicCard = document.createElement("div");
    historicCard.className = "historic-card";

    const badge = document.createElement("span");
    badge.className = "kind-badge";
    badge.textContent = "Historic";
    historicCard.append(badge);

    const text = document.createElement("p");
    text.className = "historic-text";
    text.textContent = historicText;
    historicCard.append(text);

    historicCard.append(
      this.actionButton("adopt-historic", "Adopt historic", interactive, {
        action: "adopt_historic",
        params: { rubric_id: rubricId },
      }),
    );
    return historicCard;
  }

  // -- feedback boxes -----------------------------------------------------

  private renderFinalBox(
    view: SessionView,
    rubricId: string,
    interactive: boolean,
    pending: Map<string, string>,
  ): HTMLElement {
    const boxId = rubricBoxId(rubricId);
    const box = view.boxes.find((b) => b.box_id === boxId) ?? null;
    const wrap = document.createElement("div");
    wrap.className = "final-box";
    wrap.dataset.finalBox = rubricId;

    const label = document.createElement("label");
    label.className = "final-box-label";
    label.textContent = "Feedback to student";
    wrap.append(label);

    // A removed comment keeps its stored text server-side, but nothing
    // ships to the student, so the box presents as blank again.
    const serverText = box !== null && !box.deleted ? box.final_text : "";
    const textarea = this.feedbackTextarea(boxId, serverText, pending);
    textarea.disabled = !interactive || box === null;
    wrap.append(textarea);
    if (box === null) {
      return wrap;
    }

    const feedbackWriter = isFeedbackWriterView(view);
    if (box.deleted) {
      wrap.append(note(
        "final-box-hint",
        feedbackWriter
          ? "Comment removed — adopt a suggestion or save new text to restore it."
          : "Comment removed — save new text to restore it.",
      ));
    } else if (feedbackWriter && box.source === null && box.final_text === "") {
      wrap.append(note(
        "final-box-hint",
        "Adopt a suggestion to start this comment, or write your own.",
      ));
    }
    wrap.append(this.boxControls(boxId, textarea, interactive));
    if (box.source !== null && !box.deleted) {
      wrap.append(note("box-provenance", provenanceLabel(box)));
    }
    return wrap;
  }

  private renderFreeformSection(
    view: SessionView,
    interactive: boolean,
    pending: Map<string, string>,
  ): HTMLElement {
    const section = document.createElement("section");
    section.className = "freeform-section";

    const heading = document.createElement("h3");
    heading.textContent = "General comments";
    section.append(heading);

    for (const box of view.boxes) {
      if (box.rubric_id !== null || box.deleted) {
        continue;
      }
      const wrap = document.createElement("div");
      wrap.className = "freeform-box";
      wrap.dataset.freeformBox = box.box_id;
      const textarea = this.feedbackTextarea(box.box_id, box.final_text, pending);
      textarea.disabled = !interactive;
      wrap.append(textarea, this.boxControls(box.box_id, textarea, interactive));
      section.append(wrap);
    }

    const composer = document.createElement("div");
    composer.className = "freeform-composer";
    const textarea = document.createElement("textarea");
    textarea.className = "composer-text";
    textarea.value = pending.get(COMPOSER_KEY) ?? "";
    textarea.dataset.pendingKey = COMPOSER_KEY;
    textarea.disabled = !interactive;
    const addButton = document.createElement("button");
    addButton.type = "button";
    addButton.dataset.action = "add-freeform";
    addButton.textContent = "Add comment";
    addButton.disabled = !interactive;
    addButton.addEventListener("click", () => {
      const text = textarea.value;
      textarea.value = "";
      this.delegate?.onAction({ action: "add_freeform", params: { text } });
    });
    composer.append(textarea, addButton);
    section.append(composer);
    return section;
  }

  private feedbackTextarea(
    boxId: string,
    serverText: string,
    pending: Map<string, string>,
  ): HTMLTextAreaElement {
    const textarea = document.createElement("textarea");
    textarea.className = "final-text";
    textarea.dataset.boxId = boxId;
    textarea.dataset.serverText = serverText;
    textarea.value = pending.get(boxId) ?? serverText;
    return textarea;
  }

  private boxControls(
    boxId: string,
    textarea: HTMLTextAreaElement,
    interactive: boolean,
  ): HTMLElement {
    const controls = document.createElement("div");
    controls.className = "box-controls";
    const save = document.createElement("button");
    save.type = "button";
    save.dataset.action = "save-final";
    save.textContent = "Save";
    save.disabled = !interactive;
    save.addEventListener("click", () => {
      this.delegate?.onAction({
        action: "edit_final_text",
        params: { box_id: boxId, text: textarea.value },
      });
    });
    const remove = document.createElement("button");
    remove.type = "button";
    remove.dataset.action = "delete-box";
    remove.textContent = "Remove";
    remove.disabled = !interactive;
    remove.addEventListener("click", () => {
      this.delegate?.onAction({
        action: "delete_feedback",
        params: { box_id: boxId },
      });
    });
    controls.append(save, remove);
    return controls;
  }

  private actionButton(
    name: string,
    labelText: string,
    enabled: boolean,
    action: GraderAction,
  ): HTMLButtonElement {
    const button = document.createElement("button");
    button.type = "button";
    button.dataset.action = name;
    button.textContent = labelText;
    button.disabled = !enabled;
    button.addEventListener("click", () => {
      this.delegate?.onAction(action);
    });
    return button;
  }

  /** Unsaved textarea edits, keyed by box id, so re-renders keep them. */
  private collectPendingEdits(): Map<string, string> {
    const pending = new Map<string, string>();
    for (const textarea of this.root.querySelectorAll<HTMLTextAreaElement>("textarea")) {
      const key = textarea.dataset.boxId ?? textarea.dataset.pendingKey;
      if (key === undefined) {
        continue;
      }
      const serverText = textarea.dataset.serverText ?? "";
      if (textarea.value !== serverText) {
        pending.set(key, textarea.value);
      }
    }
    return pending;
  }
}

const COMPOSER_KEY = "composer";

function note(className: string, text: string): HTMLElement {
  const p = document.createElement("p");
  p.className = className;
  p.textContent = text;
  return p;
}

function provenanceLabel(box: CommentBoxView): string {
  let origin: string;
  if (box.source === "ai") {
    origin = box.adopted_kind === null
      ? "Adopted from the AI suggestion"
      : `Adopted from the AI suggestion (${box.adopted_kind})`;
  } else if (box.source === "historic") {
    origin = "Adopted from the feedback bank";
  } else {
    origin = "Written by hand";
  }
  if (box.edits_after_adoption > 0) {
    const times = box.edits_after_adoption === 1 ? "once" : `${box.edits_after_adoption} times`;
    return `${origin} · edited ${times}`;
  }
  return origin;
}
