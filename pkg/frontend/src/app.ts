/**
 * The grading surface: header, score toolbar, essay and rubric panels
 * side by side, the revision diff underneath, and the export receipt
 * after finalizing.
 *
 * All session state lives in the SessionStore; this class renders its
 * snapshots and forwards panel events — rubric-card clicks focus the
 * essay highlight, highlight clicks focus the card, action buttons
 * dispatch grader actions.
 */

import type {
  FinalContextView,
  GraderAction,
  ScoreSuggestionView,
  SessionView,
} from "./api/types";
import { isFeedbackWriterView } from "./api/types";
import type { SessionGateway, SessionPhase } from "./state/sessionStore";
import { SessionStore } from "./state/sessionStore";
import { DiffPanel } from "./ui/diffPanel";
import { EssayPanel } from "./ui/essayPanel";
import { RubricPanel } from "./ui/rubricPanel";

/** What the app needs from the API client (injectable for tests). */
export interface AppGateway extends SessionGateway {
  finalContext(essayId: string): Promise<FinalContextView>;
  scoreSuggestion(essayId: string): Promise<ScoreSuggestionView>;
}

export class GradingApp {
  readonly store: SessionStore;

  private readonly gateway: AppGateway;
  private readonly root: HTMLElement;
  private readonly header: HTMLElement;
  private readonly errorLine: HTMLElement;
  private readonly toolbar: HTMLElement;
  private readonly essayPanel: EssayPanel;
  private readonly rubricPanel: RubricPanel;
  private readonly diffPanel: DiffPanel;
  private readonly exportBlock: HTMLElement;
  private diffEssayId: string | null = null;

  constructor(root: HTMLElement, gateway: AppGateway, graderId: string) {
    this.root = root;
    this.gateway = gateway;
    this.store = new SessionStore(gateway, graderId);

    this.root.classList.add("grading-app");
    this.root.textContent = "";
    this.header = el("header", "app-header");
    this.errorLine = el("p", "app-error");
    this.errorLine.hidden = true;
    this.toolbar = el("div", "app-toolbar");

    const main = el("main", "app-main");
    main.style.display = "grid";
    main.style.gridTemplateColumns = "1fr 1fr";
    main.style.gap = "1rem";
    const essayHost = el("div", "essay-panel-host");
    const rubricHost = el("div", "rubric-panel-host");
    main.append(essayHost, rubricHost);

    const diffHost = el("section", "diff-host");
    this.exportBlock = el("section", "export-result");
    this.exportBlock.hidden = true;

    this.root.append(this.header, this.errorLine, this.toolbar, main, diffHost, this.exportBlock);

    this.essayPanel = new EssayPanel(essayHost);
    this.rubricPanel = new RubricPanel(rubricHost);
    this.diffPanel = new DiffPanel(diffHost);

    this.rubricPanel.setDelegate({
      onAction: (action: GraderAction) => {
        void this.store.dispatch(action);
      },
      onCardSelect: (rubricId: string) => {
        this.essayPanel.focusRubric(rubricId);
      },
    });
    this.essayPanel.setDelegate({
      onHighlightClick: (rubricId: string) => {
        this.rubricPanel.focusCard(rubricId);
      },
    });

    this.store.subscribe(() => {
      this.render(this.store.snapshot());
    });
    this.render(this.store.snapshot());
  }

  /** Open (or resume) grading one essay. */
  loadEssay(essayId: string): Promise<void> {
    return this.store.load(essayId);
  }

  // -- rendering ---------------------------------------------------------

  private render(phase: SessionPhase): void {
    this.renderHeader(phase);
    this.renderError(phase);
    if (phase.status !== "ready") {
      this.toolbar.textContent = "";
      this.exportBlock.hidden = true;
      return;
    }
    const interactive = phase.view.is_open && !phase.busy;
    this.renderToolbar(phase.view, interactive);
    this.essayPanel.render(phase.view);
    this.rubricPanel.render(phase.view, interactive);
    this.renderDiff(phase.view);
    this.renderExport(phase);
  }

  private renderHeader(phase: SessionPhase): void {
    this.header.textContent = "";
    const title = el("h2", "app-title");
    const status = el("span", "session-status");
    switch (phase.status) {
      case "idle":
        title.textContent = "Essay grading";
        status.textContent = "no session";
        break;
      case "loading":
        title.textContent = phase.essayId;
        status.textContent = "opening…";
        break;
      case "failed":
        title.textContent = phase.essayId;
        status.textContent = "failed to open";
        break;
      case "ready": {
        const view = phase.view;
        title.textContent = `${view.essay_id} · ${view.student_id} · ${view.stage} draft`;
        status.textContent = phase.busy
          ? "working…"
          : view.is_open
            ? `open (${view.condition})`
            : "closed";
        break;
      }
    }
    status.dataset.phase = phase.status;
    this.header.append(title, status);
  }

  private renderError(phase: SessionPhase): void {
    let message: string | null = null;
    if (phase.status === "failed") {
      message = phase.message;
    } else if (phase.status === "ready") {
      message = phase.lastError;
    }
    this.errorLine.textContent = message ?? "";
    this.errorLine.hidden = message === null;
  }

  private renderToolbar(view: SessionView, interactive: boolean): void {
    const previous = this.toolbar.querySelector<HTMLInputElement>("input.score-input");
    const pendingScore =
      previous !== null && previous.value !== previous.dataset.serverScore
        ? previous.value
        : null;
    this.toolbar.textContent = "";

    const scoreInput = document.createElement("input");
    scoreInput.className = "score-input";
    scoreInput.placeholder = "score";
    const serverScore = view.score ?? "";
    scoreInput.dataset.serverScore = serverScore;
    scoreInput.value = pendingScore ?? serverScore;
    scoreInput.disabled = !interactive;

    const setScore = toolbarButton("set-score", "Set score", interactive, () => {
      void this.store.dispatch({
        action: "set_score",
        params: { score: scoreInput.value },
      });
    });

    this.toolbar.append(scoreInput, setScore);

    if (isFeedbackWriterView(view)) {
      const suggest = toolbarButton("suggest-score", "Suggest", interactive, () => {
        suggest.disabled = true;
        void this.gateway
          .scoreSuggestion(view.essay_id)
          .then((suggestion) => {
            const input = this.toolbar.querySelector<HTMLInputElement>("input.score-input");
            if (input !== null) {
              input.value = suggestion.total;
            }
          })
          .catch(() => {
            // Leave the score box untouched; setting a score stays manual.
          })
          .finally(() => {
            suggest.disabled = !interactive;
          });
      });
      this.toolbar.append(suggest);
    } else {
      const reference = document.createElement("a");
      reference.className = "reference-link";
      reference.href = view.reference_url;
      reference.textContent = "Rubric & feedback bank";
      this.toolbar.append(reference);
    }

    const finalize = toolbarButton("finalize", "Finalize & export", interactive, () => {
      void this.store.finalize();
    });
    this.toolbar.append(finalize);
  }

  private renderDiff(view: SessionView): void {
    if (view.stage !== "final") {
      this.diffEssayId = null;
      this.diffPanel.renderEmpty(
        "This is the first draft — nothing to compare yet.",
      );
      return;
    }
    if (this.diffEssayId === view.essay_id) {
      return; // already rendered (or still loading) for this essay
    }
    this.diffEssayId = view.essay_id;
    this.diffPanel.renderEmpty("Loading the revision diff…");
    void this.gateway
      .finalContext(view.essay_id)
      .then((context) => {
        if (this.diffEssayId === view.essay_id) {
          this.diffPanel.render(context);
        }
      })
      .catch((error: unknown) => {
        if (this.diffEssayId === view.essay_id) {
          const message = error instanceof Error ? error.message : String(error);
          this.diffPanel.renderEmpty(`Revision diff unavailable: ${message}`);
        }
      });
  }

  private renderExport(phase: Extract<SessionPhase, { status: "ready" }>): void {
    const result = phase.lastExport;
    if (result === null) {
      this.exportBlock.hidden = true;
      this.exportBlock.textContent = "";
      return;
    }
    this.exportBlock.hidden = false;
    this.exportBlock.textContent = "";

    const heading = el("h3", "export-heading");
    heading.textContent = `Exported · score ${result.export.score}`;
    this.exportBlock.append(heading);

    if (result.warnings.length > 0) {
      const warnings = document.createElement("ul");
      warnings.className = "export-warnings";
      for (const warning of result.warnings) {
        const li = document.createElement("li");
        li.textContent = warning;
        warnings.append(li);
      }
      this.exportBlock.append(warnings);
    }

    const comments = document.createElement("ol");
    comments.className = "export-comments";
    for (const comment of result.export.comments) {
      const li = document.createElement("li");
      li.dataset.boxId = comment.box_id;
      const origin = el("span", "export-origin");
      origin.textContent = comment.rubric_id === null ? "general" : comment.rubric_id;
      const text = el("span", "export-text");
      text.textContent = comment.final_text;
      li.append(origin, document.createTextNode(": "), text);
      comments.append(li);
    }
    this.exportBlock.append(comments);
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

function toolbarButton(
  name: string,
  label: string,
  enabled: boolean,
  onClick: () => void,
): HTMLButtonElement {
  const button = document.createElement("button");
  button.type = "button";
  button.dataset.action = name;
  button.textContent = label;
  button.disabled = !enabled;
  button.addEventListener("click", onClick);
  return button;
}
