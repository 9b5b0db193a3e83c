import { beforeEach, describe, expect, it } from "vitest";

import { countSegments, DiffPanel } from "../../src/ui/diffPanel";
import { makeFinalContext } from "../helpers/fixtures";

beforeEach(() => {
  document.body.textContent = "";
});

function mount(): { root: HTMLElement; panel: DiffPanel } {
  const root = document.createElement("div");
  document.body.append(root);
  return { root, panel: new DiffPanel(root) };
}

describe("countSegments", () => {
  it("tallies each segment kind", () => {
    expect(countSegments(makeFinalContext())).toEqual({
      added: 1,
      removed: 1,
      unchanged: 2,
    });
  });
});

describe("DiffPanel.render", () => {
  it("renders added text as <ins> and removed text as <del>", () => {
    const { root, panel } = mount();
    panel.render(makeFinalContext());

    const added = root.querySelectorAll<HTMLElement>('.diff-seg[data-kind="added"]');
    const removed = root.querySelectorAll<HTMLElement>('.diff-seg[data-kind="removed"]');
    expect(added.length).toBe(1);
    expect(removed.length).toBe(1);
    expect(added[0]!.tagName).toBe("INS");
    expect(added[0]!.textContent).toBe(
      "A survey of two hundred students backs the claim. ",
    );
    expect(removed[0]!.tagName).toBe("DEL");
    expect(removed[0]!.textContent).toBe(
      "Evidence follows in the second paragraph. ",
    );
  });

  it("keeps the segments in document order", () => {
    const { root, panel } = mount();
    const context = makeFinalContext();
    panel.render(context);
    const kinds = [...root.querySelectorAll<HTMLElement>(".diff-seg")].map(
      (el) => el.dataset.kind,
    );
    expect(kinds).toEqual(context.segments.map((s) => s.kind));
  });

  it("summarizes the change counts", () => {
    const { root, panel } = mount();
    panel.render(makeFinalContext());
    expect(root.querySelector(".diff-summary")?.textContent).toBe(
      "1 added · 1 removed · 2 unchanged",
    );
  });

  it("says so when the drafts are identical", () => {
    const { root, panel } = mount();
    const context = makeFinalContext();
    panel.render({
      ...context,
      is_identity: true,
      segments: context.segments.filter((s) => s.kind === "unchanged"),
    });
    expect(root.querySelector(".diff-summary")?.textContent).toContain("No changes");
    expect(root.querySelector('[data-kind="added"]')).toBeNull();
  });
});

describe("DiffPanel.renderEmpty", () => {
  it("explains why there is no diff", () => {
    const { root, panel } = mount();
    panel.renderEmpty("This is the first draft — nothing to compare yet.");
    expect(root.querySelector(".diff-empty")?.textContent).toContain("first draft");
    expect(root.querySelector(".diff-seg")).toBeNull();
  });

  it("clears an earlier diff", () => {
    const { root, panel } = mount();
    panel.render(makeFinalContext());
    panel.renderEmpty("Loading…");
    expect(root.querySelectorAll(".diff-seg").length).toBe(0);
  });
});
