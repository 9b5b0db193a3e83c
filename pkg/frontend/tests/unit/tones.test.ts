import { describe, expect, it } from "vitest";

import {
  flippedKind,
  judgmentLabel,
  judgmentTone,
  kindColor,
  kindLabel,
  toneColor,
} from "../../src/ui/tones";

describe("judgmentTone", () => {
  it("maps met / not met / unjudged to distinct tones", () => {
    expect(judgmentTone(1)).toBe("met");
    expect(judgmentTone(0)).toBe("missing");
    expect(judgmentTone(undefined)).toBe("none");
  });
});

describe("judgmentLabel", () => {
  it("labels every tone", () => {
    expect(judgmentLabel("met")).toBe("Met");
    expect(judgmentLabel("missing")).toBe("Needs work");
    expect(judgmentLabel("none")).toBe("No judgment");
  });
});

describe("toneColor", () => {
  it("gives each tone its own color", () => {
    const colors = [toneColor("met"), toneColor("missing"), toneColor("none")];
    expect(new Set(colors).size).toBe(3);
    for (const color of colors) {
      expect(color).toMatch(/^#[0-9a-f]{6}$/);
    }
  });
});

describe("suggestion kinds", () => {
  it("labels and colors both kinds distinctly", () => {
    expect(kindLabel("constructive")).toBe("Constructive");
    expect(kindLabel("positive")).toBe("Positive");
    expect(kindColor("constructive")).not.toBe(kindColor("positive"));
  });

  it("flip swaps the kind both ways", () => {
    expect(flippedKind("constructive")).toBe("positive");
    expect(flippedKind("positive")).toBe("constructive");
    expect(flippedKind(flippedKind("positive"))).toBe("positive");
  });

  it("aligns suggestion kind colors with judgment tones", () => {
    // A met judgment pairs with a positive suggestion, a missing one with
    // a constructive suggestion; the chip and card share the same hue.
    expect(kindColor("positive")).toBe(toneColor("met"));
    expect(kindColor("constructive")).toBe(toneColor("missing"));
  });
});
