import { describe, expect, it } from "vitest";

import {
  computeHighlightSegments,
  type RubricAnchorRanges,
} from "../../src/ui/essayPanel";

const TEXT_LENGTH = 100;

function tile(anchors: RubricAnchorRanges[]) {
  return computeHighlightSegments(TEXT_LENGTH, anchors);
}

describe("computeHighlightSegments", () => {
  it("returns one uncovered segment when there are no anchors", () => {
    expect(tile([])).toEqual([{ start: 0, end: 100, rubricIds: [] }]);
  });

  it("tiles the whole text contiguously", () => {
    const segments = tile([
      { rubricId: "r-a", ranges: [[10, 30]] },
      { rubricId: "r-b", ranges: [[20, 50], [70, 90]] },
    ]);
    expect(segments[0]!.start).toBe(0);
    expect(segments[segments.length - 1]!.end).toBe(100);
    for (let i = 0; i + 1 < segments.length; i += 1) {
      expect(segments[i]!.end).toBe(segments[i + 1]!.start);
    }
  });

  it("lists every rubric covering an overlap, in anchor order", () => {
    const segments = tile([
      { rubricId: "r-a", ranges: [[10, 30]] },
      { rubricId: "r-b", ranges: [[20, 50]] },
    ]);
    const overlap = segments.find((s) => s.start === 20 && s.end === 30);
    expect(overlap?.rubricIds).toEqual(["r-a", "r-b"]);
    const onlyA = segments.find((s) => s.start === 10 && s.end === 20);
    expect(onlyA?.rubricIds).toEqual(["r-a"]);
    const onlyB = segments.find((s) => s.start === 30 && s.end === 50);
    expect(onlyB?.rubricIds).toEqual(["r-b"]);
  });

  it("clamps ranges to the text and drops empty ones", () => {
    const segments = tile([
      { rubricId: "r-a", ranges: [[90, 400]] },
      { rubricId: "r-b", ranges: [[40, 40], [-5, 10]] },
    ]);
    expect(segments).toEqual([
      { start: 0, end: 10, rubricIds: ["r-b"] },
      { start: 10, end: 90, rubricIds: [] },
      { start: 90, end: 100, rubricIds: ["r-a"] },
    ]);
  });

  it("deduplicates repeated coverage by the same rubric", () => {
    const segments = tile([
      { rubricId: "r-a", ranges: [[0, 50], [10, 60]] },
    ]);
    for (const segment of segments) {
      expect(new Set(segment.rubricIds).size).toBe(segment.rubricIds.length);
    }
  });
});
