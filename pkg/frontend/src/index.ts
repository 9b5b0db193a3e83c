/** Public surface of the grading UI package. */

export { GradingApiClient, ApiError, isApiError } from "./api/client";
export type { ClientOptions, FetchLike } from "./api/client";
export * from "./api/types";
export { SessionStore } from "./state/sessionStore";
export type {
  SessionGateway,
  SessionListener,
  SessionPhase,
} from "./state/sessionStore";
export { GradingApp } from "./app";
export type { AppGateway } from "./app";
export { EssayPanel, computeHighlightSegments } from "./ui/essayPanel";
export type {
  EssayPanelDelegate,
  HighlightSegment,
  RubricAnchorRanges,
} from "./ui/essayPanel";
export { RubricPanel } from "./ui/rubricPanel";
export type { RubricPanelDelegate } from "./ui/rubricPanel";
export { DiffPanel, countSegments } from "./ui/diffPanel";
export type { SegmentCounts } from "./ui/diffPanel";
export * from "./ui/tones";
