/**
 * Typed fetch wrapper over the grading service HTTP API.
 *
 * Non-2xx responses become `ApiError`s carrying the HTTP status and the
 * service's `error` message, so callers can branch on conflicts (409),
 * validation problems (400), and provider failures (502) without string
 * matching response bodies themselves.
 */

import type {
  AssignmentDoc,
  DraftRecord,
  FeedbackExportView,
  FinalContextView,
  FinalizeResult,
  GraderAction,
  HealthInfo,
  ImportReceipt,
  ReferenceSheetView,
  RosterEntry,
  ScoreSuggestionView,
  SessionView,
} from "./types";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

export function isApiError(value: unknown): value is ApiError {
  return value instanceof ApiError;
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export interface ClientOptions {
  baseUrl: string;
  /** Injectable for tests; defaults to the global fetch. */
  fetchFn?: FetchLike;
}

export class GradingApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(options: ClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/+$/, "");
    this.fetchFn = options.fetchFn ?? ((input, init) => fetch(input, init));
  }

  // -- corpus ----------------------------------------------------------

  health(): Promise<HealthInfo> {
    return this.request("GET", "/health");
  }

  addAssignment(doc: AssignmentDoc): Promise<{ assignment_id: string }> {
    return this.request("POST", "/assignments", doc);
  }

  referenceSheet(assignmentId: string): Promise<ReferenceSheetView> {
    return this.request("GET", `/assignments/${enc(assignmentId)}/reference`);
  }

  importDrafts(records: DraftRecord[]): Promise<ImportReceipt> {
    return this.request("POST", "/drafts/import", { records });
  }

  setRoster(entries: RosterEntry[]): Promise<{ entries: number }> {
    return this.request("POST", "/roster", { entries });
  }

  // -- sessions ----------------------------------------------------------

  openSession(essayId: string, graderId: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${enc(essayId)}/open`, {
      grader_id: graderId,
    });
  }

  getSession(essayId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${enc(essayId)}`);
  }

  applyAction(
    essayId: string,
    graderId: string,
    action: GraderAction,
  ): Promise<SessionView> {
    return this.request("POST", `/sessions/${enc(essayId)}/actions`, {
      grader_id: graderId,
      action: action.action,
      params: action.params,
    });
  }

  closeSession(essayId: string, graderId: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${enc(essayId)}/close`, {
      grader_id: graderId,
    });
  }

  finalize(essayId: string, graderId: string): Promise<FinalizeResult> {
    return this.request("POST", `/sessions/${enc(essayId)}/finalize`, {
      grader_id: graderId,
    });
  }

  // -- context & exports --------------------------------------------------

  finalContext(essayId: string): Promise<FinalContextView> {
    return this.request("GET", `/essays/${enc(essayId)}/final-context`);
  }

  scoreSuggestion(essayId: string): Promise<ScoreSuggestionView> {
    return this.request("GET", `/essays/${enc(essayId)}/score-suggestion`);
  }

  getExport(essayId: string): Promise<FeedbackExportView> {
    return this.request("GET", `/exports/${enc(essayId)}`);
  }

  // -- plumbing ------------------------------------------------------------

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const text = await response.text();
    let payload: unknown = null;
    if (text) {
      try {
        payload = JSON.parse(text);
      } catch {
        payload = null;
      }
    }
    if (!response.ok) {
      throw new ApiError(response.status, errorMessage(payload, response, text));
    }
    return payload as T;
  }
}

function errorMessage(
  payload: unknown,
  response: Response,
  rawText: string,
): string {
  if (payload !== null && typeof payload === "object" && "error" in payload) {
    return String((payload as { error: unknown }).error);
  }
  return rawText || response.statusText || `HTTP ${response.status}`;
}

function enc(part: string): string {
  return encodeURIComponent(part);
}
