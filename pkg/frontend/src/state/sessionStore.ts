/**
 * Holds one grading session's client-side state.
 *
 * The service is the source of truth: every mutation round-trips through
 * POST /sessions/{id}/actions and the returned session view replaces the
 * local one wholesale, so the store can never drift from the event log.
 * Failed actions keep the last good view and surface the service's error
 * message instead.
 */

import type {
  FinalizeResult,
  GraderAction,
  SessionView,
} from "../api/types";

export type SessionPhase =
  | { status: "idle" }
  | { status: "loading"; essayId: string }
  | {
      status: "ready";
      view: SessionView;
      busy: boolean;
      lastError: string | null;
      lastExport: FinalizeResult | null;
    }
  | { status: "failed"; essayId: string; message: string };

export type SessionListener = () => void;

/** The slice of the API client the store needs (injectable for tests). */
export interface SessionGateway {
  openSession(essayId: string, graderId: string): Promise<SessionView>;
  getSession(essayId: string): Promise<SessionView>;
  applyAction(
    essayId: string,
    graderId: string,
    action: GraderAction,
  ): Promise<SessionView>;
  finalize(essayId: string, graderId: string): Promise<FinalizeResult>;
}

export class SessionStore {
  readonly graderId: string;

  private readonly gateway: SessionGateway;
  private readonly listeners = new Set<SessionListener>();
  private phase: SessionPhase = { status: "idle" };
  private generation = 0;

  constructor(gateway: SessionGateway, graderId: string) {
    this.gateway = gateway;
    this.graderId = graderId;
  }

  snapshot(): SessionPhase {
    return this.phase;
  }

  subscribe(listener: SessionListener): () => void {
    this.listeners.add(listener);
    return () => {
      this.listeners.delete(listener);
    };
  }

  /** Open (or resume) the session for one essay. */
  async load(essayId: string): Promise<void> {
    const generation = ++this.generation;
    this.setPhase({ status: "loading", essayId });
    try {
      const view = await this.gateway.openSession(essayId, this.graderId);
      if (generation !== this.generation) {
        return; // a newer load superseded this one
      }
      this.setPhase({
        status: "ready",
        view,
        busy: false,
        lastError: null,
        lastExport: null,
      });
    } catch (error) {
      if (generation !== this.generation) {
        return;
      }
      this.setPhase({
        status: "failed",
        essayId,
        message: messageOf(error),
      });
    }
  }

  /**
   * Apply one grader action and swap in the returned view.  Resolves to
   * false (with `lastError` set) when the session is not ready, another
   * action is still in flight, or the service rejected the action.
   */
  async dispatch(action: GraderAction): Promise<boolean> {
    const phase = this.phase;
    if (phase.status !== "ready") {
      return false;
    }
    if (phase.busy) {
      this.setPhase({ ...phase, lastError: "another action is in flight" });
      return false;
    }
    this.setPhase({ ...phase, busy: true, lastError: null });
    try {
      const view = await this.gateway.applyAction(
        phase.view.essay_id,
        this.graderId,
        action,
      );
      this.patchReady({ view, busy: false, lastError: null });
      return true;
    } catch (error) {
      this.patchReady({
        busy: false,
        lastError: `${action.action}: ${messageOf(error)}`,
      });
      return false;
    }
  }

  /** Close, validate, and export; the session view refreshes afterwards. */
  async finalize(): Promise<FinalizeResult | null> {
    const phase = this.phase;
    if (phase.status !== "ready" || phase.busy) {
      return null;
    }
    this.setPhase({ ...phase, busy: true, lastError: null });
    try {
      const result = await this.gateway.finalize(
        phase.view.essay_id,
        this.graderId,
      );
      const view = await this.gateway.getSession(phase.view.essay_id);
      this.patchReady({
        view,
        busy: false,
        lastError: null,
        lastExport: result,
      });
      return result;
    } catch (error) {
      this.patchReady({
        busy: false,
        lastError: `finalize: ${messageOf(error)}`,
      });
      return null;
    }
  }

  private patchReady(
    patch: Partial<Extract<SessionPhase, { status: "ready" }>>,
  ): void {
    if (this.phase.status !== "ready") {
      return;
    }
    this.setPhase({ ...this.phase, ...patch });
  }

  private setPhase(phase: SessionPhase): void {
    this.phase = phase;
    for (const listener of [...this.listeners]) {
      listener();
    }
  }
}

function messageOf(error: unknown): string {
  if (error instanceof Error) {
    return error.message;
  }
  return String(error);
}
