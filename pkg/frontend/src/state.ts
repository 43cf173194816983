// Board state is a fold over server responses: no client-side policy
// simulation, so replaying the same inputs always lands on the same view.

import type { BoundaryRecord, SessionRequest, SessionView, StepResponse, StepRequest } from "./api.js";

export interface BoardView {
  sessionId: string;
  boundary: BoundaryRecord;
  params: Record<string, number | string>;
  /** absolute positions walked, starting at the control centre */
  path: Array<[number, number]>;
  relayMarkers: Array<[number, number]>;
  relState: [number, number];
  absPosition: [number, number];
  accumulatedCost: number;
  relays: number;
  objective: number;
  ended: boolean;
  lastAdvice: string;
  /** inputs sent so far, exportable and replayable */
  log: StepRequest[];
}

export function initialView(session: SessionView): BoardView {
  return {
    sessionId: session.id,
    boundary: session.boundary,
    params: session.params,
    path: [[0, 0]],
    relayMarkers: [],
    relState: session.rel_state,
    absPosition: session.abs_position,
    accumulatedCost: session.accumulated_cost,
    relays: session.relays,
    objective: session.objective,
    ended: session.ended,
    lastAdvice: "",
    log: [],
  };
}

export function applyResponse(view: BoardView, sent: StepRequest, resp: StepResponse): BoardView {
  const relayMarkers =
    resp.relays > view.relays ? [...view.relayMarkers, resp.abs_position] : view.relayMarkers;
  return {
    ...view,
    path: [...view.path, resp.abs_position],
    relayMarkers,
    relState: resp.rel_state,
    absPosition: resp.abs_position,
    accumulatedCost: resp.accumulated_cost,
    relays: resp.relays,
    objective: resp.objective,
    ended: resp.ended,
    lastAdvice: resp.advice,
    log: [...view.log, sent],
  };
}

export function exportLog(view: BoardView): string {
  return JSON.stringify({ params: view.params, events: view.log }, null, 2);
}

export function parseLog(text: string): { params: Record<string, number | string>; events: StepRequest[] } {
  const parsed = JSON.parse(text);
  if (!Array.isArray(parsed.events)) {
    throw new Error("log has no events array");
  }
  return parsed;
}

/** Fields that decide whether two views are "the same deployment state". */
export function viewFingerprint(view: BoardView): string {
  return JSON.stringify({
    relState: view.relState,
    absPosition: view.absPosition,
    accumulatedCost: view.accumulatedCost,
    relays: view.relays,
    objective: view.objective,
    ended: view.ended,
    path: view.path,
    relayMarkers: view.relayMarkers,
  });
}

export interface SessionDriver {
  createSession(req: SessionRequest): Promise<SessionView>;
  step(id: string, req: StepRequest): Promise<StepResponse>;
}

/** Replay an exported log through a fresh session; same inputs, same view. */
export async function replayLog(
  client: SessionDriver,
  log: { params: Record<string, number | string>; events: StepRequest[] },
): Promise<BoardView> {
  const session = await client.createSession({ ...log.params } as unknown as SessionRequest);
  let view = initialView(session);
  for (const ev of log.events) {
    const resp = await client.step(session.id, ev);
    view = applyResponse(view, ev, resp);
  }
  return view;
}
