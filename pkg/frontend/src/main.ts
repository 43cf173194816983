// Wiring: a session form, step buttons (East/North with an "ends here"
// toggle), override controls, the canvas board, and log export/replay.
// The UI never simulates the policy; every click round-trips the server.

import { AdvisorClient, ApiError } from "./api.js";
import type { StepRequest } from "./api.js";
import { renderBoard } from "./board.js";
import { applyResponse, exportLog, initialView, parseLog, replayLog } from "./state.js";
import type { BoardView } from "./state.js";

const client = new AdvisorClient("");

let view: BoardView | null = null;
let busy = false;

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const canvas = $("board") as unknown as HTMLCanvasElement;
const adviceBadge = $("advice");
const statusLine = $("status");

function setStatus(text: string, isError = false): void {
  statusLine.textContent = text;
  statusLine.className = isError ? "status error" : "status";
}

function refresh(): void {
  if (!view) return;
  renderBoard(canvas, view);
  $("cost").textContent = view.accumulatedCost.toFixed(4);
  $("relays").textContent = String(view.relays);
  $("objective").textContent = view.objective.toFixed(4);
  $("rel-state").textContent = `(${view.relState[0]}, ${view.relState[1]})`;
  $("abs-pos").textContent = `(${view.absPosition[0]}, ${view.absPosition[1]})`;
  const advice = view.ended ? "corridor ended" : view.lastAdvice || "step to begin";
  adviceBadge.textContent = advice;
  adviceBadge.className = `badge ${view.ended ? "ended" : view.lastAdvice || "idle"}`;
  const disable = view.ended || busy;
  for (const id of ["east", "north", "override-place", "override-skip"]) {
    ($(id) as HTMLButtonElement).disabled = disable;
  }
}

async function guard(fn: () => Promise<void>): Promise<void> {
  if (busy) return;
  busy = true;
  try {
    await fn();
    setStatus("ok");
  } catch (err) {
    if (err instanceof ApiError) {
      setStatus(`${err.code}${err.field ? ` (${err.field})` : ""}: ${err.message}`, true);
    } else {
      setStatus(String(err), true);
    }
  } finally {
    busy = false;
    refresh();
  }
}

async function startSession(): Promise<void> {
  const params: Record<string, unknown> = {
    p: Number(($("p") as HTMLInputElement).value),
    q: Number(($("q") as HTMLInputElement).value),
    lambda: Number(($("lambda") as HTMLInputElement).value),
    eta: Number(($("eta") as HTMLInputElement).value),
    policy: ($("policy") as HTMLSelectElement).value,
  };
  if (params.policy === "heuristic") {
    params.r_th = Number(($("r-th") as HTMLInputElement).value);
  }
  const session = await client.createSession(params as never);
  view = initialView(session);
}

async function sendStep(req: StepRequest): Promise<void> {
  if (!view) throw new Error("no active session");
  const resp = await client.step(view.sessionId, req);
  view = applyResponse(view, req, resp);
}

function stepRequest(direction: "E" | "N", override?: "place" | "skip"): StepRequest {
  const ends = ($("ends") as HTMLInputElement).checked;
  const req: StepRequest = { direction, ended: ends };
  if (override && !ends) req.override = override;
  ($("ends") as HTMLInputElement).checked = false;
  return req;
}

function download(name: string, text: string): void {
  const blob = new Blob([text], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = name;
  a.click();
  URL.revokeObjectURL(a.href);
}

export function bind(): void {
  $("start").addEventListener("click", () => guard(startSession));
  $("east").addEventListener("click", () => guard(() => sendStep(stepRequest("E"))));
  $("north").addEventListener("click", () => guard(() => sendStep(stepRequest("N"))));
  $("override-place").addEventListener("click", () =>
    guard(() => sendStep(stepRequest(lastDirection(), "place"))),
  );
  $("override-skip").addEventListener("click", () =>
    guard(() => sendStep(stepRequest(lastDirection(), "skip"))),
  );
  $("export").addEventListener("click", () => {
    if (view) download(`relaywalk-${view.sessionId}.json`, exportLog(view));
  });
  $("replay").addEventListener("click", () =>
    guard(async () => {
      const text = ($("log-text") as HTMLTextAreaElement).value;
      view = await replayLog(client, parseLog(text));
    }),
  );
  $("policy").addEventListener("change", () => {
    $("r-th-row").style.display =
      ($("policy") as HTMLSelectElement).value === "heuristic" ? "" : "none";
  });
  refresh();
}

function lastDirection(): "E" | "N" {
  return ($("override-dir") as HTMLSelectElement).value === "N" ? "N" : "E";
}

if (typeof document !== "undefined" && document.getElementById("board")) {
  bind();
}
