// Typed client for the advisor service. The server is the source of truth:
// every mutation returns the state the UI renders next.

export interface BoundaryRecord {
  threshold: number;
  rows: Array<[number, number]>;
  q?: number;
  rule?: string;
  origin_guard?: boolean;
}

export interface HistoryEntry {
  step: number;
  direction: "E" | "N";
  ended: boolean;
  advice: string;
  action: string;
  rel_state: [number, number];
  abs_position: [number, number];
  accumulated_cost: number;
  relays: number;
}

export interface SessionView {
  id: string;
  params: Record<string, number | string>;
  boundary: BoundaryRecord;
  rel_state: [number, number];
  abs_position: [number, number];
  accumulated_cost: number;
  relays: number;
  objective: number;
  ended: boolean;
  history: HistoryEntry[];
}

export interface StepResponse {
  advice: "place" | "continue" | "source-placed";
  action: string;
  rel_state: [number, number];
  abs_position: [number, number];
  accumulated_cost: number;
  relays: number;
  objective: number;
  ended: boolean;
  step: number;
}

export interface SessionRequest {
  p: number;
  q: number;
  lambda: number;
  eta?: number;
  p_m?: number;
  gamma?: number;
  policy: "optimal" | "heuristic" | "custom";
  r_th?: number;
  boundary?: BoundaryRecord;
}

export interface StepRequest {
  direction: "E" | "N";
  ended: boolean;
  override?: "place" | "skip";
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field?: string,
  ) {
    super(message);
  }
}

async function decode<T>(resp: Response): Promise<T> {
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, body.code ?? "error", body.message ?? resp.statusText, body.field);
  }
  return body as T;
}

export class AdvisorClient {
  constructor(private readonly base: string = "") {}

  createSession(req: SessionRequest): Promise<SessionView> {
    return this.post("/sessions", req);
  }

  step(id: string, req: StepRequest): Promise<StepResponse> {
    return this.post(`/sessions/${id}/steps`, req);
  }

  async getSession(id: string): Promise<SessionView> {
    return decode(await fetch(`${this.base}/sessions/${id}`));
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    return decode(
      await fetch(`${this.base}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }
}
