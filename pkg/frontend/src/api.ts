/** Typed client for the uu-audit triage API. The UI never computes groups
 * itself; every partition comes from the server. */

export interface ExplanationEntry {
  id: string;
  gamma: number;
  value: number;
}

export interface TriageRow {
  user_id: string;
  p: number;
  c: number;
  y_hat: number;
  group: number;
  uu_risk: boolean;
  explanation: ExplanationEntry[];
}

export interface RosterResponse {
  delta: number;
  counts: Record<string, number>;
  rows: TriageRow[];
}

export interface CoefficientRow {
  id: string;
  gamma: number;
  clipped: number;
  se: number;
  t: number;
  p: number;
}

export interface Characterization {
  target_mode: string;
  r2: number;
  coefficients: CoefficientRow[];
}

export interface InterventionMark {
  user_id: string;
  marked: boolean;
  note: string;
  author: string;
  marked_at: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = (await res.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep statusText
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  async fetchRoster(delta: number): Promise<RosterResponse> {
    const res = await fetch(`${this.baseUrl}/api/roster?delta=${delta}`);
    return expectJson<RosterResponse>(res);
  }

  async fetchCharacterization(): Promise<Characterization> {
    const res = await fetch(`${this.baseUrl}/api/characterization`);
    return expectJson<Characterization>(res);
  }

  async fetchInterventions(): Promise<Record<string, InterventionMark>> {
    const res = await fetch(`${this.baseUrl}/api/interventions`);
    return expectJson<Record<string, InterventionMark>>(res);
  }

  async postIntervention(
    userId: string,
    marked: boolean,
    note = "",
  ): Promise<InterventionMark> {
    const res = await fetch(`${this.baseUrl}/api/interventions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ user_id: userId, marked, note }),
    });
    return expectJson<InterventionMark>(res);
  }
}
