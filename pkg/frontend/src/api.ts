/**
 * Ledger API client. Holds only the session token after registration —
 * the org secret is used once to register and never stored.
 */

import type {
  DefectRecord,
  RegistrationToken,
  SimStatus,
  VerifyReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  try {
    const body = await resp.json();
    return new ApiError(resp.status, body.code ?? "UNKNOWN", body.message ?? "");
  } catch {
    return new ApiError(resp.status, "UNKNOWN", resp.statusText);
  }
}

export class ApiClient {
  token: string | null = null;

  constructor(public baseUrl: string) {}

  async register(orgId: string, secret: string): Promise<RegistrationToken> {
    const resp = await fetch(`${this.baseUrl}/api/auth/register`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ org_id: orgId, secret }),
    });
    if (!resp.ok) throw await parseError(resp);
    const tok = (await resp.json()) as RegistrationToken;
    this.token = tok.token;
    return tok;
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`, {
      headers: { authorization: `Bearer ${this.token}` },
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: {
        "content-type": "application/json",
        authorization: `Bearer ${this.token}`,
      },
      body: body === undefined ? "{}" : JSON.stringify(body),
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  shipmentDefects(shipmentId: string): Promise<DefectRecord[]> {
    return this.get(`/api/defects/shipment/${encodeURIComponent(shipmentId)}`);
  }

  sensorDefects(sensorId: string): Promise<DefectRecord[]> {
    return this.get(`/api/defects/sensor/${encodeURIComponent(sensorId)}`);
  }

  verifyChain(): Promise<VerifyReport> {
    return this.get("/api/chain/verify");
  }

  simStatus(): Promise<SimStatus> {
    return this.get("/api/sim/status");
  }

  simStart(): Promise<SimStatus> {
    return this.post("/api/sim/start");
  }

  simStop(): Promise<SimStatus> {
    return this.post("/api/sim/stop");
  }

  simInject(spec: {
    sensor_id: string;
    mode: "Offset" | "SetValue" | "Press";
    magnitude?: number;
    duration_ticks?: number;
  }): Promise<{ scheduled: unknown }> {
    return this.post("/api/sim/inject", spec);
  }
}
