/** Wire types mirrored from the ledger API (UTF-8 JSON, epoch-ms timestamps). */

export type Importance = "Alert" | "Warning";

export interface DefectRecord {
  record_id: string;
  sensor_id: string;
  fault_type: string;
  value: number;
  unit: string;
  importance: Importance;
  timestamp: number;
  shipment_id: string | null;
  location: { lat: number; lon: number } | null;
  tilt_status: string | null;
}

export interface CommittedDefect extends DefectRecord {
  block_number: number;
}

export interface SensorReading {
  sensor_id: string;
  timestamp: number;
  value: number;
  unit: string;
}

export interface RegistrationToken {
  token: string;
  org_id: string;
  issued_at: number;
  expires_at: number;
}

export interface VerifyReport {
  ok: boolean;
  first_bad_block: number | null;
  reason: string;
}

export interface SimStatus {
  running: boolean;
  tick: number;
  sim_time_ms: number;
  sensors: number;
  chain_height: number;
}

export type StreamEvent =
  | { seq: number; kind: "telemetry"; data: SensorReading }
  | { seq: number; kind: "defect_committed"; data: CommittedDefect }
  | { seq: number; kind: "sim_status"; data: SimStatus };
