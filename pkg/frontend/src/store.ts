/**
 * Single UI store. Every defect row enters through exactly two doors —
 * loadPanel (a query response) and applyDefectEvent (a committed-defect
 * stream event) — so each rendered row is traceable to one API response
 * object. The store never fabricates or mutates record contents.
 */

import type {
  CommittedDefect,
  DefectRecord,
  SensorReading,
  SimStatus,
} from "./types.js";

export type PanelKind =
  | "ShipmentDefects"
  | "AssetDefects"
  | "LiveTelemetry"
  | "ChainStatus";

export interface DefectRow {
  record: DefectRecord;
  blockNumber: number | null;
}

export interface PanelState {
  kind: PanelKind;
  target: string; // shipment id or asset label
  rows: DefectRow[]; // newest first
  stale: boolean;
  error: string | null;
}

export function assetLabel(sensorId: string): string {
  return sensorId.split("_", 1)[0];
}

function rowOrder(a: DefectRow, b: DefectRow): number {
  if (a.record.timestamp !== b.record.timestamp)
    return b.record.timestamp - a.record.timestamp;
  return a.record.record_id < b.record.record_id ? 1 : -1;
}

export class Store {
  panels = new Map<string, PanelState>();
  telemetry = new Map<string, SensorReading>();
  streamConnected = false;
  simStatus: SimStatus | null = null;
  onChange: (() => void) | null = null;

  private emit(): void {
    this.onChange?.();
  }

  addPanel(key: string, kind: PanelKind, target: string): PanelState {
    const panel: PanelState = { kind, target, rows: [], stale: false, error: null };
    this.panels.set(key, panel);
    return panel;
  }

  /** Replace a panel's rows with a query response. */
  loadPanel(key: string, records: DefectRecord[]): void {
    const panel = this.panels.get(key);
    if (!panel) return;
    panel.rows = records
      .map((record) => ({ record, blockNumber: null }))
      .sort(rowOrder);
    panel.stale = false;
    panel.error = null;
    this.emit();
  }

  /** A query failed: keep the rows, but say so. */
  markStale(key: string, error: string): void {
    const panel = this.panels.get(key);
    if (!panel) return;
    panel.stale = true;
    panel.error = error;
    this.emit();
  }

  private panelAccepts(panel: PanelState, record: DefectRecord): boolean {
    if (panel.kind === "ShipmentDefects")
      return record.shipment_id === panel.target;
    if (panel.kind === "AssetDefects")
      return assetLabel(record.sensor_id) === panel.target;
    return false;
  }

  /** Route one committed-defect stream event to every matching panel. */
  applyDefectEvent(defect: CommittedDefect): void {
    let touched = false;
    for (const panel of this.panels.values()) {
      if (!this.panelAccepts(panel, defect)) continue;
      const existing = panel.rows.findIndex(
        (row) => row.record.record_id === defect.record_id,
      );
      const row: DefectRow = { record: defect, blockNumber: defect.block_number };
      if (existing >= 0) panel.rows[existing] = row;
      else panel.rows.push(row);
      panel.rows.sort(rowOrder);
      touched = true;
    }
    if (touched) this.emit();
  }

  applyTelemetry(reading: SensorReading): void {
    this.telemetry.set(reading.sensor_id, reading);
    this.emit();
  }

  setStream(connected: boolean): void {
    if (this.streamConnected !== connected) {
      this.streamConnected = connected;
      this.emit();
    }
  }

  setSimStatus(status: SimStatus): void {
    this.simStatus = status;
    this.emit();
  }
}
