/**
 * Pure renderers: state in, lightweight vnodes out. No DOM access here,
 * which keeps them testable anywhere; mount() realizes vnodes in the
 * browser.
 */

import type { Importance, SensorReading } from "./types.js";
import type { DefectRow, PanelState } from "./store.js";

export interface VNode {
  tag: string;
  attrs?: Record<string, string>;
  children?: (VNode | string)[];
}

export function el(
  tag: string,
  attrs?: Record<string, string>,
  ...children: (VNode | string)[]
): VNode {
  return { tag, attrs, children };
}

/** Styling is a pure function of importance: Alert never renders as Warning. */
export function importanceClass(importance: Importance): string {
  return importance === "Alert" ? "sev-alert" : "sev-warning";
}

export function fmtTime(epochMs: number): string {
  return new Date(epochMs).toISOString().replace("T", " ").slice(0, 19);
}

export function renderDefectRow(row: DefectRow): VNode {
  const r = row.record;
  const cells: VNode[] = [
    el("td", { class: "t" }, fmtTime(r.timestamp)),
    el("td", {}, r.sensor_id),
    el("td", {}, `${r.value} ${r.unit}`),
    el("td", {}, el("span", { class: `pill ${importanceClass(r.importance)}` },
      r.importance)),
    el("td", {}, r.fault_type),
  ];
  if (r.shipment_id !== null) {
    const loc = r.location ? `${r.location.lat.toFixed(4)}, ${r.location.lon.toFixed(4)}` : "";
    cells.push(el("td", {}, r.tilt_status ?? ""));
    cells.push(el("td", { class: "t" }, loc));
  }
  const attrs: Record<string, string> = {
    class: `defect-row ${importanceClass(r.importance)}`,
    "data-record-id": r.record_id,
  };
  if (row.blockNumber !== null) attrs["data-block"] = String(row.blockNumber);
  return el("tr", attrs, ...cells);
}

const BASE_HEADERS = ["time", "sensor", "value", "importance", "fault"];
const SHIPMENT_HEADERS = [...BASE_HEADERS, "tilt", "location"];

export function renderDefectPanel(panel: PanelState): VNode {
  const headers =
    panel.kind === "ShipmentDefects" ? SHIPMENT_HEADERS : BASE_HEADERS;
  const body: VNode[] = panel.rows.map(renderDefectRow);
  const table =
    panel.rows.length === 0
      ? el("p", { class: "empty" }, "no defects recorded")
      : el(
          "table",
          { class: "defects" },
          el("thead", {}, el("tr", {}, ...headers.map((h) => el("th", {}, h)))),
          el("tbody", {}, ...body),
        );
  const badges: VNode[] = [];
  if (panel.stale)
    badges.push(el("span", { class: "badge stale" }, `stale: ${panel.error}`));
  return el(
    "section",
    { class: "panel", "data-panel": `${panel.kind}:${panel.target}` },
    el("h2", {}, panelTitle(panel), ...badges),
    table,
  );
}

function panelTitle(panel: PanelState): string {
  if (panel.kind === "ShipmentDefects") return `shipment ${panel.target}`;
  return `asset ${panel.target}`;
}

export function renderTelemetryTiles(
  readings: Map<string, SensorReading>,
): VNode {
  const tiles = [...readings.entries()]
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([sensorId, r]) =>
      el(
        "div",
        { class: "tile", "data-sensor": sensorId },
        el("div", { class: "tile-name" }, sensorId),
        el("div", { class: "tile-value" }, `${r.value.toFixed(2)} ${r.unit}`),
        el("div", { class: "tile-time t" }, fmtTime(r.timestamp)),
      ),
    );
  if (tiles.length === 0)
    return el("p", { class: "empty" }, "no telemetry yet");
  return el("div", { class: "tiles" }, ...tiles);
}

export function renderStatusChip(
  running: boolean | null,
  streamConnected: boolean,
): VNode {
  const label =
    running === null ? "UNKNOWN" : running ? "RUNNING" : "STOPPED";
  return el(
    "span",
    { class: `chip ${running ? "chip-run" : "chip-stop"}` },
    `${label}${streamConnected ? "" : " (stream offline)"}`,
  );
}

export function mount(vnode: VNode | string, doc: Document): Node {
  if (typeof vnode === "string") return doc.createTextNode(vnode);
  const node = doc.createElement(vnode.tag);
  for (const [k, v] of Object.entries(vnode.attrs ?? {}))
    node.setAttribute(k, v);
  for (const child of vnode.children ?? []) node.appendChild(mount(child, doc));
  return node;
}

/** Depth-first search over vnodes; tests use it to audit rendered rows. */
export function collect(
  vnode: VNode | string,
  pred: (v: VNode) => boolean,
  out: VNode[] = [],
): VNode[] {
  if (typeof vnode === "string") return out;
  if (pred(vnode)) out.push(vnode);
  for (const child of vnode.children ?? []) collect(child, pred, out);
  return out;
}
