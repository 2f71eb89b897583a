/**
 * Browser wiring: login -> panels + stream + controls.
 *
 * The dashboard renders only data received from the API: panel rows come
 * from queries and committed-defect events; it computes no defect logic
 * of its own and keeps no secret beyond the session token.
 */

import { ApiClient, ApiError } from "./api.js";
import { StreamClient } from "./sse.js";
import { Store, assetLabel } from "./store.js";
import {
  mount,
  renderDefectPanel,
  renderStatusChip,
  renderTelemetryTiles,
} from "./render.js";
import type { StreamEvent } from "./types.js";

const ASSETS = ["R01", "R02", "R03", "R04", "R05",
  "Conv1", "Conv2", "Conv3", "Conv4", "Container1"];
const DEFAULT_SHIPMENT = "SHIP-001";

const store = new Store();
let api: ApiClient | null = null;
let stream: StreamClient | null = null;
let selectedPanel = `shipment:${DEFAULT_SHIPMENT}`;

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function replaceChildren(target: HTMLElement, ...nodes: Node[]): void {
  target.innerHTML = "";
  for (const n of nodes) target.appendChild(n);
}

async function refreshPanel(key: string): Promise<void> {
  if (!api) return;
  const panel = store.panels.get(key);
  if (!panel) return;
  try {
    const rows =
      panel.kind === "ShipmentDefects"
        ? await api.shipmentDefects(panel.target)
        : (
            await Promise.all(
              sensorsOf(panel.target).map((s) => api!.sensorDefects(s)),
            )
          ).flat();
    store.loadPanel(key, rows);
  } catch (err) {
    if (err instanceof ApiError && err.status === 401) return showLogin(true);
    store.markStale(key, err instanceof Error ? err.message : String(err));
  }
}

function sensorsOf(asset: string): string[] {
  // asset panels query each of the asset's sensors; ids follow
  // <AssetLabel>_<Kind>
  const kinds: Record<string, string[]> = {
    R01: ["Potentiometer", "LoadCell", "EStop"],
    R02: ["Potentiometer", "LoadCell", "EStop"],
    R03: ["Potentiometer", "LoadCell", "EStop"],
    R04: ["Potentiometer", "LoadCell", "EStop"],
    R05: ["PressureGauge", "EStop"],
    Conv1: ["Temperature", "Speed", "Vibration"],
    Conv2: ["Temperature", "Speed", "Vibration"],
    Conv3: ["Temperature", "Speed", "Vibration"],
    Conv4: ["Temperature", "Speed", "Vibration"],
    Container1: ["Temperature", "Humidity", "Gyroscope", "GpsLat", "GpsLon"],
  };
  return (kinds[asset] ?? []).map((kind) => `${asset}_${kind}`);
}

function onStreamEvent(event: StreamEvent): void {
  if (event.kind === "telemetry") store.applyTelemetry(event.data);
  else if (event.kind === "defect_committed") store.applyDefectEvent(event.data);
  else if (event.kind === "sim_status") store.setSimStatus(event.data);
}

function render(): void {
  const panel = store.panels.get(selectedPanel);
  if (panel)
    replaceChildren(byId("panel-root"), mount(renderDefectPanel(panel), document));
  replaceChildren(
    byId("telemetry-root"),
    mount(renderTelemetryTiles(store.telemetry), document),
  );
  replaceChildren(
    byId("status-chip"),
    mount(
      renderStatusChip(store.simStatus?.running ?? null, store.streamConnected),
      document,
    ),
  );
  const height = store.simStatus?.chain_height;
  byId("chain-height").textContent =
    height === undefined ? "" : `chain height ${height}`;
  const simEnabled = api !== null && store.simStatus !== null;
  (byId("btn-start") as HTMLButtonElement).disabled = !simEnabled;
  (byId("btn-stop") as HTMLButtonElement).disabled = !simEnabled;
  (byId("btn-inject") as HTMLButtonElement).disabled = !simEnabled;
}

function showLogin(expired = false): void {
  byId("login").style.display = "block";
  byId("app").style.display = "none";
  byId("login-error").textContent = expired
    ? "session expired; register again"
    : "";
  stream?.stop();
}

async function login(orgId: string, secret: string): Promise<void> {
  const base = (byId<HTMLInputElement>("api-url").value || "").replace(/\/$/, "");
  const client = new ApiClient(base);
  await client.register(orgId, secret);
  api = client;
  byId("login").style.display = "none";
  byId("app").style.display = "block";

  store.panels.clear();
  store.addPanel(`shipment:${DEFAULT_SHIPMENT}`, "ShipmentDefects", DEFAULT_SHIPMENT);
  for (const asset of ASSETS) store.addPanel(`asset:${asset}`, "AssetDefects", asset);
  buildTabs();
  await refreshPanel(selectedPanel);

  try {
    store.setSimStatus(await client.simStatus());
  } catch {
    // not a demo deployment; controls stay disabled
  }

  stream = new StreamClient(client.baseUrl, client.token!, {
    onEvent: onStreamEvent,
    onStatus: (up) => {
      store.setStream(up);
      // polling fallback: the reconnect loop fires every 2 s while the
      // stream is down, so refreshing here keeps panels current
      if (!up) void refreshPanel(selectedPanel);
    },
  });
  stream.start();
}

function buildTabs(): void {
  const tabs = byId("tabs");
  tabs.innerHTML = "";
  const keys = [`shipment:${DEFAULT_SHIPMENT}`, ...ASSETS.map((a) => `asset:${a}`)];
  for (const key of keys) {
    const btn = document.createElement("button");
    btn.className = `tab${key === selectedPanel ? " active" : ""}`;
    btn.textContent = key.split(":")[1];
    btn.onclick = () => {
      selectedPanel = key;
      buildTabs();
      void refreshPanel(key);
      render();
    };
    tabs.appendChild(btn);
  }
}

function wireControls(): void {
  byId("login-form").onsubmit = (ev) => {
    ev.preventDefault();
    const org = byId<HTMLInputElement>("org").value;
    const secret = byId<HTMLInputElement>("secret").value;
    byId<HTMLInputElement>("secret").value = ""; // never keep the secret
    login(org, secret).catch((err) => {
      byId("login-error").textContent =
        err instanceof ApiError && err.status === 401
          ? "registration refused"
          : `cannot reach API: ${err}`;
    });
  };
  byId("btn-start").onclick = () =>
    void api?.simStart().then((s) => store.setSimStatus(s));
  byId("btn-stop").onclick = () =>
    void api?.simStop().then((s) => store.setSimStatus(s));
  byId("btn-inject").onclick = () => {
    const sensor = byId<HTMLSelectElement>("inject-sensor").value;
    const mode = byId<HTMLSelectElement>("inject-mode").value as
      | "Press"
      | "SetValue"
      | "Offset";
    const magnitude = parseFloat(byId<HTMLInputElement>("inject-mag").value || "0");
    const duration = parseInt(byId<HTMLInputElement>("inject-dur").value || "10", 10);
    void api
      ?.simInject({ sensor_id: sensor, mode, magnitude, duration_ticks: duration })
      .then(() => {
        byId("inject-ack").textContent = `scheduled ${mode} on ${sensor}`;
        setTimeout(() => (byId("inject-ack").textContent = ""), 3000);
      })
      .catch((err) => (byId("inject-ack").textContent = String(err)));
  };
}

export function init(): void {
  store.onChange = render;
  wireControls();
  showLogin();
}

if (typeof document !== "undefined") init();

export { store, assetLabel };
