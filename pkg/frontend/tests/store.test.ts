import { describe, expect, it } from "vitest";

import { Store, assetLabel } from "../src/store.js";
import { collect, renderDefectPanel } from "../src/render.js";
import type { CommittedDefect, DefectRecord } from "../src/types.js";

function record(n: number, overrides: Partial<DefectRecord> = {}): DefectRecord {
  return {
    record_id: `00000000-0000-5000-8000-${String(n).padStart(12, "0")}`,
    sensor_id: "R02_LoadCell",
    fault_type: "OverPressure",
    value: 900 + n,
    unit: "N",
    importance: "Warning",
    timestamp: 1700000000000 + n * 1000,
    shipment_id: null,
    location: null,
    tilt_status: null,
    ...overrides,
  };
}

function committed(n: number, overrides: Partial<DefectRecord> = {}): CommittedDefect {
  return { ...record(n, overrides), block_number: n };
}

describe("store routing", () => {
  it("routes defect events to the matching asset panel only", () => {
    const store = new Store();
    store.addPanel("asset:R02", "AssetDefects", "R02");
    store.addPanel("asset:R03", "AssetDefects", "R03");
    store.applyDefectEvent(committed(1, { sensor_id: "R02_LoadCell" }));
    expect(store.panels.get("asset:R02")!.rows).toHaveLength(1);
    expect(store.panels.get("asset:R03")!.rows).toHaveLength(0);
  });

  it("routes shipment records by shipment id", () => {
    const store = new Store();
    store.addPanel("shipment:SHIP-001", "ShipmentDefects", "SHIP-001");
    store.applyDefectEvent(
      committed(2, {
        sensor_id: "Container1_Gyroscope",
        shipment_id: "SHIP-001",
        location: { lat: 34, lon: -81 },
        tilt_status: "TILTED",
      }),
    );
    store.applyDefectEvent(committed(3, { sensor_id: "R02_LoadCell" }));
    expect(store.panels.get("shipment:SHIP-001")!.rows).toHaveLength(1);
  });

  it("keeps rows newest-first", () => {
    const store = new Store();
    store.addPanel("asset:R02", "AssetDefects", "R02");
    store.loadPanel("asset:R02", [record(1), record(5), record(3)]);
    const ts = store.panels.get("asset:R02")!.rows.map((r) => r.record.timestamp);
    expect(ts).toEqual([...ts].sort((a, b) => b - a));
    store.applyDefectEvent(committed(9));
    expect(store.panels.get("asset:R02")!.rows[0].record.value).toBe(909);
  });

  it("dedups stream events against fetched rows by record id", () => {
    const store = new Store();
    store.addPanel("asset:R02", "AssetDefects", "R02");
    store.loadPanel("asset:R02", [record(4)]);
    store.applyDefectEvent(committed(4));
    const rows = store.panels.get("asset:R02")!.rows;
    expect(rows).toHaveLength(1);
    expect(rows[0].blockNumber).toBe(4); // stream copy carries the block
  });

  it("marks panels stale on fetch errors but keeps the rows", () => {
    const store = new Store();
    store.addPanel("asset:R02", "AssetDefects", "R02");
    store.loadPanel("asset:R02", [record(1)]);
    store.markStale("asset:R02", "boom");
    const panel = store.panels.get("asset:R02")!;
    expect(panel.stale).toBe(true);
    expect(panel.rows).toHaveLength(1);
  });

  it("derives asset labels from sensor ids", () => {
    expect(assetLabel("Conv3_Temperature")).toBe("Conv3");
    expect(assetLabel("ControlPanel_EStop")).toBe("ControlPanel");
  });
});

describe("zero-trust rendering", () => {
  it("every rendered row maps 1:1 to a record that entered via the API doors", () => {
    const store = new Store();
    store.addPanel("asset:R02", "AssetDefects", "R02");
    store.addPanel("shipment:SHIP-001", "ShipmentDefects", "SHIP-001");

    // interception: these arrays stand in for recorded API responses
    const fromQueries = [record(1), record(2)];
    const fromStream = [
      committed(3),
      committed(4, {
        sensor_id: "Container1_Temperature",
        shipment_id: "SHIP-001",
        location: { lat: 34, lon: -81 },
        tilt_status: "UPRIGHT",
      }),
    ];
    store.loadPanel("asset:R02", fromQueries);
    for (const d of fromStream) store.applyDefectEvent(d);

    const received = new Set(
      [...fromQueries, ...fromStream].map((r) => r.record_id),
    );
    for (const panel of store.panels.values()) {
      const vnode = renderDefectPanel(panel);
      const rows = collect(vnode, (v) => v.attrs?.["data-record-id"] !== undefined);
      expect(rows).toHaveLength(panel.rows.length);
      for (const row of rows) {
        // no locally fabricated rows: every data-record-id was received
        expect(received.has(row.attrs!["data-record-id"])).toBe(true);
      }
    }
  });
});
