/**
 * Server-push stream reader built on fetch so it runs in the browser and
 * under node (tests drive the real stack with it). Reconnects with the
 * last-seen sequence number, so nothing is re-delivered after a drop.
 */

import type { StreamEvent } from "./types.js";

export interface StreamHandlers {
  onEvent: (event: StreamEvent) => void;
  onStatus?: (connected: boolean) => void;
}

export class StreamClient {
  lastSeq = 0;
  private stopped = false;
  private controller: AbortController | null = null;

  constructor(
    private baseUrl: string,
    private token: string,
    private handlers: StreamHandlers,
    private reconnectDelayMs = 2000,
  ) {}

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      try {
        await this.consume();
      } catch {
        // fall through to reconnect
      }
      this.handlers.onStatus?.(false);
      if (this.stopped) return;
      await new Promise((r) => setTimeout(r, this.reconnectDelayMs));
    }
  }

  private async consume(): Promise<void> {
    this.controller = new AbortController();
    const url =
      `${this.baseUrl}/api/stream?token=${encodeURIComponent(this.token)}` +
      `&last_seq=${this.lastSeq}`;
    const resp = await fetch(url, { signal: this.controller.signal });
    if (!resp.ok || !resp.body) throw new Error(`stream ${resp.status}`);
    this.handlers.onStatus?.(true);
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buf = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      buf += decoder.decode(value, { stream: true });
      let cut;
      while ((cut = buf.indexOf("\n\n")) >= 0) {
        const frame = buf.slice(0, cut);
        buf = buf.slice(cut + 2);
        const event = parseFrame(frame);
        if (event) {
          this.lastSeq = event.seq;
          this.handlers.onEvent(event);
        }
      }
    }
  }
}

export function parseFrame(frame: string): StreamEvent | null {
  if (frame.startsWith(":")) return null; // comment / keep-alive
  let seq = 0;
  let kind = "";
  let data: unknown = null;
  for (const line of frame.split("\n")) {
    if (line.startsWith("id: ")) seq = parseInt(line.slice(4), 10);
    else if (line.startsWith("event: ")) kind = line.slice(7);
    else if (line.startsWith("data: ")) data = JSON.parse(line.slice(6));
  }
  if (!kind || data === null) return null;
  return { seq, kind, data } as StreamEvent;
}
