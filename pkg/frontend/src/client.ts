/** Thin HTTP client for the steering service plus the snapshot feed reader.
 *
 * The feed endpoint pushes one JSON object per line; `streamSnapshots` turns
 * the body into ServerEvents and keeps at most one in-flight request.
 */

import type { ServerEvent, Snapshot } from "./types.js";

export interface CreateSessionRequest {
  preset?: string;
  problem?: unknown;
  algorithm?: unknown;
  reference_point?: number[];
  budget?: number;
  interaction_period?: number;
  seed?: number;
}

async function asJson(response: Response): Promise<any> {
  const body = await response.json();
  if (!response.ok) {
    throw new Error(body?.error ?? `HTTP ${response.status}`);
  }
  return body;
}

export class SteerClient {
  constructor(readonly base: string = "") {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  async createSession(request: CreateSessionRequest): Promise<{ session_id: string; state: any }> {
    const response = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    return asJson(response);
  }

  async advance(sessionId: string): Promise<Snapshot> {
    const response = await fetch(this.url(`/sessions/${sessionId}/advance`), { method: "POST" });
    return asJson(response);
  }

  async submitPreference(sessionId: string, z: number[]): Promise<any> {
    const response = await fetch(this.url(`/sessions/${sessionId}/preference`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ z }),
    });
    return asJson(response);
  }

  async getState(sessionId: string): Promise<any> {
    const response = await fetch(this.url(`/sessions/${sessionId}`));
    return asJson(response);
  }

  /** Consume the newline-delimited snapshot feed until it closes.
   *  Returns an abort function; events arrive through `onEvent`. */
  streamSnapshots(sessionId: string, onEvent: (ev: ServerEvent) => void): () => void {
    const controller = new AbortController();
    (async () => {
      onEvent({ kind: "connection", status: "connecting" });
      try {
        const response = await fetch(this.url(`/sessions/${sessionId}/stream`), {
          signal: controller.signal,
        });
        if (!response.ok || !response.body) {
          onEvent({ kind: "error", message: `stream failed: HTTP ${response.status}` });
          onEvent({ kind: "connection", status: "error" });
          return;
        }
        onEvent({ kind: "connection", status: "open" });
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          let idx;
          while ((idx = buffer.indexOf("\n")) >= 0) {
            const line = buffer.slice(0, idx).trim();
            buffer = buffer.slice(idx + 1);
            if (!line) continue;
            try {
              onEvent({ kind: "snapshot", snapshot: JSON.parse(line) as Snapshot });
            } catch {
              onEvent({ kind: "error", message: "malformed snapshot event" });
            }
          }
        }
        onEvent({ kind: "connection", status: "closed" });
      } catch (err) {
        if (!controller.signal.aborted) {
          onEvent({ kind: "error", message: String(err) });
          onEvent({ kind: "connection", status: "error" });
        }
      }
    })();
    return () => controller.abort();
  }
}
