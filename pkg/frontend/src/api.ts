/** Typed client for the case-management HTTP/SSE API.
 *
 * The SSE reader is built on fetch + ReadableStream so the same code runs
 * in the browser and under node test runners, with reconnect left to the
 * caller (the store reconciles via a fresh list fetch after each drop).
 */

import type { AlertEvent, AlertKind, CaseRecord, MetricsSummary } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class VerdictConflict extends ApiError {
  constructor() {
    super(409, "case already resolved");
  }
}

export class CaseClient {
  constructor(private baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}/api/v1${path}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(this.url(path));
    if (!resp.ok) {
      throw new ApiError(resp.status, `GET ${path} -> ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  async listCases(status?: string, limit?: number): Promise<CaseRecord[]> {
    const params = new URLSearchParams();
    if (status) params.set("status", status);
    if (limit !== undefined) params.set("limit", String(limit));
    const query = params.size ? `?${params}` : "";
    const body = await this.getJson<{ cases: CaseRecord[] }>(`/cases${query}`);
    return body.cases;
  }

  async getCase(caseId: string): Promise<CaseRecord> {
    return this.getJson<CaseRecord>(`/cases/${caseId}`);
  }

  async metricsSummary(): Promise<MetricsSummary> {
    return this.getJson<MetricsSummary>("/metrics/summary");
  }

  /** POST a verdict. 409 maps to VerdictConflict so the UI can reconcile. */
  async submitVerdict(
    caseId: string,
    decision: "approve" | "reject",
    reason: string,
    analystId: string,
  ): Promise<CaseRecord> {
    const resp = await fetch(this.url(`/cases/${caseId}/verdict`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ decision, reason, analyst_id: analystId }),
    });
    if (resp.status === 409) {
      throw new VerdictConflict();
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, `verdict -> ${resp.status}`);
    }
    return (await resp.json()) as CaseRecord;
  }

  /**
   * Consume the alert stream until the signal aborts or the server drops.
   * Resolves on clean stream end; rejects on transport errors.
   */
  async readAlertStream(
    onEvent: (event: AlertEvent) => void,
    signal: AbortSignal,
  ): Promise<void> {
    const resp = await fetch(this.url("/alerts/stream"), {
      signal,
      headers: { accept: "text/event-stream" },
    });
    if (!resp.ok || !resp.body) {
      throw new ApiError(resp.status, "stream unavailable");
    }
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      buffer += decoder.decode(value, { stream: true });
      let split;
      while ((split = buffer.indexOf("\n\n")) >= 0) {
        const frame = buffer.slice(0, split);
        buffer = buffer.slice(split + 2);
        const event = parseSseFrame(frame);
        if (event) onEvent(event);
      }
    }
  }
}

export function parseSseFrame(frame: string): AlertEvent | null {
  let kind: string | null = null;
  const dataLines: string[] = [];
  for (const line of frame.split("\n")) {
    if (line.startsWith("event:")) kind = line.slice(6).trim();
    else if (line.startsWith("data:")) dataLines.push(line.slice(5).trim());
  }
  if (!kind || dataLines.length === 0) return null; // comments / keepalives
  if (kind !== "case_opened" && kind !== "case_resolved") return null;
  try {
    return { kind: kind as AlertKind, record: JSON.parse(dataLines.join("\n")) as CaseRecord };
  } catch {
    return null;
  }
}
