/** Single state store behind the console.
 *
 * The pending queue mirrors the server: seeded by a list fetch, then
 * updated live from the alert stream. A dropped stream reconnects with
 * exponential backoff and reconciles with a fresh list fetch, so the view
 * is eventually consistent within one reconnect cycle.
 */

import { CaseClient, VerdictConflict } from "./api.js";
import type { AlertEvent, CaseRecord, MetricsSummary } from "./types.js";

export interface QueueState {
  pending: CaseRecord[];
  resolvedThisSession: CaseRecord[];
  selectedId: string | null;
  submitting: boolean;
  errorBanner: string | null;
  connected: boolean;
  summary: MetricsSummary | null;
}

const BACKOFF_BASE_MS = 500;
const BACKOFF_MAX_MS = 10_000;

function sortQueue(records: CaseRecord[]): CaseRecord[] {
  return [...records].sort(
    (a, b) => a.opened_at - b.opened_at || a.case_id.localeCompare(b.case_id),
  );
}

export class CaseQueueStore {
  readonly state: QueueState = {
    pending: [],
    resolvedThisSession: [],
    selectedId: null,
    submitting: false,
    errorBanner: null,
    connected: false,
    summary: null,
  };

  private listeners = new Set<() => void>();
  private abort: AbortController | null = null;
  private attempts = 0;
  private stopped = false;

  constructor(
    private client: CaseClient,
    private analystId: string,
    private sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
  ) {}

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  // -- lifecycle -----------------------------------------------------------

  async start(): Promise<void> {
    this.stopped = false;
    this.state.summary = await this.client.metricsSummary().catch(() => null);
    await this.reconcile();
    void this.streamLoop();
  }

  stop(): void {
    this.stopped = true;
    this.abort?.abort();
  }

  private async streamLoop(): Promise<void> {
    while (!this.stopped) {
      this.abort = new AbortController();
      const connectedAt = Date.now();
      try {
        this.state.connected = true;
        this.emit();
        await this.client.readAlertStream((event) => this.applyEvent(event), this.abort.signal);
      } catch {
        // fall through to reconnect
      }
      this.state.connected = false;
      this.emit();
      if (this.stopped) return;
      if (Date.now() - connectedAt > 5_000) {
        this.attempts = 0; // the connection was stable: restart the backoff
      }
      this.attempts += 1;
      const delay = Math.min(BACKOFF_BASE_MS * 2 ** (this.attempts - 1), BACKOFF_MAX_MS);
      await this.sleep(delay);
      if (this.stopped) return;
      await this.reconcile(); // the stream may have gapped while down
    }
  }

  // -- state transitions ------------------------------------------------------

  async reconcile(): Promise<void> {
    try {
      const pending = await this.client.listCases("pending_review");
      this.state.pending = sortQueue(pending);
      this.state.errorBanner = null;
    } catch (err) {
      this.state.errorBanner = `queue refresh failed: ${String(err)}`;
    }
    this.emit();
  }

  applyEvent(event: AlertEvent): void {
    if (event.kind === "case_opened") {
      if (!this.state.pending.some((c) => c.case_id === event.record.case_id)) {
        this.state.pending = sortQueue([...this.state.pending, event.record]);
      }
    } else {
      this.removePending(event.record.case_id);
      if (!this.state.resolvedThisSession.some((c) => c.case_id === event.record.case_id)) {
        this.state.resolvedThisSession = [event.record, ...this.state.resolvedThisSession];
      }
    }
    this.emit();
  }

  private removePending(caseId: string): void {
    this.state.pending = this.state.pending.filter((c) => c.case_id !== caseId);
    if (this.state.selectedId === caseId) {
      this.state.selectedId = null;
    }
  }

  select(caseId: string | null): void {
    this.state.selectedId = caseId;
    this.emit();
  }

  selected(): CaseRecord | null {
    return this.state.pending.find((c) => c.case_id === this.state.selectedId) ?? null;
  }

  /** Submit a verdict; on conflict the case is refreshed and cleared. */
  async submitVerdict(caseId: string, decision: "approve" | "reject", reason: string): Promise<void> {
    this.state.submitting = true;
    this.state.errorBanner = null;
    this.emit();
    try {
      const resolved = await this.client.submitVerdict(caseId, decision, reason, this.analystId);
      this.removePending(caseId);
      if (!this.state.resolvedThisSession.some((c) => c.case_id === resolved.case_id)) {
        this.state.resolvedThisSession = [resolved, ...this.state.resolvedThisSession];
      }
    } catch (err) {
      if (err instanceof VerdictConflict) {
        this.state.errorBanner = "already resolved by another analyst";
        const fresh = await this.client.getCase(caseId).catch(() => null);
        this.removePending(caseId);
        if (fresh && fresh.status === "resolved") {
          this.state.resolvedThisSession = [fresh, ...this.state.resolvedThisSession];
        }
      } else {
        this.state.errorBanner = `verdict failed: ${String(err)}`; // form state retained
      }
    } finally {
      this.state.submitting = false;
      this.emit();
    }
  }

  /** Band for a risk value using the server-echoed thresholds. */
  bandOf(risk: number): "approve" | "review" | "reject" {
    const bands = this.state.summary?.config.bands;
    if (!bands) return "review";
    if (risk < bands.approve_below) return "approve";
    if (risk > bands.reject_above) return "reject";
    return "review";
  }
}
