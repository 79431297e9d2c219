/** Wire types mirroring the case-management API payloads (redacted). */

export interface Verdict {
  decision: "approve" | "reject";
  reason: string;
  analyst_id: string;
  decided_at: number;
}

export interface RiskEvidence {
  base_risk: number;
  final_risk: number;
  overrides: string[];
  band: "approve" | "review" | "reject";
  modality_scores: Record<string, unknown>;
}

export interface CaseRecord {
  case_id: string;
  submission_id: string;
  opened_at: number;
  status: "pending_review" | "resolved";
  evidence: {
    reasons?: string[];
    risk?: RiskEvidence;
    preprocess?: Record<string, unknown>;
    doc_template?: Record<string, unknown>;
    link?: Record<string, unknown>;
    degraded?: string[];
    annotations?: unknown[];
  };
  verdict?: Verdict;
}

export interface MetricsSummary {
  cases: { opened: number; resolved: number; pending: number };
  decision_mix: Record<string, number>;
  latency: Record<string, number>;
  audit_records: number;
  config: {
    bands: { approve_below: number; reject_above: number };
    weights: Record<string, number>;
    seed: number;
  };
}

export type AlertKind = "case_opened" | "case_resolved";

export interface AlertEvent {
  kind: AlertKind;
  record: CaseRecord;
}
