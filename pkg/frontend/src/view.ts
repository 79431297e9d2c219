/** DOM rendering: queue list, evidence panel, verdict form.
 *
 * Renders only fields present in the API payload; anything absent shows
 * as "unavailable", never as a fabricated zero. Band colors come from the
 * thresholds echoed by /metrics/summary, not from local constants.
 */

import type { CaseQueueStore } from "./store.js";
import type { CaseRecord } from "./types.js";

const BAND_COLORS: Record<string, string> = {
  approve: "#1a7f37",
  review: "#9a6700",
  reject: "#cf222e",
};

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function fmtRisk(value: unknown): string {
  return typeof value === "number" ? value.toFixed(4) : "unavailable";
}

export class ConsoleView {
  constructor(private root: HTMLElement, private store: CaseQueueStore) {
    store.subscribe(() => this.render());
  }

  render(): void {
    const { state } = this.store;
    this.root.replaceChildren();

    const header = el("header");
    header.append(el("h1", undefined, "Analyst console"));
    const status = el(
      "span",
      state.connected ? "status live" : "status down",
      state.connected ? "live" : "reconnecting...",
    );
    header.append(status);
    this.root.append(header);

    if (state.errorBanner) {
      this.root.append(el("div", "banner error", state.errorBanner));
    }

    const layout = el("main", "layout");
    layout.append(this.queuePanel(), this.evidencePanel(), this.resolvedPanel());
    this.root.append(layout);
  }

  private queuePanel(): HTMLElement {
    const { state } = this.store;
    const panel = el("section", "queue");
    panel.append(el("h2", undefined, `Pending review (${state.pending.length})`));
    const list = el("ul");
    for (const record of state.pending) {
      const item = el("li", record.case_id === state.selectedId ? "case selected" : "case");
      item.append(el("span", "case-id", record.case_id));
      item.append(el("span", "opened", `opened ${record.opened_at.toFixed(1)}s`));
      const risk = record.evidence.risk?.final_risk;
      if (typeof risk === "number") {
        const band = this.store.bandOf(risk);
        const chip = el("span", "chip", `${band} ${risk.toFixed(3)}`);
        chip.style.backgroundColor = BAND_COLORS[band];
        item.append(chip);
      }
      item.addEventListener("click", () => this.store.select(record.case_id));
      list.append(item);
    }
    panel.append(list);
    return panel;
  }

  private evidencePanel(): HTMLElement {
    const panel = el("section", "evidence");
    const record = this.store.selected();
    if (!record) {
      panel.append(el("p", "hint", "select a case to inspect its evidence"));
      return panel;
    }
    panel.append(el("h2", undefined, record.case_id));
    panel.append(this.riskBlock(record));

    const reasons = record.evidence.reasons ?? [];
    if (reasons.length) {
      const row = el("div", "reasons");
      for (const reason of reasons) row.append(el("span", "chip reason", reason));
      panel.append(row);
    }
    const degraded = record.evidence.degraded ?? [];
    if (degraded.length) {
      panel.append(el("div", "degraded", `degraded tasks: ${degraded.join(", ")}`));
    }
    for (const key of ["preprocess", "doc_template", "link"] as const) {
      const section = record.evidence[key];
      panel.append(el("h3", undefined, key));
      if (!section) {
        panel.append(el("p", "hint", "unavailable"));
        continue;
      }
      const dl = el("dl");
      for (const [field, value] of Object.entries(section)) {
        dl.append(el("dt", undefined, field));
        dl.append(el("dd", undefined, String(value)));
      }
      panel.append(dl);
    }
    panel.append(this.verdictForm(record));
    return panel;
  }

  private riskBlock(record: CaseRecord): HTMLElement {
    const block = el("div", "risk");
    const risk = record.evidence.risk;
    if (!risk) {
      block.append(el("p", "hint", "risk assessment unavailable"));
      return block;
    }
    const band = this.store.bandOf(risk.final_risk);
    const headline = el("div", "risk-headline", `final risk ${fmtRisk(risk.final_risk)} (${band})`);
    headline.style.color = BAND_COLORS[band];
    block.append(headline);
    block.append(el("div", undefined, `base risk ${fmtRisk(risk.base_risk)}`));
    for (const override of risk.overrides ?? []) {
      block.append(el("span", "chip override", override));
    }
    const scores = risk.modality_scores ?? {};
    const dl = el("dl");
    for (const [field, value] of Object.entries(scores)) {
      dl.append(el("dt", undefined, field));
      dl.append(el("dd", undefined, value === null ? "unavailable" : String(value)));
    }
    block.append(dl);
    return block;
  }

  private verdictForm(record: CaseRecord): HTMLElement {
    const { state } = this.store;
    const form = el("form", "verdict") as HTMLFormElement;
    const reason = el("input") as HTMLInputElement;
    reason.placeholder = "reason";
    reason.name = "reason";
    const approve = el("button", "approve", "approve") as HTMLButtonElement;
    const reject = el("button", "reject", "reject") as HTMLButtonElement;
    approve.disabled = reject.disabled = state.submitting;
    const submit = (decision: "approve" | "reject") => (ev: Event) => {
      ev.preventDefault();
      void this.store.submitVerdict(record.case_id, decision, reason.value);
    };
    approve.addEventListener("click", submit("approve"));
    reject.addEventListener("click", submit("reject"));
    form.append(reason, approve, reject);
    return form;
  }

  private resolvedPanel(): HTMLElement {
    const { state } = this.store;
    const panel = el("section", "resolved");
    panel.append(el("h2", undefined, `Resolved this session (${state.resolvedThisSession.length})`));
    const list = el("ul");
    for (const record of state.resolvedThisSession) {
      const item = el("li", "case resolved");
      item.append(el("span", "case-id", record.case_id));
      item.append(el("span", "verdict", record.verdict?.decision ?? "?"));
      list.append(item);
    }
    panel.append(list);
    return panel;
  }
}
