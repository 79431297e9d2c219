"""Agentic workflow control: task DAGs, variant selection, failure
recovery, anomaly escalation and policy enforcement over the event bus.

Five deterministic agent policies cooperate per case:

  decomposer   builds the per-submission task DAG (parallel or sequential)
  selector     picks the detector variant that fits the latency budget,
               forcing the most accurate one on low-quality or risky input
  recovery     retries failed tasks with exponential backoff, falls back
               to an alternative variant once, then degrades the task
  escalation   opens analyst cases on review-band risk, degraded evidence
               or cross-modality disagreement
  policy       vetoes disallowed workflows up front and forces review
               above the jurisdiction's risk floor

Each case has a single logical writer (the orchestrator consuming its
per-key event stream); services communicate only via bus topics
``task.<kind>`` / ``result.<kind>`` keyed by submission id. Every audit
append carries a category counter so the trace can be reconciled line by
line against orchestrator statistics.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .audit import (
    BUILTIN_POLICIES,
    AuditLog,
    AuditUnavailable,
    PolicyRuleSet,
    check_policy,
    derive_salt,
    redact_payload,
)
from .bus import Event, EventBus
from .cases import CaseStore, simulated_analyst
from .docforensics import (
    DOC_FORGED_THRESHOLD,
    FULL_WEIGHTS,
    DeviationWeights,
    OcrResult,
    TemplateReport,
    UnknownTemplate,
    extract_text,
    template_deviation,
)
from .domain import ModalityScores, RiskAssessment, Submission, SubmissionView, quantize9, record_to_dict
from .ingestion import IngestReport, PreprocessReport, ingest, preprocess
from .linking import DeviceIndex, LinkReport, link, link_metadata_only
from .liveness import ACCURACY_ORDER, DEFAULT_VARIANTS, DetectorVariant, LivenessVerdict, score_calibrated, score_heuristic
from .risk import FusionConfig, NoEvidence, fuse
from .streams import derive_rng
from .templates import BUILTIN_TEMPLATES, TemplateSpec

TASK_KINDS = (
    "ingest",
    "preprocess",
    "liveness",
    "doc_ocr",
    "doc_template",
    "embed",
    "link",
    "risk",
    "decide",
)

PARALLEL_DEPS: dict[str, frozenset[str]] = {
    "ingest": frozenset(),
    "preprocess": frozenset({"ingest"}),
    "liveness": frozenset({"preprocess"}),
    "doc_ocr": frozenset({"preprocess"}),
    "doc_template": frozenset({"doc_ocr"}),
    "embed": frozenset({"preprocess"}),
    "link": frozenset({"doc_template", "embed"}),
    "risk": frozenset({"liveness", "doc_template", "link"}),
    "decide": frozenset({"risk"}),
}

DEFAULT_LATENCIES = {
    "ingest": 0.1,
    "preprocess": 0.3,
    "liveness": 1.5,
    "doc_ocr": 0.9,
    "doc_template": 0.5,
    "embed": 0.5,
    "link": 0.4,
    "risk": 0.3,
    "decide": 0.1,
}

MAX_PLAIN_RETRIES = 3
RETRY_BASE_DELAY = 0.1
BREAKER_FAILURE_THRESHOLD = 5
BREAKER_COOLDOWN = 2.0
DISAGREEMENT_THRESHOLD = 0.7
ESCALATION_OFF_THRESHOLD = 0.5
DEFAULT_BUDGET = 3.0
DEFAULT_VARIANT = "temporal_artifact"

AGENT_NAMES = ("decomposer", "selector", "recovery", "escalation", "policy")


class NoVariant(LookupError):
    """Variant selection ran against an empty registry."""


@dataclass
class AutoscaleConfig:
    pool_mode: str = "unlimited"  # unlimited | fixed | autoscale
    fixed_instances: int = 1
    queue_per_instance: int = 10
    max_instances: int = 8
    interval: float = 0.5


@dataclass
class RunConfig:
    seed: int = 0
    mode: str = "parallel"  # parallel | sequential
    latencies: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_LATENCIES))
    latency_sigma: float = 0.0
    variants: dict[str, DetectorVariant] = field(default_factory=lambda: dict(DEFAULT_VARIANTS))
    fusion: FusionConfig = field(default_factory=FusionConfig)
    agents: dict[str, bool] = field(default_factory=lambda: {name: True for name in AGENT_NAMES})
    fault_injection: dict[str, float] = field(default_factory=dict)
    autoscale: AutoscaleConfig = field(default_factory=AutoscaleConfig)
    budget_s: float = DEFAULT_BUDGET
    engine: str = "heuristic"  # heuristic | calibrated_stub
    analyst_accuracy: float = 0.95
    simulate_analyst: bool = True
    audit_mode: str = "redacted"
    doc_threshold: float = DOC_FORGED_THRESHOLD
    doc_weights: DeviationWeights = field(default_factory=lambda: FULL_WEIGHTS)
    disagreement_threshold: float = DISAGREEMENT_THRESHOLD
    escalation_off_threshold: float = ESCALATION_OFF_THRESHOLD

    def agent_on(self, name: str) -> bool:
        return self.agents.get(name, True)

    @staticmethod
    def from_dict(raw: dict[str, Any]) -> "RunConfig":
        """Build a RunConfig from the JSON run-config sections.

        Recognized sections: latencies, variants, fusion, bands, agents,
        fault_injection, autoscale, budget_s, mode, seed, engine,
        latency_sigma, analyst_accuracy, audit_mode.
        """
        config = RunConfig()
        config.seed = int(raw.get("seed", config.seed))
        config.mode = raw.get("mode", config.mode)
        config.latencies = {**config.latencies, **raw.get("latencies", {})}
        if "variants" in raw:
            config.variants = {
                vid: DetectorVariant(
                    variant_id=vid,
                    recall=entry["recall"],
                    false_positive_rate=entry["false_positive_rate"],
                    latency_mean=entry["latency_mean"],
                    latency_sigma=entry.get("latency_sigma", 0.15),
                )
                for vid, entry in raw["variants"].items()
            }
        fusion_raw = dict(raw.get("fusion", {}))
        bands_raw = dict(raw.get("bands", {}))
        if fusion_raw or bands_raw:
            config.fusion = FusionConfig(
                weights=fusion_raw.get("weights", dict(config.fusion.weights)),
                approve_below=bands_raw.get("approve_below", config.fusion.approve_below),
                reject_above=bands_raw.get("reject_above", config.fusion.reject_above),
                liveness_fail_floor=fusion_raw.get("liveness_fail_floor", config.fusion.liveness_fail_floor),
                check_digit_floor=fusion_raw.get("check_digit_floor", config.fusion.check_digit_floor),
            )
            config.fusion.validate()
        config.agents = {**config.agents, **raw.get("agents", {})}
        config.fault_injection = dict(raw.get("fault_injection", config.fault_injection))
        if "autoscale" in raw:
            auto = raw["autoscale"]
            config.autoscale = AutoscaleConfig(
                pool_mode=auto.get("pool_mode", "unlimited"),
                fixed_instances=auto.get("fixed_instances", 1),
                queue_per_instance=auto.get("queue_per_instance", 10),
                max_instances=auto.get("max_instances", 8),
                interval=auto.get("interval", 0.5),
            )
        config.budget_s = float(raw.get("budget_s", config.budget_s))
        config.engine = raw.get("engine", config.engine)
        config.latency_sigma = float(raw.get("latency_sigma", config.latency_sigma))
        config.analyst_accuracy = float(raw.get("analyst_accuracy", config.analyst_accuracy))
        config.audit_mode = raw.get("audit_mode", config.audit_mode)
        return config


@dataclass
class TaskSpec:
    task_id: str
    kind: str
    depends_on: frozenset[str]
    variant: Optional[str] = None
    attempt: int = 0
    status: str = "pending"  # pending dispatched running done failed degraded
    started: Optional[float] = None
    finished: Optional[float] = None


@dataclass
class CaseContext:
    submission_id: str
    arrival_index: int
    arrival_time: float
    dag: dict[str, TaskSpec] = field(default_factory=dict)
    scores: ModalityScores = field(default_factory=ModalityScores)
    annotations: list[tuple[str, str, float]] = field(default_factory=list)
    decision: Optional[str] = None
    version: int = 0
    check_digit_fail: bool = False
    review_floor: Optional[float] = None
    assessment: Optional[RiskAssessment] = None
    opened_case: bool = False
    decided_at: Optional[float] = None
    resolved_at: Optional[float] = None
    pathway: Optional[str] = None  # auto | case | gateway | policy
    reports: dict[str, Any] = field(default_factory=dict)

    def bump(self) -> None:
        self.version += 1

    def set_decision(self, decision: str) -> None:
        if self.decision is not None:
            raise RuntimeError(f"decision already set for {self.submission_id}")
        self.decision = decision
        self.bump()

    def set_scores(self, **kwargs: Any) -> None:
        self.scores = self.scores.with_set(**kwargs)
        self.bump()

    def annotate(self, agent: str, note: str, time: float) -> None:
        self.annotations.append((agent, note, time))
        self.bump()

    def degraded_kinds(self) -> tuple[str, ...]:
        return tuple(sorted(t.kind for t in self.dag.values() if t.status == "degraded"))


@dataclass
class ServiceHealth:
    kind: str
    consecutive_failures: int = 0
    breaker: str = "closed"  # closed | open | half_open
    opened_at: float = 0.0
    held: deque = field(default_factory=deque)
    probe_in_flight: bool = False


def decompose(view: SubmissionView, mode: str, arrival_index: int, arrival_time: float) -> CaseContext:
    """Build the per-case DAG, pruning branches for missing modalities."""
    have_selfie = not view.selfie.missing
    have_document = not view.document.missing
    alive = {"ingest", "preprocess", "link", "risk", "decide"}
    if have_selfie:
        alive.add("liveness")
    if have_document:
        alive.update(("doc_ocr", "doc_template"))
    if have_selfie and have_document:
        alive.add("embed")

    ctx = CaseContext(submission_id=view.submission_id, arrival_index=arrival_index, arrival_time=arrival_time)
    if mode == "sequential":
        prev: Optional[str] = None
        for kind in TASK_KINDS:
            if kind not in alive:
                continue
            deps = frozenset({prev}) if prev else frozenset()
            ctx.dag[kind] = TaskSpec(task_id=f"{view.submission_id}:{kind}", kind=kind, depends_on=deps)
            prev = kind
    else:
        for kind in TASK_KINDS:
            if kind not in alive:
                continue
            deps = frozenset(PARALLEL_DEPS[kind] & alive)
            if kind == "preprocess":
                deps = frozenset({"ingest"})
            elif not deps and kind != "ingest":
                deps = frozenset({"preprocess"})
            ctx.dag[kind] = TaskSpec(task_id=f"{view.submission_id}:{kind}", kind=kind, depends_on=deps)
    return ctx


def select_variant(
    variants: dict[str, DetectorVariant],
    elapsed: float,
    remaining_path: float,
    budget: float,
    quality_out: Optional[float],
    max_prior_risk: float,
) -> tuple[str, bool]:
    """Most accurate variant that fits the budget; returns (id, infeasible).

    Low-quality input (quality < 0.4) or an already-risky case (any prior
    modality risk >= 0.6) forces the most accurate variant outright.
    """
    if not variants:
        raise NoVariant("no detector variants registered")
    by_accuracy = sorted(variants.values(), key=lambda v: (-v.recall, v.variant_id))
    if (quality_out is not None and quality_out < 0.4) or max_prior_risk >= 0.6:
        return by_accuracy[0].variant_id, False
    for variant in by_accuracy:
        if variant.latency_mean + elapsed + remaining_path <= budget:
            return variant.variant_id, False
    cheapest = min(variants.values(), key=lambda v: (v.latency_mean, v.variant_id))
    return cheapest.variant_id, True


@dataclass
class SubmissionOutcome:
    submission_id: str
    arrival: float
    decision: Optional[str] = None
    pathway: Optional[str] = None
    opened_case: bool = False
    final_risk: Optional[float] = None
    band: Optional[str] = None
    overrides: tuple[str, ...] = ()
    degraded: tuple[str, ...] = ()
    makespan: Optional[float] = None
    resolved_at: Optional[float] = None
    verdict_decision: Optional[str] = None

    def caught(self) -> bool:
        """Rejected or escalated: the pipeline surfaced this submission."""
        return self.opened_case or self.decision in ("reject", "rejected_ingest", "rejected_policy")


class _ServicePool:
    """Per-kind capacity model: unlimited, fixed instances, or autoscaled."""

    def __init__(self, bus: EventBus, cfg: AutoscaleConfig) -> None:
        self.bus = bus
        self.cfg = cfg
        self.queues: dict[str, deque] = {k: deque() for k in TASK_KINDS}
        self.busy: dict[str, int] = {k: 0 for k in TASK_KINDS}
        start = cfg.fixed_instances if cfg.pool_mode != "unlimited" else 0
        self.instances: dict[str, int] = {k: start for k in TASK_KINDS}
        self.peak_instances: dict[str, int] = dict(self.instances)
        self._timer_armed = False

    def submit(self, kind: str, latency: float, on_start: Callable[[], None], on_finish: Callable[[], None]) -> None:
        if self.cfg.pool_mode == "unlimited":
            on_start()
            self.bus.schedule_at(self.bus.clock.now() + latency, on_finish)
            return
        self.queues[kind].append((latency, on_start, on_finish))
        self._try_start(kind)
        if self.cfg.pool_mode == "autoscale":
            self._arm_timer()

    def _try_start(self, kind: str) -> None:
        q = self.queues[kind]
        while q and self.busy[kind] < self.instances[kind]:
            latency, on_start, on_finish = q.popleft()
            self.busy[kind] += 1
            on_start()

            def _finish(k: str = kind, cb: Callable[[], None] = on_finish) -> None:
                self.busy[k] -= 1
                cb()
                self._try_start(k)

            self.bus.schedule_at(self.bus.clock.now() + latency, _finish)

    def _arm_timer(self) -> None:
        if self._timer_armed:
            return
        self._timer_armed = True
        self.bus.schedule_at(self.bus.clock.now() + self.cfg.interval, self._rescale)

    def _rescale(self) -> None:
        self._timer_armed = False
        outstanding = False
        for kind in TASK_KINDS:
            depth = len(self.queues[kind])
            target = min(max(math.ceil(depth / self.cfg.queue_per_instance), 1), self.cfg.max_instances)
            self.instances[kind] = target
            self.peak_instances[kind] = max(self.peak_instances[kind], target)
            self._try_start(kind)
            if self.queues[kind] or self.busy[kind]:
                outstanding = True
        if outstanding:
            self._arm_timer()


class PipelineRunner:
    """Drives a corpus through the full pipeline on the virtual clock."""

    def __init__(
        self,
        corpus: list[Submission],
        config: RunConfig,
        templates: Optional[dict[str, TemplateSpec]] = None,
        policies: Optional[dict[str, PolicyRuleSet]] = None,
        audit_log: Optional[AuditLog] = None,
    ) -> None:
        self.corpus = corpus
        self.config = config
        self.templates = templates if templates is not None else BUILTIN_TEMPLATES
        self.policies = policies if policies is not None else BUILTIN_POLICIES
        self.bus = EventBus(mode="virtual")
        self.audit = audit_log if audit_log is not None else AuditLog(
            mode=config.audit_mode, salt=derive_salt(config.seed)
        )
        self.pool = _ServicePool(self.bus, config.autoscale)
        self.device_index = DeviceIndex()
        self.cases = CaseStore()
        self.contexts: dict[str, CaseContext] = {}
        self.views: dict[str, SubmissionView] = {}
        self.truth_deepfake: dict[str, bool] = {}  # sealed channel for the calibrated stub
        self.truth_fraud: dict[str, bool] = {}  # consumed only by the simulated analyst
        self.outcomes: dict[str, SubmissionOutcome] = {}
        self.health: dict[str, ServiceHealth] = {k: ServiceHealth(k) for k in TASK_KINDS}
        self.halted = False
        # one counter per audit category; sum(audit_counts) == len(audit.records)
        self.audit_counts: dict[str, int] = {
            "decomposed": 0,
            "transitions": 0,
            "notes": 0,
            "policy_checks": 0,
            "variant_selected": 0,
            "recovery": 0,
            "decisions": 0,
            "case_opened": 0,
            "verdicts": 0,
        }
        self._wire()

    # -- wiring ------------------------------------------------------------

    def _wire(self) -> None:
        for kind in TASK_KINDS:
            self.bus.register_topic(f"task.{kind}")
            self.bus.register_topic(f"result.{kind}")
            self.bus.subscribe(f"task.{kind}", self._service_handler(kind))
            self.bus.subscribe(f"result.{kind}", self._on_result)
        self.bus.register_topic("case.verdict")
        self.bus.register_topic("alert.case_opened")
        self.bus.register_topic("alert.case_resolved")
        self.bus.subscribe("case.verdict", self._on_verdict_event)

    def _audit_event(self, actor: str, action: str, submission_id: str, payload: Any, category: str) -> None:
        try:
            self.audit.append(actor, action, submission_id, payload, self.bus.clock.now())
            self.audit_counts[category] += 1
        except AuditUnavailable:
            self.halted = True

    # -- run ----------------------------------------------------------------

    def run(self) -> "RunResult":
        for index, submission in enumerate(self.corpus):
            self.views[submission.submission_id] = submission.service_view()
            self.truth_deepfake[submission.submission_id] = (
                submission.ground_truth.selfie_class == "deepfake"
            )
            self.truth_fraud[submission.submission_id] = submission.ground_truth.is_fraudulent
            self.outcomes[submission.submission_id] = SubmissionOutcome(
                submission_id=submission.submission_id, arrival=submission.metadata.submitted_at
            )
            self.bus.schedule_at(
                submission.metadata.submitted_at,
                lambda sid=submission.submission_id, idx=index: self._on_arrival(sid, idx),
            )
        final_time = self.bus.run_until_idle()
        return RunResult(self, final_time)

    # -- arrival / decomposition --------------------------------------------

    def _on_arrival(self, submission_id: str, arrival_index: int) -> None:
        view = self.views[submission_id]
        mode = self.config.mode if self.config.agent_on("decomposer") else "sequential"
        ctx = decompose(view, mode, arrival_index, self.bus.clock.now())
        self.contexts[submission_id] = ctx
        self._audit_event("decomposer", "case.decomposed", submission_id, {"tasks": sorted(ctx.dag)}, "decomposed")
        self.device_index.register(arrival_index, view.metadata.device_fingerprint)
        self._dispatch_ready(ctx, initial=True)

    def _dispatch_ready(self, ctx: CaseContext, initial: bool = False) -> None:
        for task in ctx.dag.values():
            if task.status != "pending":
                continue
            if not initial and task.kind == "ingest":
                continue
            deps = [ctx.dag[d] for d in task.depends_on]
            if all(d.status in ("done", "degraded") for d in deps):
                self._dispatch(ctx, task)

    def _dispatch(self, ctx: CaseContext, task: TaskSpec) -> None:
        if task.kind == "doc_template" and not isinstance(ctx.reports.get("doc_ocr"), OcrResult):
            # required OCR input degraded away: the verification cannot run
            self._degrade(ctx, task)
            return
        task.status = "dispatched"
        task.attempt += 1
        if task.kind == "liveness" and task.variant is None:
            task.variant = self._choose_variant(ctx)
        health = self.health[task.kind]
        if health.breaker != "closed":
            health.held.append((ctx.submission_id, task.kind))
            return
        self._emit_task(ctx, task)

    def _choose_variant(self, ctx: CaseContext) -> str:
        if not self.config.agent_on("selector"):
            return DEFAULT_VARIANT
        elapsed = self.bus.clock.now() - ctx.arrival_time
        remaining = self.config.latencies["risk"] + self.config.latencies["decide"]
        prior = ctx.scores.risk_components()
        variant_id, infeasible = select_variant(
            self.config.variants,
            elapsed,
            remaining,
            self.config.budget_s,
            ctx.scores.quality,
            max(prior.values()) if prior else 0.0,
        )
        if infeasible:
            ctx.annotate("selector", "budget_infeasible", self.bus.clock.now())
            self._audit_event("selector", "agent.note", ctx.submission_id, {"note": "budget_infeasible"}, "notes")
        self._audit_event("selector", "variant.selected", ctx.submission_id, {"variant": variant_id}, "variant_selected")
        return variant_id

    def _latency_for(self, ctx: CaseContext, task: TaskSpec) -> float:
        if task.kind == "liveness" and task.variant in self.config.variants:
            mean = self.config.variants[task.variant].latency_mean
        else:
            mean = self.config.latencies[task.kind]
        sigma = self.config.latency_sigma
        if sigma <= 0:
            return mean
        rng = derive_rng(self.config.seed, "latency", ctx.submission_id, task.kind, task.attempt)
        return quantize9(mean * math.exp(sigma * float(rng.standard_normal())))

    def _emit_task(self, ctx: CaseContext, task: TaskSpec) -> None:
        self.bus.publish(
            f"task.{task.kind}",
            ctx.submission_id,
            {"submission_id": ctx.submission_id, "kind": task.kind, "attempt": task.attempt, "variant": task.variant},
        )

    # -- services -------------------------------------------------------------

    def _service_handler(self, kind: str) -> Callable[[Event], None]:
        def handler(event: Event) -> None:
            submission_id = event.payload["submission_id"]
            ctx = self.contexts[submission_id]
            task = ctx.dag[kind]
            latency = self._latency_for(ctx, task)

            def on_start() -> None:
                task.status = "running"
                task.started = self.bus.clock.now()
                self._audit_event(kind, f"task.{kind}.running", submission_id, {"attempt": task.attempt}, "transitions")

            def on_finish() -> None:
                result = self._execute(kind, ctx, task)
                self.bus.publish(f"result.{kind}", submission_id, result)

            self.pool.submit(kind, latency, on_start, on_finish)

        return handler

    def _fault_injected(self, ctx: CaseContext, task: TaskSpec) -> bool:
        prob = self.config.fault_injection.get(task.kind, self.config.fault_injection.get("*", 0.0))
        if prob <= 0 or task.kind == "decide":
            return False
        rng = derive_rng(self.config.seed, "fault", ctx.submission_id, task.kind, task.attempt)
        return float(rng.random()) < prob

    def _execute(self, kind: str, ctx: CaseContext, task: TaskSpec) -> dict:
        base = {"submission_id": ctx.submission_id, "kind": kind, "attempt": task.attempt}
        if self._fault_injected(ctx, task):
            return {**base, "status": "failed", "error": "injected_fault"}
        view = self.views[ctx.submission_id]
        try:
            report = self._compute(kind, ctx, task, view)
        except UnknownTemplate:
            return {**base, "status": "unknown_template"}
        except NoEvidence:
            return {**base, "status": "ok", "report": None}
        return {**base, "status": "ok", "report": report}

    def _compute(self, kind: str, ctx: CaseContext, task: TaskSpec, view: SubmissionView) -> Any:
        cfg = self.config
        if kind == "ingest":
            return ingest(view)
        if kind == "preprocess":
            return preprocess(view, seed=cfg.seed)
        if kind == "liveness":
            if cfg.engine == "calibrated_stub":
                variant = cfg.variants[task.variant or DEFAULT_VARIANT]
                rng = derive_rng(cfg.seed, "stub", view.submission_id, task.attempt)
                return score_calibrated(
                    view.selfie,
                    self.truth_deepfake[view.submission_id],
                    variant,
                    rng,
                    submission_id=view.submission_id,
                )
            return score_heuristic(view.selfie, view.submission_id, task.variant or DEFAULT_VARIANT)
        if kind == "doc_ocr":
            pre: Optional[PreprocessReport] = ctx.reports.get("preprocess")
            noise = pre.ocr_noise_factor if pre is not None else 1.0
            return extract_text(
                view.document, noise, self.templates, seed=cfg.seed, submission_id=view.submission_id
            )
        if kind == "doc_template":
            ocr: OcrResult = ctx.reports["doc_ocr"]
            template = self.templates[view.document.template_id]
            return template_deviation(
                view.document, ocr, template, threshold=cfg.doc_threshold, weights=cfg.doc_weights
            )
        if kind == "embed":
            return {
                "face_embedding": view.selfie.face_embedding,
                "photo_embedding": view.document.photo_embedding,
            }
        if kind == "link":
            reuse = self.device_index.prior_count(ctx.arrival_index, view.metadata.device_fingerprint)
            ocr = ctx.reports.get("doc_ocr")
            ocr_name = ocr.fields.get("name", "") if isinstance(ocr, OcrResult) else ""
            emb = ctx.reports.get("embed")
            if emb is not None:
                return link(
                    emb["face_embedding"], emb["photo_embedding"], ocr_name, view.metadata, reuse,
                    submission_id=view.submission_id,
                )
            return link_metadata_only(ocr_name, view.metadata, reuse, submission_id=view.submission_id)
        if kind == "risk":
            return fuse(
                ctx.scores, cfg.fusion, check_digit_fail=ctx.check_digit_fail, submission_id=view.submission_id
            )
        if kind == "decide":
            return {}
        raise ValueError(f"unknown task kind {kind}")

    # -- results -----------------------------------------------------------------

    def _on_result(self, event: Event) -> None:
        payload = event.payload
        submission_id = payload["submission_id"]
        kind = payload["kind"]
        ctx = self.contexts[submission_id]
        task = ctx.dag[kind]
        if task.status in ("done", "degraded"):
            return  # at-least-once duplicate
        if payload["status"] == "failed":
            task.status = "failed"
            task.finished = self.bus.clock.now()
            self._audit_event(kind, f"task.{kind}.failed", submission_id, {"attempt": task.attempt}, "transitions")
            self._note_failure(kind)
            self._recover(ctx, task)
            return
        self._note_success(kind)
        task.status = "done"
        task.finished = self.bus.clock.now()
        self._audit_event(kind, f"task.{kind}.done", submission_id, {"attempt": task.attempt}, "transitions")

        if payload["status"] == "unknown_template":
            self._unknown_template(ctx, submission_id)
        else:
            self._absorb(ctx, kind, payload.get("report"))

        if kind == "ingest":
            self._after_ingest(ctx, ctx.reports["ingest"])
            return
        self._dispatch_ready(ctx)
        self._maybe_finish(ctx)

    def _unknown_template(self, ctx: CaseContext, submission_id: str) -> None:
        # fabricated or unregistered template id: conclusive forgery suspicion
        ctx.reports["doc_ocr"] = OcrResult(
            submission_id=submission_id, fields={}, char_error_rate=None, unparsed_lines=0
        )
        ctx.set_scores(doc_deviation=1.0)
        ctx.annotate("orchestrator", "unknown_template_suspicion", self.bus.clock.now())
        self._audit_event(
            "orchestrator", "agent.note", submission_id, {"note": "unknown_template_suspicion"}, "notes"
        )
        tmpl_task = ctx.dag.get("doc_template")
        if tmpl_task is not None and tmpl_task.status == "pending":
            tmpl_task.status = "done"
            tmpl_task.started = self.bus.clock.now()
            tmpl_task.finished = self.bus.clock.now()
            self._audit_event(
                "orchestrator", "task.doc_template.done", submission_id, {"subsumed": True}, "transitions"
            )

    def _absorb(self, ctx: CaseContext, kind: str, report: Any) -> None:
        ctx.reports[kind] = report
        if isinstance(report, PreprocessReport):
            ctx.set_scores(quality=report.quality_out)
        elif isinstance(report, LivenessVerdict):
            ctx.set_scores(deepfake_score=report.deepfake_score, liveness_pass=report.liveness_pass)
        elif isinstance(report, OcrResult):
            ctx.set_scores(ocr_fields=dict(report.fields))
        elif isinstance(report, TemplateReport):
            if ctx.scores.doc_deviation is None:
                ctx.set_scores(doc_deviation=report.deviation)
            ctx.check_digit_fail = report.check_digit_fail
        elif isinstance(report, LinkReport):
            updates: dict[str, Any] = {"metadata_anomaly": report.metadata_anomaly}
            if report.link_score is not None:
                updates["link_score"] = report.link_score
            ctx.set_scores(**updates)
        elif isinstance(report, RiskAssessment):
            ctx.assessment = report

    def _after_ingest(self, ctx: CaseContext, report: IngestReport) -> None:
        if not report.accepted:
            self._finalize_decision(ctx, "rejected_ingest", "gateway", assessment=None)
            return
        if self.config.agent_on("policy"):
            view = self.views[ctx.submission_id]
            verdict = check_policy(
                report.completeness,
                view.document.template_id if not view.document.missing else "",
                view.metadata.declared_jurisdiction,
                self.policies,
                registered_templates=self.templates.keys(),
            )
            self._audit_event(
                "policy", "policy.checked", ctx.submission_id,
                {"kind": verdict.kind, "reason": verdict.reason}, "policy_checks",
            )
            if verdict.kind == "veto":
                self._finalize_decision(ctx, "rejected_policy", "policy", assessment=None)
                return
            ctx.review_floor = verdict.review_required_above
        self._dispatch_ready(ctx)

    # -- recovery ------------------------------------------------------------------

    def _note_failure(self, kind: str) -> None:
        health = self.health[kind]
        health.consecutive_failures += 1
        if health.breaker == "half_open":
            self._open_breaker(health)
        elif health.breaker == "closed" and health.consecutive_failures >= BREAKER_FAILURE_THRESHOLD:
            self._open_breaker(health)

    def _open_breaker(self, health: ServiceHealth) -> None:
        health.breaker = "open"
        health.opened_at = self.bus.clock.now()
        health.probe_in_flight = False
        self.bus.schedule_at(health.opened_at + BREAKER_COOLDOWN, lambda k=health.kind: self._half_open(k))

    def _half_open(self, kind: str) -> None:
        # exactly one cooldown timer exists per open period, so the state
        # check alone decides staleness (float time comparisons are unsafe)
        health = self.health[kind]
        if health.breaker != "open":
            return
        health.breaker = "half_open"
        health.probe_in_flight = False
        self._release_held(health, probe_only=True)

    def _note_success(self, kind: str) -> None:
        health = self.health[kind]
        health.consecutive_failures = 0
        if health.breaker == "half_open":
            health.breaker = "closed"
            health.probe_in_flight = False
            self._release_held(health, probe_only=False)

    def _release_held(self, health: ServiceHealth, probe_only: bool) -> None:
        while health.held:
            if probe_only and health.probe_in_flight:
                return
            submission_id, kind = health.held.popleft()
            ctx = self.contexts[submission_id]
            task = ctx.dag[kind]
            if probe_only:
                health.probe_in_flight = True
            self._emit_task(ctx, task)
            if probe_only:
                return

    def _recover(self, ctx: CaseContext, task: TaskSpec) -> None:
        if not self.config.agent_on("recovery"):
            self._degrade(ctx, task)
            return
        attempt = task.attempt
        if attempt <= MAX_PLAIN_RETRIES:
            delay = RETRY_BASE_DELAY * (2 ** (attempt - 1))
            self._audit_event(
                "recovery", "recovery.retry", ctx.submission_id,
                {"kind": task.kind, "attempt": attempt, "delay": delay}, "recovery",
            )
            self.bus.schedule_at(self.bus.clock.now() + delay, lambda: self._redispatch(ctx, task))
            return
        if attempt == MAX_PLAIN_RETRIES + 1 and task.kind == "liveness":
            alternative = self._fallback_variant(task.variant)
            if alternative is not None:
                task.variant = alternative
                self._audit_event(
                    "recovery", "recovery.fallback", ctx.submission_id,
                    {"kind": task.kind, "variant": alternative}, "recovery",
                )
                self._redispatch(ctx, task)
                return
        self._degrade(ctx, task)

    def _fallback_variant(self, current: Optional[str]) -> Optional[str]:
        for vid in ACCURACY_ORDER:
            if vid in self.config.variants and vid != current:
                return vid
        return None

    def _redispatch(self, ctx: CaseContext, task: TaskSpec) -> None:
        task.attempt += 1
        health = self.health[task.kind]
        if health.breaker != "closed":
            health.held.append((ctx.submission_id, task.kind))
            return
        self._emit_task(ctx, task)

    def _degrade(self, ctx: CaseContext, task: TaskSpec) -> None:
        task.status = "degraded"
        task.finished = self.bus.clock.now()
        ctx.annotate("recovery", f"degraded:{task.kind}", self.bus.clock.now())
        self._audit_event(
            "recovery", f"task.{task.kind}.degraded", ctx.submission_id, {"attempt": task.attempt}, "transitions"
        )
        self._audit_event(
            "recovery", "agent.note", ctx.submission_id, {"note": f"degraded:{task.kind}"}, "notes"
        )
        self._dispatch_ready(ctx)
        self._maybe_finish(ctx)

    # -- decision -------------------------------------------------------------------

    def _maybe_finish(self, ctx: CaseContext) -> None:
        if ctx.decision is not None or ctx.opened_case:
            return
        decide = ctx.dag.get("decide")
        if decide is None or decide.status not in ("done", "degraded"):
            return
        self._decide(ctx)

    def _decide(self, ctx: CaseContext) -> None:
        if self.halted:
            return
        assessment = ctx.assessment
        degraded = ctx.degraded_kinds()
        escalation_on = self.config.agent_on("escalation")

        open_reasons: list[str] = []
        if assessment is None:
            open_reasons.append("no_assessment")
        else:
            if assessment.band == "review":
                open_reasons.append("review_band")
            components = assessment.modality_scores.risk_components()
            if len(components) >= 2:
                disagreement = max(components.values()) - min(components.values())
                if disagreement > self.config.disagreement_threshold:
                    open_reasons.append("modality_disagreement")
            if (
                self.config.agent_on("policy")
                and ctx.review_floor is not None
                and assessment.final_risk >= ctx.review_floor
            ):
                open_reasons.append("policy_force_review")
        if degraded:
            open_reasons.append("degraded_tasks")

        if escalation_on and open_reasons:
            self._open_case(ctx, assessment, open_reasons)
            return

        if assessment is None:
            decision = "reject"  # fail closed when no evidence could be fused
        elif assessment.band == "approve":
            decision = "approve"
        elif assessment.band == "reject":
            decision = "reject"
        else:
            decision = "reject" if assessment.final_risk >= self.config.escalation_off_threshold else "approve"
        self._finalize_decision(ctx, decision, "auto", assessment)

    def _open_case(self, ctx: CaseContext, assessment: Optional[RiskAssessment], reasons: list[str]) -> None:
        ctx.opened_case = True
        ctx.pathway = "case"
        ctx.decided_at = self.bus.clock.now()
        evidence = self._evidence_snapshot(ctx, assessment, reasons)
        record = self.cases.open_case(ctx.submission_id, evidence, self.bus.clock.now())
        self._audit_event(
            "escalation", "case.opened", ctx.submission_id,
            {"case_id": record.case_id, "reasons": reasons}, "case_opened",
        )
        self.bus.publish("alert.case_opened", ctx.submission_id, {"case_id": record.case_id})
        outcome = self.outcomes[ctx.submission_id]
        outcome.opened_case = True
        outcome.pathway = "case"
        outcome.makespan = quantize9(self.bus.clock.now() - ctx.arrival_time)
        outcome.degraded = ctx.degraded_kinds()
        if assessment is not None:
            outcome.final_risk = assessment.final_risk
            outcome.band = assessment.band
            outcome.overrides = assessment.overrides
        if self.config.simulate_analyst:
            rng = derive_rng(self.config.seed, "analyst", ctx.submission_id)
            decision, think = simulated_analyst(
                self.truth_fraud[ctx.submission_id], rng, self.config.analyst_accuracy
            )
            self.bus.schedule_at(
                self.bus.clock.now() + think,
                lambda: self._submit_simulated_verdict(record.case_id, ctx.submission_id, decision),
            )

    def _submit_simulated_verdict(self, case_id: str, submission_id: str, decision: str) -> None:
        self.cases.submit_verdict(case_id, decision, "simulated review", "analyst-sim", self.bus.clock.now())
        self.bus.publish(
            "case.verdict",
            submission_id,
            {"case_id": case_id, "submission_id": submission_id, "decision": decision, "analyst_id": "analyst-sim"},
        )
        self.bus.publish("alert.case_resolved", submission_id, {"case_id": case_id})

    def _on_verdict_event(self, event: Event) -> None:
        payload = event.payload
        ctx = self.contexts[payload["submission_id"]]
        if ctx.decision is not None:
            return
        ctx.set_decision(payload["decision"])
        ctx.resolved_at = self.bus.clock.now()
        self._audit_event(
            "case-management",
            "case.verdict",
            ctx.submission_id,
            {"case_id": payload["case_id"], "decision": payload["decision"], "analyst_id": payload["analyst_id"]},
            "verdicts",
        )
        outcome = self.outcomes[ctx.submission_id]
        outcome.decision = payload["decision"]
        outcome.verdict_decision = payload["decision"]
        outcome.resolved_at = self.bus.clock.now()

    def _evidence_snapshot(
        self, ctx: CaseContext, assessment: Optional[RiskAssessment], reasons: list[str]
    ) -> dict[str, Any]:
        evidence: dict[str, Any] = {"reasons": list(reasons)}
        if assessment is not None:
            evidence["risk"] = record_to_dict(assessment)
        for key in ("preprocess", "doc_template", "link"):
            report = ctx.reports.get(key)
            if report is not None:
                evidence[key] = record_to_dict(report)
        evidence["degraded"] = list(ctx.degraded_kinds())
        evidence["annotations"] = [list(a) for a in ctx.annotations]
        if self.audit.mode == "redacted":
            evidence = redact_payload(evidence, self.audit.salt)
        return evidence

    def _finalize_decision(
        self, ctx: CaseContext, decision: str, pathway: str, assessment: Optional[RiskAssessment]
    ) -> None:
        if self.halted:
            return
        ctx.set_decision(decision)
        ctx.pathway = pathway
        ctx.decided_at = self.bus.clock.now()
        self._audit_event(
            "orchestrator", "decision.final", ctx.submission_id,
            {"decision": decision, "pathway": pathway}, "decisions",
        )
        outcome = self.outcomes[ctx.submission_id]
        outcome.decision = decision
        outcome.pathway = pathway
        outcome.makespan = quantize9(self.bus.clock.now() - ctx.arrival_time)
        outcome.degraded = ctx.degraded_kinds()
        if assessment is not None:
            outcome.final_risk = assessment.final_risk
            outcome.band = assessment.band
            outcome.overrides = assessment.overrides


@dataclass
class RunResult:
    runner: PipelineRunner
    final_time: float

    @property
    def outcomes(self) -> dict[str, SubmissionOutcome]:
        return self.runner.outcomes

    @property
    def audit(self) -> AuditLog:
        return self.runner.audit

    @property
    def cases(self) -> CaseStore:
        return self.runner.cases

    def makespans(self) -> list[float]:
        return [o.makespan for o in self.outcomes.values() if o.makespan is not None]
