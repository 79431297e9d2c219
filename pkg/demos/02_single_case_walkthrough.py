#!/usr/bin/env python3
"""Follow one fraudulent submission through the full agentic pipeline.

Shows the task DAG the decomposer builds, every service verdict as it
lands on the case blackboard, the fused risk with any rule overrides, and
the final decision with its audit trail.
"""

from kycsim.orchestrator import PipelineRunner, RunConfig
from kycsim.workload import WorkloadConfig, generate_corpus

corpus = generate_corpus(WorkloadConfig(seed=11, scale=0.01))
target = next(
    s for s in corpus
    if s.ground_truth.selfie_class == "deepfake" and not s.document.missing
)
print(f"submission {target.submission_id}: ground truth selfie={target.ground_truth.selfie_class}, "
      f"document={target.ground_truth.document_class}, match={target.ground_truth.identity_match}\n")

runner = PipelineRunner([target], RunConfig(seed=11, mode="parallel"))
result = runner.run()
ctx = runner.contexts[target.submission_id]

print("task DAG (parallel decomposition):")
for kind, task in ctx.dag.items():
    deps = ", ".join(sorted(task.depends_on)) or "-"
    print(f"  {kind:<12} after [{deps:<24}] {task.status:<9} "
          f"t={task.started}..{task.finished}")

print("\ncase blackboard:")
scores = ctx.scores
print(f"  quality          {scores.quality}")
print(f"  deepfake_score   {scores.deepfake_score}  liveness_pass={scores.liveness_pass}")
print(f"  doc_deviation    {scores.doc_deviation}  check_digit_fail={ctx.check_digit_fail}")
print(f"  link_score       {scores.link_score}  metadata_anomaly={scores.metadata_anomaly}")

assessment = ctx.assessment
print(f"\nfused risk: base={assessment.base_risk} final={assessment.final_risk} "
      f"band={assessment.band} overrides={list(assessment.overrides)}")

outcome = result.outcomes[target.submission_id]
print(f"decision: {outcome.decision} via {outcome.pathway} "
      f"(escalated={outcome.opened_case}) in {outcome.makespan}s virtual")

print(f"\naudit trail ({len(result.audit.records)} records, chain head "
      f"{result.audit.records[-1].hash[:16]}...):")
for record in result.audit.records:
    print(f"  [{record.time:>7.3f}] {record.actor:<12} {record.action}")
