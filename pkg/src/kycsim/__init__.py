"""kycsim: deterministic desk-scale simulator of an agent-orchestrated
microservice identity-verification pipeline.

Core layers:

* :mod:`kycsim.domain`        shared immutable records + canonical serialization
* :mod:`kycsim.bus`           virtual-clock event bus (at-least-once, per-key FIFO)
* :mod:`kycsim.workload`      stratified synthetic fraud corpus generator
* :mod:`kycsim.ingestion`     gateway + preprocessing services
* :mod:`kycsim.liveness`      synthetic-face detection (heuristic + calibrated stub)
* :mod:`kycsim.docforensics`  OCR channel + template verification
* :mod:`kycsim.linking`       cross-modal identity linking
* :mod:`kycsim.risk`          weighted fusion + rule overrides + bands
* :mod:`kycsim.orchestrator`  agentic controller over the bus
* :mod:`kycsim.audit`         policy rules + hash-chained redacted audit log
* :mod:`kycsim.cases`         escalated-case store + simulated analyst
* :mod:`kycsim.metrics`       EER / percentile / confusion metrics + trace checks
* :mod:`kycsim.experiments`   scripted experiment protocols + report rendering
* :mod:`kycsim.server`        case-management HTTP/SSE API
"""

__version__ = "0.1.0"
