#!/usr/bin/env python3
"""Generate a synthetic workload and look inside it.

The corpus is stratified: genuine / spoofed / synthetic selfie feature
records paired with authentic / tampered / synthetic documents, plus
identity mismatches and document-only submissions. Everything is a pure
function of the seed.
"""

from collections import Counter

from kycsim.domain import canonical_parse, canonical_serialize, submission_from_dict
from kycsim.workload import WorkloadConfig, generate_corpus

cfg = WorkloadConfig(seed=7, scale=0.01)
corpus = generate_corpus(cfg)
print(f"generated {len(corpus)} submissions at scale {cfg.scale}\n")

selfies = Counter(s.ground_truth.selfie_class if not s.selfie.missing else "(missing)" for s in corpus)
docs = Counter(s.ground_truth.document_class for s in corpus)
print("selfie strata:  ", dict(sorted(selfies.items())))
print("document strata:", dict(sorted(docs.items())))
print("fraudulent:     ", sum(s.ground_truth.is_fraudulent for s in corpus))

sample = next(s for s in corpus if s.ground_truth.document_class == "authentic" and not s.selfie.missing)
print(f"\nsubmission {sample.submission_id} ({sample.metadata.declared_jurisdiction}, "
      f"device {sample.metadata.device_fingerprint}):")
print("  selfie cues:", {
    "blink": sample.selfie.blink_plausibility,
    "temporal": sample.selfie.temporal_inconsistency,
    "frequency": sample.selfie.frequency_artifact,
    "quality": sample.selfie.quality,
})
print("  document grid:")
for line in sample.document.text_grid:
    if line.strip():
        print("   |" + line + "|")

blob = canonical_serialize(sample)
rebuilt = submission_from_dict(canonical_parse(blob))
print(f"\ncanonical form: {len(blob)} bytes, round-trips exactly: {rebuilt == sample}")
print("same seed, same bytes:", canonical_serialize(generate_corpus(cfg)[corpus.index(sample)]) == blob)
