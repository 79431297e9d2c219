#!/usr/bin/env python3
"""Tamper-evident audit logging and PII redaction.

Every pipeline operation appends one hash-chained record. Flip a single
character anywhere and verification names the exact record; delete or
swap records and the sequence numbers give it away. In redacted mode the
five PII fields are replaced by salted digests before hashing.
"""

from kycsim.audit import AuditLog, derive_salt, verify_chain
from kycsim.domain import canonical_serialize
from kycsim.orchestrator import PipelineRunner, RunConfig
from kycsim.workload import WorkloadConfig, generate_corpus

corpus = generate_corpus(WorkloadConfig(seed=3, scale=0.002))
result = PipelineRunner(corpus, RunConfig(seed=3)).run()
log = result.audit
blob = log.serialize()
print(f"pipeline produced {len(log.records)} audit records "
      f"({len(blob)} bytes, genesis prev_hash = 64 zeros)")
print("chain verifies:", verify_chain(blob) is None)

lines = blob.splitlines()
mutated = list(lines)
mutated[17] = mutated[17].replace(b'"actor"', b'"actxr"', 1)
print("single-character mutation in record 17 detected at:", verify_chain(b"\n".join(mutated)))

deleted = list(lines)
del deleted[17]
print("deletion of record 17 detected at:", verify_chain(b"\n".join(deleted)))

reordered = list(lines)
reordered[17], reordered[18] = reordered[18], reordered[17]
print("swap of records 17/18 detected at:", verify_chain(b"\n".join(reordered)))

sample_name = corpus[0].metadata.declared_name
print(f"\nredaction: declared name {sample_name!r} appears raw in the log:",
      sample_name.encode() in blob)

full = AuditLog(mode="full", salt=derive_salt(3))
red = AuditLog(mode="redacted", salt=derive_salt(3))
payload = {"name": sample_name, "note": "manual check"}
a = full.append("svc", "demo", "S0", payload, 0.0)
b = red.append("svc", "demo", "S0", payload, 0.0)
print("same payload, full vs redacted record hashes differ:", a.hash != b.hash)
print("redacted record:", canonical_serialize(b).decode()[:120], "...")
