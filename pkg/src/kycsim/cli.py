"""Command line entry points.

    kycsim generate      write a corpus.jsonl + manifest.json
    kycsim run           run a named experiment, write report.json
    kycsim report        render a report.json as aligned text tables
    kycsim audit-verify  recompute an audit log's hash chain
    kycsim serve         start the case-management HTTP/SSE server
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audit import verify_chain
from .domain import canonical_parse, canonical_serialize, submission_from_dict
from .experiments import EXPERIMENTS, render_report, report_bytes, run_experiment
from .workload import Burst, WorkloadConfig, generate_corpus


def _cmd_generate(args: argparse.Namespace) -> int:
    burst = None
    if args.burst:
        start, duration, mult = (float(x) for x in args.burst.split(","))
        burst = Burst(start, duration, mult)
    cfg = WorkloadConfig(seed=args.seed, scale=args.scale, arrival_rate=args.arrival_rate, burst=burst)
    corpus = generate_corpus(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "corpus.jsonl", "wb") as fh:
        for submission in corpus:
            fh.write(canonical_serialize(submission))
            fh.write(b"\n")
    counts: dict[str, int] = {}
    for s in corpus:
        if not s.selfie.missing:
            key = f"selfie_{s.ground_truth.selfie_class}"
            counts[key] = counts.get(key, 0) + 1
        if not s.document.missing:
            key = f"document_{s.ground_truth.document_class}"
            counts[key] = counts.get(key, 0) + 1
    manifest = {
        "seed": cfg.seed,
        "scale": cfg.scale,
        "arrival_rate": cfg.arrival_rate,
        "submissions": len(corpus),
        "class_counts": dict(sorted(counts.items())),
    }
    (out / "manifest.json").write_bytes(canonical_serialize(manifest))
    print(f"wrote {len(corpus)} submissions to {out / 'corpus.jsonl'}")
    return 0


def load_corpus(path: str | Path):
    corpus = []
    with open(path, "rb") as fh:
        for line in fh:
            line = line.strip()
            if line:
                corpus.append(submission_from_dict(canonical_parse(line)))
    return corpus


def _cmd_run(args: argparse.Namespace) -> int:
    kwargs = {}
    if args.config:
        kwargs = json.loads(Path(args.config).read_text())
    report = run_experiment(args.experiment, args.seed, **kwargs)
    data = report_bytes(report)
    if args.out:
        Path(args.out).write_bytes(data)
        print(f"wrote {args.out}")
    print(render_report(report))
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    report = canonical_parse(Path(args.report).read_bytes())
    print(render_report(report))
    return 0


def _cmd_audit_verify(args: argparse.Namespace) -> int:
    data = Path(args.log).read_bytes()
    bad = verify_chain(data)
    records = sum(1 for line in data.splitlines() if line.strip())
    if bad is None:
        print(f"ok: {records} records, chain intact")
        return 0
    print(f"BROKEN at seq {bad}")
    return 1


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve

    serve(
        host=args.host,
        port=args.port,
        seed=args.seed,
        scale=args.scale,
        feed_interval=args.feed_interval,
        out_dir=args.out_dir,
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="kycsim", description="agentic KYC pipeline simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic corpus")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--scale", type=float, default=0.1, help="fraction of the base census")
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--arrival-rate", type=float, default=50.0)
    g.add_argument("--burst", help="start,duration,multiplier")
    g.set_defaults(func=_cmd_generate)

    r = sub.add_parser("run", help="run a named experiment")
    r.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    r.add_argument("--seed", type=int, default=42)
    r.add_argument("--dataset", help="corpus directory (experiments regenerate from seed when omitted)")
    r.add_argument("--config", help="JSON file with experiment keyword overrides")
    r.add_argument("--out", help="write report.json here")
    r.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="render a report.json")
    p.add_argument("report")
    p.set_defaults(func=_cmd_report)

    v = sub.add_parser("audit-verify", help="verify an audit log hash chain")
    v.add_argument("--log", required=True)
    v.set_defaults(func=_cmd_audit_verify)

    s = sub.add_parser("serve", help="serve the case-management API")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8400)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--scale", type=float, default=0.01)
    s.add_argument("--feed-interval", type=float, default=0.5, help="seconds between replayed case openings")
    s.add_argument("--out-dir", help="where audit.log is written")
    s.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
