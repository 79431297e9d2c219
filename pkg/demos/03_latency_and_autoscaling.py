#!/usr/bin/env python3
"""Pipeline timing on the virtual clock.

Part one compares a monolithic sequential baseline against the parallel
agentic decomposition at zero latency variance: the task sum is 4.6 s,
the critical path 2.6 s. Part two pushes a burst workload through a
single-instance fleet and a queue-driven autoscaled fleet and compares
tail latency and throughput.
"""

from kycsim.experiments import run_table4
from kycsim.metrics import latency_percentile

report = run_table4(seed=7, latency_submissions=50, burst_submissions=200)

lat = report["latency"]
print("end-to-end verification, zero variance:")
print(f"  sequential baseline  {lat['sequential_zero_variance']['mean']:.3f} s")
print(f"  parallel agentic     {lat['parallel_zero_variance']['mean']:.3f} s")
print(f"  reduction            {lat['reduction_zero_variance'] * 100:.1f}%")
print("with lognormal service-time noise (sigma 0.15):")
print(f"  sequential           {lat['sequential_lognormal']['mean']:.3f} s")
print(f"  parallel             {lat['parallel_lognormal']['mean']:.3f} s")
print(f"  reduction            {lat['reduction_lognormal'] * 100:.1f}%")

auto = report["autoscale"]
fixed = auto["fixed_single_instance"]
scaled = auto["autoscaled"]
print("\nburst workload (3 subs/s, 3x burst for 20 s):")
print(f"  fixed single instance: p50 {fixed['latency']['p50']:.1f}s  p99 {fixed['p99']:.1f}s  "
      f"throughput {fixed['throughput']:.2f}/s")
print(f"  autoscaled (<=8):      p50 {scaled['latency']['p50']:.1f}s  p99 {scaled['p99']:.1f}s  "
      f"throughput {scaled['throughput']:.2f}/s")
print(f"  p99 reduced by {auto['p99_reduction'] * 100:.0f}%, "
      f"throughput up {auto['throughput_improvement'] * 100:.0f}%")
print(f"  peak instances per service: { {k: v for k, v in scaled['peak_instances'].items() if v > 1} }")
