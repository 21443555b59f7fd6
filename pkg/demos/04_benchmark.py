"""
Benchmarking the three solvers
==============================

A reduced version of the warehouse experiment: cross product of task
frequencies and agent counts on the bundled 15x21 warehouse map, a few
seeds each, all three solvers.  Writes the standard CSV artifacts and
prints the summary grid.  The full-scale sweep is available through the
command line: `mapd sweep --map maps/warehouse_15x21.map ...`.
"""

from collections import defaultdict
from pathlib import Path

from mapd.cli import run_sweep, sweep_jobs

HERE = Path(__file__).resolve().parent
MAP = HERE.parent / "maps" / "warehouse_15x21.map"
OUT = HERE / "benchmark_out"

jobs = sweep_jobs(MAP.read_text(), agents=[10], freqs=["0.5", "2"],
                  seeds=[0, 1], n_tasks=60, algos=["tp", "tpts", "central"],
                  window=100, cap=None)
print(f"running {len(jobs)} simulations...")
results = run_sweep(jobs, OUT, jobs_n=2)

service = defaultdict(dict)
runtime = defaultdict(dict)
for algo, freq, agents, seed, metrics in results:
    cell = (freq, agents)
    service[cell].setdefault(algo, []).append(metrics.avg_service_time)
    runtime[cell].setdefault(algo, []).append(metrics.avg_runtime_ms)

print(f"\nartifacts in {OUT}/ (summary.csv, per-run tasks_* and window_* files)\n")
header = f"{'freq':>6} {'agents':>6} | {'tp':>8} {'tpts':>8} {'central':>8}"
print("mean service time")
print(header)
for cell in sorted(service, key=lambda c: (float(c[0]), c[1])):
    row = {a: sum(v) / len(v) for a, v in service[cell].items()}
    print(f"{cell[0]:>6} {cell[1]:>6} | {row['tp']:8.2f} {row['tpts']:8.2f} {row['central']:8.2f}")
print("\nmean decision time per timestep (ms)")
print(header)
for cell in sorted(runtime, key=lambda c: (float(c[0]), c[1])):
    row = {a: sum(v) / len(v) for a, v in runtime[cell].items()}
    print(f"{cell[0]:>6} {cell[1]:>6} | {row['tp']:8.2f} {row['tpts']:8.2f} {row['central']:8.2f}")

# The tendency matches the design trade-off: more central coordination buys
# shorter service times and costs more computation per timestep.
