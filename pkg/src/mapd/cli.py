"""Command-line entry point: run single simulations, parameter sweeps,
well-formedness checks, and task-stream generation.

Exit codes: 0 success, 1 configuration error (including a failed
well-formedness check), 2 simulation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from multiprocessing import Pool
from pathlib import Path as FilePath

from mapd.cbs import CbsFailure
from mapd.central import InfeasibleError
from mapd.grid import GridMap, MapdInstance, MapParseError, check_well_formed, parse_map
from mapd.sim import (
    Metrics,
    SimConfig,
    SimulationError,
    audit_collisions,
    run,
    summary_csv,
    summary_row,
    tasks_csv,
    window_csv,
)
from mapd.tasks import as_frequency, generate_stream, tasks_from_csv, tasks_to_csv


class CliError(Exception):
    """Configuration problem; maps to exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); we want exit(1)
        raise CliError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="mapd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("--scenario", help="key=value scenario file; flags override it")
        p.add_argument("--map", help="map file path")
        p.add_argument("--agents", help="number of agents (first N non-task endpoints)")
        p.add_argument("--starts", help="file with one 'row col' start per line")
        p.add_argument("--tasks", help="task CSV file")
        p.add_argument("--gen", help="generate tasks: n,frequency,seed")
        p.add_argument("--seed", type=int, help="override the generator seed")

    p_run = sub.add_parser("run", help="simulate one scenario and write CSVs")
    common(p_run)
    p_run.add_argument("--algo", choices=("tp", "tpts", "central"))
    p_run.add_argument("--window", type=int, default=100)
    p_run.add_argument("--cap", type=int)
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--free-request", action="store_true",
                       help="let moving free agents request the token too")
    p_run.add_argument("--events", help="write a JSON-lines event log here")
    p_run.add_argument("--memoize", action="store_true",
                       help="central only: skip replans when nothing changed")

    p_sweep = sub.add_parser("sweep", help="cross-product benchmark, combined summary")
    p_sweep.add_argument("--map", required=True)
    p_sweep.add_argument("--agents", required=True, help="comma list, e.g. 10,20")
    p_sweep.add_argument("--freq", required=True, help="comma list, e.g. 0.5,1,2")
    p_sweep.add_argument("--seeds", type=int, default=10, help="seeds 0..N-1")
    p_sweep.add_argument("--tasks", type=int, default=100, help="tasks per run")
    p_sweep.add_argument("--algos", default="tp,tpts,central")
    p_sweep.add_argument("--window", type=int, default=100)
    p_sweep.add_argument("--cap", type=int)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--memoize", action="store_true")

    p_check = sub.add_parser("check", help="report well-formedness violations")
    common(p_check)

    p_gen = sub.add_parser("gen", help="emit a task CSV")
    p_gen.add_argument("--map", required=True)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--frequency", required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True, help="output CSV path")
    return parser


def _apply_scenario(args: argparse.Namespace) -> None:
    if not getattr(args, "scenario", None):
        return
    path = FilePath(args.scenario)
    if not path.is_file():
        raise CliError(f"scenario file not found: {path}")
    base = path.parent
    bools = {"free_request"}
    paths = {"map", "starts", "tasks", "out", "events"}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if not hasattr(args, key):
            raise CliError(f"{path}:{lineno}: unknown key {key!r}")
        if getattr(args, key) not in (None, False):
            continue  # explicit flags win
        if key in bools:
            setattr(args, key, value.lower() in ("1", "true", "yes"))
        elif key in paths:
            setattr(args, key, str((base / value)) if not FilePath(value).is_absolute() else value)
        else:
            setattr(args, key, value)


def _load_map(path_str: str | None) -> GridMap:
    if not path_str:
        raise CliError("--map is required")
    path = FilePath(path_str)
    if not path.is_file():
        raise CliError(f"map file not found: {path}")
    try:
        return parse_map(path.read_text())
    except MapParseError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _load_starts(grid: GridMap, args: argparse.Namespace) -> list:
    if args.starts and args.agents:
        raise CliError("give exactly one of --agents or --starts")
    if args.starts:
        starts = []
        for lineno, raw in enumerate(FilePath(args.starts).read_text().splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise CliError(f"{args.starts}:{lineno}: expected 'row col'")
            starts.append((int(parts[0]), int(parts[1])))
        return starts
    if args.agents:
        n = int(args.agents)
        parking = sorted(grid.nontask_endpoints)
        if n > len(parking):
            raise CliError(f"{n} agents requested but only {len(parking)} non-task endpoints")
        return parking[:n]
    raise CliError("give one of --agents or --starts")


def _load_tasks(grid: GridMap, args: argparse.Namespace) -> tuple[list, str, int]:
    """Returns (stream, frequency label, seed)."""
    if bool(args.tasks) == bool(args.gen):
        raise CliError("give exactly one of --tasks or --gen")
    if args.tasks:
        text = FilePath(args.tasks).read_text()
        try:
            stream = tasks_from_csv(text)
        except ValueError as exc:
            raise CliError(f"{args.tasks}: {exc}") from exc
        return stream, "-", args.seed if args.seed is not None else 0
    parts = args.gen.split(",")
    if len(parts) not in (2, 3):
        raise CliError("--gen expects n,frequency[,seed]")
    n = int(parts[0])
    freq = parts[1]
    seed = int(parts[2]) if len(parts) == 3 else 0
    if args.seed is not None:
        seed = args.seed
    try:
        stream = generate_stream(grid, n, freq, seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    return stream, freq, seed


def _cmd_run(args: argparse.Namespace) -> int:
    _apply_scenario(args)
    grid = _load_map(args.map)
    starts = _load_starts(grid, args)
    try:
        instance = MapdInstance(grid=grid, agent_starts=starts)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    stream, freq_label, seed = _load_tasks(grid, args)
    algo = args.algo or "tp"
    if algo in ("tp", "tpts"):
        verdict = check_well_formed(instance, stream)
        if not verdict.ok:
            print("warning: instance is not well-formed; running best-effort:",
                  file=sys.stderr)
            for v in verdict.violations:
                print(f"  {v}", file=sys.stderr)
    config = SimConfig(algorithm=algo, window=args.window, cap=args.cap,
                       free_request=bool(args.free_request), memoize=bool(args.memoize))
    events: list | None = [] if args.events else None
    metrics, trajectory = run(instance, stream, config, events=events)
    bad = audit_collisions(trajectory)
    if bad:
        print("collision audit failed:", *bad, sep="\n  ", file=sys.stderr)
        return 2
    out = FilePath(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    tag = f"{algo}_f{freq_label}_a{len(starts)}_s{seed}"
    (out / f"tasks_{tag}.csv").write_text(tasks_csv(metrics))
    (out / f"window_{tag}.csv").write_text(window_csv(metrics))
    (out / "summary.csv").write_text(
        summary_csv([summary_row(algo, len(starts), freq_label, seed, metrics)]))
    if args.events:
        with open(args.events, "w") as fh:
            for event in events:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
    print(f"{algo}: {len(metrics.tasks)} tasks, makespan {metrics.makespan}, "
          f"avg service {metrics.avg_service_time:.2f}")
    return 0


def _sweep_one(job: tuple) -> tuple:
    map_text, starts_n, freq, seed, n_tasks, algo, window, cap, memoize = job
    grid = parse_map(map_text)
    starts = sorted(grid.nontask_endpoints)[:starts_n]
    instance = MapdInstance(grid=grid, agent_starts=starts)
    stream = generate_stream(grid, n_tasks, freq, seed)
    config = SimConfig(algorithm=algo, window=window, cap=cap, memoize=memoize)
    metrics, trajectory = run(instance, stream, config)
    bad = audit_collisions(trajectory)
    if bad:
        raise SimulationError(f"collision audit failed: {bad[0]}")
    return (algo, freq, starts_n, seed, metrics)


def sweep_jobs(map_text: str, agents: list[int], freqs: list[str], seeds: list[int],
               n_tasks: int, algos: list[str], window: int, cap: int | None,
               memoize: bool = False) -> list[tuple]:
    return [
        (map_text, a, f, s, n_tasks, algo, window, cap, memoize)
        for algo in algos for f in freqs for a in agents for s in seeds
    ]


def run_sweep(jobs: list[tuple], out_dir: FilePath, jobs_n: int = 1) -> list[tuple]:
    """Execute sweep jobs (optionally in parallel) and write artifacts;
    returns (algo, freq, agents, seed, metrics) tuples in sorted order."""
    if jobs_n > 1:
        with Pool(jobs_n) as pool:
            results = pool.map(_sweep_one, jobs)
    else:
        results = [_sweep_one(job) for job in jobs]
    results.sort(key=lambda r: (r[0], as_frequency(r[1]), r[2], r[3]))
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for algo, freq, agents_n, seed, metrics in results:
        tag = f"{algo}_f{freq}_a{agents_n}_s{seed}"
        (out_dir / f"tasks_{tag}.csv").write_text(tasks_csv(metrics))
        (out_dir / f"window_{tag}.csv").write_text(window_csv(metrics))
        rows.append(summary_row(algo, agents_n, freq, seed, metrics))
    (out_dir / "summary.csv").write_text(summary_csv(rows))
    return results


def _cmd_sweep(args: argparse.Namespace) -> int:
    map_path = FilePath(args.map)
    if not map_path.is_file():
        raise CliError(f"map file not found: {map_path}")
    map_text = map_path.read_text()
    try:
        parse_map(map_text)
    except MapParseError as exc:
        raise CliError(f"{map_path}: {exc}") from exc
    agents = [int(x) for x in args.agents.split(",") if x]
    freqs = [x for x in args.freq.split(",") if x]
    for f in freqs:
        as_frequency(f)
    algos = [x for x in args.algos.split(",") if x]
    for algo in algos:
        if algo not in ("tp", "tpts", "central"):
            raise CliError(f"unknown algorithm {algo!r}")
    jobs = sweep_jobs(map_text, agents, freqs, list(range(args.seeds)),
                      args.tasks, algos, args.window, args.cap, args.memoize)
    run_sweep(jobs, FilePath(args.out), jobs_n=max(1, args.jobs))
    print(f"sweep complete: {len(jobs)} runs -> {args.out}/summary.csv")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    _apply_scenario(args)
    grid = _load_map(args.map)
    starts = _load_starts(grid, args)
    try:
        instance = MapdInstance(grid=grid, agent_starts=starts)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.tasks or args.gen:
        stream, _, _ = _load_tasks(grid, args)
    else:
        stream = []
    verdict = check_well_formed(instance, stream)
    if verdict.ok:
        print("well-formed")
        return 0
    for v in verdict.violations:
        print(str(v), file=sys.stderr)
    return 1


def _cmd_gen(args: argparse.Namespace) -> int:
    grid = _load_map(args.map)
    try:
        stream = generate_stream(grid, args.n, args.frequency, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    FilePath(args.out).write_text(tasks_to_csv(stream))
    print(f"wrote {len(stream)} tasks to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_gen(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SimulationError, CbsFailure, InfeasibleError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
