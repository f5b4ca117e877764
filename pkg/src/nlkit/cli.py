"""Benchmark command line: single solves, work-precision sweeps, and
problem-size scaling runs with CSV output.

Commands:
  solve <problem> <algorithm> [--abstol F] [--maxiters N]
  wp --problems ... --algorithms ... --tols 1e-2..1e-10 --reps K --out FILE
  scaling --family brusselator2d --sizes 8,16,32 --algorithms ... --out FILE
  list problems|algorithms

NLKIT_SEED overrides the configured seed. Timings are wall-clock medians
over the requested repetitions with one discarded warmup solve; residuals
in every row are re-evaluated from the returned iterate.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import multiprocessing
import os
import statistics
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import problems, solvers
from .core import RetCode, SolveOptions, result_to_json

WP_HEADER = ["problem", "algorithm", "abstol", "runtime_ns", "resid_inf",
             "retcode", "nf", "njac", "nlinsolve"]
SCALING_HEADER = ["size", "algorithm", "runtime_ns", "resid_inf", "retcode"]


@dataclass(frozen=True)
class BenchConfig:
    """A work-precision run matrix: problems x algorithms x tolerances."""

    problems: tuple
    algorithms: tuple
    tols: tuple
    reps: int = 5
    maxiters: int = 1000
    seed: int = 0
    jobs: int = 1
    out: str = "-"

    def __post_init__(self):
        if any(b >= a for a, b in zip(self.tols, self.tols[1:])) or not self.tols:
            raise ValueError("tolerance grid must be strictly decreasing")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")


def _seed(config_seed):
    env = os.environ.get("NLKIT_SEED")
    return int(env) if env is not None else config_seed


def _measured_resid(problem, u_star):
    r = problem.f(u_star)
    return float(np.max(np.abs(r))) if r.size else 0.0


def _run_once(problem_id, algorithm, abstol, maxiters):
    desc = problems.get_problem(problem_id)
    options = SolveOptions(abstol=abstol, maxiters=maxiters)
    t0 = time.perf_counter_ns()
    result = solvers.run_preset(algorithm, desc.problem, options)
    result.stats.wall_time = (time.perf_counter_ns() - t0) / 1e9
    return desc, result


def cmd_solve(args):
    algorithm = args.algorithm
    if args.precond:
        # e.g. "newton-krylov --precond ilu0" selects the ilu0 variant
        algorithm = f"{args.algorithm}-{args.precond}"
    try:
        desc, result = _run_once(args.problem, algorithm, args.abstol,
                                 args.maxiters)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    payload = json.loads(result_to_json(result))
    payload["problem"] = desc.id
    payload["algorithm"] = algorithm
    payload["resid_inf_measured"] = _measured_resid(desc.problem, result.u_star)
    print(json.dumps(payload))
    return 0 if result.success else 1


def _parse_tols(spec):
    """Either a comma list or a log-spaced range '1e-2..1e-10' by decades."""
    if ".." in spec:
        lo_s, hi_s = spec.split("..")
        start, stop = float(lo_s), float(hi_s)
        if not stop < start:
            raise ValueError("tolerance range must be strictly decreasing")
        e0, e1 = math.log10(start), math.log10(stop)
        if abs(e0 - round(e0)) < 1e-9 and abs(e1 - round(e1)) < 1e-9:
            return [10.0 ** e for e in range(round(e0), round(e1) - 1, -1)]
        tols = []
        t = start
        while t >= stop * (1 - 1e-12):
            tols.append(t)
            t /= 10.0
        return tols
    tols = [float(t) for t in spec.split(",")]
    if any(b >= a for a, b in zip(tols, tols[1:])):
        raise ValueError("tolerance grid must be strictly decreasing")
    return tols


def _wp_cell(problem_id, algorithm, abstol, maxiters, reps, seed):
    desc = problems.get_problem(problem_id)
    options = SolveOptions(abstol=abstol, maxiters=maxiters)
    solvers.run_preset(algorithm, desc.problem, options, seed)  # warmup
    times = []
    result = None
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        result = solvers.run_preset(algorithm, desc.problem, options, seed)
        times.append(time.perf_counter_ns() - t0)
    return {
        "problem": desc.id,
        "algorithm": algorithm,
        "abstol": repr(abstol),
        "runtime_ns": int(statistics.median(times)),
        "resid_inf": repr(_measured_resid(desc.problem, result.u_star)),
        "retcode": result.retcode.value,
        "nf": result.stats.nf,
        "njac": result.stats.njac,
        "nlinsolve": result.stats.nlinsolve,
    }


def run_wp(config):
    """Execute a work-precision matrix; returns the CSV rows."""
    cells = [(p, a, t, config.maxiters, config.reps, config.seed)
             for p in config.problems for a in config.algorithms
             for t in config.tols]
    if config.jobs > 1:
        # cells are isolated solves; timing cells each stay on one worker
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(_wp_cell_star, cells))
    else:
        rows = [_wp_cell(*cell) for cell in cells]
    return rows


def cmd_wp(args):
    config = BenchConfig(problems=tuple(args.problems.split(",")),
                         algorithms=tuple(args.algorithms.split(",")),
                         tols=tuple(_parse_tols(args.tols)),
                         reps=args.reps, maxiters=args.maxiters,
                         seed=_seed(args.seed), jobs=args.jobs, out=args.out)
    _write_csv(config.out, WP_HEADER, run_wp(config))
    return 0


def _wp_cell_star(cell):
    return _wp_cell(*cell)


def _scaling_child(conn, family, size, algorithm, abstol, maxiters):
    if family == "brusselator2d":
        desc = problems.brusselator_2d(size)
    else:
        desc = problems.generalized_rosenbrock(size)
    options = SolveOptions(abstol=abstol, maxiters=maxiters)
    t0 = time.perf_counter_ns()
    result = solvers.run_preset(algorithm, desc.problem, options)
    elapsed = time.perf_counter_ns() - t0
    conn.send((elapsed, _measured_resid(desc.problem, result.u_star),
               result.retcode.value))
    conn.close()


def run_scaling_cell(family, size, algorithm, abstol, maxiters, timeout_s):
    """One (size, algorithm) cell in a subprocess, killed on timeout."""
    ctx = multiprocessing.get_context("fork")
    parent, child = ctx.Pipe()
    proc = ctx.Process(target=_scaling_child,
                       args=(child, family, size, algorithm, abstol, maxiters))
    t0 = time.perf_counter_ns()
    proc.start()
    proc.join(timeout_s)
    if proc.is_alive():
        proc.terminate()
        proc.join()
        return {"size": size, "algorithm": algorithm,
                "runtime_ns": time.perf_counter_ns() - t0,
                "resid_inf": "", "retcode": RetCode.TIMEOUT.value}
    if parent.poll():
        elapsed, resid, retcode = parent.recv()
        return {"size": size, "algorithm": algorithm, "runtime_ns": elapsed,
                "resid_inf": repr(resid), "retcode": retcode}
    return {"size": size, "algorithm": algorithm,
            "runtime_ns": time.perf_counter_ns() - t0,
            "resid_inf": "", "retcode": "Crashed"}


def cmd_scaling(args):
    if args.family not in ("brusselator2d", "generalized_rosenbrock"):
        print(f"error: unknown family {args.family!r}", file=sys.stderr)
        return 2
    sizes = [int(s) for s in args.sizes.split(",")]
    algorithms = args.algorithms.split(",")
    rows = []
    for size in sizes:
        for algorithm in algorithms:
            rows.append(run_scaling_cell(args.family, size, algorithm,
                                         args.abstol, args.maxiters,
                                         args.timeout_s))
    _write_csv(args.out, SCALING_HEADER, rows)
    return 0


def _write_csv(path, header, rows):
    fh = open(path, "w", newline="") if path != "-" else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if path != "-":
            fh.close()


def cmd_list(args):
    if args.what == "problems":
        for desc in problems.list_problems():
            tags = ",".join(sorted(desc.tags))
            print(f"{desc.id}\tn={desc.n}\t[{tags}]")
    else:
        for name in solvers.list_algorithms():
            print(name)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="nlkit",
                                     description="nonlinear-solver benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one solve, print JSON result")
    p_solve.add_argument("problem")
    p_solve.add_argument("algorithm")
    p_solve.add_argument("--abstol", type=float, default=1e-8)
    p_solve.add_argument("--maxiters", type=int, default=1000)
    p_solve.add_argument("--precond", choices=["ilu0"], default=None)
    p_solve.set_defaults(func=cmd_solve)

    p_wp = sub.add_parser("wp", help="work-precision sweep to CSV")
    p_wp.add_argument("--problems", required=True)
    p_wp.add_argument("--algorithms", required=True)
    p_wp.add_argument("--tols", default="1e-2..1e-10")
    p_wp.add_argument("--reps", type=int, default=5)
    p_wp.add_argument("--maxiters", type=int, default=1000)
    p_wp.add_argument("--seed", type=int, default=0)
    p_wp.add_argument("--jobs", type=int, default=1)
    p_wp.add_argument("--out", default="-")
    p_wp.set_defaults(func=cmd_wp)

    p_sc = sub.add_parser("scaling", help="problem-size scaling runs to CSV")
    p_sc.add_argument("--family", required=True)
    p_sc.add_argument("--sizes", required=True)
    p_sc.add_argument("--algorithms", required=True)
    p_sc.add_argument("--abstol", type=float, default=1e-6)
    p_sc.add_argument("--maxiters", type=int, default=1000)
    p_sc.add_argument("--timeout-s", type=float, default=600.0)
    p_sc.add_argument("--out", default="-")
    p_sc.set_defaults(func=cmd_scaling)

    p_list = sub.add_parser("list", help="list problems or algorithms")
    p_list.add_argument("what", choices=["problems", "algorithms"])
    p_list.set_defaults(func=cmd_list)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
