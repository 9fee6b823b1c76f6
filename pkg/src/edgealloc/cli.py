"""Command line harness.

Subcommands: `generate` (scenario JSON from a config), `solve` (one
consensus run with trace and placement outputs), `oracle` (exhaustive
reference on a small instance), `sweep` (experiment spec), `baseline`
(random feasible placement).  All file formats are JSON except the trace
and summary CSVs.
"""

from __future__ import annotations

import argparse
import json
import os

from . import admm, costs, experiments, oracle
from .admm import SolverConfig
from .costs import UtilityWeights
from .scenario import Scenario, ScenarioConfig, generate_scenario


def _placement_dict(placement) -> dict:
    return {"x": placement.x.tolist(), "y": placement.y.tolist(),
            "z": placement.z.tolist(), "c0": placement.c0.tolist(),
            "c1": placement.c1.tolist(), "ci": placement.ci.tolist(),
            "h": placement.h.tolist(),
            "branches": [placement.branch_of(j) for j in range(len(placement.y))]}


def _cmd_generate(args) -> int:
    if args.config:
        with open(args.config) as fh:
            config = ScenarioConfig(**json.load(fh))
    else:
        config = ScenarioConfig(n_tasks=args.n_tasks, n_sbs=args.n_sbs,
                                seed=args.seed)
    scenario = generate_scenario(config)
    scenario.to_json(args.out)
    print(f"wrote scenario with {scenario.n_tasks} tasks / "
          f"{len(scenario.stations)} stations to {args.out}")
    return 0


def _cmd_solve(args) -> int:
    scenario = Scenario.from_json(args.scenario)
    config = SolverConfig(rho=args.rho, max_iter=args.max_iter,
                          tol_primal=args.tol, tol_dual=args.tol,
                          alpha=args.alpha, parallelism=args.parallelism,
                          seed=args.seed, record_timing=not args.no_timing)
    placement, trace = admm.run(scenario, config)
    util = costs.utility(placement, scenario, UtilityWeights(args.alpha))

    os.makedirs(args.out, exist_ok=True)
    trace.to_csv(os.path.join(args.out, "trace.csv"))
    with open(os.path.join(args.out, "placement.json"), "w") as fh:
        json.dump({"utility": util, "converged": trace.converged,
                   "iterations": len(trace.records),
                   "placement": _placement_dict(placement)}, fh, indent=1)
    status = "converged" if trace.converged else "not converged"
    print(f"utility {util:.6g} after {len(trace.records)} iterations ({status}); "
          f"outputs in {args.out}")
    return 0


def _cmd_oracle(args) -> int:
    scenario = Scenario.from_json(args.scenario)
    result = oracle.enumerate_optimum(scenario, UtilityWeights(args.alpha),
                                      grid_resolution=args.grid)
    result.to_json(args.out)
    if result.feasible:
        print(f"optimum {result.utility:.6g} over {result.n_enumerated} "
              f"assignments; wrote {args.out}")
        return 0
    print(f"no feasible assignment among {result.n_enumerated}; wrote {args.out}")
    return 1


def _cmd_sweep(args) -> int:
    spec = experiments.ExperimentSpec.from_json(args.spec)
    rows = experiments.run_experiment(spec)
    print(f"{len(rows)} runs; summary at {os.path.join(spec.outdir, 'summary.csv')}")
    return 0


def _cmd_baseline(args) -> int:
    scenario = Scenario.from_json(args.scenario)
    placement, util = experiments.run_baseline(scenario,
                                               UtilityWeights(args.alpha),
                                               args.seed)
    n = len(placement.y)
    branches = [placement.branch_of(j) for j in range(n)]
    print(json.dumps({"utility": util, "seed": args.seed,
                      "n_local": branches.count("local"),
                      "n_mbs": branches.count("mbs"),
                      "n_sbs": n - branches.count("local") - branches.count("mbs")}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgealloc",
        description="three-tier task allocation: consensus solver, oracle, sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a scenario JSON from a config")
    p.add_argument("--config", help="ScenarioConfig JSON file")
    p.add_argument("--n-tasks", type=int, default=100)
    p.add_argument("--n-sbs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("solve", help="run the consensus solver on a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--no-timing", action="store_true",
                   help="zero the wall_ms column for reproducible traces")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("oracle", help="exhaustive optimum of a small instance")
    p.add_argument("--scenario", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("sweep", help="run an experiment spec")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("baseline", help="random feasible placement utility")
    p.add_argument("--scenario", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_baseline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
