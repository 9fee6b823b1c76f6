"""Experiment harness: parameter sweeps, traces, summaries, random baseline.

Writes one trace CSV per run under `<outdir>/<axis>/<value>/` and a
`summary.csv` at the root.  Utilities reported here are always recomputed
through the placement pricer, so the summary never drifts from the cost
model.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import admm, costs
from .admm import SolverConfig
from .costs import Placement, UtilityWeights
from .errors import ConfigurationError
from .scenario import Scenario, ScenarioConfig, generate_scenario

SWEEP_AXES = ("alpha", "rho", "n_tasks", "sbs_capacity", "lt_capacity", "data_size")

SUMMARY_HEADER = "sweep_value,final_utility,iters,converged,n_local,n_sbs,n_mbs"


@dataclass
class ExperimentSpec:
    scenario: ScenarioConfig
    axis: str
    values: list
    outdir: str
    repetitions: int = 1
    workers: int = 1
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigurationError(f"unknown sweep axis {self.axis!r}")
        if not self.values:
            raise ConfigurationError("sweep values must be nonempty")
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be at least 1")

    @classmethod
    def from_json(cls, src) -> "ExperimentSpec":
        if isinstance(src, str) and src.lstrip().startswith("{"):
            doc = json.loads(src)
        else:
            with open(src) as fh:
                doc = json.load(fh)
        return cls(scenario=ScenarioConfig(**doc.get("scenario", {})),
                   axis=doc["axis"], values=list(doc["values"]),
                   outdir=doc["outdir"], repetitions=doc.get("repetitions", 1),
                   workers=doc.get("workers", 1),
                   solver=SolverConfig(**doc.get("solver", {})))


def apply_axis(scenario_config: ScenarioConfig, solver_config: SolverConfig,
               axis: str, value):
    """Return the (scenario config, solver config) pair for one sweep point."""
    if axis == "alpha":
        return scenario_config, replace(solver_config, alpha=float(value))
    if axis == "rho":
        return scenario_config, replace(solver_config, rho=float(value))
    if axis == "n_tasks":
        return replace(scenario_config, n_tasks=int(value)), solver_config
    if axis == "sbs_capacity":
        return replace(scenario_config, f_sbs=float(value)), solver_config
    if axis == "lt_capacity":
        return replace(scenario_config, f_local=float(value)), solver_config
    if axis == "data_size":
        return replace(scenario_config, c_range=(float(value), float(value))), solver_config
    raise ConfigurationError(f"unknown sweep axis {axis!r}")


def _branch_histogram(placement: Placement) -> tuple[int, int, int]:
    n = len(placement.y)
    branches = [placement.branch_of(j) for j in range(n)]
    n_local = sum(1 for b in branches if b == "local")
    n_mbs = sum(1 for b in branches if b == "mbs")
    return n_local, n - n_local - n_mbs, n_mbs


def _run_point(spec: ExperimentSpec, value, rep: int) -> dict:
    scen_cfg, solver_cfg = apply_axis(spec.scenario, spec.solver, spec.axis, value)
    scen_cfg = replace(scen_cfg, seed=scen_cfg.seed + rep)
    scenario = generate_scenario(scen_cfg)
    placement, trace = admm.run(scenario, solver_cfg)
    final_utility = costs.utility(placement, scenario,
                                  UtilityWeights(solver_cfg.alpha))

    point_dir = os.path.join(spec.outdir, spec.axis, str(value))
    os.makedirs(point_dir, exist_ok=True)
    name = "trace.csv" if rep == 0 else f"trace_{rep}.csv"
    trace.to_csv(os.path.join(point_dir, name))

    n_local, n_sbs, n_mbs = _branch_histogram(placement)
    return {"sweep_value": value, "final_utility": final_utility,
            "iters": len(trace.records), "converged": trace.converged,
            "n_local": n_local, "n_sbs": n_sbs, "n_mbs": n_mbs}


def run_experiment(spec: ExperimentSpec) -> list:
    """Execute every (value, repetition) run, write traces and the summary,
    and return the summary rows.  Runs are deterministic per seed; sweep
    points execute concurrently up to the configured worker count."""
    os.makedirs(spec.outdir, exist_ok=True)
    jobs = [(value, rep) for value in spec.values for rep in range(spec.repetitions)]

    def job(args):
        value, rep = args
        try:
            return _run_point(spec, value, rep)
        except RuntimeError as exc:  # keep sweeping past a non-converged point
            return {"sweep_value": value, "final_utility": float("nan"),
                    "iters": 0, "converged": False,
                    "n_local": 0, "n_sbs": 0, "n_mbs": 0, "error": str(exc)}

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(job, jobs))
    else:
        rows = [job(j) for j in jobs]

    lines = [SUMMARY_HEADER]
    for row in rows:
        lines.append(f"{row['sweep_value']},{row['final_utility']:.17g},"
                     f"{row['iters']},{row['converged']},"
                     f"{row['n_local']},{row['n_sbs']},{row['n_mbs']}")
    with open(os.path.join(spec.outdir, "summary.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return rows


def placement_profile(scenario_config: ScenarioConfig, sizes,
                      weights: UtilityWeights | None = None,
                      solver_config: SolverConfig | None = None) -> list:
    """Solve single-size scenarios across a data-size sweep and report the
    chosen branch with the split fractions at each size."""
    weights = weights or UtilityWeights()
    solver_config = solver_config or SolverConfig(alpha=weights.alpha)
    rows = []
    for size in sizes:
        cfg = replace(scenario_config, c_range=(float(size), float(size)))
        scenario = generate_scenario(cfg)
        placement, _ = admm.run(scenario, solver_config)
        n = scenario.n_tasks
        branches = [placement.branch_of(j) for j in range(n)]
        frac_local = np.zeros(n)
        frac_mbs = np.zeros(n)
        frac_sbs = np.zeros(n)
        for j, b in enumerate(branches):
            if b == "local":
                frac_local[j] = 1.0
            elif b == "mbs":
                frac_mbs[j] = 1.0
            else:
                i = int(b[3:]) - 1
                c = scenario.tasks[j].c
                frac_local[j] = placement.c0[i, j] / c
                frac_mbs[j] = placement.c1[i, j] / c
                frac_sbs[j] = placement.ci[i, j] / c
        rows.append({"size": float(size),
                     "branches": branches,
                     "frac_local": float(frac_local.mean()),
                     "frac_mbs": float(frac_mbs.mean()),
                     "frac_sbs": float(frac_sbs.mean())})
    return rows


@dataclass
class RandomBaseline:
    """Uniformly random feasible branch per task with naive thirds splits;
    resamples on deadline violations."""

    seed: int = 0

    def run(self, scenario: Scenario, weights: UtilityWeights):
        return run_baseline(scenario, weights, self.seed)


def run_baseline(scenario: Scenario, weights: UtilityWeights,
                 seed: int) -> tuple[Placement, float]:
    """Random feasible placement: each task draws uniformly among its
    individually deadline-feasible branches (terminal, MBS, any SBS with
    naive thirds split), capacity overflows demote to the MBS, and tasks
    violated by congestion are retried up to a fixed pass budget before
    falling back to their fastest branch."""
    rng = np.random.default_rng(seed)
    s, n = scenario.n_sbs, scenario.n_tasks
    t_max = scenario.t_max_array()
    h_min = scenario.config.h_min
    cap = int(np.floor(1.0 / h_min + 1e-9))

    tables = costs.build_cost_tables(scenario, weights.alpha,
                                     np.zeros((s, n)), np.zeros((s, n)))
    c = scenario.c_array()

    def standalone_ok(branch: int, j: int) -> bool:
        if branch == 0:
            return tables.t_local[j] <= t_max[j]
        if branch == s + 1:
            return tables.t_mbs[j] <= t_max[j]
        i = branch - 1
        return _baseline_branch_delay(tables, i, j, c[j] / 3.0, 1.0) <= t_max[j]

    feasible_sets = []
    for j in range(n):
        branches = [b for b in range(s + 2) if standalone_ok(b, j)]
        if not branches:
            branches = [int(np.argmin(
                [tables.t_local[j]] + [np.inf] * s + [tables.t_mbs[j]]))]
        feasible_sets.append(branches)

    choice = np.array([rng.choice(feasible_sets[j]) for j in range(n)])

    for _ in range(5):
        for i in range(s):
            members = np.nonzero(choice == i + 1)[0]
            if len(members) > cap:
                for j in members[cap:]:
                    choice[j] = s + 1 if (s + 1) in feasible_sets[j] else feasible_sets[j][0]
        placement = _assemble_baseline(scenario, choice)
        report = costs.check_feasibility(placement, scenario)
        if report.ok:
            break
        violated = {j for kind, j in report.violations if kind == "deadline"}
        if not violated:
            break
        for j in violated:
            others = [b for b in feasible_sets[j] if b != choice[j]]
            choice[j] = rng.choice(others) if others else feasible_sets[j][0]
    else:
        placement = _assemble_baseline(scenario, choice)

    return placement, costs.utility(placement, scenario, weights)


def _baseline_branch_delay(tables, i, j, third, h):
    c = tables.c[j]
    wired = tables.w2[i, j] * third * third + tables.w1[i, j] * third + tables.w0[i, j]
    return (tables.d_c0[j] * third + (c - third) / tables.rate[i, j] + wired
            + tables.u_over_fs[i, j] / h * third + tables.d_mbs_exec[j] * third)


def _assemble_baseline(scenario: Scenario, choice: np.ndarray) -> Placement:
    s, n = scenario.n_sbs, scenario.n_tasks
    c = scenario.c_array()
    x = np.zeros((s, n))
    y = np.zeros(n)
    z = np.zeros(n)
    c0 = np.zeros((s, n))
    c1 = np.zeros((s, n))
    ci = np.zeros((s, n))
    h = np.ones((s, n))
    for j in range(n):
        b = int(choice[j])
        if b == 0:
            z[j] = 1.0
        elif b == s + 1:
            y[j] = 1.0
        else:
            x[b - 1, j] = 1.0
            c0[b - 1, j] = c1[b - 1, j] = ci[b - 1, j] = c[j] / 3.0
    for i in range(s):
        members = np.nonzero(x[i] > 0)[0]
        if len(members):
            h[i, members] = min(1.0, 1.0 / len(members))
    return Placement(x=x, y=y, z=z, c0=c0, c1=c1, ci=ci, h=h)
