"""How much the solver saves over random offloading, by data size.

For each data size the same 20-task scenario is solved once and compared
against the mean utility of one hundred random feasible placements
(uniform branch per task, naive thirds splits).  The absolute gap widens
with size: random placements waste per-bit cost on expensive branches and
pay the quadratic relay congestion for every forwarded third.
"""

import numpy as np

from edgealloc import (ScenarioConfig, SolverConfig, UtilityWeights,
                       generate_scenario, run, utility)
from edgealloc.experiments import run_baseline

weights = UtilityWeights(0.5)
print(f"{'size (bits)':>12} {'solver':>9} {'baseline mean':>14} {'gap':>9}")
gaps = []
for size in (5e3, 1e4, 1.5e4, 2e4, 2.5e4):
    scenario = generate_scenario(ScenarioConfig(
        n_tasks=20, n_sbs=3, seed=11, c_range=(size, size)))
    placement, _ = run(scenario, SolverConfig(max_iter=100, cbgp_rounds=30))
    solver_util = utility(placement, scenario, weights)
    baseline = [run_baseline(scenario, weights, seed)[1] for seed in range(100)]
    mean_base = float(np.mean(baseline))
    gaps.append(mean_base - solver_util)
    print(f"{size:>12.1e} {solver_util:>9.3f} {mean_base:>14.3f} "
          f"{gaps[-1]:>9.3f}")

print("\ngap sequence:", " -> ".join(f"{g:.1f}" for g in gaps))
