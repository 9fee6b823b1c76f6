"""Parallel multi-block consensus loop.

One iteration: (a) per-task local blocks solved concurrently against a
read-only snapshot (split branch via block-coordinate gradient projection,
terminal and macro branches by exact binary comparison), (b) the global
block solved per task by the interior-point machinery, (c) dual ascent on
the consensus gaps, (d) trace bookkeeping.  Interference, relay congestion
and resource shares are frozen once per iteration.  The engine owns its
state exclusively; task chunks touch disjoint slices, so results are
bitwise identical at any parallelism degree.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import costs, global_block, local_blocks
from .costs import CostTables, Placement, UtilityWeights
from .errors import ConfigurationError, InfeasibleTaskError
from .scenario import Scenario


@dataclass
class SolverConfig:
    rho: float = 1.0
    max_iter: int = 200
    tol_primal: float = 1e-4
    tol_dual: float = 1e-4
    alpha: float = 0.5
    parallelism: int = 1
    seed: int = 0
    # corner-penalty weight of the split block, in normalized cost units;
    # besides pushing fractional assignments to corners it acts as flip
    # hysteresis against congestion-feedback jitter, so it must exceed the
    # per-iteration cost noise while staying below real branch-cost gaps
    delta: float = 0.3
    cbgp_rounds: int = 50
    cbgp_tol: float = 1e-6
    newton_tol: float = 1e-6
    record_timing: bool = True

    def __post_init__(self):
        if self.rho <= 0:
            raise ConfigurationError("rho must be positive")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be at least 1")
        if self.tol_primal <= 0 or self.tol_dual <= 0:
            raise ConfigurationError("tolerances must be positive")
        if not (0.0 <= self.alpha <= 1.0):
            raise ConfigurationError("alpha must lie in [0, 1]")
        if self.parallelism < 1:
            raise ConfigurationError("parallelism must be at least 1")


@dataclass
class ConsensusState:
    """Globals, local copies, duals and splits; the whole iterate."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    x_hat: np.ndarray
    y_hat: np.ndarray
    z_hat: np.ndarray
    dual_x: np.ndarray
    dual_y: np.ndarray
    dual_z: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    ci: np.ndarray
    R: np.ndarray
    r: np.ndarray
    rho: float
    k: int = 0
    prev_x: np.ndarray | None = None
    prev_y: np.ndarray | None = None
    prev_z: np.ndarray | None = None


def init_state(scenario: Scenario, config: SolverConfig) -> ConsensusState:
    """Duals at zero, uniform relaxed assignments, thirds splits, full
    resource share."""
    s, n = scenario.n_sbs, scenario.n_tasks
    share = 1.0 / (s + 2)
    c = scenario.c_array()
    third = np.tile(c / 3.0, (s, 1)) if s else np.zeros((0, n))
    x = np.full((s, n), share)
    return ConsensusState(
        x=x.copy(), y=np.full(n, share), z=np.full(n, share),
        x_hat=x.copy(), y_hat=np.full(n, share), z_hat=np.full(n, share),
        dual_x=np.zeros((s, n)), dual_y=np.zeros(n), dual_z=np.zeros(n),
        c0=third.copy(), c1=third.copy(), ci=third.copy(),
        R=x.copy(), r=np.ones((s, n)), rho=config.rho,
    )


@dataclass
class TraceRecord:
    k: int
    utility: float
    primal_res: float
    dual_res: float
    wall_ms: float


@dataclass
class Trace:
    """Per-iteration log; iteration numbers are strictly increasing.

    `aug_lagrangian` holds the consensus objective after each iteration's
    primal sweep, and `aug_lagrangian_rise` the change produced by that
    sweep at the duals it was solved under (nonpositive when every block
    truly descends).
    """

    records: list = field(default_factory=list)
    converged: bool = False
    aug_lagrangian: list = field(default_factory=list)
    aug_lagrangian_rise: list = field(default_factory=list)

    CSV_HEADER = "iter,utility,primal_res,dual_res,wall_ms"

    def append(self, record: TraceRecord):
        if self.records and record.k <= self.records[-1].k:
            raise ValueError("iteration counter must increase")
        self.records.append(record)

    def utilities(self) -> np.ndarray:
        return np.array([r.utility for r in self.records])

    def to_csv(self, path=None) -> str:
        lines = [self.CSV_HEADER]
        for r in self.records:
            lines.append(f"{r.k},{r.utility:.17g},{r.primal_res:.17g},"
                         f"{r.dual_res:.17g},{r.wall_ms:.17g}")
        doc = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(doc)
        return doc


def residuals(state: ConsensusState) -> tuple[float, float]:
    """Consensus gap norm and the scaled change of the global block."""
    primal = np.sqrt(((state.x_hat - state.x) ** 2).sum()
                     + ((state.y_hat - state.y) ** 2).sum()
                     + ((state.z_hat - state.z) ** 2).sum())
    if state.prev_x is None:
        dual = np.inf
    else:
        dual = state.rho * np.sqrt(((state.x - state.prev_x) ** 2).sum()
                                   + ((state.y - state.prev_y) ** 2).sum()
                                   + ((state.z - state.prev_z) ** 2).sum())
    return float(primal), float(dual)


def dual_update(state: ConsensusState) -> ConsensusState:
    """Ascend each multiplier by rho times its consensus gap."""
    state.dual_x = state.dual_x + state.rho * (state.x_hat - state.x)
    state.dual_y = state.dual_y + state.rho * (state.y_hat - state.y)
    state.dual_z = state.dual_z + state.rho * (state.z_hat - state.z)
    state.k += 1
    return state


def augmented_lagrangian(state: ConsensusState, tables: CostTables,
                         cost_scale: float = 1.0) -> float:
    """Objective of the consensus formulation at the current primal pair
    and duals: local-copy cost plus dual terms plus quadratic penalty, in
    the normalized units the solver actually works in."""
    util3 = tables.three_tier_util(state.c0, state.c1, state.ci)
    cost = ((state.z_hat * tables.k_local).sum()
            + (state.y_hat * tables.k_mbs).sum()
            + (state.x_hat * util3).sum()) / cost_scale
    gx, gy, gz = state.x_hat - state.x, state.y_hat - state.y, state.z_hat - state.z
    dual_term = ((state.dual_x * gx).sum() + (state.dual_y * gy).sum()
                 + (state.dual_z * gz).sum())
    penalty = 0.5 * state.rho * ((gx ** 2).sum() + (gy ** 2).sum() + (gz ** 2).sum())
    return float(cost + dual_term + penalty)


def _task_chunks(n: int, parallelism: int) -> list:
    k = max(1, min(parallelism, n))
    bounds = np.linspace(0, n, k + 1).astype(int)
    return [slice(bounds[i], bounds[i + 1]) for i in range(k)
            if bounds[i + 1] > bounds[i]]


def _relaxed_placement(state: ConsensusState) -> Placement:
    with np.errstate(divide="ignore"):
        h = np.where(state.r > 0, 1.0 / state.r, 1.0)
    return Placement(x=state.x.copy(), y=state.y.copy(), z=state.z.copy(),
                     c0=state.c0.copy(), c1=state.c1.copy(), ci=state.ci.copy(),
                     h=h)


def run(scenario: Scenario, config: SolverConfig) -> tuple[Placement, Trace]:
    """Iterate the three phases until both residual norms pass their
    tolerances or the iteration budget runs out, then round the relaxed
    state to a hard feasible placement.

    Non-convergence is not fatal: the best available state is rounded and
    the trace is flagged accordingly.
    """
    weights = UtilityWeights(config.alpha)
    state = init_state(scenario, config)
    cbgp_state = local_blocks.CbgpState.fresh(state.x_hat)
    trace = Trace()
    chunks = _task_chunks(scenario.n_tasks, config.parallelism)
    pool = (ThreadPoolExecutor(max_workers=config.parallelism)
            if config.parallelism > 1 else None)

    # tolerances scale with the root of the consensus dimension; the
    # barrier keeps a small per-coordinate interior offset, so an absolute
    # norm threshold would never fire on large instances
    n_vars = state.x.size + state.y.size + state.z.size
    eps_primal = config.tol_primal * np.sqrt(n_vars)
    eps_dual = config.tol_dual * np.sqrt(n_vars)

    s = scenario.n_sbs
    converged = False
    cost_scale = None
    try:
        for _ in range(config.max_iter):
            t0 = time.perf_counter() if config.record_timing else 0.0

            if s:
                expected_load = np.clip(state.x.sum(axis=1), 1.0,
                                        1.0 / scenario.config.h_min)
                state.r = np.tile(expected_load[:, None], (1, scenario.n_tasks))
            tables = costs.build_cost_tables(scenario, config.alpha, state.x,
                                             state.c1, r=state.r)
            if cost_scale is None:
                # normalize once so per-task branch costs are O(1) against
                # rho; the dual race between branches resolves cost order
                # only at that scale
                cost_scale = max(
                    float(np.minimum(tables.k_local, tables.k_mbs).mean()), 1e-300)
            lagrangian_before = augmented_lagrangian(state, tables, cost_scale)

            cbgp_state.x_prev = state.x_hat.copy()
            cbgp_state.sweep = 0
            cbgp_state.step_scale = np.ones(scenario.n_tasks)

            def solve_local_chunk(cols):
                problem = local_blocks.LocalProblem.from_tables(
                    tables, state.x, state.dual_x, config.rho, config.delta,
                    cols=cols, cost_scale=cost_scale)
                vars = local_blocks.CbgpVars(
                    x_hat=state.x_hat[:, cols].copy(), R=state.R[:, cols].copy(),
                    c0=state.c0[:, cols].copy(), c1=state.c1[:, cols].copy(),
                    ci=state.ci[:, cols].copy())
                sub_state = local_blocks.CbgpState(
                    mu_x_lo=cbgp_state.mu_x_lo[:, cols].copy(),
                    mu_x_hi=cbgp_state.mu_x_hi[:, cols].copy(),
                    mu_env_lo=cbgp_state.mu_env_lo[:, cols].copy(),
                    mu_env_hi=cbgp_state.mu_env_hi[:, cols].copy(),
                    mu_shift_hi=cbgp_state.mu_shift_hi[:, cols].copy(),
                    mu_shift_lo=cbgp_state.mu_shift_lo[:, cols].copy(),
                    step_scale=cbgp_state.step_scale[cols].copy(),
                    x_prev=cbgp_state.x_prev[:, cols].copy(),
                    sweep=cbgp_state.sweep)
                local_blocks.cbgp_solve(problem, vars, sub_state,
                                        rounds=config.cbgp_rounds,
                                        tol=config.cbgp_tol)
                return cols, vars, sub_state

            if s:
                results = (pool.map(solve_local_chunk, chunks) if pool
                           else map(solve_local_chunk, chunks))
                for cols, vars, sub_state in results:
                    state.x_hat[:, cols] = vars.x_hat
                    state.R[:, cols] = vars.R
                    state.c0[:, cols] = vars.c0
                    state.c1[:, cols] = vars.c1
                    state.ci[:, cols] = vars.ci
                    for name in ("mu_x_lo", "mu_x_hi", "mu_env_lo", "mu_env_hi",
                                 "mu_shift_hi", "mu_shift_lo"):
                        getattr(cbgp_state, name)[:, cols] = getattr(sub_state, name)

            state.z_hat = local_blocks.solve_local_branch(
                tables.k_local / cost_scale, state.z, state.dual_z, config.rho,
                feasible=tables.t_local <= tables.t_max)
            state.y_hat = local_blocks.solve_mbs_branch(
                tables.k_mbs / cost_scale, state.y, state.dual_y, config.rho,
                feasible=tables.t_mbs <= tables.t_max)

            t3 = tables.three_tier_delay(state.c0, state.c1, state.ci)
            # the split block is deadline-blind; carrying an overdue split
            # into the coupled block would cap its assignment against a
            # fictitious branch, so such splits are projected onto the
            # deadline-feasible cost optimum at the frozen share
            overdue = np.argwhere(t3 > tables.t_max[None, :] * (1 + 1e-12))
            for i, j in overdue:
                split = _optimize_branch_split(tables, i, j,
                                               1.0 / state.r[i, j])
                if split is not None:
                    state.c0[i, j], state.c1[i, j] = split[0], split[1]
                    state.ci[i, j] = tables.c[j] - split[0] - split[1]
            if len(overdue):
                t3 = tables.three_tier_delay(state.c0, state.c1, state.ci)
            tcoef = np.concatenate(
                [t3.T, tables.t_mbs[:, None], tables.t_local[:, None]], axis=1)
            prox = np.concatenate(
                [state.x_hat.T, state.y_hat[:, None], state.z_hat[:, None]], axis=1)
            dual = np.concatenate(
                [state.dual_x.T, state.dual_y[:, None], state.dual_z[:, None]],
                axis=1)
            warm = np.concatenate(
                [state.x.T, state.y[:, None], state.z[:, None]], axis=1)

            def solve_global_chunk(rows):
                problem = global_block.GlobalProblem(
                    prox=prox[rows], dual=dual[rows], tcoef=tcoef[rows],
                    t_max=tables.t_max[rows], rho=config.rho)
                v, m, info = global_block.solve_global(
                    problem, warm_v=warm[rows], tol=config.newton_tol)
                return rows, v

            state.prev_x = state.x.copy()
            state.prev_y = state.y.copy()
            state.prev_z = state.z.copy()
            results = (pool.map(solve_global_chunk, chunks) if pool
                       else map(solve_global_chunk, chunks))
            for rows, v in results:
                state.x[:, rows] = v[:, :s].T
                state.y[rows] = v[:, s]
                state.z[rows] = v[:, s + 1]

            lagrangian_after = augmented_lagrangian(state, tables, cost_scale)
            trace.aug_lagrangian.append(lagrangian_after)
            trace.aug_lagrangian_rise.append(lagrangian_after - lagrangian_before)
            dual_update(state)

            primal, dual_res = residuals(state)
            util = costs.utility(_relaxed_placement(state), scenario, weights)
            wall = ((time.perf_counter() - t0) * 1e3
                    if config.record_timing else 0.0)
            trace.append(TraceRecord(k=state.k, utility=util,
                                     primal_res=primal, dual_res=dual_res,
                                     wall_ms=wall))
            if primal < eps_primal and dual_res < eps_dual:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()

    trace.converged = converged
    placement = round_to_feasible(state, scenario, config)
    return placement, trace


# -- rounding ----------------------------------------------------------------

def _branch_delay_cost(tables: CostTables, i, j, c0, c1, r):
    c = tables.c[j]
    ci = c - c0 - c1
    wired = tables.w2[i, j] * c1 * c1 + tables.w1[i, j] * c1 + tables.w0[i, j]
    wired = wired if c1 > 0 else 0.0
    delay = (tables.d_c0[j] * c0 + (c - c0) / tables.rate[i, j] + wired
             + tables.u_over_fs[i, j] * r * ci + tables.d_mbs_exec[j] * c1)
    energy = (tables.e_c0[j] * c0 + tables.e_up[i, j] * (c - c0)
              + tables.e_sbs[i, j] * ci
              + (tables.transfer_coef[i, j] + tables.e_mbs_exec[j]) * c1)
    return delay, tables.alpha * delay + (1.0 - tables.alpha) * energy


def _min_delay_split(tables: CostTables, i, j, r):
    """Fastest split of the branch, alternating the two analytic pieces."""
    c = tables.c[j]
    c0, c1 = 0.0, 0.0
    for _ in range(2):
        c0_coef = tables.d_c0[j] - 1.0 / tables.rate[i, j] - tables.u_over_fs[i, j] * r
        c0 = 0.0 if c0_coef >= 0 else c - c1
        if tables.w2[i, j] > 0:
            c1_star = ((tables.u_over_fs[i, j] * r - tables.d_mbs_exec[j]
                        - tables.w1[i, j]) / (2.0 * tables.w2[i, j]))
        else:
            c1_star = 0.0
        c1 = float(np.clip(c1_star, 0.0, c - c0))
    return c0, c1


def _optimize_branch_split(tables: CostTables, i: int, j: int, h: float):
    """Best deadline-feasible split of task j on SBS i at resource share h.

    The split cost is linear in the terminal part and convex quadratic in
    the forwarded part, so the constrained optimum is one of finitely many
    analytic candidates: simplex corners, the two stationary forwarded
    parts (free and along the full-offload edge), and the points where the
    deadline binds.  Returns (c0, c1, delay) or None when even the fastest
    split misses the deadline.
    """
    c = tables.c[j]
    r = 1.0 / h
    t_max = tables.t_max[j]
    a = tables.alpha
    w2, w1 = tables.w2[i, j], tables.w1[i, j]
    urf = tables.u_over_fs[i, j] * r
    q = tables.d_c0[j] - 1.0 / tables.rate[i, j] - urf
    d1 = w1 + tables.d_mbs_exec[j] - urf
    d0 = c / tables.rate[i, j] + tables.w0[i, j] + urf * c
    k_c0 = (a * q + (1.0 - a) * (tables.e_c0[j] - tables.e_up[i, j]
                                 - tables.e_sbs[i, j]))
    k_c1 = (a * d1 + (1.0 - a) * (tables.transfer_coef[i, j]
                                  + tables.e_mbs_exec[j] - tables.e_sbs[i, j]))

    c1_cands = {0.0, c}
    if w2 > 0:
        if a > 0:
            c1_cands.add(-k_c1 / (2.0 * a * w2))          # free stationary
            c1_cands.add((k_c0 - k_c1) / (2.0 * a * w2))  # along c0 = c - c1
        c1_cands.add(-d1 / (2.0 * w2))                    # fastest forwarded part
        if q != 0:
            ab = w2 * (a - k_c0 / q)
            bb = k_c1 - k_c0 * d1 / q
            if ab > 0:
                c1_cands.add(-bb / (2.0 * ab))            # along the deadline face
        # deadline boundary along c0 = 0 and along c0 = c - c1
        for shift, const in ((d1, d0 - t_max), (d1 - q, d0 + q * c - t_max)):
            disc = shift * shift - 4.0 * w2 * const
            if disc >= 0:
                root = np.sqrt(disc)
                c1_cands.add((-shift - root) / (2.0 * w2))
                c1_cands.add((-shift + root) / (2.0 * w2))

    pairs = []
    for c1 in c1_cands:
        if not np.isfinite(c1):
            continue
        c1 = float(np.clip(c1, 0.0, c))
        for c0 in (0.0, c - c1):
            pairs.append((c0, c1))
        if q != 0 and c1 > 0:
            c0b = (t_max - d0 - d1 * c1 - w2 * c1 * c1) / q
            pairs.append((float(np.clip(c0b, 0.0, c - c1)), c1))
    # the c1 = 0 regime drops the wired charge entirely
    if q != 0:
        c0b = (t_max - (c / tables.rate[i, j] + urf * c)) / q
        pairs.append((float(np.clip(c0b, 0.0, c)), 0.0))
    pairs.append(_min_delay_split(tables, i, j, r))

    best, best_cost = None, np.inf
    tol = t_max * (1.0 + 1e-12) + 1e-15
    for c0, c1 in pairs:
        if c0 < 0 or c1 < 0 or c0 + c1 > c * (1.0 + 1e-12):
            continue
        c1 = min(c1, c - c0)
        delay, cost = _branch_delay_cost(tables, i, j, c0, c1, r)
        if delay <= tol and cost < best_cost:
            best, best_cost = (c0, c1, delay), cost
    return best


def _floored_proportions(raw: dict, floor: float) -> dict:
    """Scale positive weights onto a unit budget with a per-entry floor:
    entries that would fall below the floor are pinned there and the rest
    share the remaining budget proportionally."""
    pinned = set()
    while True:
        budget = 1.0 - floor * len(pinned)
        free_total = sum(w for j, w in raw.items() if j not in pinned)
        out = {}
        newly_pinned = False
        for j, w in raw.items():
            if j in pinned:
                out[j] = floor
                continue
            share = budget * w / free_total if free_total > 0 else floor
            if share < floor:
                pinned.add(j)
                newly_pinned = True
                break
            out[j] = min(share, 1.0)
        if not newly_pinned:
            return out


def _allocate_shares(tables: CostTables, members: list, i: int,
                     h_min: float) -> dict:
    """Resource shares for the tasks hosted on one SBS: equal start, one
    square-root-weighted refinement, floors respected."""
    n_i = len(members)
    shares = {j: min(1.0, 1.0 / n_i) for j in members}
    if n_i <= 1:
        return shares
    weights = {}
    for j in members:
        split = _optimize_branch_split(tables, i, j, shares[j])
        ci = tables.c[j] - (split[0] + split[1]) if split else tables.c[j]
        weights[j] = max(tables.alpha * tables.u_over_fs[i, j] * ci, 1e-30)
    root = {j: float(np.sqrt(w)) for j, w in weights.items()}
    return _floored_proportions(root, h_min)


def round_to_feasible(state: ConsensusState, scenario: Scenario,
                      config: SolverConfig) -> Placement:
    """Harden the relaxed state: dominant branch per task (ties prefer
    terminal, then SBS, then MBS), greedy demotion of over-capacity SBS
    tasks to the MBS, share allocation, split re-optimization, and
    promotion of deadline violators to their fastest feasible branch."""
    s, n = scenario.n_sbs, scenario.n_tasks
    h_min = scenario.config.h_min
    cap = int(np.floor(1.0 / h_min + 1e-9))

    score = np.concatenate([state.z[None, :], state.x, state.y[None, :]], axis=0)
    choice = np.argmax(score, axis=0)  # 0 local, 1..s sbs, s+1 mbs

    if s:
        sorted_scores = np.sort(score, axis=0)
        margin = sorted_scores[-1] - sorted_scores[-2]
        for i in range(s):
            members = [j for j in range(n) if choice[j] == i + 1]
            if len(members) > cap:
                members.sort(key=lambda j: (margin[j], j))
                for j in members[: len(members) - cap]:
                    choice[j] = s + 1

    hard_x = np.zeros((s, n))
    for j in range(n):
        if 1 <= choice[j] <= s:
            hard_x[choice[j] - 1, j] = 1.0
    tables = costs.build_cost_tables(scenario, config.alpha, hard_x, state.c1,
                                     r=state.r)
    t_max = scenario.t_max_array()

    c0 = np.zeros((s, n))
    c1 = np.zeros((s, n))
    ci = np.zeros((s, n))
    h = np.ones((s, n))
    infeasible = []
    branch_delay = np.zeros(n)

    # promotions change station membership, which invalidates the shares
    # of the tasks left behind; alternate allocation and promotion until
    # the membership is stable
    rounds = max(3, s + 1)
    for round_idx in range(rounds):
        c0[:] = 0.0
        c1[:] = 0.0
        ci[:] = 0.0
        h[:] = 1.0
        for i in range(s):
            members = [j for j in range(n) if choice[j] == i + 1]
            if not members:
                continue
            shares = _allocate_shares(tables, members, i, h_min)
            for j in members:
                split = None if shares is None else _optimize_branch_split(
                    tables, i, j, shares[j])
                if split is None:
                    choice[j] = -1  # needs promotion
                    continue
                c0[i, j], c1[i, j] = split[0], split[1]
                ci[i, j] = tables.c[j] - split[0] - split[1]
                h[i, j] = shares[j]
                branch_delay[j] = split[2]

        for j in range(n):
            if choice[j] == 0:
                branch_delay[j] = tables.t_local[j]
            elif choice[j] == s + 1:
                branch_delay[j] = tables.t_mbs[j]

        promoted = False
        infeasible = []
        for j in range(n):
            if choice[j] != -1 and branch_delay[j] <= t_max[j] * (1 + 1e-12):
                continue
            options = []
            if tables.t_local[j] <= t_max[j]:
                options.append((tables.t_local[j], 0))
            if tables.t_mbs[j] <= t_max[j]:
                options.append((tables.t_mbs[j], s + 1))
            # station targets change membership and would need another
            # allocation pass, so the last round sticks to the fixed tiers
            if round_idx < rounds - 1:
                for i in range(s):
                    count = int((choice == i + 1).sum())
                    if count >= cap:
                        continue
                    used = h[i, choice == i + 1].sum()
                    avail = max(h_min, min(1.0, 1.0 - used))
                    split = _optimize_branch_split(tables, i, j, avail)
                    if split is not None:
                        options.append((split[2], i + 1))
            if not options:
                infeasible.append(j)
                continue
            options.sort(key=lambda o: (o[0], o[1]))
            choice[j] = options[0][1]
            promoted = True
        if infeasible or not promoted:
            break

    if infeasible:
        raise InfeasibleTaskError(infeasible)

    x = np.zeros((s, n))
    y = np.zeros(n)
    z = np.zeros(n)
    for j in range(n):
        if choice[j] == 0:
            z[j] = 1.0
        elif choice[j] == s + 1:
            y[j] = 1.0
        else:
            x[choice[j] - 1, j] = 1.0
    return Placement(x=x, y=y, z=z, c0=c0, c1=c1, ci=ci, h=h)
