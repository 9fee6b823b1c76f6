"""Per-task local updates of the consensus scheme.

Three blocks are solved per task against a read-only consensus snapshot:
the split branch (assignment row, split parts and the linearized resource
product) via cyclic block-coordinate gradient projection, and the two
single-bit branches (terminal, macro station) via exact two-point
comparison.  Instances never share mutable state, so all tasks can be
solved concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import CostTables


def rlt_bounds(x_hat, r, h_min):
    """Admissible interval for the linearized product R of a relaxed
    binary x_hat and the bounded reciprocal resource r in [1, 1/h_min].

    Intersection of the four envelope constraints; collapses to {r} at
    x_hat = 1 and to {0} at x_hat = 0.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    r = np.asarray(r, dtype=float)
    inv = 1.0 / h_min
    # grouping (x_hat - 1) * inv keeps the collapse exact at binary points
    lo = np.maximum(x_hat, r + (x_hat - 1.0) * inv)
    hi = np.minimum(x_hat * inv, r + (x_hat - 1.0))
    return lo, hi


def project_interval(v, lo, hi):
    """Euclidean projection onto [lo, hi]; if the interval is empty the
    nearest of the two endpoints is used (cannot happen for in-range
    inputs, kept as a defensive path)."""
    v = np.asarray(v, dtype=float)
    nearest = np.where(np.abs(v - lo) <= np.abs(v - hi), lo, hi)
    return np.where(lo <= hi, np.clip(v, np.minimum(lo, hi), hi), nearest)


def majorize_penalty(x_prev, x):
    """Linear upper bound of the concave corner penalty x - x^2, tangent
    at x_prev: x - x_prev^2 - 2 * x_prev * (x - x_prev)."""
    x_prev = np.asarray(x_prev, dtype=float)
    x = np.asarray(x, dtype=float)
    return x - x_prev * x_prev - 2.0 * x_prev * (x - x_prev)


@dataclass
class CbgpVars:
    """Primal block variables, shape (n_sbs, n_tasks_in_chunk)."""

    x_hat: np.ndarray
    R: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    ci: np.ndarray

    def copy(self) -> "CbgpVars":
        return CbgpVars(self.x_hat.copy(), self.R.copy(), self.c0.copy(),
                        self.c1.copy(), self.ci.copy())


@dataclass
class CbgpState:
    """Dual multipliers of the box and envelope constraints plus the
    per-task step scale used by the divergence safeguard.

    All multipliers stay nonnegative after every projected subgradient
    update.  `x_prev` is the tangency point of the corner penalty, frozen
    for the duration of one outer consensus iteration.
    """

    mu_x_lo: np.ndarray
    mu_x_hi: np.ndarray
    mu_env_lo: np.ndarray
    mu_env_hi: np.ndarray
    mu_shift_hi: np.ndarray
    mu_shift_lo: np.ndarray
    step_scale: np.ndarray
    x_prev: np.ndarray
    sweep: int = 0
    dual_step0: float = 0.1

    @classmethod
    def fresh(cls, x_prev: np.ndarray) -> "CbgpState":
        shape = x_prev.shape
        z = lambda: np.zeros(shape)
        return cls(mu_x_lo=z(), mu_x_hi=z(), mu_env_lo=z(), mu_env_hi=z(),
                   mu_shift_hi=z(), mu_shift_lo=z(),
                   step_scale=np.ones(shape[1] if len(shape) > 1 else 1),
                   x_prev=x_prev.copy())

    def copy(self) -> "CbgpState":
        return CbgpState(self.mu_x_lo.copy(), self.mu_x_hi.copy(),
                         self.mu_env_lo.copy(), self.mu_env_hi.copy(),
                         self.mu_shift_hi.copy(), self.mu_shift_lo.copy(),
                         self.step_scale.copy(), self.x_prev.copy(),
                         self.sweep, self.dual_step0)


@dataclass
class LocalProblem:
    """Frozen pricing plus the consensus snapshot for a chunk of tasks."""

    alpha: float
    rho: float
    delta: float
    h_min: float
    c: np.ndarray
    d_c0: np.ndarray
    d_up: np.ndarray
    d_m: np.ndarray
    sbs_cycle: np.ndarray
    w2: np.ndarray
    w1: np.ndarray
    w0: np.ndarray
    e_c0: np.ndarray
    e_up: np.ndarray
    e_s: np.ndarray
    e_m1: np.ndarray
    x_global: np.ndarray
    dual: np.ndarray
    r: np.ndarray

    @classmethod
    def from_tables(cls, tables: CostTables, x_global, dual, rho, delta,
                    cols=slice(None), cost_scale: float = 1.0) -> "LocalProblem":
        """`cost_scale` divides every priced coefficient so branch costs are
        O(1) against the prox strength; duals are expected in the same
        normalized units."""
        a = tables.alpha
        s = 1.0 / cost_scale
        return cls(
            alpha=a, rho=rho, delta=delta, h_min=tables.h_min,
            c=tables.c[cols],
            d_c0=s * tables.d_c0[cols], d_up=s / tables.rate[:, cols],
            d_m=s * tables.d_mbs_exec[cols],
            sbs_cycle=s * tables.u_over_fs[:, cols],
            w2=s * tables.w2[:, cols], w1=s * tables.w1[:, cols],
            w0=s * tables.w0[:, cols],
            e_c0=s * tables.e_c0[cols], e_up=s * tables.e_up[:, cols],
            e_s=s * tables.e_sbs[:, cols],
            e_m1=s * (tables.transfer_coef[:, cols]
                      + tables.e_mbs_exec[None, cols]),
            x_global=x_global[:, cols], dual=dual[:, cols], r=tables.r[:, cols],
        )

    def branch_cost(self, c0, c1, ci) -> np.ndarray:
        """Utility coefficient of the assignment variable: every priced term
        of the split branch except the resource-product compute term."""
        a = self.alpha
        wired = self.w2 * c1 * c1 + self.w1 * c1 + self.w0
        delay = (self.d_c0[None, :] * c0 + self.d_up * (self.c[None, :] - c0)
                 + wired + self.d_m[None, :] * c1)
        energy = (self.e_c0[None, :] * c0 + self.e_up * (self.c[None, :] - c0)
                  + self.e_s * ci + self.e_m1 * c1)
        return a * delay + (1.0 - a) * energy


def block_objective(problem: LocalProblem, vars: CbgpVars,
                    x_prev: np.ndarray) -> np.ndarray:
    """Per-task value of the local block objective: priced branch cost,
    linearized resource-product compute term, consensus prox with dual,
    and the majorized corner penalty."""
    cost = problem.branch_cost(vars.c0, vars.c1, vars.ci)
    gap = vars.x_hat - problem.x_global
    per_pair = (vars.x_hat * cost
                + problem.alpha * problem.sbs_cycle * vars.ci * vars.R
                + problem.dual * vars.x_hat
                + 0.5 * problem.rho * gap * gap
                + problem.delta * majorize_penalty(x_prev, vars.x_hat))
    return per_pair.sum(axis=0)


def _sweep(problem: LocalProblem, vars: CbgpVars, state: CbgpState) -> None:
    """One full cycle over the blocks, in place: R, c0, c1, the dependent
    ci, the assignment row by its stationarity closed form, then the
    projected subgradient multiplier updates."""
    p, a = problem, problem.alpha
    scale = state.step_scale[None, :]
    inv = 1.0 / p.h_min

    grad_r = a * p.sbs_cycle * vars.ci
    lo, hi = rlt_bounds(vars.x_hat, p.r, p.h_min)
    eps_r = scale / (p.rho * p.h_min * p.h_min)
    vars.R = project_interval(vars.R - eps_r * grad_r, lo, hi)

    shared_pull = a * p.sbs_cycle * vars.R + (1.0 - a) * vars.x_hat * p.e_s
    grad_c0 = (vars.x_hat * (a * (p.d_c0[None, :] - p.d_up)
                             + (1.0 - a) * (p.e_c0[None, :] - p.e_up))
               - shared_pull)
    c_sq = p.c[None, :] * p.c[None, :]
    vars.c0 = np.clip(vars.c0 - scale * c_sq / p.rho * grad_c0,
                      0.0, p.c[None, :] - vars.c1)

    grad_c1 = (vars.x_hat * (a * (2.0 * p.w2 * vars.c1 + p.w1 + p.d_m[None, :])
                             + (1.0 - a) * p.e_m1)
               - shared_pull)
    curv = np.maximum(p.rho, 2.0 * a * vars.x_hat * p.w2 * c_sq)
    vars.c1 = np.clip(vars.c1 - scale * c_sq / curv * grad_c1,
                      0.0, p.c[None, :] - vars.c0)

    vars.ci = p.c[None, :] - vars.c0 - vars.c1

    mult_sum = (-state.mu_x_lo + state.mu_x_hi + state.mu_env_lo
                - state.mu_env_hi * inv - state.mu_shift_hi
                + state.mu_shift_lo * inv)
    cost = p.branch_cost(vars.c0, vars.c1, vars.ci)
    # the compute-cost gradient pulls R onto the lower envelope bound,
    # which is itself a piecewise-affine function of the assignment
    # (slope 1 below the breakpoint, 1/h_min above); the exact block
    # minimizer of the resulting convex piecewise quadratic transmits the
    # station compute cost into the assignment update
    lin = cost + p.dual + p.delta * (1.0 - 2.0 * state.x_prev) + mult_sum
    env = a * p.sbs_cycle * vars.ci
    with np.errstate(divide="ignore", invalid="ignore"):
        x_break = np.where(inv > 1.0, (inv - p.r) / (inv - 1.0), 1.0)
    x_break = np.clip(x_break, 0.0, 1.0)
    slope_at_break = lin + p.rho * (x_break - p.x_global)
    min_low = np.clip(p.x_global - (lin + env) / p.rho, 0.0, x_break)
    min_high = np.clip(p.x_global - (lin + env * inv) / p.rho, x_break, 1.0)
    vars.x_hat = np.where(slope_at_break + env > 0, min_low,
                          np.where(slope_at_break + env * inv < 0, min_high,
                                   x_break))

    s = state.dual_step0 / (state.sweep + 1.0)
    state.mu_x_lo = np.maximum(0.0, state.mu_x_lo + s * (-vars.x_hat))
    state.mu_x_hi = np.maximum(0.0, state.mu_x_hi + s * (vars.x_hat - 1.0))
    state.mu_env_lo = np.maximum(0.0, state.mu_env_lo + s * (vars.x_hat - vars.R))
    state.mu_env_hi = np.maximum(0.0, state.mu_env_hi + s * (vars.R - vars.x_hat * inv))
    state.mu_shift_hi = np.maximum(
        0.0, state.mu_shift_hi + s * (vars.R - p.r - vars.x_hat + 1.0))
    state.mu_shift_lo = np.maximum(
        0.0, state.mu_shift_lo + s * (p.r + vars.x_hat * inv - inv - vars.R))
    state.sweep += 1


def cbgp_solve(problem: LocalProblem, vars: CbgpVars, state: CbgpState,
               rounds: int = 50, tol: float = 1e-6):
    """Run up to `rounds` block sweeps, committing a sweep only if it does
    not increase the objective; a rejected sweep halves the offending
    tasks' steps and is retried from the pre-sweep point.

    Returns the final variables and the per-sweep objective history
    (list of per-task arrays, one entry per committed check).
    """
    q = block_objective(problem, vars, state.x_prev)
    history = [q]
    slack = 1e-12 * (1.0 + np.abs(q))
    for _ in range(rounds):
        before_vars = vars.copy()
        before_state = state.copy()
        _sweep(problem, vars, state)
        q_new = block_objective(problem, vars, state.x_prev)
        bad = q_new > q + slack
        if np.any(bad):
            for name in ("x_hat", "R", "c0", "c1", "ci"):
                getattr(vars, name)[:, bad] = getattr(before_vars, name)[:, bad]
            for name in ("mu_x_lo", "mu_x_hi", "mu_env_lo", "mu_env_hi",
                         "mu_shift_hi", "mu_shift_lo"):
                getattr(state, name)[:, bad] = getattr(before_state, name)[:, bad]
            state.step_scale[bad] *= 0.5
            q_new = np.where(bad, q, q_new)
        history.append(q_new)
        if np.all(np.abs(q - q_new) <= tol * (1.0 + np.abs(q))):
            q = q_new
            break
        q = q_new
    return vars, history


def solve_local_branch(k_local, z_global, beta, rho, feasible=None):
    """Exact binary minimizer of the terminal branch block: compare the
    two candidate values of cost * v + dual * v + rho/2 (v - z)^2.

    `feasible` masks tasks whose sole-terminal delay already misses the
    deadline; for them the one-valued candidate is excluded outright.
    """
    k_local = np.asarray(k_local, dtype=float)
    z_global = np.asarray(z_global, dtype=float)
    beta = np.asarray(beta, dtype=float)
    f1 = k_local + beta + 0.5 * rho * (1.0 - z_global) ** 2
    f0 = 0.5 * rho * z_global ** 2
    take_one = f1 < f0
    if feasible is not None:
        take_one = take_one & np.asarray(feasible, dtype=bool)
    return take_one.astype(float)


def solve_mbs_branch(k_mbs, y_global, gamma, rho, feasible=None):
    """Exact binary minimizer of the macro-station branch block."""
    return solve_local_branch(k_mbs, y_global, gamma, rho, feasible=feasible)
