"""Delay and energy pricing of allocations, and the weighted utility.

Every function here is pure.  Scalar forms mirror the model term by term
and accept explicit overrides (rate, wired delay, upload time) so each
term can be exercised in isolation; the vectorized `CostTables` bundle is
what the solvers consume, with congestion and interference frozen at the
moment the tables are built.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InfeasibleRateError
from .scenario import Scenario, Station, LocalDevice, Task, ChannelMatrix

_TINY_RATE = 1e-12


@dataclass(frozen=True)
class UtilityWeights:
    """Delay weight alpha in [0, 1]; energy gets 1 - alpha."""

    alpha: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ConfigurationError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass
class SplitAllocation:
    """Continuous split of one task for one candidate SBS.

    c0 runs on the terminal, ci on the SBS, c1 is relayed to the MBS.
    h in (0, 1] is the SBS resource fraction, r = 1/h its reciprocal and
    R the linearized product variable tracking (assignment * r).
    """

    c0: float
    c1: float
    ci: float
    h: float = 1.0
    h_min: float = 0.05
    R: float | None = None

    def __post_init__(self):
        if not (0.0 < self.h <= 1.0):
            raise ConfigurationError(f"h must lie in (0, 1], got {self.h}")
        if self.h < self.h_min:
            raise ConfigurationError(f"h={self.h} below h_min={self.h_min}")
        if min(self.c0, self.c1, self.ci) < 0:
            raise ConfigurationError("split parts must be nonnegative")

    @property
    def r(self) -> float:
        return 1.0 / self.h

    def validate_total(self, c: float, tol: float = 1e-6):
        if abs(self.c0 + self.c1 + self.ci - c) > tol * max(1.0, c):
            raise ConfigurationError(
                f"split parts sum to {self.c0 + self.c1 + self.ci}, expected {c}")


@dataclass
class Placement:
    """Assignment variables plus per-(SBS, task) splits.

    Binary-valued arrays describe a hard allocation; values in [0, 1]
    describe a relaxed one.  Shapes: x, c0, c1, ci, h are (n_sbs, n_tasks);
    y and z are (n_tasks,).
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    ci: np.ndarray
    h: np.ndarray

    @classmethod
    def uniform_relaxed(cls, scenario: Scenario) -> "Placement":
        """Equal mass on every branch, thirds split, full resource share."""
        s, n = scenario.n_sbs, scenario.n_tasks
        share = 1.0 / (s + 2)
        c = scenario.c_array()
        third = np.tile(c / 3.0, (s, 1)) if s else np.zeros((0, n))
        return cls(x=np.full((s, n), share), y=np.full(n, share), z=np.full(n, share),
                   c0=third.copy(), c1=third.copy(), ci=third.copy(),
                   h=np.ones((s, n)))

    def split(self, sbs_index: int, task_index: int) -> SplitAllocation:
        return SplitAllocation(c0=float(self.c0[sbs_index, task_index]),
                               c1=float(self.c1[sbs_index, task_index]),
                               ci=float(self.ci[sbs_index, task_index]),
                               h=float(self.h[sbs_index, task_index]),
                               h_min=0.0)

    def branch_of(self, task_index: int) -> str:
        """Dominant branch label for reporting: local, mbs, or sbs<i>."""
        vals = [self.z[task_index], *[self.x[i, task_index] for i in range(self.x.shape[0])],
                self.y[task_index]]
        k = int(np.argmax(vals))
        if k == 0:
            return "local"
        if k == len(vals) - 1:
            return "mbs"
        return f"sbs{k}"


# -- scalar model terms ------------------------------------------------------

def local_delay(task: Task, device: LocalDevice) -> float:
    """Processing time on the terminal: c * u / f_local."""
    return task.c * task.u / device.f_local


def local_energy(task: Task, device: LocalDevice) -> float:
    """Terminal energy: c * u * e_local."""
    return task.c * task.u * device.e_local


def shannon_rate(bandwidth: float, power: float, gain: float,
                 noise: float, interference: float = 0.0) -> float:
    return bandwidth * np.log2(1.0 + power * gain / (noise + interference))


def mbs_uplink_time(task: Task, mbs: Station, channel: ChannelMatrix,
                    snr: float | None = None) -> float:
    """Upload time of the whole task to the MBS over the wideband link."""
    if task.c == 0:
        return 0.0
    if snr is None:
        snr = mbs.tx_power_density * channel.gain[mbs.id, task.id] / channel.noise_power
    rate = mbs.bandwidth * np.log2(1.0 + snr)
    if rate <= _TINY_RATE:
        raise InfeasibleRateError(
            f"task {task.id}: uplink rate underflows at snr={snr}")
    return task.c / rate


def mbs_total_delay(task: Task, mbs: Station, channel: ChannelMatrix,
                    snr: float | None = None) -> float:
    """Upload plus execution on the macro server."""
    return mbs_uplink_time(task, mbs, channel, snr=snr) + task.c * task.u / mbs.f


def mbs_energy(task: Task, device: LocalDevice, mbs: Station,
               channel: ChannelMatrix, snr: float | None = None,
               uplink_time: float | None = None) -> float:
    """Terminal radio energy for the upload plus macro-server compute energy."""
    if uplink_time is None:
        uplink_time = mbs_uplink_time(task, mbs, channel, snr=snr)
    return device.tx_power * uplink_time + task.c * task.u * mbs.e_cycle


def _own_wired_delay(scenario: Scenario, task: Task, sbs: Station, c1: float) -> float:
    """Relay-route delay when this task's forwarded bits are the only load."""
    if c1 <= 0:
        return 0.0
    path = scenario.graph.relay_path(task.id, sbs.id)
    total = 0.0
    for kind, eid in path.elements:
        if kind == "unit":
            u = scenario.graph.forwarding_units[eid]
            total += (u.o1 * c1 + u.o2) * c1
        else:
            total += c1 / scenario.graph.links[eid].capacity
    return total


def three_tier_delay(task: Task, sbs: Station, split: SplitAllocation,
                     scenario: Scenario, interference: float = 0.0,
                     rate: float | None = None,
                     wired_delay: float | None = None) -> float:
    """End-to-end delay of the split branch through one SBS.

    Four stages: terminal compute on c0, wireless upload of the remainder
    c - c0 under the interference-laden SBS link, the wired relay toward
    the MBS (charged only when bits are actually forwarded), SBS compute
    on ci at resource fraction h, and MBS compute on c1.
    """
    if rate is None:
        rate = shannon_rate(sbs.bandwidth, sbs.tx_power_density,
                            float(scenario.channel.gain[sbs.id, task.id]),
                            scenario.channel.noise_power, interference)
        rate = max(rate, _TINY_RATE)
    if wired_delay is None:
        wired_delay = _own_wired_delay(scenario, task, sbs, split.c1)
    elif split.c1 <= 0:
        wired_delay = 0.0
    return (split.c0 * task.u / scenario.device.f_local
            + (task.c - split.c0) / rate
            + wired_delay
            + split.ci * task.u / (split.h * sbs.f)
            + split.c1 * task.u / scenario.mbs.f)


def three_tier_energy(task: Task, sbs: Station, split: SplitAllocation,
                      scenario: Scenario, upload_time: float | None = None,
                      transfer_time: float | None = None) -> float:
    """Energy of the split branch: terminal compute, terminal radio for the
    upload, SBS compute, relay transmission, and MBS compute."""
    if upload_time is None:
        rate = shannon_rate(sbs.bandwidth, sbs.tx_power_density,
                            float(scenario.channel.gain[sbs.id, task.id]),
                            scenario.channel.noise_power)
        upload_time = (task.c - split.c0) / max(rate, _TINY_RATE)
    if transfer_time is None:
        transfer_time = (_own_wired_delay(scenario, task, sbs, split.c1)
                         * (split.c1 / task.c if task.c > 0 else 0.0))
    return (split.c0 * task.u * scenario.device.e_local
            + scenario.device.tx_power * upload_time
            + split.ci * task.u * sbs.e_cycle
            + scenario.channel.offload_power_sbs_mbs * transfer_time
            + split.c1 * task.u * scenario.mbs.e_cycle)


# -- vectorized pricing ------------------------------------------------------

def interference_matrix(x: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Co-channel interference seen at each SBS for each task's upload,
    weighted by the current (possibly fractional) SBS assignments of the
    other tasks on the other cells."""
    s, n = scenario.n_sbs, scenario.n_tasks
    if s == 0:
        return np.zeros((0, n))
    gain_s = scenario.channel.gain[1:, :]
    power = np.array([st.tx_power_density for st in scenario.sbs_list])[:, None]
    other_cell_mass = x.sum(axis=0)[None, :] - x
    w = gain_s * other_cell_mass
    return power * (w.sum(axis=1, keepdims=True) - w)


def sbs_rate_matrix(x: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Shannon rate of each (SBS, task) upload under frozen interference."""
    s, n = scenario.n_sbs, scenario.n_tasks
    if s == 0:
        return np.zeros((0, n))
    gain_s = scenario.channel.gain[1:, :]
    power = np.array([st.tx_power_density for st in scenario.sbs_list])[:, None]
    bw = np.array([st.bandwidth for st in scenario.sbs_list])[:, None]
    interf = interference_matrix(x, scenario)
    snr = power * gain_s / (scenario.channel.noise_power + interf)
    return np.maximum(bw * np.log2(1.0 + snr), _TINY_RATE)


def relay_element_loads(x: np.ndarray, c1: np.ndarray, scenario: Scenario) -> dict:
    """Total bits on each wired element, aggregating x-weighted forwarded
    parts over every relay route that crosses it."""
    loads: dict[str, float] = {eid: 0.0 for eid in scenario.graph.forwarding_units}
    loads.update({eid: 0.0 for eid in scenario.graph.links})
    for i in range(scenario.n_sbs):
        sid = scenario.sbs_list[i].id
        for j in range(scenario.n_tasks):
            contribution = x[i, j] * c1[i, j]
            if contribution <= 0:
                continue
            for _, eid in scenario.graph.relay_path(j, sid).elements:
                loads[eid] += contribution
    return loads


@dataclass
class CostTables:
    """Per-branch pricing coefficients with congestion state frozen.

    Wired relay delay for pair (i, j) is the quadratic
    w2 * c1^2 + w1 * c1 + w0, valid around the frozen loads; it is charged
    only when c1 > 0.  `transfer_coef` is the linear energy coefficient of
    c1 for the relay transmission.
    """

    alpha: float
    c: np.ndarray
    u: np.ndarray
    t_max: np.ndarray
    t_local: np.ndarray
    e_local_task: np.ndarray
    t_mbs: np.ndarray
    e_mbs_task: np.ndarray
    k_local: np.ndarray
    k_mbs: np.ndarray
    rate: np.ndarray
    d_c0: np.ndarray
    d_mbs_exec: np.ndarray
    u_over_fs: np.ndarray
    r: np.ndarray
    e_c0: np.ndarray
    e_up: np.ndarray
    e_sbs: np.ndarray
    e_mbs_exec: np.ndarray
    w2: np.ndarray
    w1: np.ndarray
    w0: np.ndarray
    transfer_coef: np.ndarray
    h_min: float

    def wired_delay(self, c1: np.ndarray) -> np.ndarray:
        value = self.w2 * c1 * c1 + self.w1 * c1 + self.w0
        return np.where(c1 > 0, value, 0.0)

    def wired_delay_grad(self, c1: np.ndarray) -> np.ndarray:
        return 2.0 * self.w2 * c1 + self.w1

    def three_tier_delay(self, c0, c1, ci) -> np.ndarray:
        """Branch delay per (SBS, task) at the frozen resource shares."""
        return (self.d_c0[None, :] * c0
                + (self.c[None, :] - c0) / self.rate
                + self.wired_delay(c1)
                + self.u_over_fs * self.r * ci
                + self.d_mbs_exec[None, :] * c1)

    def three_tier_energy(self, c0, c1, ci) -> np.ndarray:
        return (self.e_c0[None, :] * c0
                + self.e_up * (self.c[None, :] - c0)
                + self.e_sbs * ci
                + (self.transfer_coef + self.e_mbs_exec[None, :]) * c1)

    def three_tier_util(self, c0, c1, ci) -> np.ndarray:
        return (self.alpha * self.three_tier_delay(c0, c1, ci)
                + (1.0 - self.alpha) * self.three_tier_energy(c0, c1, ci))


def build_cost_tables(scenario: Scenario, alpha: float, x_weight: np.ndarray,
                      c1_frozen: np.ndarray, r: np.ndarray | None = None) -> CostTables:
    """Price every branch with interference and relay congestion frozen at
    the given fractional assignment and forwarded parts."""
    s, n = scenario.n_sbs, scenario.n_tasks
    c = scenario.c_array()
    u = scenario.u_array()
    t_max = scenario.t_max_array()
    dev = scenario.device
    mbs = scenario.mbs

    t_local = c * u / dev.f_local
    e_local_task = c * u * dev.e_local

    gain_m = scenario.channel.gain[0, :]
    snr_m = mbs.tx_power_density * gain_m / scenario.channel.noise_power
    rate_m = np.maximum(mbs.bandwidth * np.log2(1.0 + snr_m), _TINY_RATE)
    uplink = c / rate_m
    t_mbs = uplink + c * u / mbs.f
    e_mbs_task = dev.tx_power * uplink + c * u * mbs.e_cycle

    k_local = alpha * t_local + (1.0 - alpha) * e_local_task
    k_mbs = alpha * t_mbs + (1.0 - alpha) * e_mbs_task

    rate = sbs_rate_matrix(x_weight, scenario)
    if r is None:
        r = np.ones((s, n))

    f_s = np.array([st.f for st in scenario.sbs_list])[:, None] if s else np.zeros((0, 1))
    e_s = np.array([st.e_cycle for st in scenario.sbs_list])[:, None] if s else np.zeros((0, 1))

    loads = relay_element_loads(x_weight, c1_frozen, scenario)
    w2 = np.zeros((s, n))
    w1 = np.zeros((s, n))
    w0 = np.zeros((s, n))
    for i in range(s):
        sid = scenario.sbs_list[i].id
        for j in range(n):
            own = x_weight[i, j] * c1_frozen[i, j]
            xw = x_weight[i, j]
            for kind, eid in scenario.graph.relay_path(j, sid).elements:
                base = max(loads[eid] - own, 0.0)
                if kind == "unit":
                    fu = scenario.graph.forwarding_units[eid]
                    w2[i, j] += xw * xw * fu.o1
                    w1[i, j] += xw * (2.0 * fu.o1 * base + fu.o2)
                    w0[i, j] += (fu.o1 * base + fu.o2) * base
                else:
                    cap = scenario.graph.links[eid].capacity
                    w1[i, j] += xw / cap
                    w0[i, j] += base / cap

    wired_frozen = np.where(c1_frozen > 0,
                            w2 * c1_frozen * c1_frozen + w1 * c1_frozen + w0, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        transfer_coef = np.where(
            c[None, :] > 0,
            scenario.channel.offload_power_sbs_mbs * wired_frozen / c[None, :], 0.0)

    return CostTables(
        alpha=alpha, c=c, u=u, t_max=t_max,
        t_local=t_local, e_local_task=e_local_task,
        t_mbs=t_mbs, e_mbs_task=e_mbs_task,
        k_local=k_local, k_mbs=k_mbs,
        rate=rate, d_c0=u / dev.f_local, d_mbs_exec=u / mbs.f,
        u_over_fs=(u[None, :] / f_s) if s else np.zeros((0, n)),
        r=np.asarray(r, dtype=float),
        e_c0=u * dev.e_local, e_up=dev.tx_power / rate,
        e_sbs=(u[None, :] * e_s) if s else np.zeros((0, n)),
        e_mbs_exec=u * mbs.e_cycle,
        w2=w2, w1=w1, w0=w0, transfer_coef=transfer_coef,
        h_min=scenario.config.h_min,
    )


def tables_from_placement(placement: Placement, scenario: Scenario,
                          alpha: float) -> CostTables:
    with np.errstate(divide="ignore"):
        r = np.where(placement.h > 0, 1.0 / placement.h, 1.0)
    return build_cost_tables(scenario, alpha, placement.x, placement.c1, r=r)


def placement_costs(placement: Placement, scenario: Scenario,
                    alpha: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Per-task (delay, energy) totals weighted by the assignment values,
    with congestion and interference consistent with the placement itself."""
    tables = tables_from_placement(placement, scenario, alpha)
    t3 = tables.three_tier_delay(placement.c0, placement.c1, placement.ci)
    e3 = tables.three_tier_energy(placement.c0, placement.c1, placement.ci)
    delay = (placement.z * tables.t_local + placement.y * tables.t_mbs
             + (placement.x * t3).sum(axis=0))
    energy = (placement.z * tables.e_local_task + placement.y * tables.e_mbs_task
              + (placement.x * e3).sum(axis=0))
    return delay, energy


def utility(placement: Placement, scenario: Scenario,
            weights: UtilityWeights) -> float:
    """Weighted objective alpha * total delay + (1 - alpha) * total energy."""
    delay, energy = placement_costs(placement, scenario, weights.alpha)
    return float(weights.alpha * delay.sum() + (1.0 - weights.alpha) * energy.sum())


def utility_from_tables(placement: Placement, tables: CostTables) -> float:
    """Same weighted objective but against frozen tables; affine in the
    assignment variables for fixed splits and shares."""
    t3 = tables.three_tier_delay(placement.c0, placement.c1, placement.ci)
    e3 = tables.three_tier_energy(placement.c0, placement.c1, placement.ci)
    util3 = tables.alpha * t3 + (1.0 - tables.alpha) * e3
    total = (placement.z * tables.k_local + placement.y * tables.k_mbs
             + (placement.x * util3).sum(axis=0))
    return float(total.sum())


# -- feasibility -------------------------------------------------------------

@dataclass
class FeasibilityReport:
    ok: bool
    deadline_ok: np.ndarray
    capacity_ok: np.ndarray
    assignment_ok: np.ndarray
    violations: list

    def __bool__(self):
        return self.ok


def check_feasibility(placement: Placement, scenario: Scenario,
                      tol: float = 1e-9) -> FeasibilityReport:
    """Validate the three hard constraints of an allocation: per-task
    deadline, per-SBS resource budget, and one branch per task."""
    delay, _ = placement_costs(placement, scenario)
    t_max = scenario.t_max_array()
    deadline_ok = delay <= t_max * (1.0 + tol) + tol

    shares = (placement.h * placement.x).sum(axis=1) if scenario.n_sbs else np.zeros(0)
    capacity_ok = shares <= 1.0 + tol

    mass = placement.x.sum(axis=0) + placement.y + placement.z
    assignment_ok = np.abs(mass - 1.0) <= tol

    violations = []
    for j in np.nonzero(~deadline_ok)[0]:
        violations.append(("deadline", int(j)))
    for i in np.nonzero(~capacity_ok)[0]:
        violations.append(("capacity", int(i)))
    for j in np.nonzero(~assignment_ok)[0]:
        violations.append(("assignment", int(j)))
    return FeasibilityReport(ok=not violations, deadline_ok=deadline_ok,
                             capacity_ok=capacity_ok, assignment_ok=assignment_ok,
                             violations=violations)
