import numpy as np
import pytest

from edgealloc import costs
from edgealloc.costs import (Placement, SplitAllocation, UtilityWeights,
                             check_feasibility, local_delay, local_energy,
                             mbs_energy, mbs_total_delay, mbs_uplink_time,
                             three_tier_delay, three_tier_energy, utility)
from edgealloc.errors import ConfigurationError, InfeasibleRateError
from edgealloc.scenario import ScenarioConfig, Task, generate_scenario


def _scenario(**overrides):
    base = dict(n_tasks=1, n_sbs=1, seed=0, c_range=(1e4, 1e4),
                t_max_range=(20.0, 20.0))
    base.update(overrides)
    return generate_scenario(ScenarioConfig(**base))


def test_local_delay_matches_hand_value():
    scen = _scenario()
    assert local_delay(scen.tasks[0], scen.device) == pytest.approx(0.036)
    tiny = Task(id=0, c=1e-12, t_max=1.0, u=18000.0)
    assert local_delay(tiny, scen.device) == pytest.approx(0.0, abs=1e-15)
    fast = _scenario(f_local=1e10)
    assert local_delay(fast.tasks[0], fast.device) == pytest.approx(0.018)


def test_local_energy_matches_hand_value():
    scen = _scenario(e_local=2.5e-7)
    assert local_energy(scen.tasks[0], scen.device) == pytest.approx(45.0)
    double = _scenario(e_local=2.5e-7, c_range=(2e4, 2e4))
    assert local_energy(double.tasks[0], double.device) == pytest.approx(90.0)


def test_mbs_uplink_time_examples():
    scen = _scenario(c_range=(5000.0, 5000.0))
    t = mbs_uplink_time(scen.tasks[0], scen.mbs, scen.channel, snr=1023.0)
    assert t == pytest.approx(2.5e-5)
    # snr of one means the rate equals the bandwidth
    t1 = mbs_uplink_time(scen.tasks[0], scen.mbs, scen.channel, snr=1.0)
    assert t1 == pytest.approx(5000.0 / 20e6)
    zero = Task(id=0, c=0.0 + 1e-300, t_max=1.0, u=1.0)
    assert mbs_uplink_time(zero, scen.mbs, scen.channel,
                           snr=1023.0) == pytest.approx(0.0, abs=1e-300)


def test_mbs_uplink_underflow_raises():
    scen = _scenario()
    with pytest.raises(InfeasibleRateError):
        mbs_uplink_time(scen.tasks[0], scen.mbs, scen.channel, snr=0.0)


def test_mbs_total_delay_sums_upload_and_compute():
    scen = _scenario(c_range=(5000.0, 5000.0))
    total = mbs_total_delay(scen.tasks[0], scen.mbs, scen.channel, snr=1023.0)
    assert total == pytest.approx(9.25e-4)


def test_mbs_energy_example():
    scen = _scenario(c_range=(5000.0, 5000.0), e_mbs=1e-7)
    e = mbs_energy(scen.tasks[0], scen.device, scen.mbs, scen.channel,
                   uplink_time=2.5e-5)
    assert e == pytest.approx(9.0000025)


def test_three_tier_delay_worked_example():
    scen = _scenario(c_range=(9000.0, 9000.0))
    split = SplitAllocation(c0=3000.0, c1=3000.0, ci=3000.0, h=0.5, h_min=0.05)
    d = three_tier_delay(scen.tasks[0], scen.sbs_list[0], split, scen,
                         rate=2e8, wired_delay=0.012)
    assert d == pytest.approx(0.02877)


def test_three_tier_delay_degenerate_split_equals_local():
    scen = _scenario()
    task = scen.tasks[0]
    split = SplitAllocation(c0=task.c, c1=0.0, ci=0.0, h=1.0)
    d = three_tier_delay(task, scen.sbs_list[0], split, scen, rate=2e8)
    assert d == pytest.approx(local_delay(task, scen.device))


def test_three_tier_delay_share_proportionality():
    scen = _scenario(c_range=(9000.0, 9000.0))
    task = scen.tasks[0]
    kw = dict(rate=2e8, wired_delay=0.0)
    full = three_tier_delay(task, scen.sbs_list[0],
                            SplitAllocation(c0=0, c1=0, ci=task.c, h=1.0), scen, **kw)
    half = three_tier_delay(task, scen.sbs_list[0],
                            SplitAllocation(c0=0, c1=0, ci=task.c, h=0.5), scen, **kw)
    # only the station compute term depends on the share here
    upload = task.c / 2e8
    assert (half - upload) == pytest.approx(2.0 * (full - upload))


def test_three_tier_energy_worked_example():
    scen = _scenario(c_range=(9000.0, 9000.0), e_local=2.5e-7, e_sbs=2e-7,
                     e_mbs=1e-7, sbs_mbs_tx_power=1.0)
    split = SplitAllocation(c0=3000.0, c1=3000.0, ci=3000.0, h=0.5, h_min=0.05)
    e = three_tier_energy(scen.tasks[0], scen.sbs_list[0], split, scen,
                          upload_time=3e-5, transfer_time=0.012)
    assert e == pytest.approx(29.712)


def test_three_tier_energy_degenerate_and_zero():
    scen = _scenario(e_local=2.5e-7)
    task = scen.tasks[0]
    only_local = SplitAllocation(c0=task.c, c1=0.0, ci=0.0, h=1.0)
    e = three_tier_energy(task, scen.sbs_list[0], only_local, scen,
                          upload_time=0.0, transfer_time=0.0)
    assert e == pytest.approx(local_energy(task, scen.device))
    zero = SplitAllocation(c0=0.0, c1=0.0, ci=0.0, h=1.0)
    e0 = three_tier_energy(task, scen.sbs_list[0], zero, scen,
                           upload_time=0.0, transfer_time=0.0)
    assert e0 == 0.0


def test_three_tier_energy_linear_in_each_part():
    scen = _scenario()
    task = scen.tasks[0]
    sbs = scen.sbs_list[0]

    def e(c0, c1, ci):
        return three_tier_energy(task, sbs, SplitAllocation(c0=c0, c1=c1, ci=ci),
                                 scen, upload_time=1e-4, transfer_time=1e-3)

    for moving in range(3):
        vals = []
        for a in (0.0, 500.0, 1000.0):
            parts = [200.0, 300.0, 400.0]
            parts[moving] = a
            vals.append(e(*parts))
        assert (vals[2] - vals[1]) == pytest.approx(vals[1] - vals[0])


def test_utility_single_local_task():
    scen = _scenario(e_local=2.5e-7)
    placement = Placement(x=np.zeros((1, 1)), y=np.zeros(1), z=np.ones(1),
                          c0=np.zeros((1, 1)), c1=np.zeros((1, 1)),
                          ci=np.zeros((1, 1)), h=np.ones((1, 1)))
    assert utility(placement, scen, UtilityWeights(0.5)) == pytest.approx(22.518)
    assert utility(placement, scen, UtilityWeights(1.0)) == pytest.approx(0.036)
    assert utility(placement, scen, UtilityWeights(0.0)) == pytest.approx(45.0)


def test_costs_are_nonnegative_on_random_inputs():
    rng = np.random.default_rng(0)
    scen = generate_scenario(ScenarioConfig(n_tasks=6, n_sbs=2, seed=3))
    for _ in range(50):
        x = rng.uniform(0, 1, (2, 6))
        x /= 3 * x.sum(axis=0, keepdims=True)
        rest = 1 - x.sum(axis=0)
        y = rng.uniform(0, 1, 6) * rest
        z = rest - y
        c = scen.c_array()
        f0 = rng.uniform(0, 1, (2, 6))
        f1 = rng.uniform(0, 1, (2, 6)) * (1 - f0)
        placement = Placement(x=x, y=y, z=z, c0=f0 * c, c1=f1 * c,
                              ci=(1 - f0 - f1) * c, h=np.ones((2, 6)))
        delay, energy = costs.placement_costs(placement, scen)
        assert np.all(delay >= 0) and np.all(energy >= 0)


def test_utility_from_tables_affine_in_assignment():
    scen = generate_scenario(ScenarioConfig(n_tasks=4, n_sbs=2, seed=1))
    tables = costs.build_cost_tables(scen, 0.5, np.full((2, 4), 0.2),
                                     np.tile(scen.c_array() / 3, (2, 1)))
    rng = np.random.default_rng(2)

    def random_placement():
        x = rng.uniform(0, 0.3, (2, 4))
        y = rng.uniform(0, 0.3, 4)
        z = 1 - x.sum(axis=0) - y
        c = scen.c_array()
        return Placement(x=x, y=y, z=z, c0=np.tile(c / 3, (2, 1)),
                         c1=np.tile(c / 3, (2, 1)), ci=np.tile(c / 3, (2, 1)),
                         h=np.ones((2, 4)))

    p1, p2 = random_placement(), random_placement()
    for theta in (0.0, 0.3, 0.7, 1.0):
        mix = Placement(x=theta * p1.x + (1 - theta) * p2.x,
                        y=theta * p1.y + (1 - theta) * p2.y,
                        z=theta * p1.z + (1 - theta) * p2.z,
                        c0=p1.c0, c1=p1.c1, ci=p1.ci, h=p1.h)
        expected = (theta * costs.utility_from_tables(p1, tables)
                    + (1 - theta) * costs.utility_from_tables(p2, tables))
        assert costs.utility_from_tables(mix, tables) == pytest.approx(expected)


def test_deadline_check_flags_per_task():
    scen = _scenario(t_max_range=(0.01, 0.01))  # local delay 0.036 > deadline
    placement = Placement(x=np.zeros((1, 1)), y=np.zeros(1), z=np.ones(1),
                          c0=np.zeros((1, 1)), c1=np.zeros((1, 1)),
                          ci=np.zeros((1, 1)), h=np.ones((1, 1)))
    report = check_feasibility(placement, scen)
    assert not report.ok
    assert ("deadline", 0) in report.violations


def test_capacity_and_assignment_checks():
    scen = generate_scenario(ScenarioConfig(n_tasks=2, n_sbs=1, seed=0,
                                            h_min=0.6))
    c = scen.c_array()
    both_on_sbs = Placement(x=np.ones((1, 2)), y=np.zeros(2), z=np.zeros(2),
                            c0=np.zeros((1, 2)), c1=np.zeros((1, 2)),
                            ci=np.tile(c, (1, 1)), h=np.full((1, 2), 0.7))
    report = check_feasibility(both_on_sbs, scen)
    assert ("capacity", 0) in report.violations

    unassigned = Placement(x=np.zeros((1, 2)), y=np.zeros(2), z=np.zeros(2),
                           c0=np.zeros((1, 2)), c1=np.zeros((1, 2)),
                           ci=np.zeros((1, 2)), h=np.ones((1, 2)))
    report = check_feasibility(unassigned, scen)
    assert ("assignment", 0) in report.violations


def test_split_allocation_invariants():
    with pytest.raises(ConfigurationError):
        SplitAllocation(c0=-1.0, c1=0.0, ci=0.0)
    with pytest.raises(ConfigurationError):
        SplitAllocation(c0=0.0, c1=0.0, ci=0.0, h=0.0)
    with pytest.raises(ConfigurationError):
        SplitAllocation(c0=0.0, c1=0.0, ci=0.0, h=0.01, h_min=0.05)
    s = SplitAllocation(c0=1.0, c1=2.0, ci=3.0, h=0.5)
    assert s.r == pytest.approx(2.0)
    s.validate_total(6.0)
    with pytest.raises(ConfigurationError):
        s.validate_total(7.0)


def test_utility_weights_bounds():
    with pytest.raises(ConfigurationError):
        UtilityWeights(1.5)
    with pytest.raises(ConfigurationError):
        UtilityWeights(-0.1)
