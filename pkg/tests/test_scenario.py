import numpy as np
import pytest

from edgealloc.errors import ConfigurationError
from edgealloc.scenario import (Scenario, ScenarioConfig, forwarding_delay,
                                forwarding_load, generate_scenario, link_delay,
                                link_load, path_delay)


def test_generation_counts_match_config():
    scen = generate_scenario(ScenarioConfig(n_tasks=100, n_sbs=5, seed=42))
    assert scen.n_tasks == 100
    assert len(scen.stations) == 6
    assert sum(1 for s in scen.stations if s.kind == "MBS") == 1


def test_generation_is_deterministic_byte_for_byte():
    cfg = ScenarioConfig(n_tasks=20, n_sbs=3, seed=9)
    a = generate_scenario(cfg).to_json()
    b = generate_scenario(cfg).to_json()
    assert a == b


def test_task_sizes_respect_configured_range():
    scen = generate_scenario(ScenarioConfig(n_tasks=3, n_sbs=2, seed=7))
    for t in scen.tasks:
        assert 5e3 <= t.c <= 1e4
        assert 15.0 <= t.t_max <= 30.0


def test_every_task_has_all_paths(small_scenario):
    g = small_scenario.graph
    for j in range(small_scenario.n_tasks):
        assert g.local_path(j).elements == ()
        assert g.access_path(j, 0).kind == "mbs_direct"
        for st in small_scenario.sbs_list:
            assert g.access_path(j, st.id).station_id == st.id
            relay = g.relay_path(j, st.id)
            assert len(relay.elements) >= 1


def test_every_path_terminates_at_virtual_destination(small_scenario):
    for p in small_scenario.graph.paths.values():
        assert p.terminal == "virtual"


def test_gain_uses_clamped_pathloss_law():
    scen = generate_scenario(ScenarioConfig(n_tasks=4, n_sbs=2, seed=1))
    sta = np.array([s.position for s in scen.stations])
    d = np.linalg.norm(sta[:, None, :] - scen.task_positions[None, :, :], axis=-1)
    expected = np.maximum(d, 1.0) ** -4
    assert np.allclose(scen.channel.gain, expected)


def test_invalid_range_raises_configuration_error():
    with pytest.raises(ConfigurationError):
        ScenarioConfig(c_range=(1e4, 5e3))
    with pytest.raises(ConfigurationError):
        ScenarioConfig(n_tasks=0)
    with pytest.raises(ConfigurationError):
        ScenarioConfig(h_min=0.0)


def test_json_roundtrip(tmp_path, small_scenario):
    path = tmp_path / "scenario.json"
    small_scenario.to_json(path)
    again = Scenario.from_json(str(path))
    assert again.to_json() == small_scenario.to_json()
    assert np.allclose(again.channel.gain, small_scenario.channel.gain)


# -- load primitives ---------------------------------------------------------

def test_forwarding_load_empty_and_single_and_shared(wired_scenario):
    scen = wired_scenario
    assert forwarding_load({}, "u1", scen) == 0.0
    # one task of 5000 bits fully on a path through the unit
    scen2 = generate_scenario(ScenarioConfig(n_tasks=2, n_sbs=1, seed=0,
                                             c_range=(5000.0, 5000.0)))
    pid0 = scen2.graph.relay_path(0, 1).id
    pid1 = scen2.graph.relay_path(1, 1).id
    assert forwarding_load({pid0: 1.0}, "fu:sbs1", scen2) == pytest.approx(5000.0)
    assert forwarding_load({pid0: 0.5, pid1: 0.5}, "fu:sbs1",
                           scen2) == pytest.approx(5000.0)


def test_forwarding_load_unknown_unit_raises(wired_scenario):
    with pytest.raises(KeyError):
        forwarding_load({}, "nope", wired_scenario)


def test_link_load_values():
    scen = generate_scenario(ScenarioConfig(n_tasks=3, n_sbs=1, seed=0,
                                            c_range=(1000.0, 1000.0)))
    link_id = "ln:sbs1-mbs"
    assert link_load({}, link_id, scen) == 0.0
    pids = [scen.graph.relay_path(j, 1).id for j in range(3)]
    assert link_load({pids[0]: 1.0}, link_id, scen) == pytest.approx(1000.0)
    assert link_load({p: 1.0 for p in pids}, link_id, scen) == pytest.approx(3000.0)


def test_forwarding_delay_values(wired_scenario):
    unit = wired_scenario.graph.forwarding_units["u1"]
    assert forwarding_delay(0.0, unit) == 0.0
    assert forwarding_delay(1000.0, unit) == pytest.approx(2.0e-3)
    from edgealloc.scenario import ForwardingUnit
    free = ForwardingUnit(id="f", o1=0.0, o2=1e-6)
    assert forwarding_delay(1e6, free) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        forwarding_delay(-1.0, unit)


def test_link_delay_values(wired_scenario):
    link = wired_scenario.graph.links["l1"]
    assert link_delay(0.0, link) == 0.0
    assert link_delay(1e6, link) == pytest.approx(0.01)
    assert link_delay(link.capacity, link) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        link_delay(-5.0, link)


def test_path_delay_composition(wired_scenario):
    scen = wired_scenario
    # loads: 1e6 bits on the link (task 0), 1000 bits on the unit (task 1)
    assignment = {"p_link": 1.0, "p_unit": 1.0}
    empty = scen.graph.paths["p_empty"]
    both = scen.graph.paths["p_both"]
    assert path_delay(empty, assignment, scen) == 0.0
    assert path_delay(both, assignment, scen) == pytest.approx(0.012)


def test_path_delay_additive_over_disjoint_paths(wired_scenario):
    scen = wired_scenario
    assignment = {"p_link": 1.0, "p_unit": 1.0}
    link_only = scen.graph.paths["p_link"]
    unit_only = scen.graph.paths["p_unit"]
    both = scen.graph.paths["p_both"]
    assert path_delay(both, assignment, scen) == pytest.approx(
        path_delay(link_only, assignment, scen)
        + path_delay(unit_only, assignment, scen))


def test_delays_nondecreasing_in_load(wired_scenario):
    unit = wired_scenario.graph.forwarding_units["u1"]
    link = wired_scenario.graph.links["l1"]
    loads = np.linspace(0, 1e7, 50)
    fd = [forwarding_delay(l, unit) for l in loads]
    ld = [link_delay(l, link) for l in loads]
    assert np.all(np.diff(fd) >= 0)
    assert np.all(np.diff(ld) >= 0)
