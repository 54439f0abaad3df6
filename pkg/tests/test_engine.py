import numpy as np
import pytest

from gridrel.engine import (
    CHARGE, DISCHARGE, IDLE, ScriptedFault, SequentialSimulation,
    SimulationConfig, run_iteration, run_monte_carlo, update_battery_demand,
)
from gridrel.indices import aggregate, iteration_report
from gridrel.netfile import parse_network_text
from gridrel.network import Battery, build_network
from gridrel.scenarios import apply_scenario
from gridrel.timeseries import ProfileSet

from conftest import CHAIN4

CHAIN4_ICT = CHAIN4 + """
[ict]
controller CTRL hw_rate=0.2 hw_repair=2.5h sw_rate=0 new_signal=2s reboot=5min manual=0.3h p_new_signal=0 p_reboot=0
sensor S1 line=L1 rate=0.023 new_signal=2s reboot=5min manual=2h p_new_signal=0 p_reboot=0
sensor S2 line=L2 rate=0.023 new_signal=2s reboot=5min manual=2h p_new_signal=0 p_reboot=0
sensor S3 line=L3 rate=0.023 new_signal=2s reboot=5min manual=2h p_new_signal=0 p_reboot=0
switch IS1 disconnector=D1 rate=0.03 repair=2h
switch IS2 disconnector=D2 rate=0.03 repair=2h
switch IS3 disconnector=D3 rate=0.03 repair=2h
"""

BATTERY_ISLAND = """
[network]
id = BI
[systems]
dist DS1 root=B1
[buses]
B1 customers=0
B2 customers=10 load_mw=0.2 category=general
B3 customers=10 load_mw=0.2 category=general
B4 customers=10 load_mw=0.1 category=general
[lines]
L1 from=B1 to=B2 r_pu=0.005 x_pu=0.005 capacity_mw=10 rate=0 repair=4h
L2 from=B2 to=B3 r_pu=0.005 x_pu=0.005 capacity_mw=10 rate=0 repair=4h
L3 from=B3 to=B4 r_pu=0.005 x_pu=0.005 capacity_mw=10 rate=0 repair=4h
[switchgear]
CB kind=breaker line=L1 end=from state=closed
D1 kind=disconnector line=L1 end=from state=closed
D2 kind=disconnector line=L2 end=from state=closed
D3 kind=disconnector line=L3 end=from state=closed
[batteries]
BAT bus=B3 capacity_mwh=1000 inverter_mw=0.3 soc_min=0.1 soc_max=0.9
"""
# the huge capacity makes the discharge bound inverter-limited (0.3 MW) for
# any plausible SOC draw, so the island outcome does not depend on the draw

WIND_CHARGE = """
[network]
id = WC
[systems]
dist DS1 root=B1
[buses]
B1 customers=0
B2 customers=10 load_mw=0.1 category=general
B3 customers=10 load_mw=0.1 category=general
B4 customers=5 load_mw=0.0 category=general
[lines]
L1 from=B1 to=B2 r_pu=0.005 x_pu=0.005 capacity_mw=10 rate=0 repair=4h
L2 from=B2 to=B3 r_pu=0.005 x_pu=0.005 capacity_mw=10 rate=0 repair=4h
L3 from=B3 to=B4 r_pu=0.005 x_pu=0.005 capacity_mw=10 rate=0 repair=4h
[switchgear]
CB kind=breaker line=L1 end=from state=closed
D1 kind=disconnector line=L1 end=from state=closed
[production]
W bus=B3 min_mw=0 max_mw=1.0
[batteries]
BAT bus=B4 capacity_mwh=1 inverter_mw=0.5 soc_min=0.2 soc_max=0.2
"""
# charge headroom below the inverter limit: one islanded hour tops the
# battery up to soc_max exactly, whatever the onset draw was
WIND_CHARGE = WIND_CHARGE.replace("soc_min=0.2 soc_max=0.2",
                                  "soc_min=0.2 soc_max=0.4")


def _flat_profiles(horizon=48.0):
    return ProfileSet(1.0, horizon)


def _config(**kw):
    defaults = dict(increment_h=1.0, horizon_h=48.0, iterations=1, master_seed=1)
    defaults.update(kw)
    return SimulationConfig(**defaults)


def _run_scripted(text, faults, horizon=48.0, **cfg):
    model = build_network(parse_network_text(text))
    config = _config(horizon_h=horizon, **cfg)
    ledger = run_iteration(model, _flat_profiles(horizon), config, 0,
                           script=[ScriptedFault(t, c) for t, c in faults])
    return model, ledger


# -- scripted fault timelines ---------------------------------------------


def test_mid_feeder_fault_manual_sectioning():
    _, ledger = _run_scripted(CHAIN4, [(10.0, "L2")])
    assert ledger.outage_hours == {"B2": 1.0, "B3": 5.0, "B4": 5.0}
    assert ledger.interruptions == {"B2": 1.0, "B3": 1.0, "B4": 1.0}
    assert ledger.ens_mwh == pytest.approx({"B2": 0.2, "B3": 1.5, "B4": 0.5})
    assert ledger.warnings == []


def test_leaf_fault_takes_out_only_the_leaf_after_sectioning():
    _, ledger = _run_scripted(CHAIN4, [(10.0, "L3")])
    assert ledger.outage_hours == {"B2": 1.0, "B3": 1.0, "B4": 5.0}


def test_root_fault_blacks_out_whole_feeder():
    _, ledger = _run_scripted(CHAIN4, [(10.0, "L1")])
    # the faulted section (L1 + B2) adjoins every path: all buses wait for repair
    assert ledger.outage_hours == {"B2": 5.0, "B3": 5.0, "B4": 5.0}


def test_two_simultaneous_faults_each_keep_their_own_timer():
    _, ledger = _run_scripted(CHAIN4, [(10.0, "L1"), (10.0, "L3")])
    assert ledger.outage_hours == {"B2": 5.0, "B3": 5.0, "B4": 5.0}
    assert ledger.interruptions == {"B2": 1.0, "B3": 1.0, "B4": 1.0}


def test_restoration_returns_switches_to_normal_and_is_idempotent():
    model = build_network(parse_network_text(CHAIN4))
    config = _config()
    sim = SequentialSimulation(model, _flat_profiles(), config,
                               np.random.default_rng(0),
                               script=[ScriptedFault(5.0, "L2")])
    sim.run()
    assert sim.switch_closed == model.normal_switch_states()
    assert sim.isolate_and_restore() == []


def test_outage_truncates_at_horizon():
    _, ledger = _run_scripted(CHAIN4, [(46.0, "L2")], horizon=48.0)
    assert ledger.outage_hours["B4"] == 2.0  # only 2 of the 5 hours fit


# -- ICT behavior -----------------------------------------------------------


def test_automated_sectioning_spares_upstream():
    _, ledger = _run_scripted(CHAIN4_ICT, [(10.0, "L2")])
    assert ledger.outage_hours == {"B2": 0.0, "B3": 4.0, "B4": 4.0}
    assert ledger.interruptions == {"B2": 0.0, "B3": 1.0, "B4": 1.0}


def test_controller_hardware_failure_forces_manual():
    _, ledger = _run_scripted(CHAIN4_ICT, [(9.0, "CTRL/hw"), (10.0, "L2")])
    # controller repair spans 10h..12h (2.5h floored to 2 increments)
    assert ledger.outage_hours["B2"] == 1.0


def test_latent_sensor_fault_discovered_on_first_call():
    model, ledger = _run_scripted(
        CHAIN4_ICT, [(5.0, "S2"), (10.0, "L2"), (30.0, "L2")])
    events = {(t, c): e for t, c, e in ledger.events}
    # first fault: sensor dead -> manual sectioning, discovery starts its repair
    assert events[(10.0, "S2")].startswith("latent_discovered")
    # second fault: sensor repaired -> automated, upstream spared
    assert ledger.outage_hours["B2"] == 1.0  # only the first event's hour


def test_dead_intelligent_switch_forces_manual_and_is_discovered():
    _, ledger = _run_scripted(CHAIN4_ICT, [(5.0, "IS3"), (10.0, "L2")])
    # IS3 guards D3, which bounds L2's section, so it is called and found dead
    assert ledger.outage_hours["B2"] == 1.0
    assert any(c == "IS3" and e.startswith("latent_discovered")
               for _, c, e in ledger.events)


def test_sub_increment_ict_repairs_are_invisible_at_hourly_steps():
    text = CHAIN4_ICT.replace("p_new_signal=0 p_reboot=0",
                              "p_new_signal=1 p_reboot=0")
    _, ledger = _run_scripted(text, [(5.0, "S2"), (10.0, "L2")])
    # the sensor recovers via new-signal (2 s) within the failure increment,
    # but it was dead when called at t=10: manual fallback still applies
    assert ledger.outage_hours["B2"] == 1.0


# -- islands and batteries ---------------------------------------------------


def test_battery_island_covers_part_of_the_demand():
    _, ledger = _run_scripted(BATTERY_ISLAND, [(10.0, "L1")], horizon=20.0)
    # sectioning hour: island of all 3 load buses, battery serves 0.3 of 0.5;
    # lexicographic tie-break puts the 0.2 MW shortfall on B3 (partial) and
    # B4 (full) - B2 is served first
    assert ledger.ens_mwh["B2"] == pytest.approx(0.8)   # 4 repair hours in-section
    assert ledger.ens_mwh["B3"] == pytest.approx(0.1)
    assert ledger.ens_mwh["B4"] == pytest.approx(0.1)
    assert ledger.outage_hours == {"B2": 4.0, "B3": 0.0, "B4": 1.0}
    assert ledger.interruptions == {"B2": 1.0, "B3": 0.0, "B4": 1.0}
    assert ledger.warnings == []


def test_island_charging_stores_wind_surplus():
    model = build_network(parse_network_text(WIND_CHARGE))
    config = _config(horizon_h=11.0)
    rng = np.random.default_rng(0)
    sim = SequentialSimulation(model, _flat_profiles(11.0), config, rng,
                               script=[ScriptedFault(10.0, "L1")])
    sim.run()
    # islanded with 1.0 MW wind against 0.2 MW demand: the battery soaks up
    # surplus until it hits soc_max within the hour
    assert sim.soc["BAT"] == pytest.approx(0.4)


def test_update_battery_demand_bounds():
    bat = Battery("B", "x", capacity_mwh=1.0, inverter_mw=0.5,
                  soc_min=0.1, soc_max=1.0)
    assert update_battery_demand(1.0, 0.0, bat, 0.1, 1.0, False) == (DISCHARGE, 0.0)
    mode, bound = update_battery_demand(1.0, 0.0, bat, 1.0, 1.0, False)
    assert (mode, bound) == (DISCHARGE, 0.5)  # inverter-limited
    mode, bound = update_battery_demand(1.0, 0.0, bat, 0.2, 1.0, False)
    assert mode == DISCHARGE and bound == pytest.approx(0.1)  # energy-limited
    assert update_battery_demand(1.0, 0.0, bat, 0.5, 1.0, True) == (IDLE, 0.0)
    mode, bound = update_battery_demand(0.2, 1.0, bat, 0.5, 1.0, False)
    assert mode == CHARGE and bound == pytest.approx(0.5)


def test_discharge_bound_from_bundled_battery_numbers():
    bat = Battery("B", "x", capacity_mwh=1.0, inverter_mw=0.5,
                  soc_min=0.1, soc_max=1.0)
    _, bound = update_battery_demand(5.0, 0.0, bat, 0.55, 1.0, False)
    assert bound == pytest.approx(min(0.5, (0.55 - 0.1) * 1.0 / 1.0))
    assert bound == pytest.approx(0.45)


# -- stochastic behavior -----------------------------------------------------


def test_zero_rates_give_empty_ledger(chain4):
    config = _config(horizon_h=8760.0)
    ledger = run_iteration(chain4, _flat_profiles(8760.0), config, 0)
    assert sum(ledger.outage_hours.values()) == 0.0
    assert sum(ledger.interruptions.values()) == 0.0
    assert ledger.events == []


def test_identical_seeds_identical_ledgers(ieee33_spec):
    model = build_network(apply_scenario(ieee33_spec, "case4"))
    config = SimulationConfig(iterations=1, master_seed=77)
    profiles = ProfileSet(1.0, 8760.0)
    a = run_iteration(model, profiles, config, 0, cost_table={})
    b = run_iteration(model, profiles, config, 0, cost_table={})
    assert a == b


def test_different_iterations_differ(ieee33_spec):
    model = build_network(apply_scenario(ieee33_spec, "case1"))
    config = SimulationConfig(iterations=1, master_seed=77)
    profiles = ProfileSet(1.0, 8760.0)
    a = run_iteration(model, profiles, config, 0, cost_table={})
    b = run_iteration(model, profiles, config, 1, cost_table={})
    assert a.events != b.events


def test_single_line_poisson_expectation():
    text = CHAIN4.replace("L1 from=B1 to=B2 r_pu=0.01 x_pu=0.01 capacity_mw=10 rate=0",
                          "L1 from=B1 to=B2 r_pu=0.01 x_pu=0.01 capacity_mw=10 rate=1")
    model = build_network(parse_network_text(text))
    n = 10_000
    config = SimulationConfig(iterations=n, master_seed=5, horizon_h=8760.0)
    ledgers = run_monte_carlo(model, _flat_profiles(8760.0), config)
    counts = np.array([l.interruptions["B4"] for l in ledgers])
    mean = counts.mean()
    sem = counts.std(ddof=1) / np.sqrt(n)
    # 5 h of downtime per event trims the Poisson expectation by ~0.06%
    assert abs(mean - 1.0) <= 3 * sem + 0.005


def test_parallel_equals_sequential(ieee33_spec, bundled_profiles, cost_table):
    loads, wind = bundled_profiles
    model = build_network(apply_scenario(ieee33_spec, "case4"))
    profiles = ProfileSet(1.0, 8760.0, loads, wind)
    seq = run_monte_carlo(model, profiles,
                          SimulationConfig(iterations=12, master_seed=3,
                                           worker_count=1), cost_table)
    par = run_monte_carlo(model, profiles,
                          SimulationConfig(iterations=12, master_seed=3,
                                           worker_count=2), cost_table)
    assert seq == par


def test_aggregate_report_from_single_iteration(chain4):
    config = _config()
    ledger = run_iteration(chain4, _flat_profiles(), config, 0,
                           script=[ScriptedFault(10.0, "L2")])
    report = iteration_report(ledger, {"general": 10.0})
    agg = aggregate([report])
    assert agg.ens.mean == report.ens_mwh
    assert agg.ens.std == 0.0


def test_ens_is_linear_in_load_scaling():
    doubled = CHAIN4.replace("load_mw=0.2", "load_mw=0.4") \
                    .replace("load_mw=0.3", "load_mw=0.6") \
                    .replace("load_mw=0.1", "load_mw=0.2")
    base_model = build_network(parse_network_text(CHAIN4))
    big_model = build_network(parse_network_text(doubled))
    config = _config()
    script = [ScriptedFault(10.0, "L2")]
    a = run_iteration(base_model, _flat_profiles(), config, 0, script=script)
    b = run_iteration(big_model, _flat_profiles(), config, 0, script=script)
    for bus in a.ens_mwh:
        assert b.ens_mwh[bus] == pytest.approx(2 * a.ens_mwh[bus], rel=1e-12)


def test_ledger_accumulators_are_nonnegative(ieee33_spec, bundled_profiles,
                                             cost_table):
    loads, wind = bundled_profiles
    model = build_network(apply_scenario(ieee33_spec, "case2"))
    profiles = ProfileSet(1.0, 8760.0, loads, wind)
    ledger = run_iteration(model, profiles,
                           SimulationConfig(iterations=1, master_seed=8),
                           0, cost_table=cost_table)
    assert all(v >= 0 for v in ledger.outage_hours.values())
    assert all(v >= 0 for v in ledger.ens_mwh.values())
    assert all(v >= 0 for v in ledger.interruptions.values())
