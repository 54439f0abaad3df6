"""Less common network shapes: microgrids, tie lines, multiple feeders,
sub-hourly increments."""

import pytest

from gridrel.engine import ScriptedFault, SimulationConfig, run_iteration
from gridrel.netfile import parse_network_text, serialize_network_spec
from gridrel.network import (
    NetworkValidationError, build_network, connected_components,
)
from gridrel.timeseries import ProfileSet

MICROGRID = """
[network]
id = MG
[systems]
dist DS1 root=B1
microgrid M1 via=DM
[buses]
B1 customers=0
B2 customers=10 load_mw=0.2 category=general
M2 customers=5 load_mw=0.1 category=general
M3 customers=5 load_mw=0.1 category=general
[lines]
L1 from=B1 to=B2 r_pu=0.01 x_pu=0.01 capacity_mw=10 rate=0 repair=4h
LM from=B2 to=M2 r_pu=0.01 x_pu=0.01 capacity_mw=10 rate=0 repair=4h
LM2 from=M2 to=M3 r_pu=0.01 x_pu=0.01 capacity_mw=10 rate=0 repair=4h
[switchgear]
CB kind=breaker line=L1 end=from state=closed
D1 kind=disconnector line=L1 end=from state=closed
DM kind=disconnector line=LM end=from state=closed
[batteries]
MBAT bus=M3 capacity_mwh=1000 inverter_mw=0.5 soc_min=0.1 soc_max=0.9
"""

TIE = """
[network]
id = TIE
[systems]
dist DS1 root=A1
dist DS2 root=C1
[buses]
A1 customers=0
A2 customers=10 load_mw=0.2 category=general
C1 customers=0
C2 customers=10 load_mw=0.2 category=general
[lines]
LA from=A1 to=A2 r_pu=0.01 x_pu=0.01 capacity_mw=10 rate=0 repair=4h
LC from=C1 to=C2 r_pu=0.01 x_pu=0.01 capacity_mw=10 rate=0 repair=4h
LT from=A2 to=C2 r_pu=0.01 x_pu=0.01 capacity_mw=10 rate=0 repair=4h
[switchgear]
CBA kind=breaker line=LA end=from state=closed
CBC kind=breaker line=LC end=from state=closed
DA kind=disconnector line=LA end=from state=closed
DC kind=disconnector line=LC end=from state=closed
DT kind=disconnector line=LT end=from state=open
"""


def test_microgrid_builds_and_islands():
    model = build_network(parse_network_text(MICROGRID))
    assert [m.id for m in model.microgrids] == ["M1"]
    config = SimulationConfig(increment_h=1.0, horizon_h=24.0, iterations=1,
                              master_seed=0)
    ledger = run_iteration(model, ProfileSet(1.0, 24.0), config, 0,
                           script=[ScriptedFault(5.0, "L1")])
    # during the sectioning hour the microgrid battery carries the island;
    # afterwards B2 sits in the isolated section while M2/M3 stay on battery
    assert ledger.outage_hours["M2"] == 0.0
    assert ledger.outage_hours["M3"] == 0.0
    assert ledger.outage_hours["B2"] == 4.0
    assert ledger.ens_mwh["M2"] == 0.0


def test_microgrid_must_join_through_normally_closed_disconnector():
    bad = MICROGRID.replace("DM kind=disconnector line=LM end=from state=closed",
                            "DM kind=disconnector line=LM end=from state=open")
    with pytest.raises(NetworkValidationError):
        build_network(parse_network_text(bad))


def test_normally_open_tie_keeps_feeders_separate():
    model = build_network(parse_network_text(TIE))
    comps = connected_components(model, model.normal_switch_states())
    assert comps == [("A1", "A2"), ("C1", "C2")]
    assert "LT" in model.normally_open_lines
    assert model.system_of_bus["A2"] == "DS1"
    assert model.system_of_bus["C2"] == "DS2"


def test_closed_tie_between_feeders_is_rejected():
    bad = TIE.replace("DT kind=disconnector line=LT end=from state=open",
                      "DT kind=disconnector line=LT end=from state=closed")
    with pytest.raises(NetworkValidationError):
        build_network(parse_network_text(bad))


def test_fault_in_one_feeder_leaves_the_other_alone():
    model = build_network(parse_network_text(TIE))
    config = SimulationConfig(increment_h=1.0, horizon_h=24.0, iterations=1,
                              master_seed=0)
    ledger = run_iteration(model, ProfileSet(1.0, 24.0), config, 0,
                           script=[ScriptedFault(5.0, "LA")])
    assert ledger.outage_hours["A2"] == 5.0
    assert ledger.outage_hours["C2"] == 0.0


def test_microgrid_round_trips_through_the_file_format():
    spec = parse_network_text(MICROGRID)
    assert parse_network_text(serialize_network_spec(spec)) == spec


def test_half_hour_increments_reproduce_the_same_outage_totals():
    from conftest import CHAIN4
    model = build_network(parse_network_text(CHAIN4))
    config = SimulationConfig(increment_h=0.5, horizon_h=48.0, iterations=1,
                              master_seed=0)
    ledger = run_iteration(model, ProfileSet(0.5, 48.0), config, 0,
                           script=[ScriptedFault(10.0, "L2")])
    assert ledger.outage_hours == {"B2": 1.0, "B3": 5.0, "B4": 5.0}
    assert ledger.ens_mwh == pytest.approx({"B2": 0.2, "B3": 1.5, "B4": 0.5})
