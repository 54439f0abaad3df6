#!/usr/bin/env python3
"""Regenerate the bundled data files (network files, profiles, cost table).

The load and wind profiles are synthetic deterministic shapes: diurnal
sinusoids with a weekend dip for the three load categories, and a gusty
low-capacity-factor wind series. Two weeks at hourly resolution; the
simulator wraps them over longer horizons.
"""

import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.normpath(os.path.join(HERE, "..", "src", "gridrel", "data"))

# Baran/Wu 33-bus feeder: line, from, to, R ohm, X ohm, load at to-bus (kW, kvar)
BRANCHES = [
    (1, 1, 2, 0.0922, 0.0470, 100, 60),
    (2, 2, 3, 0.4930, 0.2511, 90, 40),
    (3, 3, 4, 0.3660, 0.1864, 120, 80),
    (4, 4, 5, 0.3811, 0.1941, 60, 30),
    (5, 5, 6, 0.8190, 0.7070, 60, 20),
    (6, 6, 7, 0.1872, 0.6188, 200, 100),
    (7, 7, 8, 0.7114, 0.2351, 200, 100),
    (8, 8, 9, 1.0300, 0.7400, 60, 20),
    (9, 9, 10, 1.0440, 0.7400, 60, 20),
    (10, 10, 11, 0.1966, 0.0650, 45, 30),
    (11, 11, 12, 0.3744, 0.1238, 60, 35),
    (12, 12, 13, 1.4680, 1.1550, 60, 35),
    (13, 13, 14, 0.5416, 0.7129, 120, 80),
    (14, 14, 15, 0.5910, 0.5260, 60, 10),
    (15, 15, 16, 0.7463, 0.5450, 60, 20),
    (16, 16, 17, 1.2890, 1.7210, 60, 20),
    (17, 17, 18, 0.7320, 0.5740, 90, 40),
    (18, 2, 19, 0.1640, 0.1565, 90, 40),
    (19, 19, 20, 1.5042, 1.3554, 90, 40),
    (20, 20, 21, 0.4095, 0.4784, 90, 40),
    (21, 21, 22, 0.7089, 0.9373, 90, 40),
    (22, 3, 23, 0.4512, 0.3083, 90, 50),
    (23, 23, 24, 0.8980, 0.7091, 420, 200),
    (24, 24, 25, 0.8960, 0.7011, 420, 200),
    (25, 6, 26, 0.2030, 0.1034, 60, 25),
    (26, 26, 27, 0.2842, 0.1447, 60, 25),
    (27, 27, 28, 1.0590, 0.9337, 60, 20),
    (28, 28, 29, 0.8042, 0.7006, 120, 70),
    (29, 29, 30, 0.5075, 0.2585, 200, 600),
    (30, 30, 31, 0.9744, 0.9630, 150, 70),
    (31, 31, 32, 0.3105, 0.3619, 210, 100),
    (32, 32, 33, 0.3410, 0.5302, 60, 40),
]

COMMERCIAL = {7, 8, 24, 25, 31, 32}
INDUSTRIAL = {30}


def bus_name(n):
    return f"B{n:02d}"


def line_name(n):
    return f"L{n:02d}"


def make_ieee33():
    out = ["# IEEE 33-bus radial feeder with ICT, wind at B15, battery at B30.",
           "# Impedances: Baran/Wu data in ohms on a 12.66 kV, 10 MVA base.",
           "",
           "[network]", "id = IEEE33", "base_mva = 10", "base_kv = 12.66", "",
           "[systems]", "dist DS1 root=B01", "",
           "[reliability]",
           "line rate=0.07 repair=4h",
           "transformer rate=0.007 repair=8h", "",
           "[buses]", "B01 customers=0"]
    loads = {}
    for _, _, to, _, _, p_kw, q_kvar in BRANCHES:
        loads[to] = (p_kw, q_kvar)
    for n in range(2, 34):
        p_kw, q_kvar = loads[n]
        if n in INDUSTRIAL:
            category, customers = "industrial", 2
        elif n in COMMERCIAL:
            category, customers = "commercial", 8
        else:
            category, customers = "residential", max(4, round(p_kw / 2))
        out.append(f"{bus_name(n)} customers={customers} load_mw={p_kw / 1000} "
                   f"load_mvar={q_kvar / 1000} profile={category} "
                   f"category={category} transformer=yes")

    out += ["", "[lines]"]
    for idx, frm, to, r, x, _, _ in BRANCHES:
        out.append(f"{line_name(idx)} from={bus_name(frm)} to={bus_name(to)} "
                   f"r_ohm={r} x_ohm={x} capacity_mw=10")

    out += ["", "[switchgear]", "CB1 kind=breaker line=L01 end=from state=closed"]
    for idx, *_ in BRANCHES:
        out.append(f"D{idx:02d} kind=disconnector line={line_name(idx)} "
                   f"end=from state=closed")

    out += ["", "[production]", "WIND1 bus=B15 min_mw=0 max_mw=5 profile=wind"]
    out += ["", "[batteries]",
            "BAT1 bus=B30 capacity_mwh=1 inverter_mw=0.5 soc_min=0.1 soc_max=1.0"]

    out += ["", "[ict]",
            "controller CTRL hw_rate=0.2 hw_repair=2.5h sw_rate=12 "
            "new_signal=2s reboot=5min manual=0.3h p_new_signal=0.9 p_reboot=0.9"]
    for idx, *_ in BRANCHES:
        out.append(f"sensor S{idx:02d} line={line_name(idx)} rate=0.023 "
                   f"new_signal=2s reboot=5min manual=2h p_new_signal=0.9 p_reboot=0.9")
    for idx, *_ in BRANCHES:
        out.append(f"switch IS{idx:02d} disconnector=D{idx:02d} rate=0.03 repair=2h")
    out.append("")
    return "\n".join(out)


def make_validation6():
    return """# Passive 6-bus validation feeder (no DG, battery or ICT).
# Indices are reproduced by hand in the test suite.

[network]
id = VALID6
base_mva = 10
base_kv = 12.66

[systems]
dist DS1 root=VB1

[buses]
VB1 customers=0
VB2 customers=25 load_mw=0.4 load_mvar=0.1 profile=flat category=general
VB3 customers=30 load_mw=0.3 load_mvar=0.08 profile=flat category=general
VB4 customers=20 load_mw=0.2 load_mvar=0.05 profile=flat category=general transformer_rate=0.1 transformer_repair=8h
VB5 customers=15 load_mw=0.25 load_mvar=0.06 profile=flat category=general
VB6 customers=10 load_mw=0.15 load_mvar=0.04 profile=flat category=general

[lines]
VL1 from=VB1 to=VB2 r_pu=0.01 x_pu=0.008 capacity_mw=10 rate=0.5 repair=4h
VL2 from=VB2 to=VB3 r_pu=0.012 x_pu=0.009 capacity_mw=10 rate=0.6 repair=8h
VL3 from=VB3 to=VB4 r_pu=0.015 x_pu=0.01 capacity_mw=10 rate=0.4 repair=4h
VL4 from=VB2 to=VB5 r_pu=0.011 x_pu=0.008 capacity_mw=10 rate=0.7 repair=6h
VL5 from=VB5 to=VB6 r_pu=0.014 x_pu=0.01 capacity_mw=10 rate=0.5 repair=4h

[switchgear]
CB kind=breaker line=VL1 end=from state=closed
DV1 kind=disconnector line=VL1 end=from state=closed
DV2 kind=disconnector line=VL2 end=from state=closed
DV3 kind=disconnector line=VL3 end=from state=closed
DV4 kind=disconnector line=VL4 end=from state=closed
DV5 kind=disconnector line=VL5 end=from state=closed
"""


def profile_rows(hours=336):
    rows = []
    for h in range(hours):
        hod = h % 24
        weekend = 0.9 if (h // 24) % 7 in (5, 6) else 1.0
        res = (0.5 + 0.22 * math.sin(2 * math.pi * (hod - 15) / 24)
               + 0.08 * math.sin(4 * math.pi * (hod - 7) / 24)) * weekend
        com = (0.5 + 0.25 * math.sin(2 * math.pi * (hod - 12) / 24)) * weekend
        ind = 0.75 + 0.1 * math.sin(2 * math.pi * (hod - 10) / 24)
        rows.append((h, res, com, ind))
    return rows


def wind_rows(hours=336):
    rows = []
    for h in range(hours):
        gust = math.sin(2 * math.pi * h / 89.0) * math.sin(2 * math.pi * h / 13.7)
        mw = 5.0 * max(0.0, gust - 0.55) / 0.45
        rows.append((h, min(mw, 5.0)))
    return rows


def main():
    os.makedirs(DATA, exist_ok=True)
    with open(os.path.join(DATA, "ieee33.net"), "w") as fh:
        fh.write(make_ieee33())
    with open(os.path.join(DATA, "validation6.net"), "w") as fh:
        fh.write(make_validation6())

    with open(os.path.join(DATA, "load_profiles.csv"), "w") as fh:
        fh.write("time_h,residential,commercial,industrial\n")
        for h, res, com, ind in profile_rows():
            fh.write(f"{h},{res:.6f},{com:.6f},{ind:.6f}\n")

    wind = wind_rows()
    with open(os.path.join(DATA, "wind.csv"), "w") as fh:
        fh.write("time_h,wind\n")
        for h, mw in wind:
            fh.write(f"{h},{mw:.6f}\n")
    mean_wind = sum(m for _, m in wind) / len(wind)
    print(f"wind mean {mean_wind:.3f} MW over {len(wind)} h "
          f"(capacity factor {mean_wind / 5.0:.3f})")

    with open(os.path.join(DATA, "costs.csv"), "w") as fh:
        fh.write("category,cost_per_mwh\n")
        fh.write("residential,12\ncommercial,45\nindustrial,110\ngeneral,20\n")


if __name__ == "__main__":
    main()
