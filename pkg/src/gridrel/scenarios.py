"""Bundled study configurations.

The four presets toggle ICT and local sources on top of one base network
file, mirroring the usual way reliability studies isolate the contribution
of automation and of distributed resources:

    case1  no ICT, no storage/generation
    case2  storage and generation, no ICT
    case3  ICT, no storage/generation
    case4  ICT, storage and generation

Any preset can be applied to any network spec; the bundled base case is the
IEEE 33-bus feeder with a wind unit, a battery and full ICT coverage.
"""

from __future__ import annotations

import os
from dataclasses import replace

from .network import IctSystem, NetworkSpec

SCENARIOS = ("case1", "case2", "case3", "case4")

_DATA = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


def data_path(name: str) -> str:
    return os.path.join(_DATA, name)


def bundled_network_path() -> str:
    return data_path("ieee33.net")


def bundled_validation_path() -> str:
    return data_path("validation6.net")


def bundled_load_profiles_path() -> str:
    return data_path("load_profiles.csv")


def bundled_wind_path() -> str:
    return data_path("wind.csv")


def bundled_costs_path() -> str:
    return data_path("costs.csv")


def apply_scenario(spec: NetworkSpec, name: str) -> NetworkSpec:
    """Strip ICT and/or local sources from a spec according to the preset."""
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r} (expected one of {SCENARIOS})")
    strip_ict = name in ("case1", "case2")
    strip_sources = name in ("case1", "case3")
    out = spec
    if strip_ict:
        out = replace(out, ict=IctSystem())
    if strip_sources:
        out = replace(out, production=(), batteries=())
    return out


def parse_scenario_list(text: str):
    """Accept "case2", "case1,case3" or the range form "case1..case4"."""
    names = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, _, hi = part.partition("..")
            lo, hi = lo.strip(), hi.strip()
            if lo not in SCENARIOS or hi not in SCENARIOS:
                raise ValueError(f"unknown scenario range {part!r}")
            i, j = SCENARIOS.index(lo), SCENARIOS.index(hi)
            if i > j:
                raise ValueError(f"empty scenario range {part!r}")
            names.extend(SCENARIOS[i:j + 1])
        elif part:
            if part not in SCENARIOS:
                raise ValueError(f"unknown scenario {part!r}")
            names.append(part)
    if not names:
        raise ValueError("no scenario given")
    return tuple(dict.fromkeys(names))
