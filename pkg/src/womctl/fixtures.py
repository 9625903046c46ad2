"""Bundled desk-scale instances used by the test and verification suites."""

from __future__ import annotations

from importlib import resources

from .scenario import Scenario
from .scenario_io import loads_scenario
from .topology import Topology


def _resource(name: str):
    return resources.files("womctl").joinpath("data").joinpath(name)


def _load(name: str) -> tuple[Topology, Scenario]:
    return loads_scenario(_resource(name).read_text(encoding="utf-8"))


def fixture_path(name: str) -> str:
    """Filesystem path of a bundled scenario file (for CLI invocations)."""
    return str(_resource(name))


def instance_a() -> tuple[Topology, Scenario]:
    """Two agents, symmetric unit delays, exact sensors, noisy plant."""
    return _load("instance_a.wom")


def instance_b() -> tuple[Topology, Scenario]:
    """Three agents on a directed ring with direction-dependent delays."""
    return _load("instance_b.wom")
