"""Linear network coding primitives on emulated programmable switches."""
from importlib import resources

from .topology import Topology


def fixture_path(name: str):
    """Path of a bundled topology fixture, e.g. ``fixture_path("butterfly.topo")``."""
    return resources.files(__name__).joinpath("data", name)


def load_fixture(name: str) -> Topology:
    return Topology.loads(fixture_path(name).read_text())


__all__ = ["Topology", "fixture_path", "load_fixture"]
