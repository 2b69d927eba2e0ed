import numpy as np
import pytest

from toposurf.builders import build, BuildSpec
from toposurf.geodesic import distance_field


@pytest.fixture(scope="session")
def disk_mesh():
    return build(BuildSpec("hyperbolic_disk", h=0.1, radius=3.0))


@pytest.fixture(scope="session")
def disk_field(disk_mesh):
    return distance_field(disk_mesh, int(disk_mesh.labels["center"][0]))


@pytest.fixture(scope="session")
def cylinder_mesh():
    return build(BuildSpec("flat_cylinder", h=0.1, circumference=2.0, height=10.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[key])
