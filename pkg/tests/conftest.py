import numpy as np
import pytest

from layerineq.domain import LayerDomain, geometry_report
from layerineq.surface import RadialSurface
from layerineq.verify import make_grids

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def spheres():
    return LayerDomain.spheres(1.0, 1.4)


@pytest.fixture(scope="session")
def perturbed():
    return LayerDomain(RadialSurface(1.0), RadialSurface(1.3, ((1, 1, 0.02),)))


@pytest.fixture(scope="session")
def sphere_report(spheres):
    return geometry_report(spheres)


@pytest.fixture(scope="session")
def sphere_grids(spheres):
    return make_grids(spheres)


@pytest.fixture(scope="session")
def perturbed_grids(perturbed):
    return make_grids(perturbed)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
