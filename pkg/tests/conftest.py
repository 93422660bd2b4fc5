import pytest
from hypothesis import HealthCheck, settings

from smoothldc import build_sldc, load_fixture

settings.register_profile(
    "ci", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ci")

FIXTURE_NAMES = ("fig1", "fig2", "intro_nonsmooth", "eq28", "fig4")

# grid exercised by the construction and retrieval batteries
BUILD_GRID = ((2, 1), (2, 2), (2, 3), (3, 2), (3, 3), (4, 2))


@pytest.fixture(scope="session")
def codes():
    """All transcribed fixtures plus the build grid, constructed once."""
    table = {name: load_fixture(name) for name in FIXTURE_NAMES}
    for n, k in BUILD_GRID:
        table[(n, k)] = build_sldc(n, k)
    return table
