"""Shared fixtures for planner-service tests."""
import pytest

from app.models import LinkBudget
from app.services.geometry import GeometryService

# Spacing that meets RCP 0.7 at t = 1 b/s/Hz for N = 3, U = 3, M = 1
PLANNED_SPACING_M = 418.306


@pytest.fixture
def budget() -> LinkBudget:
    """LTE-A outdoor micro link budget: -39 + 67 log10(d), 6 dB shadowing, 30 dBm, -90 dBm."""
    return LinkBudget()


@pytest.fixture
def budget_factory():
    def make(**overrides) -> LinkBudget:
        return LinkBudget(**overrides)
    return make


@pytest.fixture
def triangle():
    """Three cooperating BSs at 390 m spacing."""
    return GeometryService.build_coop_region(3, 390.0)


@pytest.fixture
def planned_triangle():
    return GeometryService.build_coop_region(3, PLANNED_SPACING_M)
