"""
Shared enums for CoMPlan
"""
from enum import Enum


class RateKind(str, Enum):
    """Which sum-rate expression a Monte Carlo estimate is built from"""
    EXACT = "exact"
    LOWER = "lower"
    HADAMARD = "hadamard"


class ContourEngine(str, Enum):
    """How contour cells are evaluated"""
    ANALYTIC = "analytic"
    MC_EXACT = "mc_exact"

    @classmethod
    def parse(cls, value: str) -> "ContourEngine":
        """Accept the short CLI spelling 'mc' as well as the enum values"""
        if value == "mc":
            return cls.MC_EXACT
        return cls(value)


class CurveMetric(str, Enum):
    """Quantity plotted against BS density"""
    RCP = "rcp"
    ERGODIC = "ergodic"


class GateStatus(str, Enum):
    """Outcome of one validation gate"""
    PASSED = "pass"
    FAILED = "fail"
    INFO = "info"
