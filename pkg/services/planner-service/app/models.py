"""
Pydantic models for planner service
"""
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import settings
from shared.common.enums import ContourEngine, CurveMetric, GateStatus
from shared.common.errors import InfeasibleUsersError, UnsupportedOrderError

SUPPORTED_ORDERS = (1, 2, 3)


def _require_finite(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError("value must be finite")
    return value


def check_order(order: int) -> int:
    """Raise UnsupportedOrderError unless order is 1, 2 or 3"""
    if order not in SUPPORTED_ORDERS:
        raise UnsupportedOrderError(
            f"Cooperation order {order} is not supported",
            error_code="unsupported_order",
            details={"order": order, "supported": list(SUPPORTED_ORDERS)},
        )
    return order


def check_users(users: int, order: int, antennas: int) -> int:
    """Raise InfeasibleUsersError unless 1 <= U <= N*M"""
    if users < 1 or users > order * antennas:
        raise InfeasibleUsersError(
            f"{users} users cannot be zero-forced by {order}x{antennas} antennas",
            error_code="infeasible_users",
            details={"users": users, "order": order, "antennas_per_bs": antennas},
        )
    return users


# Geometry models
class Point2D(BaseModel):
    """Planar position in meters"""
    x: float
    y: float

    model_config = ConfigDict(frozen=True)

    check_finite = field_validator("x", "y")(_require_finite)


class HexSpacing(BaseModel):
    """Inter-BS distance of the hexagonal lattice"""
    d_spacing: float = Field(..., gt=0, allow_inf_nan=False)

    model_config = ConfigDict(frozen=True)


class CoopRegion(BaseModel):
    """N cooperating BSs and the polygon they jointly serve"""
    order: int
    bs_positions: List[Point2D]
    spacing: float = Field(..., gt=0)
    polygon: List[Point2D]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_shape(self) -> "CoopRegion":
        check_order(self.order)
        if len(self.bs_positions) != self.order:
            raise ValueError("bs_positions must hold one entry per cooperating BS")
        if len(self.polygon) < 3:
            raise ValueError("polygon needs at least three vertices")
        return self


# Radio models
class LinkBudget(BaseModel):
    """Radio constants converting distance to received SNR"""
    a_db: float = -39.0
    b_db_per_decade: float = Field(67.0, gt=0)
    sigma_L_db: float = Field(6.0, ge=0)
    user_power_dbm: float = 30.0
    noise_power_dbm: float = -90.0
    antennas_per_bs: int = Field(1, ge=1)

    model_config = ConfigDict(frozen=True)

    @property
    def snr_ratio(self) -> float:
        """sigma_s^2 / sigma^2 in linear units (the mW unit cancels)"""
        return 10.0 ** (self.user_power_dbm / 10.0) / 10.0 ** (self.noise_power_dbm / 10.0)

    @property
    def snr_scale(self) -> float:
        """theta' = (sigma_s^2 / sigma^2) * 10^(-a/10)"""
        return self.snr_ratio * 10.0 ** (-self.a_db / 10.0)

    @property
    def alpha(self) -> float:
        return self.b_db_per_decade / 10.0

    @property
    def sigma_z(self) -> float:
        """Shadowing std in natural-log units"""
        return 0.1 * math.log(10.0) * self.sigma_L_db


class RngStream(BaseModel):
    """Identifies one reproducible random stream"""
    seed: int = Field(..., ge=0, lt=2**64)
    stream_id: int = Field(0, ge=0, lt=2**64)

    model_config = ConfigDict(frozen=True)

    def generator(self, *counters: int) -> np.random.Generator:
        """Counter-based Philox generator keyed by (seed, stream_id, *counters)"""
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *counters))
        return np.random.Generator(np.random.Philox(sequence))


class ChannelMatrix(BaseModel):
    """One NM x U realization of the composite channel"""
    entries: np.ndarray
    n_bs: int = Field(..., ge=1)
    n_ant: int = Field(..., ge=1)
    n_users: int = Field(..., ge=1)

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def check_entries(self) -> "ChannelMatrix":
        if self.entries.shape != (self.n_bs * self.n_ant, self.n_users):
            raise ValueError(
                f"entries shape {self.entries.shape} does not match "
                f"({self.n_bs * self.n_ant}, {self.n_users})"
            )
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("channel entries must be finite")
        return self


# Analytic models
class SnrDistribution(BaseModel):
    """Log-normal fit of one user's SNR (natural-log parameters)"""
    mu: float
    sigma: float = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)

    check_finite = field_validator("mu", "sigma")(_require_finite)


class ProductSnrParams(BaseModel):
    """Log-normal parameters of the product of all users' SNRs"""
    a_bar: float
    b_bar: float = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)


class QSeriesCoeffs(BaseModel):
    """Exponential-polynomial Q-function approximation"""
    A_bar: float = 1.98
    B_bar: float = 1.135
    J: int = Field(10, ge=1)

    model_config = ConfigDict(frozen=True)

    @classmethod
    def from_settings(cls) -> "QSeriesCoeffs":
        return cls(A_bar=settings.q_series_a_bar, B_bar=settings.q_series_b_bar, J=settings.q_series_terms)

    @property
    def a_j(self) -> List[float]:
        """a_j = (-1)^(j+1) A^j / (B sqrt(pi) sqrt(2)^(j+1) j!) for j = 1..J"""
        return [
            (-1) ** (j + 1) * self.A_bar ** j
            / (self.B_bar * math.sqrt(math.pi) * math.sqrt(2.0) ** (j + 1) * math.factorial(j))
            for j in range(1, self.J + 1)
        ]


# Monte Carlo models
class TrialConfig(BaseModel):
    """Everything one Monte Carlo campaign needs"""
    region: CoopRegion
    user_positions: List[Point2D]
    budget: LinkBudget
    trials: int = Field(..., ge=1)
    seed: int = Field(..., ge=0, lt=2**64)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_user_count(self) -> "TrialConfig":
        check_users(len(self.user_positions), self.region.order, self.budget.antennas_per_bs)
        return self

    @property
    def users(self) -> int:
        return len(self.user_positions)


class RateSample(BaseModel):
    """Exact sum-rate and its two bounds for one channel draw (b/s/Hz)"""
    r_exact: float
    r_lower: float
    r_hadamard: float


class EmpiricalEstimate(BaseModel):
    """Sample estimate with a normal-approximation 95% interval"""
    mean: float
    std_error: float = Field(..., ge=0)
    count: int = Field(..., ge=0)
    ci95: Tuple[float, float]
    redraws: int = 0

    @model_validator(mode="after")
    def check_interval(self) -> "EmpiricalEstimate":
        lo, hi = self.ci95
        if not lo <= self.mean <= hi:
            raise ValueError("ci95 must bracket the mean")
        return self


# Planner models
class PlanQuery(BaseModel):
    """Planning request: meet target_rcp at per-user rate threshold_t everywhere"""
    coop_order: int
    users: int
    threshold_t: float = Field(..., gt=0)
    target_rcp: float = Field(..., gt=0, lt=1)
    budget: LinkBudget = Field(default_factory=LinkBudget)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_feasible(self) -> "PlanQuery":
        check_order(self.coop_order)
        check_users(self.users, self.coop_order, self.budget.antennas_per_bs)
        return self


class PlanResult(BaseModel):
    """Solved spacing and density with solver diagnostics"""
    spacing: float
    density: float
    achieved_rcp: Optional[float] = None
    achieved_rate: Optional[float] = None
    iterations: int
    bracket: Tuple[float, float]
    slack: bool = False
    metric: CurveMetric = CurveMetric.RCP


class CurvePoint(BaseModel):
    density: float
    spacing: float
    value: float
    antennas: int
    order: int


class ContourPoint(BaseModel):
    x: float
    y: float
    rcp: float
    ci_lo: Optional[float] = None
    ci_hi: Optional[float] = None


class ComparisonRow(BaseModel):
    target_rcp: float
    order: int
    required_density: Optional[float] = None
    ratio_vs_n1: Optional[float] = None
    status: str = "ok"


class GateResult(BaseModel):
    """One line of the validation report"""
    section: str
    name: str
    value: float
    threshold: Optional[float] = None
    status: GateStatus = GateStatus.INFO


class RegimePoint(BaseModel):
    """Hadamard-bound behaviour at one worst-point distance"""
    spacing: float
    distance: float
    mean_gap: float
    fraction_above: float


# CLI models
def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class RunConfig(BaseModel):
    """Effective configuration of one CLI run"""
    # Link budget
    a_db: float = -39.0
    b_db_per_decade: float = Field(67.0, gt=0)
    sigma_L_db: float = Field(6.0, ge=0)
    user_power_dbm: float = 30.0
    noise_power_dbm: float = -90.0
    antennas_per_bs: int = Field(1, ge=1)

    # Scenario
    coop_order: int = 3
    users: int = Field(3, ge=1)
    threshold_t: float = Field(1.0, gt=0)
    target_rcp: float = Field(0.7, gt=0, lt=1)
    spacing_m: Optional[float] = Field(None, gt=0)

    # Monte Carlo
    trials: int = Field(default_factory=lambda: settings.default_trials, ge=1)
    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0, lt=2**64)
    threads: int = Field(default_factory=lambda: settings.default_threads, ge=1)

    # Output and engines
    output_path: Optional[str] = None
    engine: ContourEngine = ContourEngine.ANALYTIC
    metric: CurveMetric = CurveMetric.RCP
    carrier_frequency_ghz: float = Field(default_factory=lambda: settings.carrier_frequency_ghz, gt=0)

    # Curve
    density_min: float = Field(2e-6, gt=0)
    density_max: float = Field(1.2e-5, gt=0)
    density_points: int = Field(41, ge=1)
    antenna_set: List[int] = Field(default_factory=lambda: [1, 2, 4])
    curve_orders: Optional[List[int]] = None

    # Contour
    contour_pitch_m: Optional[float] = Field(None, gt=0)

    # Compare
    compare_targets: List[float] = Field(default_factory=lambda: [0.7])
    compare_users: int = Field(1, ge=1)

    model_config = ConfigDict(extra="forbid")

    split_lists = field_validator("antenna_set", "curve_orders", "compare_targets", mode="before")(_split_list)

    @field_validator("engine", mode="before")
    @classmethod
    def parse_engine(cls, value):
        if isinstance(value, str):
            return ContourEngine.parse(value)
        return value

    @field_validator("coop_order")
    @classmethod
    def check_order_value(cls, value: int) -> int:
        if value not in SUPPORTED_ORDERS:
            raise ValueError(f"coop_order must be one of {list(SUPPORTED_ORDERS)}")
        return value

    @field_validator("antenna_set")
    @classmethod
    def check_antennas(cls, value: List[int]) -> List[int]:
        if not value or any(m < 1 for m in value):
            raise ValueError("antenna_set needs at least one positive antenna count")
        return value

    @field_validator("curve_orders")
    @classmethod
    def check_curve_orders(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None and (not value or any(n not in SUPPORTED_ORDERS for n in value)):
            raise ValueError(f"curve_orders must list orders from {list(SUPPORTED_ORDERS)}")
        return value

    @field_validator("compare_targets")
    @classmethod
    def check_targets(cls, value: List[float]) -> List[float]:
        if not value or any(not 0 < t < 1 for t in value):
            raise ValueError("compare_targets must lie in the open interval (0, 1)")
        return value

    @model_validator(mode="after")
    def check_grid(self) -> "RunConfig":
        if self.density_max < self.density_min:
            raise ValueError("density_max must not be below density_min")
        return self

    def budget(self, antennas: Optional[int] = None) -> LinkBudget:
        """LinkBudget for this run, optionally with another antenna count"""
        return LinkBudget(
            a_db=self.a_db,
            b_db_per_decade=self.b_db_per_decade,
            sigma_L_db=self.sigma_L_db,
            user_power_dbm=self.user_power_dbm,
            noise_power_dbm=self.noise_power_dbm,
            antennas_per_bs=antennas if antennas is not None else self.antennas_per_bs,
        )
