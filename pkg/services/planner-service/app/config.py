"""
Configuration for planner service
"""
import os
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings"""

    # Service
    service_name: str = "planner-service"
    service_version: str = "1.0.0"
    debug: bool = os.getenv("DEBUG", "false").lower() == "true"
    log_level: str = "INFO"

    # Geometry
    d_min_m: float = 1.0

    # Planner bisection
    rcp_tol: float = 1e-4
    rate_tol: float = 1e-4
    bracket_min_m: float = 10.0
    bracket_max_m: float = 10_000.0
    bracket_width_tol_m: float = 1e-3
    max_bisection_iterations: int = 60

    # Gaussian Q series
    q_series_a_bar: float = 1.98
    q_series_b_bar: float = 1.135
    q_series_terms: int = 10

    # Monte Carlo
    mc_block_size: int = 1024
    mc_max_redraws: int = 1000
    rank_condition_limit: float = 1e12
    identity_tol: float = 1e-8
    bound_slack: float = 1e-9

    # Validation gates
    gate_rcp_fit_tol: float = 0.08
    gate_ks_tol: float = 0.07
    gate_ergodic_rel_tol: float = 0.10
    gate_q_series_tol: float = 1e-2
    validate_thresholds: str = "0.5,1,2,4"
    regime_spacings_m: str = "100,200,300,400,600,800"

    # Run defaults
    default_trials: int = 100_000
    default_seed: int = 42
    default_threads: int = 1

    # Provenance only; folded into the path-loss coefficients
    carrier_frequency_ghz: float = 2.0

    # Output
    csv_delimiter: str = ","

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="COMPLAN_",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()
