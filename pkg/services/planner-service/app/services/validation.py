"""
Validation campaign: closed forms against quadrature and the Monte Carlo oracle
"""
import logging
import math
from typing import List, Optional

from app.config import settings
from app.models import GateResult, LinkBudget, PlanQuery, ProductSnrParams, RunConfig, TrialConfig
from app.services.analytic import AnalyticService
from app.services.geometry import GeometryService
from app.services.montecarlo import IDENTITY_CHECKS, MonteCarloCampaign, MonteCarloService
from app.services.planner import PlanningService
from shared.common.enums import GateStatus, RateKind

logger = logging.getLogger(__name__)

# Reference readings reported next to the measured values
REFERENCE_DENSITY = 7.5e-6
REFERENCE_EXACT_RCP = 0.75
REFERENCE_RCP_FIT_TOL = 0.03
REFERENCE_KS_TOL = 0.03

ERGODIC_GRID_A = (0.5, 1.0, 2.0, 5.0, 10.0, 20.0)
ERGODIC_GRID_B = (0.2, 0.5, 1.0, 2.0, 5.0)


def _parse_floats(text: str) -> List[float]:
    return [float(item) for item in text.split(",") if item.strip()]


def _gate(section: str, name: str, value: float, threshold: Optional[float] = None,
          passed: Optional[bool] = None) -> GateResult:
    if passed is None:
        status = GateStatus.INFO
    else:
        status = GateStatus.PASSED if passed else GateStatus.FAILED
    return GateResult(section=section, name=name, value=float(value), threshold=threshold, status=status)


def _rel(value: float, reference: float) -> float:
    return abs(value - reference) / max(abs(reference), 1.0)


class ValidationService:
    """Builds the gate table reported by the validate command"""

    @staticmethod
    def ergodic_tolerance(b_bar: float) -> float:
        """Allowed closed-form vs quadrature gap; the series error grows linearly in b_bar"""
        return max(5e-3, 3.2e-3 * b_bar)

    @staticmethod
    def analytic_gates(budget: LinkBudget, spacing: float, order: int) -> List[GateResult]:
        gates = []

        err, where = AnalyticService.q_series_max_error()
        gates.append(_gate("analytic", "q_series_max_error", err, settings.gate_q_series_tol,
                           err < settings.gate_q_series_tol))
        gates.append(_gate("analytic", "q_series_max_error_at", where))

        worst_ratio = 0.0
        for a_bar in ERGODIC_GRID_A:
            for b_bar in ERGODIC_GRID_B:
                p = ProductSnrParams(a_bar=a_bar, b_bar=b_bar)
                gap = abs(AnalyticService.ergodic_sum_rate(p) - AnalyticService.ergodic_by_quadrature(p))
                worst_ratio = max(worst_ratio, gap / ValidationService.ergodic_tolerance(b_bar))
        gates.append(_gate("analytic", "ergodic_closed_vs_quadrature", worst_ratio, 1.0, worst_ratio <= 1.0))

        region = GeometryService.build_coop_region(order, spacing)
        distances = GeometryService.distances_to_bss(GeometryService.worst_point(region), region)
        fit = AnalyticService.snr_lognormal_fit(distances, budget)
        beta1, beta2 = AnalyticService.snr_moments(distances, budget)
        moment_err = max(
            _rel(math.exp(fit.mu + 0.5 * fit.sigma ** 2), beta1),
            _rel(math.exp(2.0 * fit.mu + 2.0 * fit.sigma ** 2), beta2),
        )
        gates.append(_gate("analytic", "moment_identity_rel_error", moment_err, 1e-10, moment_err < 1e-10))

        scale = 2.0
        scaled = AnalyticService.snr_lognormal_fit([scale * d for d in distances], budget)
        scale_err = max(
            _rel(scaled.sigma, fit.sigma),
            _rel(scaled.mu, fit.mu - budget.alpha * math.log(scale)),
        )
        gates.append(_gate("analytic", "scale_law_rel_error", scale_err, 1e-9, scale_err < 1e-9))

        single = AnalyticService.snr_lognormal_fit([distances[0]], budget)
        m = budget.antennas_per_bs
        expected = budget.sigma_z ** 2 + math.log((m + 1) / m)
        single_err = _rel(single.sigma ** 2, expected)
        gates.append(_gate("analytic", "single_bs_variance_rel_error", single_err, 1e-10, single_err < 1e-10))
        return gates

    @staticmethod
    def run(config: RunConfig) -> List[GateResult]:
        """Every gate of the validation report, in a fixed order"""
        budget = config.budget()
        gates: List[GateResult] = []

        if config.spacing_m is not None:
            spacing = config.spacing_m
        else:
            plan = PlanningService.required_density(PlanQuery(
                coop_order=config.coop_order, users=config.users, threshold_t=config.threshold_t,
                target_rcp=config.target_rcp, budget=budget,
            ))
            spacing = plan.spacing
        region = GeometryService.build_coop_region(config.coop_order, spacing)
        worst = GeometryService.worst_point(region)

        gates.append(_gate("plan", "spacing_m", spacing))
        gates.append(_gate("plan", "density", GeometryService.density_from_spacing(spacing)))
        gates.append(_gate("plan", "reference_density", REFERENCE_DENSITY))
        analytic_rcp = AnalyticService.worst_user_rcp(config.threshold_t, region, config.users, budget)
        gates.append(_gate("plan", "worst_user_rcp", analytic_rcp))

        gates.extend(ValidationService.analytic_gates(budget, spacing, config.coop_order))

        cfg = TrialConfig(region=region, user_positions=[worst] * config.users, budget=budget,
                          trials=config.trials, seed=config.seed)
        campaign = MonteCarloCampaign(cfg, threads=config.threads, check_identities=True).run()
        product = AnalyticService.worst_point_product(region, config.users, budget)

        for t in _parse_floats(settings.validate_thresholds):
            threshold_sum = config.users * t
            empirical = campaign.rcp(threshold_sum, RateKind.HADAMARD).mean
            error = abs(AnalyticService.rcp(threshold_sum, product) - empirical)
            gates.append(_gate("montecarlo", f"rcp_fit_error_t{t:g}", error, settings.gate_rcp_fit_tol,
                               error < settings.gate_rcp_fit_tol))
        gates.append(_gate("montecarlo", "reference_rcp_fit_tol", REFERENCE_RCP_FIT_TOL))

        threshold_sum = config.users * config.threshold_t
        exact = campaign.rcp(threshold_sum, RateKind.EXACT)
        gates.append(_gate("montecarlo", "exact_rcp", exact.mean))
        gates.append(_gate("montecarlo", "exact_rcp_ci_lo", exact.ci95[0]))
        gates.append(_gate("montecarlo", "exact_rcp_ci_hi", exact.ci95[1]))
        gates.append(_gate("montecarlo", "reference_exact_rcp", REFERENCE_EXACT_RCP))
        gates.append(_gate("montecarlo", "exact_rcp_meets_target", exact.mean, config.target_rcp,
                           exact.mean >= config.target_rcp))

        fit = AnalyticService.snr_lognormal_fit(GeometryService.distances_to_bss(worst, region), budget)
        ks = MonteCarloService.ks_fit_distance(campaign.log_snr(0), fit)
        gates.append(_gate("montecarlo", "ks_log_snr", ks, settings.gate_ks_tol, ks < settings.gate_ks_tol))
        gates.append(_gate("montecarlo", "reference_ks_tol", REFERENCE_KS_TOL))

        empirical_rate = campaign.ergodic(RateKind.HADAMARD).mean
        ergodic_err = _rel(AnalyticService.ergodic_sum_rate(product), empirical_rate)
        gates.append(_gate("montecarlo", "ergodic_rel_error", ergodic_err, settings.gate_ergodic_rel_tol,
                           ergodic_err < settings.gate_ergodic_rel_tol))

        for name in IDENTITY_CHECKS:
            count = campaign.violations[name]
            gates.append(_gate("montecarlo", f"violations_{name}", count, 0.0, count == 0))
        gates.append(_gate("montecarlo", "redraws", campaign.redraws))

        regime = MonteCarloService.hadamard_regime_map(
            config.coop_order, config.users, budget, _parse_floats(settings.regime_spacings_m),
            config.trials, config.seed, threads=config.threads,
        )
        for point in regime:
            gates.append(_gate("regime", f"mean_gap_d{point.distance:.1f}", point.mean_gap))
            gates.append(_gate("regime", f"fraction_above_d{point.distance:.1f}", point.fraction_above))

        failed = [g.name for g in gates if g.status == GateStatus.FAILED]
        logger.info(f"Validation: {len(gates)} rows, {len(failed)} failed {failed if failed else ''}")
        return gates

    @staticmethod
    def all_passed(gates: List[GateResult]) -> bool:
        return not any(g.status == GateStatus.FAILED for g in gates)
