"""
Plan command: minimum BS density for a worst-point rate guarantee
"""
import logging

from app.models import PlanQuery, RunConfig
from app.repositories import ResultRepository
from app.services.planner import PlanningService
from shared.common.enums import CurveMetric
from shared.common.errors import EXIT_OK, handle_exception
from shared.common.logging import log_entry_exit

logger = logging.getLogger(__name__)

COLUMNS = [
    "metric", "N", "U", "M", "threshold_t", "target", "spacing", "density",
    "achieved", "iterations", "bracket_lo", "bracket_hi", "slack",
]


@log_entry_exit("planner-service")
def cmd_plan(config: RunConfig) -> int:
    """Solve for the required density and emit one CSV row"""
    try:
        budget = config.budget()
        if config.metric == CurveMetric.ERGODIC:
            # threshold_t is the per-user ergodic rate to guarantee
            result = PlanningService.required_density_for_ergodic(
                config.coop_order, config.users, config.threshold_t, budget
            )
            target, achieved = config.threshold_t, result.achieved_rate
        else:
            result = PlanningService.required_density(PlanQuery(
                coop_order=config.coop_order,
                users=config.users,
                threshold_t=config.threshold_t,
                target_rcp=config.target_rcp,
                budget=budget,
            ))
            target, achieved = config.target_rcp, result.achieved_rcp

        row = [
            result.metric, config.coop_order, config.users, budget.antennas_per_bs,
            config.threshold_t, target, result.spacing, result.density, achieved,
            result.iterations, result.bracket[0], result.bracket[1], result.slack,
        ]
        ResultRepository.write_table("plan", config, COLUMNS, [row], config.output_path)
        if config.output_path:
            print(
                f"Required density {result.density:.4e} BS/m^2 at spacing {result.spacing:.1f} m "
                f"({result.metric.value} achieved {achieved:.4f})"
            )
        return EXIT_OK
    except Exception as e:
        return handle_exception(e)
