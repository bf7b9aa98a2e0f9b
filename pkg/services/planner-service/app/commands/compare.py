"""
Compare command: required density for each cooperation order
"""
import logging

from app.models import SUPPORTED_ORDERS, RunConfig
from app.repositories import ResultRepository
from app.services.planner import PlanningService
from shared.common.errors import EXIT_INFEASIBLE, EXIT_OK, handle_exception
from shared.common.logging import log_entry_exit

logger = logging.getLogger(__name__)

COLUMNS = ["target_rcp", "N", "required_density", "ratio_vs_N1", "status"]


@log_entry_exit("planner-service")
def cmd_compare(config: RunConfig) -> int:
    """Every (target, N) row is emitted; infeasible cells turn the exit code to 2"""
    try:
        rows = PlanningService.density_comparison(
            config.compare_targets, SUPPORTED_ORDERS, config.compare_users, config.threshold_t, config.budget()
        )
        ResultRepository.write_table(
            "compare",
            config,
            COLUMNS,
            [[r.target_rcp, r.order, r.required_density, r.ratio_vs_n1, r.status] for r in rows],
            config.output_path,
        )
        infeasible = [r for r in rows if r.status == "infeasible"]
        if infeasible:
            logger.error(f"{len(infeasible)} of {len(rows)} comparison cells are infeasible")
            return EXIT_INFEASIBLE
        return EXIT_OK
    except Exception as e:
        return handle_exception(e)
