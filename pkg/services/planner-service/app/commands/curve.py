"""
Curve command: worst-point RCP or ergodic rate versus BS density
"""
import logging
from typing import List

import numpy as np

from app.models import RunConfig
from app.repositories import ResultRepository
from app.services.planner import PlanningService
from shared.common.enums import CurveMetric
from shared.common.errors import EXIT_OK, handle_exception
from shared.common.logging import log_entry_exit

logger = logging.getLogger(__name__)


def density_grid(config: RunConfig) -> List[float]:
    """Linear grid from density_min to density_max"""
    if config.density_points == 1:
        return [config.density_min]
    return [float(v) for v in np.linspace(config.density_min, config.density_max, config.density_points)]


@log_entry_exit("planner-service")
def cmd_curve(config: RunConfig) -> int:
    """One table, rows grouped by antenna count M, then by cooperation order N"""
    try:
        grid = density_grid(config)
        orders = config.curve_orders or [config.coop_order]
        value_column = "worst_rcp" if config.metric == CurveMetric.RCP else "worst_ergodic"
        rows = []
        for antennas in config.antenna_set:
            budget = config.budget(antennas)
            if config.metric == CurveMetric.RCP:
                points = PlanningService.cooperation_curve(orders, config.users, config.threshold_t, budget, grid)
            else:
                points = []
                for order in orders:
                    points.extend(PlanningService.ergodic_density_curve(order, config.users, budget, grid))
            rows.extend([p.density, p.spacing, p.value, p.antennas, p.order] for p in points)
            logger.info(f"Curve for M={antennas}, N in {orders}: {len(points)} points")

        ResultRepository.write_table(
            "curve", config, ["density", "spacing", value_column, "M", "N"], rows, config.output_path
        )
        return EXIT_OK
    except Exception as e:
        return handle_exception(e)
