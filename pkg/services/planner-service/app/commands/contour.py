"""
Contour command: user-1 RCP over the cooperation region
"""
import logging

from app.models import PlanQuery, RunConfig
from app.repositories import ResultRepository
from app.services.geometry import GeometryService
from app.services.planner import PlanningService
from shared.common.enums import ContourEngine
from shared.common.errors import EXIT_OK, handle_exception
from shared.common.logging import log_entry_exit

logger = logging.getLogger(__name__)

DEFAULT_PITCH_FRACTION = 100


@log_entry_exit("planner-service")
def cmd_contour(config: RunConfig) -> int:
    """Sweep user 1 over the region at the configured or planned spacing"""
    try:
        budget = config.budget()
        spacing = config.spacing_m
        if spacing is None:
            spacing = PlanningService.required_density(PlanQuery(
                coop_order=config.coop_order,
                users=config.users,
                threshold_t=config.threshold_t,
                target_rcp=config.target_rcp,
                budget=budget,
            )).spacing
        pitch = config.contour_pitch_m or spacing / DEFAULT_PITCH_FRACTION
        region = GeometryService.build_coop_region(config.coop_order, spacing)

        points = PlanningService.rcp_contour(
            region, config.users, budget, config.threshold_t, pitch,
            engine=config.engine, trials=config.trials, seed=config.seed, threads=config.threads,
        )
        if config.engine == ContourEngine.MC_EXACT:
            columns = ["x", "y", "rcp", "ci_lo", "ci_hi"]
            rows = [[p.x, p.y, p.rcp, p.ci_lo, p.ci_hi] for p in points]
        else:
            columns = ["x", "y", "rcp"]
            rows = [[p.x, p.y, p.rcp] for p in points]

        lowest = min(points, key=lambda p: p.rcp)
        logger.info(f"Contour at D={spacing:.1f} m: {len(points)} cells, min RCP {lowest.rcp:.4f} "
                    f"at ({lowest.x:.1f}, {lowest.y:.1f})")
        ResultRepository.write_table("contour", config, columns, rows, config.output_path)
        return EXIT_OK
    except Exception as e:
        return handle_exception(e)
