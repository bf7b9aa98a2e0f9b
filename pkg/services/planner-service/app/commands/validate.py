"""
Validate command: gate table for the closed forms and the Monte Carlo oracle
"""
import logging

from app.models import RunConfig
from app.repositories import ResultRepository
from app.services.validation import ValidationService
from shared.common.errors import EXIT_INFEASIBLE, EXIT_OK, handle_exception
from shared.common.logging import log_entry_exit

logger = logging.getLogger(__name__)

COLUMNS = ["section", "name", "value", "threshold", "passed"]


@log_entry_exit("planner-service")
def cmd_validate(config: RunConfig) -> int:
    try:
        gates = ValidationService.run(config)
        ResultRepository.write_table(
            "validate",
            config,
            COLUMNS,
            [[g.section, g.name, g.value, g.threshold, g.status] for g in gates],
            config.output_path,
        )
        return EXIT_OK if ValidationService.all_passed(gates) else EXIT_INFEASIBLE
    except Exception as e:
        return handle_exception(e)
