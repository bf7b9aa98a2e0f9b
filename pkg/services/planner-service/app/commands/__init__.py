"""
CLI command handlers
"""
from app.commands.compare import cmd_compare
from app.commands.contour import cmd_contour
from app.commands.curve import cmd_curve
from app.commands.plan import cmd_plan
from app.commands.validate import cmd_validate

COMMANDS = {
    "plan": cmd_plan,
    "curve": cmd_curve,
    "contour": cmd_contour,
    "compare": cmd_compare,
    "validate": cmd_validate,
}

__all__ = ["COMMANDS", "cmd_plan", "cmd_curve", "cmd_contour", "cmd_compare", "cmd_validate"]
