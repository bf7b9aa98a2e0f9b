"""
Command line entry point for planner service
"""
import argparse
import sys
import uuid
from typing import List, Optional

from app.commands import COMMANDS
from app.config import settings
from app.repositories import RunConfigRepository
from shared.common.errors import ConfigError, handle_exception
from shared.common.logging import clear_run_context, configure_root, set_run_context, setup_logger

app_name = settings.service_name
logger = setup_logger(app_name, settings.log_level)


class CliArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors map to the config exit code"""

    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}", error_code="usage")


def build_parser() -> argparse.ArgumentParser:
    common = CliArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value run configuration")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per campaign")
    common.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")
    common.add_argument("--out", metavar="PATH", help="CSV output path (default: stdout)")
    common.add_argument("--engine", choices=["analytic", "mc", "mc_exact"], help="contour engine")
    common.add_argument("--pitch", type=float, metavar="METERS", help="contour grid pitch")
    common.add_argument("--metric", choices=["rcp", "ergodic"], help="quantity to plan or plot")
    common.add_argument("--antennas", metavar="LIST", help="antenna counts for curve, e.g. 1,2,4")
    common.add_argument("--orders", metavar="LIST", help="cooperation orders for curve, e.g. 1,2,3")
    common.add_argument("--log-level", default=settings.log_level,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])

    parser = CliArgumentParser(
        prog="complan",
        description="Uplink CoMP rate coverage analysis and BS density planning",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python run_planner.py plan --config configs/operating_point.cfg
  python run_planner.py curve --antennas 1,2,4 --out density.csv
  python run_planner.py contour --engine mc --trials 10000
  python run_planner.py validate --seed 42 --threads 8
        """,
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    commands.add_parser("plan", parents=[common], help="required BS density for a target RCP")
    commands.add_parser("curve", parents=[common], help="worst-point RCP versus density")
    commands.add_parser("contour", parents=[common], help="user RCP over the cooperation region")
    commands.add_parser("compare", parents=[common], help="required density per cooperation order")
    commands.add_parser("validate", parents=[common], help="closed forms against the Monte Carlo oracle")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, build the run configuration and dispatch; returns the exit code"""
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        return handle_exception(e)

    configure_root(args.log_level)
    set_run_context(run_id=uuid.uuid4().hex[:8], command=args.command)
    try:
        values = RunConfigRepository.load(args.config) if args.config else {}
        config = RunConfigRepository.build(values, {
            "seed": args.seed,
            "trials": args.trials,
            "threads": args.threads,
            "output_path": args.out,
            "engine": args.engine,
            "contour_pitch_m": args.pitch,
            "metric": args.metric,
            "antenna_set": args.antennas,
            "curve_orders": args.orders,
        })
        logger.info(f"Running {args.command} with seed={config.seed}, trials={config.trials}, "
                    f"threads={config.threads}")
        return COMMANDS[args.command](config)
    except Exception as e:
        return handle_exception(e)
    finally:
        clear_run_context()


if __name__ == "__main__":
    sys.exit(main())
