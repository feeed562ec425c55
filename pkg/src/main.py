#!/usr/bin/env python3
import sys
import time
from pathlib import Path
from typing import List, Optional

from loguru import logger

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli.commands import (  # noqa: E402
    DEFAULT_SWEEP_PATH,
    DEFAULT_TRACE_PATH,
    EXIT_ERROR,
    cmd_nchv_check,
    cmd_predict,
    cmd_run,
    cmd_sweep,
    resolve_setup,
)
from src.errors import ConfigError, SimulationError  # noqa: E402
from src.experiment.config import DEFAULT_SEED  # noqa: E402
from src.optics.network import NAMED_SETUPS  # noqa: E402

LOG_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} [{level}]: {message}"


def configure_logging(level: str = "INFO"):
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=LOG_FORMAT)


def build_parser():
    import argparse

    parser = argparse.ArgumentParser(
        description="Single-photon all-or-nothing Kochen-Specker test simulator"
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default="INFO",
        help="Log level for stderr (default: INFO)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    predict = commands.add_parser("predict", help="Ideal detector probabilities for a setup")
    predict.add_argument("--setup", choices=sorted(NAMED_SETUPS), default="setup2")
    predict.add_argument("--hwp1", type=float, help="Override the HWP1 angle (deg)")
    predict.add_argument("--hwp2", type=float, help="Override the HWP2 angle (deg)")

    commands.add_parser("nchv-check", help="Brute-force the noncontextual assignments")

    run = commands.add_parser("run", help="Simulate the three-stage protocol")
    run.add_argument("--config", type=str, help="JSON run configuration")
    run.add_argument("--seed", type=int, help=f"RNG seed (default: {DEFAULT_SEED})")
    run.add_argument(
        "--out",
        type=str,
        default=DEFAULT_TRACE_PATH,
        help=f"Trace CSV; the JSON report is written beside it (default: {DEFAULT_TRACE_PATH})",
    )

    sweep = commands.add_parser("sweep", help="Epsilon across one imperfection parameter")
    sweep.add_argument("--param", type=str, required=True, help="ImperfectionConfig field")
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--steps", type=int, default=5)
    sweep.add_argument("--config", type=str, help="JSON run configuration")
    sweep.add_argument("--seed", type=int, help=f"RNG seed (default: {DEFAULT_SEED})")
    sweep.add_argument(
        "--out",
        type=str,
        default=DEFAULT_SWEEP_PATH,
        help=f"Sweep CSV path (default: {DEFAULT_SWEEP_PATH})",
    )
    return parser


def dispatch(args) -> int:
    if args.command == "predict":
        return cmd_predict(resolve_setup(args.setup, args.hwp1, args.hwp2))
    if args.command == "nchv-check":
        return cmd_nchv_check()
    if args.command == "run":
        logger.info("▶️Starting protocol run...")
        return cmd_run(args.config, args.seed, args.out)
    logger.info(f"▶️Starting sweep over {args.param}...")
    return cmd_sweep(
        args.param, args.start, args.stop, args.steps, args.config, args.seed, args.out
    )


def main(argv: Optional[List[str]] = None) -> int:
    start_time = time.time()

    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        code = dispatch(args)
    except ConfigError as e:
        logger.error(f"Invalid configuration, {e}")
        code = EXIT_ERROR
    except (SimulationError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        code = EXIT_ERROR

    end_time = time.time()
    elapsed_time = end_time - start_time
    minutes = int(elapsed_time // 60)
    seconds = int(elapsed_time % 60)
    logger.info(f"⏱️Elapsed Time: {minutes}m {seconds}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
