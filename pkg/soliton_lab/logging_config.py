"""Loguru sinks for soliton-lab: a terse stderr sink and a rotating run log."""

import os
import sys
from pathlib import Path
from typing import Optional

from loguru import logger

CONSOLE_LEVELS = {0: "ERROR", 1: "INFO"}
VERBOSE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
    "<level>{message}</level>"
)
TERSE_FORMAT = "<red>Error:</red> <level>{message}</level>"
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}"
LOG_FILE_NAME = "soliton-lab.log"


def log_dir() -> Path:
    """Directory of the run log, relocatable through SOLITON_LAB_LOG_DIR."""
    override = os.environ.get("SOLITON_LAB_LOG_DIR")
    if override:
        return Path(override)
    return Path.home() / ".local" / "share" / "soliton-lab"


def _add_file_sink() -> Path:
    directory = log_dir()
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / LOG_FILE_NAME
    logger.add(
        str(path),
        level="DEBUG",
        format=FILE_FORMAT,
        rotation="10 MB",
        retention="1 month",
        compression="gz",
        enqueue=True,
    )
    return path


def setup_logging(verbosity: int = 0) -> None:
    """Install the stderr and file sinks.

    Args:
        verbosity: 0 shows errors only, 1 adds INFO, 2 or more adds DEBUG
    """
    logger.remove()
    level = CONSOLE_LEVELS.get(verbosity, "DEBUG")
    logger.add(
        sys.stderr,
        level=level,
        format=VERBOSE_FORMAT if verbosity > 0 else TERSE_FORMAT,
        colorize=True,
        enqueue=True,
    )

    path: Optional[Path]
    try:
        path = _add_file_sink()
    except OSError:
        # read-only home: console only
        path = None

    if verbosity > 0:
        target = path if path is not None else "disabled"
        logger.info(f"Console logging at {level}, run log: {target}")


def get_logger(name: str):
    """Logger bound to a module name; pass ``__name__``."""
    return logger.bind(name=name)
