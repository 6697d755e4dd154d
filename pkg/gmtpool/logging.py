from __future__ import annotations

"""Centralised Loguru configuration.

Use setup_logger() at program start. Idempotent – repeated calls are no-ops.
"""
import sys
from pathlib import Path
from typing import Literal

from loguru import logger

from gmtpool.settings import settings

_INITIALISED = False


def setup_logger(
    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] | None = None,
    *,
    to_file: bool | None = None,
) -> None:
    """Configure Loguru sinks once per process.

    If *level* is *None* the value of ``settings.LOG_LEVEL`` is used.  File
    sinks follow ``settings.LOG_TO_FILE`` unless *to_file* overrides it
    (worker processes of ``--jobs`` runs log to stderr only).
    """

    global _INITIALISED
    if _INITIALISED:
        return

    if level is None:
        level = settings.LOG_LEVEL.upper()  # type: ignore[assignment]
    if to_file is None:
        to_file = settings.LOG_TO_FILE

    logger.remove()  # remove default stderr sink

    if to_file:
        log_dir = Path(settings.LOG_DIR)
        log_dir.mkdir(parents=True, exist_ok=True)
        logger.add(log_dir / "run.log", level="INFO", rotation="1 MB", retention="10 days")
        logger.add(log_dir / "debug.log", level="DEBUG", rotation="1 MB", retention="10 days")
        logger.add(log_dir / "error.log", level="ERROR", rotation="1 MB", retention="10 days")

    # pretty-print to stderr at the chosen level
    logger.add(
        sys.stderr,
        level=level,
        format="<green>{time:HH:mm:ss}</green> <level>{level: <7}</level> <level>{message}</level>",
        colorize=True,
    )

    logger.info("Logger initialised (level: {})", level)

    _INITIALISED = True
