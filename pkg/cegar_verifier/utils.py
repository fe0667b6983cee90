"""
Utility functions for the verification workflow.

Contains:
- Logging setup
- Phase timing
- File/directory helpers
"""

import logging
import sys
import time
from pathlib import Path
from typing import Optional

from .config import LOG_FORMAT


def setup_logging(
    log_file: Optional[Path] = None,
    name: str = "cegar_verifier",
    verbose: bool = False,
) -> logging.Logger:
    """
    Configure logging to the console and, optionally, a file.

    Args:
        log_file: Path to the log file (DEBUG and above), or None
        name: Logger name
        verbose: Show DEBUG messages on the console too

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)

    # Clear existing handlers
    logger.handlers.clear()

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        fh = logging.FileHandler(log_file)
        fh.setLevel(logging.DEBUG)
        fh.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(fh)

    # Console goes to stderr so stdout stays free for the JSON report
    ch = logging.StreamHandler(sys.stderr)
    ch.setLevel(logging.DEBUG if verbose else logging.INFO)
    ch.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(ch)

    return logger


class Stopwatch:
    """Milliseconds elapsed since construction or the last lap."""

    def __init__(self) -> None:
        self._start = time.perf_counter()
        self._lap = self._start

    def lap_ms(self) -> float:
        now = time.perf_counter()
        elapsed = (now - self._lap) * 1000.0
        self._lap = now
        return elapsed

    def total_ms(self) -> float:
        return (time.perf_counter() - self._start) * 1000.0


def ensure_directory(path: Path) -> Path:
    """Create directory if it doesn't exist and return it."""
    path.mkdir(parents=True, exist_ok=True)
    return path
