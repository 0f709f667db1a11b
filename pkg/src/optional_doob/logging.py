"""
Optional Doob Core - Logging Module

Provides logging configuration for library and CLI use. Long numeric
arrays embedded in messages are shortened so per-atom debug output
stays readable.
"""

import logging
import re
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

DEFAULT_LOGGER_NAME = "optional_doob"


class ArrayTruncatingFormatter(logging.Formatter):
    """
    Log formatter that shortens long bracketed number lists.

    ``[0.1, 0.2, ..., 0.9]`` style reprs longer than ``max_items`` entries
    are cut to their head and tail.

    Usage:
        formatter = ArrayTruncatingFormatter(
            fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            max_items=6,
        )
        handler.setFormatter(formatter)
    """

    ARRAY_PATTERN = re.compile(r"\[([-+0-9.eE,\s]+)\]")

    def __init__(
        self,
        fmt: Optional[str] = None,
        datefmt: Optional[str] = None,
        style: str = '%',
        max_items: int = 8,
    ):
        """
        Initialize formatter.

        Args:
            fmt: Log message format string
            datefmt: Date format string
            style: Format style ('%', '{', or '$')
            max_items: Longest list printed in full
        """
        super().__init__(fmt, datefmt, style)  # type: ignore[arg-type]
        self.max_items = max_items

    def format(self, record: logging.LogRecord) -> str:
        """Format log record, shortening long arrays."""
        formatted = super().format(record)
        return self.ARRAY_PATTERN.sub(self._shorten, formatted)

    def _shorten(self, match: re.Match) -> str:
        items = match.group(1).replace(",", " ").split()
        if len(items) <= self.max_items:
            return match.group(0)
        half = max(1, self.max_items // 2)
        head = " ".join(items[:half])
        tail = " ".join(items[-half:])
        return f"[{head} ... {tail}] ({len(items)} items)"


def setup_logging(
    log_dir: Optional[Path] = None,
    log_level: str = "WARNING",
    log_to_console: bool = True,
    log_to_file: bool = False,
    max_bytes: int = 10 * 1024 * 1024,  # 10 MB
    backup_count: int = 5,
    logger_name: str = DEFAULT_LOGGER_NAME,
) -> logging.Logger:
    """
    Set up logging for the application.

    Console output goes to stderr so JSON reports on stdout stay parseable.

    Args:
        log_dir: Directory for log files (default: ./logs)
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_to_console: Whether to log to console
        log_to_file: Whether to log to file
        max_bytes: Maximum size of each log file before rotation
        backup_count: Number of backup log files to keep
        logger_name: Name of the logger

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(logger_name)
    logger.setLevel(getattr(logging, log_level.upper(), logging.WARNING))

    logger.handlers.clear()

    formatter = ArrayTruncatingFormatter(
        fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
    )

    if log_to_console:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    if log_to_file:
        if log_dir is None:
            log_dir = Path.cwd() / "logs"

        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)

        log_file = log_dir / f"{logger_name}.log"
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=max_bytes,
            backupCount=backup_count,
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def get_logger(name: str = DEFAULT_LOGGER_NAME) -> logging.Logger:
    """
    Get a logger instance.

    Names without the package prefix are placed under it, so a single
    ``setup_logging`` call configures every module.

    Args:
        name: Logger name

    Returns:
        Logger instance
    """
    if name != DEFAULT_LOGGER_NAME and not name.startswith(DEFAULT_LOGGER_NAME + "."):
        name = f"{DEFAULT_LOGGER_NAME}.{name}"
    return logging.getLogger(name)


class LoggerMixin:
    """
    Mixin class to add logging capability to any class.

    Usage:
        class MySolver(LoggerMixin):
            def run(self):
                self.logger.info("Solving")
    """

    @property
    def logger(self) -> logging.Logger:
        """Get logger for this class."""
        if not hasattr(self, '_logger'):
            self._logger = get_logger(self.__class__.__name__)
        return self._logger
