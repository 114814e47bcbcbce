"""
Logging utility for the simulator, with throttling of repeated warnings.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional
from datetime import datetime
import sys


class RepeatFilter(logging.Filter):
    """Filter that drops a warning once the same message was seen too often."""

    def __init__(self, max_repeats: int = 20):
        super().__init__()
        self.max_repeats = max_repeats
        self._counts: Dict[str, int] = {}

    def filter(self, record: logging.LogRecord) -> bool:
        """Let the record through until its message template hits the limit."""
        if record.levelno < logging.WARNING or record.levelno >= logging.ERROR:
            return True

        key = str(record.msg)
        count = self._counts.get(key, 0) + 1
        self._counts[key] = count

        if count == self.max_repeats:
            record.msg = f"{record.msg} (further repeats suppressed)"
        return count <= self.max_repeats

    def reset(self) -> None:
        """Forget all counts."""
        self._counts.clear()


class SimulationLogger:
    """Custom logger for the chemotaxis wave simulator."""

    def __init__(
        self,
        name: str,
        log_level: str = "INFO",
        log_dir: Optional[Path] = None,
        enable_console: bool = True,
        enable_file: bool = True,
        throttle: bool = True
    ):
        """
        Initialize logger.

        Args:
            name: Logger name
            log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            log_dir: Directory for log files
            enable_console: Enable console output
            enable_file: Enable file output
            throttle: Suppress warnings repeated more than a few times
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, log_level.upper()))

        # Remove existing handlers and filters
        self.logger.handlers.clear()
        self.logger.filters.clear()

        formatter = logging.Formatter(
            fmt='%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        if throttle:
            self.logger.addFilter(RepeatFilter())

        if enable_console:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setFormatter(formatter)
            self.logger.addHandler(console_handler)

        if enable_file and log_dir:
            log_dir = Path(log_dir)
            log_dir.mkdir(parents=True, exist_ok=True)

            log_file = log_dir / f"{name}_{datetime.now().strftime('%Y%m%d')}.log"
            file_handler = logging.FileHandler(log_file, encoding='utf-8')
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

        self.logger.propagate = False

    def debug(self, message: str, *args, **kwargs):
        """Log debug message."""
        self.logger.debug(message, *args, **kwargs)

    def info(self, message: str, *args, **kwargs):
        """Log info message."""
        self.logger.info(message, *args, **kwargs)

    def warning(self, message: str, *args, **kwargs):
        """Log warning message."""
        self.logger.warning(message, *args, **kwargs)

    def error(self, message: str, *args, exc_info: bool = False, **kwargs):
        """Log error message."""
        self.logger.error(message, *args, exc_info=exc_info, **kwargs)

    def exception(self, message: str, *args, **kwargs):
        """Log exception with traceback."""
        self.logger.exception(message, *args, **kwargs)

    def log_performance(self, operation: str, duration: float, metadata: Optional[Dict[str, Any]] = None):
        """Log performance metrics."""
        msg = f"Performance: {operation} completed in {duration:.2f}s"
        if metadata:
            msg += f" | Metadata: {metadata}"
        self.info(msg)

    def log_run_start(self, label: str, settings: Dict[str, Any]):
        """Log start of a simulation run."""
        self.info(f"Starting run: {label} | Settings: {settings}")

    def log_run_complete(self, label: str, duration: float, speed: Optional[float] = None):
        """Log completion of a simulation run."""
        msg = f"Run complete: {label} | Duration: {duration:.2f}s"
        if speed is not None:
            msg += f" | Speed: {speed:.4f}"
        self.info(msg)

    def log_step(self, step: int, time: float, mass: float, min_f: float):
        """Log periodic step diagnostics."""
        self.debug(f"Step {step} | t={time:.4f} | mass={mass:.12g} | min_f={min_f:.3e}")

    def log_error_with_context(self, error: Exception, context: Dict[str, Any]):
        """Log error with additional context."""
        self.error(
            f"Error occurred: {type(error).__name__}: {str(error)} | Context: {context}",
            exc_info=True
        )


def get_logger(
    name: str,
    log_level: Optional[str] = None,
    log_dir: Optional[Path] = None,
    throttle: bool = True
) -> SimulationLogger:
    """
    Get or create a logger instance.

    The level and the log directory default to the application settings.

    Args:
        name: Logger name
        log_level: Logging level
        log_dir: Directory for log files
        throttle: Suppress repeated warnings

    Returns:
        SimulationLogger instance
    """
    from config.settings import config

    if log_level is None:
        log_level = "DEBUG" if config.debug else config.log_level
    if log_dir is None and config.log_to_file:
        log_dir = config.logs_dir

    return SimulationLogger(
        name=name,
        log_level=log_level,
        log_dir=log_dir,
        throttle=throttle
    )
