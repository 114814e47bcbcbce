"""Utilities package."""
from .logger import get_logger, SimulationLogger, RepeatFilter

__all__ = [
    'get_logger',
    'SimulationLogger',
    'RepeatFilter'
]
