"""Configuration package."""
from .settings import config, AppConfig, QuadratureConfig, SchemeConfig, WaveAnalysisConfig, OutputConfig

__all__ = [
    'config',
    'AppConfig',
    'QuadratureConfig',
    'SchemeConfig',
    'WaveAnalysisConfig',
    'OutputConfig'
]
