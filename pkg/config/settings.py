"""
Configuration management for the chemotaxis wave simulator.
"""
import os
from pathlib import Path
from typing import Dict, Any
from dataclasses import dataclass, field

from dotenv import load_dotenv


@dataclass
class QuadratureConfig:
    """Configuration for the velocity grid."""
    kind: str = "gauss"  # gauss | explicit
    half_count: int = 8
    normalize_weights: bool = True


@dataclass
class SchemeConfig:
    """Configuration for the coupled time-stepping schemes."""
    kinetic: str = "wb"  # wb | ts
    smatrix: str = "case"  # case | fd
    parabolic: str = "wb"  # wb (L-spline) | ts
    material_derivative: str = "md2"  # md1 | md2
    cfl_safety: float = 0.9
    parabolic_substeps: str = "auto"  # auto | positive integer as string
    rho_after_kinetic: bool = False
    bisection_tol: float = 1e-13
    bisection_max_iter: int = 200
    condition_limit: float = 1e14
    stochastic_tol: float = 1e-8


@dataclass
class WaveAnalysisConfig:
    """Configuration for the travelling-wave analysis."""
    dz: float = 0.005
    min_half_width: float = 15.0
    decay_lengths: float = 12.0
    max_half_width: float = 60.0
    scan_points: int = 100
    node_guard: float = 1e-3
    root_tol: float = 1e-8
    width_tol: float = 1e-6
    signal_advection: str = "centered"  # centered | upwind


@dataclass
class OutputConfig:
    """Configuration for result files."""
    output_dir: str = "./results"
    output_every: int = 50
    float_format: str = "%.10g"


@dataclass
class AppConfig:
    """Main application configuration."""
    app_name: str = "Chemotactic Wave Simulator"
    version: str = "1.0.0"
    debug: bool = False
    log_level: str = "INFO"
    threads: int = 1
    log_to_file: bool = False

    # Sub-configurations
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    schemes: SchemeConfig = field(default_factory=SchemeConfig)
    waves: WaveAnalysisConfig = field(default_factory=WaveAnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    # Paths
    base_dir: Path = field(default_factory=lambda: Path(__file__).parent.parent)
    logs_dir: Path = field(init=False)

    def __post_init__(self):
        """Initialize derived paths."""
        self.logs_dir = self.base_dir / "logs"

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            'app_name': self.app_name,
            'version': self.version,
            'debug': self.debug,
            'log_level': self.log_level,
            'threads': self.threads,
            'quadrature': {
                'kind': self.quadrature.kind,
                'half_count': self.quadrature.half_count,
                'normalize_weights': self.quadrature.normalize_weights,
            },
            'schemes': {
                'kinetic': self.schemes.kinetic,
                'smatrix': self.schemes.smatrix,
                'parabolic': self.schemes.parabolic,
                'material_derivative': self.schemes.material_derivative,
                'cfl_safety': self.schemes.cfl_safety,
                'parabolic_substeps': self.schemes.parabolic_substeps,
                'rho_after_kinetic': self.schemes.rho_after_kinetic,
            },
            'waves': {
                'dz': self.waves.dz,
                'min_half_width': self.waves.min_half_width,
                'max_half_width': self.waves.max_half_width,
                'scan_points': self.waves.scan_points,
                'node_guard': self.waves.node_guard,
                'signal_advection': self.waves.signal_advection,
            },
            'output': {
                'output_dir': self.output.output_dir,
                'output_every': self.output.output_every,
            },
        }

    @classmethod
    def from_env(cls) -> 'AppConfig':
        """Load configuration from environment variables (and a .env file)."""
        load_dotenv()
        config = cls()

        if os.getenv('CHEMOWAVE_DEBUG'):
            config.debug = os.getenv('CHEMOWAVE_DEBUG').lower() == 'true'

        if os.getenv('CHEMOWAVE_LOG_LEVEL'):
            config.log_level = os.getenv('CHEMOWAVE_LOG_LEVEL')

        if os.getenv('CHEMOWAVE_LOG_TO_FILE'):
            config.log_to_file = os.getenv('CHEMOWAVE_LOG_TO_FILE').lower() == 'true'

        if os.getenv('CHEMOWAVE_THREADS'):
            config.threads = max(1, int(os.getenv('CHEMOWAVE_THREADS')))

        if os.getenv('CHEMOWAVE_OUTPUT_DIR'):
            config.output.output_dir = os.getenv('CHEMOWAVE_OUTPUT_DIR')

        return config


# Global configuration instance
config = AppConfig.from_env()
