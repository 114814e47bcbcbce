"""Simulation configuration and diagnostics models."""

from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from models.model_params import ModelParams
from models.velocity_grid import VelocityGrid


KINETIC_SCHEMES = ('wb', 'ts')
SMATRIX_VARIANTS = ('case', 'fd')
PARABOLIC_SCHEMES = ('wb', 'ts')
MD_VARIANTS = ('md1', 'md2')


@dataclass
class InitialCondition:
    """Initial data for a run.

    ``kind='profile'``: f = amplitude * exp(-x_rate (x - x_center)^2 - v_rate v^2),
    constant signal and either a constant or a tanh-ramp nutrient
    N = ramp_amplitude (pi/2 + tanh(x / ramp_scale - ramp_shift)).

    ``kind='travelling_wave'``: the stationary profile at ``wave_speed`` with its
    peak at ``peak_position`` and total mass ``wave_mass``.
    """

    kind: str = 'profile'
    amplitude: float = 1.0
    x_center: float = 0.0
    x_rate: float = 1.0
    v_rate: float = 0.0
    signal_value: float = 0.0
    nutrient: str = 'constant'
    nutrient_value: float = 1.0
    ramp_amplitude: float = 400.0
    ramp_scale: float = 3.0
    ramp_shift: float = 3.0
    wave_speed: Optional[float] = None
    peak_position: Optional[float] = None
    wave_mass: float = 1.0

    def __post_init__(self):
        """Validate initial data settings."""
        if self.kind not in ('profile', 'travelling_wave'):
            raise ValueError(f"Unknown initial condition kind: {self.kind}")
        if self.nutrient not in ('constant', 'tanh_ramp'):
            raise ValueError(f"Unknown nutrient profile: {self.nutrient}")
        if self.kind == 'travelling_wave' and self.wave_speed is None:
            raise ValueError("Travelling-wave initial data needs wave_speed")
        if self.wave_mass <= 0.0:
            raise ValueError("wave_mass must be positive")


@dataclass
class SimConfig:
    """Everything that defines one simulation run."""

    grid: VelocityGrid
    params: ModelParams
    x_left: float
    x_right: float
    dx: float
    t_end: float
    kinetic_scheme: str = 'wb'
    smatrix_variant: str = 'case'
    parabolic_scheme: str = 'wb'
    md_variant: str = 'md2'
    dt: Optional[float] = None
    cfl_safety: float = 0.9
    parabolic_substeps: Optional[int] = None
    rho_after_kinetic: bool = False
    output_every: int = 50
    snapshot_times: List[float] = field(default_factory=list)
    initial: InitialCondition = field(default_factory=InitialCondition)
    frozen_rate_center: Optional[float] = None
    steady_tol: Optional[float] = None
    label: str = 'run'

    def __post_init__(self):
        """Validate run settings."""
        for name, value, choices in (
            ('kinetic_scheme', self.kinetic_scheme, KINETIC_SCHEMES),
            ('smatrix_variant', self.smatrix_variant, SMATRIX_VARIANTS),
            ('parabolic_scheme', self.parabolic_scheme, PARABOLIC_SCHEMES),
            ('md_variant', self.md_variant, MD_VARIANTS),
        ):
            if value not in choices:
                raise ValueError(f"{name} must be one of {choices}, got {value!r}")

        if self.x_right <= self.x_left:
            raise ValueError("x_right must exceed x_left")
        if self.dx <= 0.0 or self.t_end <= 0.0:
            raise ValueError("dx and t_end must be positive")
        if self.num_cells < 3:
            raise ValueError("Domain must contain at least three cells")
        if abs(self.num_cells * self.dx - (self.x_right - self.x_left)) > 1e-9 * self.dx * self.num_cells:
            raise ValueError("Domain length must be an integer multiple of dx")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.parabolic_substeps is not None and self.parabolic_substeps < 1:
            raise ValueError("parabolic_substeps must be at least 1")
        if self.output_every < 1:
            raise ValueError("output_every must be at least 1")

    @property
    def num_cells(self) -> int:
        return int(round((self.x_right - self.x_left) / self.dx))

    @property
    def scheme_label(self) -> str:
        """Short tag such as WB-TS."""
        return f"{self.kinetic_scheme.upper()}-{self.parabolic_scheme.upper()}"

    def to_dict(self) -> Dict[str, Any]:
        """
        Description echoed into result headers, laid out like a run file.

        The grid is written as its positive speeds and their weights, so the
        echo rebuilds the same grid whatever its kind.
        """
        positive = self.grid.positive_index
        return {
            'grid': {
                'kind': self.grid.kind,
                'half_count': self.grid.half_count,
                'speeds': self.grid.nodes[positive].tolist(),
                'weights': self.grid.weights[positive].tolist(),
                'normalize': self.grid.normalized,
            },
            'params': self.params.to_dict(),
            'schemes': {
                'kinetic': self.kinetic_scheme,
                'smatrix': self.smatrix_variant,
                'parabolic': self.parabolic_scheme,
                'material_derivative': self.md_variant,
                'cfl_safety': self.cfl_safety,
                'parabolic_substeps': 'auto' if self.parabolic_substeps is None else self.parabolic_substeps,
                'rho_after_kinetic': self.rho_after_kinetic,
                'frozen_rate_center': self.frozen_rate_center,
            },
            'domain': {
                'x_left': self.x_left,
                'x_right': self.x_right,
                'dx': self.dx,
            },
            'time': {
                't_end': self.t_end,
                'dt': 'auto' if self.dt is None else self.dt,
                'steady_tol': self.steady_tol,
                'output_every': self.output_every,
                'snapshot_times': [float(t) for t in self.snapshot_times],
            },
            'initial': asdict(self.initial),
            'output': {'label': self.label},
        }


@dataclass(eq=False)
class Snapshot:
    """Macroscopic fields at one output time, on kinetic cell centers."""

    time: float
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    m: np.ndarray
    n: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        """Tabular form, one row per cell."""
        return pd.DataFrame({
            'x': self.x,
            'rho': self.rho,
            'u': self.u,
            'M': self.m,
            'N': self.n,
        })


@dataclass
class Diagnostics:
    """Time series and snapshots collected during a run."""

    label: str
    records: List[Dict[str, float]] = field(default_factory=list)
    snapshots: List[Snapshot] = field(default_factory=list)
    aborted: bool = False
    abort_reason: Optional[str] = None
    steady: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict)

    def add_record(self, **values: float) -> None:
        self.records.append(dict(values))

    def to_frame(self) -> pd.DataFrame:
        """Time series as a DataFrame."""
        return pd.DataFrame.from_records(self.records)

    @property
    def final(self) -> Dict[str, float]:
        return self.records[-1] if self.records else {}

    @property
    def mass_drift(self) -> float:
        """Largest relative deviation of the mass from its initial value."""
        if not self.records:
            return 0.0
        mass = np.array([r['mass'] for r in self.records])
        return float(np.max(np.abs(mass - mass[0])) / abs(mass[0]))

    def speed_over_window(self, t_start: float, t_stop: Optional[float] = None) -> Dict[str, float]:
        """Average speed estimate and peak-tracking slope on a time window."""
        frame = self.to_frame()
        if frame.empty:
            return {'mean_speed': float('nan'), 'peak_speed': float('nan')}
        t_stop = frame['time'].iloc[-1] if t_stop is None else t_stop
        window = frame[(frame['time'] >= t_start) & (frame['time'] <= t_stop)]
        if len(window) < 2:
            return {'mean_speed': float('nan'), 'peak_speed': float('nan')}
        slope = np.polyfit(window['time'].to_numpy(), window['peak_x'].to_numpy(), 1)[0]
        return {
            'mean_speed': float(window['speed'].mean()),
            'peak_speed': float(slope),
        }
