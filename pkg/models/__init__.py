"""Data models package."""

from models.velocity_grid import VelocityGrid
from models.model_params import ModelParams, ChemFields
from models.scattering import InterfaceRates, SecularRoots, SMatrix, SMatrixDiagnostics
from models.kinetic_state import KineticState, FieldState
from models.wave_profile import QuadrantRates, WaveProfile, WaveSpeedScan
from models.simulation import InitialCondition, SimConfig, Snapshot, Diagnostics

__all__ = [
    'VelocityGrid',
    'ModelParams',
    'ChemFields',
    'InterfaceRates',
    'SecularRoots',
    'SMatrix',
    'SMatrixDiagnostics',
    'KineticState',
    'FieldState',
    'QuadrantRates',
    'WaveProfile',
    'WaveSpeedScan',
    'InitialCondition',
    'SimConfig',
    'Snapshot',
    'Diagnostics',
]
