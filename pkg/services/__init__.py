"""Services package."""

from services.quadrature import gauss_legendre, explicit_symmetric, moments
from services.scattering import case_smatrix, fd_smatrix, secular_roots, smatrix_diagnostics, SMatrixCache
from services.kinetic_solver import cfl_max_dt, wb_step, ts_step
from services.parabolic_solver import lspline_step_signal, lspline_step_nutrient, ts_step_diffusion
from services.travelling_wave import (
    critical_speeds,
    decay_rates,
    stationary_profile,
    elliptic_signal,
    upsilon,
    find_wave_speeds,
    stationary_nutrient,
    wave_initial_data,
)
from services.simulator import Simulator, run, wave_speed_estimate, symmetry_error
from services.export_service import ExportService, ExportError

__all__ = [
    'gauss_legendre',
    'explicit_symmetric',
    'moments',
    'case_smatrix',
    'fd_smatrix',
    'secular_roots',
    'smatrix_diagnostics',
    'SMatrixCache',
    'cfl_max_dt',
    'wb_step',
    'ts_step',
    'lspline_step_signal',
    'lspline_step_nutrient',
    'ts_step_diffusion',
    'critical_speeds',
    'decay_rates',
    'stationary_profile',
    'elliptic_signal',
    'upsilon',
    'find_wave_speeds',
    'stationary_nutrient',
    'wave_initial_data',
    'Simulator',
    'run',
    'wave_speed_estimate',
    'symmetry_error',
    'ExportService',
    'ExportError',
]
