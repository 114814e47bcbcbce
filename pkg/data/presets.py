"""
Scenario presets.
Parameter sets of the reference experiments: S-matrix conditioning, symmetry
of the aggregation model, velocity profiles of the travelling pulse,
bi-stability of the two waves and the v_min bifurcation sweep.
"""
import math
from typing import List, Optional

from models.model_params import ModelParams
from models.simulation import InitialCondition, SimConfig
from models.velocity_grid import VelocityGrid
from services.quadrature import explicit_symmetric, gauss_legendre

# Conditioning study
CONDITIONING_HALF_COUNTS: List[int] = list(range(2, 17))
CONDITIONING_DX: List[float] = [0.1, 0.05, 0.025]
CONDITIONING_CUTS = {'chi_m': 0.25, 'chi_n': -0.35}

# Bi-stability and bifurcation
BISTABILITY_SEEDS: List[float] = [0.214, 0.45, 0.55, 0.58]
BIFURCATION_VMIN: List[float] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
SLOW_WAVE = 0.214
FAST_WAVE = 0.58
FINE_DX = 0.018
COARSE_DX = 0.05

# Symmetry test
SYMMETRY_CHI_M = 0.95
SYMMETRY_STEADY_TOL = 1e-10
SYMMETRY_T_END = 500.0

# Ramp of the initial nutrient in the travelling-pulse test
RAMP_AMPLITUDE = 400.0
RAMP_SCALE = 3.0
RAMP_SHIFT = 3.0


def two_speed_grid(v_min: float = 0.5) -> VelocityGrid:
    """Uniform-weight grid {-1, -v_min, v_min, 1}."""
    return explicit_symmetric([v_min, 1.0])


def wave_params(**changes) -> ModelParams:
    """chi_M=0.48, chi_N=0.44, D_M=0.5, alpha=40, D_N=beta=gamma=1."""
    params = ModelParams(chi_m=0.48, chi_n=0.44, d_m=0.5, d_n=1.0, alpha=40.0, beta=1.0, gamma=1.0, n_bar=1.0)
    return params.with_updates(**changes) if changes else params


def aggregation_params() -> ModelParams:
    """Signal-only aggregation model: D_M = alpha = beta = 1, no nutrient."""
    return ModelParams(chi_m=SYMMETRY_CHI_M, chi_n=0.0, d_m=1.0, d_n=1.0, alpha=1.0, beta=1.0, gamma=0.0, n_bar=1.0)


def symmetry_config(kinetic: str, parabolic: str, frozen: bool) -> SimConfig:
    """
    Aggregation run on [-10, 10] from f = 10 exp(-x^2 - v^2), M = 0.

    With ``frozen`` the rates are 1 + chi_M sgn(v x) instead of coming from
    the signal.
    """
    tag = f"{kinetic}-{parabolic}".upper()
    return SimConfig(
        grid=gauss_legendre(8),
        params=aggregation_params(),
        x_left=-10.0,
        x_right=10.0,
        dx=0.01,
        t_end=SYMMETRY_T_END,
        kinetic_scheme=kinetic,
        parabolic_scheme=parabolic,
        initial=InitialCondition(amplitude=10.0, x_center=0.0, x_rate=1.0, v_rate=1.0, signal_value=0.0),
        frozen_rate_center=0.0 if frozen else None,
        steady_tol=SYMMETRY_STEADY_TOL,
        output_every=200,
        label=f"symmetry_{tag}_{'frozen' if frozen else 'dynamic'}",
    )


def wavespeed_config(kinetic: str, parabolic: str, md_variant: str) -> SimConfig:
    """
    Travelling pulse from f = 3 exp(-2 x^2), M = 0 and the tanh nutrient ramp,
    on [-10, 90] with dx = 0.05 up to t = 100.
    """
    x_right = 90.0
    n_bar = RAMP_AMPLITUDE * (0.5 * math.pi + math.tanh(x_right / RAMP_SCALE - RAMP_SHIFT))
    tag = f"{kinetic}-{parabolic}".upper()
    return SimConfig(
        grid=two_speed_grid(),
        params=wave_params(n_bar=n_bar),
        x_left=-10.0,
        x_right=x_right,
        dx=COARSE_DX,
        t_end=100.0,
        kinetic_scheme=kinetic,
        parabolic_scheme=parabolic,
        md_variant=md_variant,
        initial=InitialCondition(
            amplitude=3.0,
            x_center=0.0,
            x_rate=2.0,
            v_rate=0.0,
            signal_value=0.0,
            nutrient='tanh_ramp',
            ramp_amplitude=RAMP_AMPLITUDE,
            ramp_scale=RAMP_SCALE,
            ramp_shift=RAMP_SHIFT,
        ),
        snapshot_times=[100.0],
        output_every=100,
        label=f"wavespeed_{tag}_{md_variant.upper()}",
    )


def wave_seed_config(
    c0: float,
    dx: float = FINE_DX,
    t_end: float = 60.0,
    v_min: float = 0.5,
    label: Optional[str] = None
) -> SimConfig:
    """
    Cauchy run seeded with the stationary wave at c0 (WB-WB, MD-2).

    The domain [0, 180] holds the whole moving-frame window around the peak
    at x = 70 plus the distance travelled by a fast wave.
    """
    num_cells = int(round(180.0 / dx))
    x_right = num_cells * dx
    return SimConfig(
        grid=two_speed_grid(v_min),
        params=wave_params(),
        x_left=0.0,
        x_right=x_right,
        dx=dx,
        t_end=t_end,
        initial=InitialCondition(kind='travelling_wave', wave_speed=c0, peak_position=70.0),
        output_every=max(1, int(round(0.5 / dx))),
        label=label or f"wave_c{c0:g}_dx{dx:g}",
    )
