"""
Simulator Service.

Drives the coupled time loop: tumbling rates from the material derivatives of
the chemical fields, one kinetic step, then the signal and nutrient equations
with the density frozen over the step. Diagnostics and snapshots are
collected along the way.
"""
import math
import time
from typing import Dict, Optional, Tuple

import numpy as np

from config.settings import config
from models.kinetic_state import FieldState, KineticState
from models.model_params import ChemFields
from models.simulation import Diagnostics, SimConfig, Snapshot
from services.kinetic_solver import cfl_max_dt, ts_step, wb_step
from services.material_derivative import frozen_rates, rates_from_fields
from services.parabolic_solver import (
    diffusion_dt_bound,
    half_point_density,
    lspline_step_nutrient,
    lspline_step_signal,
    nutrient_dt_bound,
    point_density,
    signal_dt_bound,
    ts_step_diffusion,
)
from services.scattering import SMatrixCache
from services.travelling_wave import wave_initial_data
from utils.error_handler import (
    CFLViolationError,
    ChemowaveError,
    InvalidInputError,
    SimulationAbortedError,
)
from utils.logger import get_logger

logger = get_logger(__name__)

SPEED_THRESHOLD = 0.1
BOUNDARY_CELLS = 10


# ============================================================================
# Diagnostics helpers
# ============================================================================

def macroscopic_velocity(rho: np.ndarray, flux: np.ndarray) -> np.ndarray:
    """u = flux / rho, zero where the cell is empty."""
    u = np.zeros_like(rho)
    occupied = rho > 0.0
    u[occupied] = flux[occupied] / rho[occupied]
    return u


def wave_speed_estimate(rho: np.ndarray, u: np.ndarray, threshold: float = SPEED_THRESHOLD) -> float:
    """
    Mean of u over the cells where rho > threshold * max(rho).

    Raises:
        InvalidInputError: If the arrays differ in length or rho vanishes
    """
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    if rho.shape != u.shape:
        raise InvalidInputError("rho and u must have the same length", field='u')
    peak = float(rho.max()) if rho.size else 0.0
    if peak <= 0.0:
        raise InvalidInputError("Density vanishes everywhere", field='rho')
    return float(u[rho > threshold * peak].mean())


def symmetry_error(rho: np.ndarray, center_index: Optional[int] = None) -> float:
    """
    max_j |rho(center + j) - rho(center - j)|.

    Without a center index the array is compared with its mirror image, which
    is the symmetry about the domain midpoint on a cell-centered grid.
    """
    rho = np.asarray(rho, dtype=float)
    if center_index is None:
        return float(np.max(np.abs(rho - rho[::-1])))
    reach = min(center_index, rho.size - 1 - center_index)
    if reach <= 0:
        return 0.0
    right = rho[center_index + 1:center_index + reach + 1]
    left = rho[center_index - reach:center_index][::-1]
    return float(np.max(np.abs(right - left)))


def refined_peak(x: np.ndarray, rho: np.ndarray) -> Tuple[float, float]:
    """Argmax of rho refined by a three-point parabola; returns (position, height)."""
    i = int(np.argmax(rho))
    if i == 0 or i == rho.size - 1:
        return float(x[i]), float(rho[i])
    left, mid, right = rho[i - 1], rho[i], rho[i + 1]
    curvature = left - 2.0 * mid + right
    if curvature >= 0.0:
        return float(x[i]), float(mid)
    offset = 0.5 * (left - right) / curvature
    dx = x[1] - x[0]
    return float(x[i] + offset * dx), float(mid - 0.25 * (left - right) * offset)


def velocity_profile_metrics(rho: np.ndarray, u: np.ndarray, threshold: float = SPEED_THRESHOLD) -> Dict[str, float]:
    """
    Plateau quality of the macroscopic velocity inside the wave.

    Returns:
        Dict with ``ripple`` (largest deviation of u from its mean where
        rho > threshold * max rho) and ``jump`` (largest change of u between
        neighboring cells of that region)
    """
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    region = rho > threshold * rho.max()
    plateau = u[region]
    both = region[1:] & region[:-1]
    steps = np.abs(np.diff(u))[both]
    return {
        'ripple': float(np.max(np.abs(plateau - plateau.mean()))) if plateau.size else 0.0,
        'jump': float(steps.max()) if steps.size else 0.0,
    }


# ============================================================================
# Simulator
# ============================================================================

class Simulator:
    """Coupled kinetic-parabolic time stepper for one run."""

    def __init__(self, sim_config: SimConfig):
        """
        Initialize the simulator.

        Args:
            sim_config: Complete run description
        """
        self.config = sim_config
        self.params = sim_config.params
        self.grid = sim_config.grid
        self.dx = sim_config.dx
        self.field_location = 'interfaces' if sim_config.parabolic_scheme == 'wb' else 'nodes'
        self.rate_target = 'interfaces' if sim_config.kinetic_scheme == 'wb' else 'nodes'
        self.frozen = sim_config.frozen_rate_center is not None

        self.cache: Optional[SMatrixCache] = None
        if sim_config.kinetic_scheme == 'wb':
            self.cache = SMatrixCache(
                self.grid, self.dx,
                variant=sim_config.smatrix_variant,
                chi_total=self.params.chi_total
            )

        self.kinetic_limit = cfl_max_dt(self.grid, self.dx)
        if sim_config.kinetic_scheme == 'ts':
            self.kinetic_limit = min(self.kinetic_limit, 1.0 / (1.0 + self.params.chi_total))
        if sim_config.dt is not None and sim_config.dt > self.kinetic_limit * (1.0 + 1e-12):
            raise CFLViolationError(
                f"Requested dt = {sim_config.dt} exceeds the kinetic limit {self.kinetic_limit:.6g}",
                dt=sim_config.dt,
                limit=self.kinetic_limit
            )

        logger.info(f"Simulator initialized: {sim_config.label} ({sim_config.scheme_label}, {sim_config.num_cells} cells)")

    # ------------------------------------------------------------------
    # Initial data
    # ------------------------------------------------------------------

    def _field_points(self, state: KineticState) -> np.ndarray:
        return state.interfaces if self.field_location == 'interfaces' else state.cell_centers

    def initial_data(self, dt: float) -> Tuple[KineticState, ChemFields, Dict[str, float]]:
        """Build the initial density and chemical fields."""
        cfg = self.config
        initial = cfg.initial

        if initial.kind == 'travelling_wave':
            peak = initial.peak_position
            if peak is None:
                peak = cfg.x_left + 0.25 * (cfg.x_right - cfg.x_left)
            state, fields, profile = wave_initial_data(
                initial.wave_speed, self.grid, self.params,
                cfg.x_left, cfg.x_right, self.dx,
                peak_position=peak,
                dt=dt,
                mass=initial.wave_mass,
                field_location=self.field_location,
            )
            return state, fields, profile.to_dict()

        num_cells = cfg.num_cells
        centers = cfg.x_left + (np.arange(num_cells) + 0.5) * self.dx
        f = initial.amplitude * np.exp(
            -initial.x_rate * (centers[:, None] - initial.x_center) ** 2
            - initial.v_rate * self.grid.nodes[None, :] ** 2
        )
        state = KineticState(f=f, grid=self.grid, dx=self.dx, x0=cfg.x_left)

        points = self._field_points(state)
        m = np.full(points.size, initial.signal_value)
        if initial.nutrient == 'tanh_ramp':
            n = initial.ramp_amplitude * (
                0.5 * math.pi + np.tanh(points / initial.ramp_scale - initial.ramp_shift)
            )
        else:
            n = np.full(points.size, initial.nutrient_value)
        if self.field_location == 'interfaces':
            n[-1] = self.params.n_bar
        return state, ChemFields.at_rest(m, n, dt), {}

    # ------------------------------------------------------------------
    # Time step selection
    # ------------------------------------------------------------------

    def parabolic_dt_bound(self, rho_cells: np.ndarray, size: int) -> float:
        """Tightest explicit bound of the two parabolic schemes at the given density."""
        p = self.params
        if self.field_location == 'interfaces':
            rho_half = half_point_density(rho_cells, self.field_location)
            return min(signal_dt_bound(p, self.dx), nutrient_dt_bound(rho_half, p, self.dx, size))
        rho_max = max(0.0, float(np.max(rho_cells)))
        return min(
            diffusion_dt_bound(p.d_m, p.alpha, self.dx),
            diffusion_dt_bound(p.d_n, p.gamma * rho_max, self.dx, dirichlet_node=True),
        )

    def _global_dt(self) -> bool:
        return self.config.dt is None and self.config.parabolic_substeps == 1

    def step_size(self, rho_cells: np.ndarray, size: int) -> float:
        """Kinetic step for the next iteration."""
        cfg = self.config
        if cfg.dt is not None:
            return cfg.dt
        dt = cfg.cfl_safety * self.kinetic_limit
        if self._global_dt():
            dt = min(dt, cfg.cfl_safety * self.parabolic_dt_bound(rho_cells, size))
        return dt

    def substep_count(self, dt: float, rho_cells: np.ndarray, size: int) -> int:
        """Number of explicit parabolic substeps in one kinetic step."""
        if self.config.parabolic_substeps is not None:
            return self.config.parabolic_substeps
        bound = self.config.cfl_safety * self.parabolic_dt_bound(rho_cells, size)
        return max(1, int(math.ceil(dt / bound - 1e-12)))

    # ------------------------------------------------------------------
    # One coupled step
    # ------------------------------------------------------------------

    def tumbling_rates(self, state: KineticState, fields: ChemFields) -> np.ndarray:
        """Rates at the interior interfaces (WB) or the cell centers (TS)."""
        if self.frozen:
            points = state.interfaces[1:-1] if self.rate_target == 'interfaces' else state.cell_centers
            return frozen_rates(self.params, points, self.config.frozen_rate_center, self.grid)
        return rates_from_fields(
            self.params,
            (fields.m_now, fields.m_prev),
            (fields.n_now, fields.n_prev),
            fields.dt_used,
            self.dx,
            self.grid,
            self.field_location,
            self.rate_target,
            self.config.md_variant,
        )

    def kinetic_update(self, state: KineticState, rates: np.ndarray, dt: float) -> KineticState:
        """Advance the density by the configured kinetic scheme."""
        if self.config.kinetic_scheme == 'wb':
            return wb_step(state, self.cache.for_interfaces(rates), dt)
        return ts_step(state, rates, dt)

    def parabolic_update(self, fields: ChemFields, rho_cells: np.ndarray, dt: float) -> ChemFields:
        """Advance signal and nutrient over dt with the density frozen."""
        if self.frozen:
            return fields.advance(fields.m_now.copy(), fields.n_now.copy(), dt)

        p = self.params
        m = FieldState(fields.m_now, self.field_location)
        n = FieldState(fields.n_now, self.field_location)
        substeps = self.substep_count(dt, rho_cells, len(m))
        h = dt / substeps

        if self.field_location == 'interfaces':
            rho_half = half_point_density(rho_cells, self.field_location)
            for _ in range(substeps):
                m = lspline_step_signal(m, rho_half, p, h, self.dx)
                n = lspline_step_nutrient(n, rho_half, p, h, self.dx)
        else:
            rho_points = np.maximum(point_density(rho_cells, self.field_location), 0.0)
            for _ in range(substeps):
                m = ts_step_diffusion(m, p.alpha, p.beta * rho_points, p.d_m, h, self.dx)
                n = ts_step_diffusion(n, p.gamma * rho_points, 0.0, p.d_n, h, self.dx, right_value=p.n_bar)

        return fields.advance(m.values, n.values, dt)

    # ------------------------------------------------------------------
    # Diagnostics
    # ------------------------------------------------------------------

    def snapshot(self, t: float, state: KineticState, fields: ChemFields) -> Snapshot:
        """Macroscopic fields on the cell centers."""
        rho = state.rho
        u = macroscopic_velocity(rho, state.flux)
        m = FieldState(fields.m_now, self.field_location).to_cell_centers()
        n = FieldState(fields.n_now, self.field_location).to_cell_centers()
        return Snapshot(time=t, x=state.cell_centers, rho=rho, u=u, m=m, n=n)

    def record(self, diagnostics: Diagnostics, t: float, state: KineticState) -> None:
        """Append one row of scalar diagnostics."""
        rho = state.rho
        x = state.cell_centers
        u = macroscopic_velocity(rho, state.flux)
        peak_x, peak_rho = refined_peak(x, rho)
        symmetric = abs(self.config.x_left + self.config.x_right) <= 1e-12 * self.dx
        diagnostics.add_record(
            time=t,
            mass=state.mass,
            speed=wave_speed_estimate(rho, u) if rho.max() > 0.0 else float('nan'),
            peak_x=peak_x,
            peak_rho=peak_rho,
            sym_err=symmetry_error(rho) if symmetric else float('nan'),
            min_f=state.min_entry,
        )

    # ------------------------------------------------------------------
    # Main loop
    # ------------------------------------------------------------------

    def run(self) -> Diagnostics:
        """
        Run to t_end (or to steady state when ``steady_tol`` is set).

        Numerical failures abort the run; the partial diagnostics are
        returned with ``aborted`` set and the reason recorded.

        Returns:
            Diagnostics of the run
        """
        cfg = self.config
        diagnostics = Diagnostics(label=cfg.label)
        start = time.time()
        logger.log_run_start(cfg.label, cfg.to_dict())

        num_cells = cfg.num_cells
        field_size = num_cells + 1 if self.field_location == 'interfaces' else num_cells
        t = 0.0
        step = 0

        try:
            dt0 = cfg.dt if cfg.dt is not None else cfg.cfl_safety * self.kinetic_limit
            state, fields, metadata = self.initial_data(dt0)
        except ChemowaveError as e:
            logger.log_error_with_context(e, {'label': cfg.label, 'stage': 'initial data'})
            diagnostics.aborted = True
            diagnostics.abort_reason = f"initial data: {e.message}"
            return diagnostics

        diagnostics.metadata.update(metadata)
        diagnostics.metadata['scheme'] = cfg.scheme_label
        self.record(diagnostics, t, state)
        pending_snapshots = sorted(s for s in cfg.snapshot_times if s <= cfg.t_end)
        near_wall = False

        while t < cfg.t_end - 1e-12:
            try:
                rho_old = state.rho
                dt = min(self.step_size(rho_old, field_size), cfg.t_end - t)

                rates = self.tumbling_rates(state, fields)
                new_state = self.kinetic_update(state, rates, dt)

                rho_source = new_state.rho if cfg.rho_after_kinetic else rho_old
                fields = self.parabolic_update(fields, rho_source, dt)

                if not (np.all(np.isfinite(new_state.f)) and np.all(np.isfinite(fields.m_now))
                        and np.all(np.isfinite(fields.n_now))):
                    raise SimulationAbortedError("Non-finite values in the solution", time=t + dt, step=step + 1)
            except ChemowaveError as e:
                error = e if isinstance(e, SimulationAbortedError) else SimulationAbortedError(
                    f"Step {step + 1} at t = {t:.6g} failed: {e.message}",
                    time=t,
                    step=step + 1,
                    details=dict(e.details),
                )
                logger.log_error_with_context(error, {'label': cfg.label, 'cause': e.to_dict()})
                diagnostics.aborted = True
                diagnostics.abort_reason = error.message
                break

            change = float(np.abs(new_state.rho - rho_old).sum() * self.dx)
            state = new_state
            t += dt
            step += 1

            while pending_snapshots and t >= pending_snapshots[0] - 1e-12:
                diagnostics.snapshots.append(self.snapshot(t, state, fields))
                pending_snapshots.pop(0)

            if step % cfg.output_every == 0:
                self.record(diagnostics, t, state)
                logger.log_step(step, t, state.mass, state.min_entry)
                peak_x = diagnostics.final['peak_x']
                if not near_wall and min(peak_x - cfg.x_left, cfg.x_right - peak_x) < BOUNDARY_CELLS * self.dx:
                    near_wall = True
                    logger.warning("%s: density peak within %d cells of a wall at t = %.3f",
                                   cfg.label, BOUNDARY_CELLS, t)

            if cfg.steady_tol is not None and change / (state.mass * dt) < cfg.steady_tol:
                diagnostics.steady = True
                logger.info(f"{cfg.label}: steady state reached at t = {t:.4f}")
                break

        if not diagnostics.records or diagnostics.final['time'] < t:
            self.record(diagnostics, t, state)
        if not diagnostics.snapshots or diagnostics.snapshots[-1].time < t:
            diagnostics.snapshots.append(self.snapshot(t, state, fields))
        diagnostics.metadata.update({
            'steps': step,
            'final_time': t,
            'near_wall': near_wall,
            'smatrix_patterns': len(self.cache) if self.cache is not None else 0,
        })

        speed = diagnostics.final.get('speed')
        logger.log_run_complete(cfg.label, time.time() - start, speed)
        return diagnostics


def run(sim_config: SimConfig) -> Diagnostics:
    """Run one simulation."""
    return Simulator(sim_config).run()
