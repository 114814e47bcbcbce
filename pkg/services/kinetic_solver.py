"""
Kinetic Solver Service.
Advances the phase-space density by the well-balanced Godunov scheme or the
transport/tumbling time-splitting scheme, with specular walls at both ends.
"""
from typing import Tuple

import numpy as np

from models.kinetic_state import KineticState
from services.quadrature import require_normalized
from utils.error_handler import CFLViolationError, InvalidInputError, NegativeDensityError
from utils.logger import get_logger

logger = get_logger(__name__)

CFL_SLACK = 1e-12


def cfl_max_dt(grid, dx: float) -> float:
    """Largest time step allowed by the transport CFL condition."""
    return dx / grid.max_speed


def _check_cfl(state: KineticState, dt: float) -> None:
    limit = cfl_max_dt(state.grid, state.dx)
    if dt <= 0.0 or dt > limit * (1.0 + CFL_SLACK):
        raise CFLViolationError(f"dt = {dt:.6g} violates the CFL limit {limit:.6g}", dt=dt, limit=limit)


def _upwind(state: KineticState, inflow_pos: np.ndarray, inflow_neg: np.ndarray, dt: float) -> np.ndarray:
    """
    Relax every velocity toward the interface state it receives.

    ``inflow_pos[j]`` is the state entering cell j through its left face for
    v_1..v_K; ``inflow_neg[j]`` enters through its right face for -v_1..-v_K.
    """
    grid = state.grid
    f = state.f
    pos = grid.positive_index
    neg = grid.negative_index
    courant = grid.speeds * (dt / state.dx)

    updated = np.empty_like(f)
    updated[:, pos] = f[:, pos] - courant * (f[:, pos] - inflow_pos)
    updated[:, neg] = f[:, neg] - courant * (f[:, neg] - inflow_neg)
    return updated


def _wall_states(state: KineticState) -> Tuple[np.ndarray, np.ndarray]:
    """Specular reflection: what leaves a wall at -v comes back at v."""
    f = state.f
    left = f[0, state.grid.negative_index]
    right = f[-1, state.grid.positive_index]
    return left, right


def _report_negative(updated: np.ndarray, strict: bool) -> None:
    minimum = float(updated.min())
    if minimum < 0.0:
        if strict:
            raise NegativeDensityError(f"Negative density {minimum:.3e} after kinetic step", minimum=minimum)
        logger.warning("Negative density after kinetic step: %.3e", minimum)


def wb_step(state: KineticState, smatrices: np.ndarray, dt: float, strict: bool = False) -> KineticState:
    """
    Advance one step of the well-balanced scheme.

    Args:
        state: Current density
        smatrices: Array (num_cells-1, 2K, 2K), one S-matrix per interior face
        dt: Time step
        strict: Raise instead of warn on negative entries

    Returns:
        New KineticState

    Raises:
        CFLViolationError: If dt exceeds the CFL limit
        NegativeDensityError: If strict and a negative entry appears
    """
    require_normalized(state.grid)
    _check_cfl(state, dt)

    n = state.num_cells
    size = state.grid.size
    half = state.grid.half_count
    if smatrices.shape != (n - 1, size, size):
        raise InvalidInputError(
            f"Expected S-matrices of shape {(n - 1, size, size)}, got {smatrices.shape}",
            field='smatrices'
        )

    f = state.f
    incoming = np.concatenate(
        [f[:-1][:, state.grid.positive_index], f[1:][:, state.grid.negative_index]],
        axis=1
    )
    outgoing = np.einsum('ijk,ik->ij', smatrices, incoming)

    wall_left, wall_right = _wall_states(state)
    inflow_pos = np.vstack([wall_left[None, :], outgoing[:, :half]])
    inflow_neg = np.vstack([outgoing[:, half:], wall_right[None, :]])

    updated = _upwind(state, inflow_pos, inflow_neg, dt)
    _report_negative(updated, strict)
    return state.with_density(updated)


def transport_step(state: KineticState, dt: float) -> KineticState:
    """Upwind free transport (the WB scheme with identity S-matrices)."""
    _check_cfl(state, dt)
    f = state.f
    wall_left, wall_right = _wall_states(state)
    inflow_pos = np.vstack([wall_left[None, :], f[:-1][:, state.grid.positive_index]])
    inflow_neg = np.vstack([f[1:][:, state.grid.negative_index], wall_right[None, :]])
    return state.with_density(_upwind(state, inflow_pos, inflow_neg, dt))


def tumbling_step(state: KineticState, rates: np.ndarray, dt: float) -> KineticState:
    """
    Explicit Euler for df/dt = sum_l w_l T_l f_l - T f, cell by cell.

    Raises:
        CFLViolationError: If dt * max(T) > 1
    """
    if rates.shape != state.f.shape:
        raise InvalidInputError(
            f"Rates must have shape {state.f.shape}, got {rates.shape}",
            field='rates'
        )
    t_max = float(rates.max())
    if dt * t_max > 1.0 + CFL_SLACK:
        raise CFLViolationError(
            f"Tumbling step dt*max(T) = {dt * t_max:.4g} exceeds 1",
            dt=dt,
            limit=1.0 / t_max
        )
    tf = rates * state.f
    gain = tf @ state.grid.weights
    return state.with_density(state.f - dt * tf + dt * gain[:, None])


def ts_step(state: KineticState, rates_at_nodes: np.ndarray, dt: float, strict: bool = False) -> KineticState:
    """
    Advance one step of the time-splitting scheme: upwind transport, then tumbling.

    Args:
        state: Current density
        rates_at_nodes: Array (num_cells, 2K) of rates at cell centers
        dt: Time step
        strict: Raise instead of warn on negative entries
    """
    require_normalized(state.grid)
    transported = transport_step(state, dt)
    tumbled = tumbling_step(transported, rates_at_nodes, dt)
    _report_negative(tumbled.f, strict)
    return tumbled
