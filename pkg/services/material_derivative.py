"""
Tumbling rate and material-derivative discretizations.

Two approximations of D_t M = d_t M + v d_x M are provided:

* MD-1 works with node-located fields: a centered space difference between
  two nodes and the mean of the two nodal backward time differences.
* MD-2 follows the characteristic back one step and interpolates the
  previous field linearly, upwinded by the sign of v.

Both have a scalar form (one point, one velocity) and an array form that
evaluates every point and velocity at once.
"""
from typing import Tuple

import numpy as np

from models.model_params import ModelParams
from models.velocity_grid import VelocityGrid
from utils.error_handler import CFLViolationError, InvalidInputError

CFL_SLACK = 1e-12


def tumbling_rate(params: ModelParams, dm_material, dn_material):
    """
    Tumbling rate 1 - chi_M sgn(D_t M) - chi_N sgn(D_t N), with sgn(0) = 0.

    Works elementwise on arrays.
    """
    return 1.0 - params.chi_m * np.sign(dm_material) - params.chi_n * np.sign(dn_material)


def material_derivative_md1(
    m_nodes_now: np.ndarray,
    m_nodes_prev: np.ndarray,
    dt: float,
    dx: float,
    j: int,
    v: float
) -> float:
    """
    MD-1 at the midpoint between nodes j and j+1.

    Raises:
        InvalidInputError: If j+1 is outside the arrays
    """
    if j < 0 or j + 1 >= len(m_nodes_now):
        raise InvalidInputError(f"Interface index {j} out of range", field='j')
    dx_m = (m_nodes_now[j + 1] - m_nodes_now[j]) / dx
    dt_m = 0.5 * ((m_nodes_now[j + 1] - m_nodes_prev[j + 1]) + (m_nodes_now[j] - m_nodes_prev[j])) / dt
    return float(dt_m + v * dx_m)


def material_derivative_md2(
    m_now: np.ndarray,
    m_prev: np.ndarray,
    dt: float,
    dx: float,
    j: int,
    v: float
) -> float:
    """
    MD-2 at point j: (M_now[j] - M_prev(x_j - v dt)) / dt.

    Beyond the first/last point the previous field is continued by its edge
    value.

    Raises:
        CFLViolationError: If |v| dt > dx
        InvalidInputError: If j is outside the arrays
    """
    size = len(m_now)
    if j < 0 or j >= size:
        raise InvalidInputError(f"Point index {j} out of range", field='j')
    _check_cfl(abs(v), dt, dx)

    a = v * dt / dx
    if v > 0.0:
        upwind = m_prev[max(j - 1, 0)]
        interp = (1.0 - a) * m_prev[j] + a * upwind
    else:
        upwind = m_prev[min(j + 1, size - 1)]
        interp = (1.0 + a) * m_prev[j] - a * upwind
    return float((m_now[j] - interp) / dt)


def _check_cfl(speed: float, dt: float, dx: float) -> None:
    if speed * dt > dx * (1.0 + CFL_SLACK):
        raise CFLViolationError(
            f"Characteristic leaves the cell: |v| dt = {speed * dt:.6g} > dx = {dx:.6g}",
            dt=dt,
            limit=dx / speed
        )


def md1_midpoints(now: np.ndarray, prev: np.ndarray, dt: float, dx: float, velocities: np.ndarray) -> np.ndarray:
    """MD-1 at all midpoints between consecutive points; shape (len-1, 2K)."""
    dx_m = np.diff(now) / dx
    dt_nodes = (now - prev) / dt
    dt_m = 0.5 * (dt_nodes[1:] + dt_nodes[:-1])
    return dt_m[:, None] + velocities[None, :] * dx_m[:, None]


def md1_nodes(now: np.ndarray, prev: np.ndarray, dt: float, dx: float, velocities: np.ndarray) -> np.ndarray:
    """MD-1 evaluated at the points themselves: nodal time difference, centered slope."""
    slope = np.gradient(now, dx)
    slope[0] = 0.0
    slope[-1] = 0.0
    dt_m = (now - prev) / dt
    return dt_m[:, None] + velocities[None, :] * slope[:, None]


def md2_points(now: np.ndarray, prev: np.ndarray, dt: float, dx: float, velocities: np.ndarray) -> np.ndarray:
    """MD-2 at every point and velocity; shape (len, 2K)."""
    _check_cfl(float(np.max(np.abs(velocities))), dt, dx)

    left = np.concatenate([prev[:1], prev[:-1]])
    right = np.concatenate([prev[1:], prev[-1:]])
    a = velocities[None, :] * dt / dx
    interp = np.where(
        a > 0.0,
        (1.0 - a) * prev[:, None] + a * left[:, None],
        (1.0 + a) * prev[:, None] - a * right[:, None],
    )
    return (now[:, None] - interp) / dt


def _midpoints(values: np.ndarray) -> np.ndarray:
    return 0.5 * (values[1:] + values[:-1])


def material_derivatives_at(
    now: np.ndarray,
    prev: np.ndarray,
    dt: float,
    dx: float,
    grid: VelocityGrid,
    field_location: str,
    target: str,
    variant: str
) -> np.ndarray:
    """
    Material derivative of one field at the points where rates are needed.

    Args:
        now, prev: Field at the current and previous level
        dt: Step separating ``prev`` from ``now``
        dx: Cell width
        grid: Velocity grid
        field_location: "interfaces" (num_cells+1 points, walls included) or "nodes" (cell centers)
        target: "interfaces" (interior faces, num_cells-1) or "nodes" (num_cells)
        variant: "md1" or "md2"

    Returns:
        Array (num_targets, 2K)
    """
    v = grid.nodes
    if variant == 'md1':
        # MD-1 needs node values
        if field_location == 'interfaces':
            if target == 'nodes':
                return md1_midpoints(now, prev, dt, dx, v)
            return md1_midpoints(_midpoints(now), _midpoints(prev), dt, dx, v)
        if target == 'interfaces':
            return md1_midpoints(now, prev, dt, dx, v)
        return md1_nodes(now, prev, dt, dx, v)

    if variant == 'md2':
        if field_location == 'interfaces':
            if target == 'interfaces':
                return md2_points(now, prev, dt, dx, v)[1:-1]
            return md2_points(_midpoints(now), _midpoints(prev), dt, dx, v)
        if target == 'interfaces':
            return md2_points(_midpoints(now), _midpoints(prev), dt, dx, v)
        return md2_points(now, prev, dt, dx, v)

    raise InvalidInputError(f"Unknown material derivative variant: {variant}", field='md_variant')


def rates_from_fields(
    params: ModelParams,
    m_pair: Tuple[np.ndarray, np.ndarray],
    n_pair: Tuple[np.ndarray, np.ndarray],
    dt: float,
    dx: float,
    grid: VelocityGrid,
    field_location: str,
    target: str,
    variant: str
) -> np.ndarray:
    """Tumbling rates at every target point and velocity."""
    dm = material_derivatives_at(m_pair[0], m_pair[1], dt, dx, grid, field_location, target, variant)
    dn = material_derivatives_at(n_pair[0], n_pair[1], dt, dx, grid, field_location, target, variant)
    return tumbling_rate(params, dm, dn)


def frozen_rates(params: ModelParams, points: np.ndarray, center: float, grid: VelocityGrid) -> np.ndarray:
    """Static aggregation rates 1 + chi_M sgn(v (x - center))."""
    return 1.0 + params.chi_m * np.sign((points - center)[:, None] * grid.nodes[None, :])
