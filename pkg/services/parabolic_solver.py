"""
Parabolic Solver Service.

Explicit schemes for the signal M and the nutrient N:

* L-spline schemes: the increment is the jump of the derivative of the local
  exponential interpolant, so discrete steady states of
  -D u'' + p u = q (piecewise-constant p, q) are left untouched.
* Time-splitting baseline: three-point Laplacian plus explicit reaction.

Boundaries: homogeneous Neumann for M at both walls; for N, Neumann at the
left wall and N = N_bar at the right wall.
"""
from typing import Optional, Union

import numpy as np

from models.kinetic_state import FieldState
from models.model_params import ModelParams
from utils.error_handler import InvalidInputError, InvalidParameterError, StabilityBoundError

SERIES_THRESHOLD = 1e-8
BOUND_SLACK = 1e-12


def _with_ghosts(field: FieldState, right_value: Optional[float] = None) -> np.ndarray:
    """Field extended by one mirror ghost per side; a Dirichlet value sets the right ghost."""
    u = field.values
    if field.location == 'interfaces':
        left, right = u[1], u[-2]
    else:
        left, right = u[0], u[-1]
        if right_value is not None:
            right = 2.0 * right_value - u[-1]
    return np.concatenate([[left], u, [right]])


def _half_points_with_ghosts(rho_half: np.ndarray, size: int) -> np.ndarray:
    """Densities between consecutive field points, mirrored past both ends."""
    rho_half = np.asarray(rho_half, dtype=float)
    if rho_half.shape != (size - 1,):
        raise InvalidInputError(
            f"Expected {size - 1} half-point densities, got shape {rho_half.shape}",
            field='rho'
        )
    return np.concatenate([rho_half[:1], rho_half, rho_half[-1:]])


def half_point_density(rho_cells: np.ndarray, location: str) -> np.ndarray:
    """
    Density between consecutive field points.

    On the interface layout these are exactly the cell densities; on the node
    layout they are averages of neighboring cells.
    """
    rho_cells = np.asarray(rho_cells, dtype=float)
    if location == 'interfaces':
        return rho_cells.copy()
    return 0.5 * (rho_cells[1:] + rho_cells[:-1])


def point_density(rho_cells: np.ndarray, location: str) -> np.ndarray:
    """Density at the field points themselves (walls take the adjacent cell)."""
    rho_cells = np.asarray(rho_cells, dtype=float)
    if location == 'nodes':
        return rho_cells.copy()
    inner = 0.5 * (rho_cells[1:] + rho_cells[:-1])
    return np.concatenate([rho_cells[:1], inner, rho_cells[-1:]])


def _x_over_sinh(x: np.ndarray) -> np.ndarray:
    """x / sinh(x) with a series near zero."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x * x < SERIES_THRESHOLD
    xs = x[small]
    out[small] = 1.0 - xs * xs / 6.0 + 7.0 * xs ** 4 / 360.0
    xl = x[~small]
    out[~small] = xl / np.sinh(xl)
    return out


def _nutrient_coefficients(rho: np.ndarray, params: ModelParams, dx: float):
    """Face conductance D r / sinh(r dx) and cosh(r dx) with r = sqrt(gamma rho / D_N)."""
    x = np.sqrt(params.gamma * rho / params.d_n) * dx
    conductance = params.d_n / dx * _x_over_sinh(x)
    return conductance, np.cosh(x)


def _check_density(rho: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(rho)))) if rho.size else 1.0
    minimum = float(rho.min())
    if minimum < -1e-12 * scale:
        raise InvalidInputError(f"Negative density {minimum:.3e} fed to the nutrient scheme", field='rho')
    return np.maximum(rho, 0.0)


def signal_dt_bound(params: ModelParams, dx: float) -> float:
    """Largest dt keeping the diagonal coefficient of the L-spline signal scheme nonnegative."""
    if params.alpha <= 0.0:
        raise InvalidParameterError("The L-spline signal scheme needs alpha > 0", field='alpha')
    x = np.sqrt(params.alpha / params.d_m) * dx
    return float(dx * np.sinh(x) / (2.0 * np.sqrt(params.alpha * params.d_m) * np.cosh(x)))


def nutrient_dt_bound(rho_half: np.ndarray, params: ModelParams, dx: float, size: int) -> float:
    """Largest dt keeping every diagonal coefficient of the nutrient scheme nonnegative."""
    rho = _check_density(_half_points_with_ghosts(rho_half, size))
    conductance, cosh = _nutrient_coefficients(rho, params, dx)
    diagonal = conductance[1:] * cosh[1:] + conductance[:-1] * cosh[:-1]
    return float(dx / diagonal.max())


def diffusion_dt_bound(d: float, p: Union[float, np.ndarray], dx: float, dirichlet_node: bool = False) -> float:
    """
    Positivity bound (2D/dx^2 + max(0, max p)) dt <= 1 of the explicit scheme.

    A Dirichlet value imposed through the ghost 2 u_b - u[-1] gives the last
    node the diagonal 1 - 3D dt/dx^2, so the bound tightens to 3D/dx^2.
    """
    p_max = max(0.0, float(np.max(p)))
    stencil = 3.0 if dirichlet_node else 2.0
    return 1.0 / (stencil * d / dx ** 2 + p_max)


def lspline_step_signal(
    m: FieldState,
    rho: np.ndarray,
    params: ModelParams,
    dt: float,
    dx: float
) -> FieldState:
    """
    One L-spline step of d_t M = D_M M'' - alpha M + beta rho.

    Args:
        m: Signal on the parabolic grid
        rho: Densities between consecutive points (length len(m) - 1)
        params: Model parameters (alpha > 0)
        dt: Time step
        dx: Grid spacing

    Returns:
        Updated signal

    Raises:
        StabilityBoundError: If dt exceeds the positivity bound
    """
    bound = signal_dt_bound(params, dx)
    if dt > bound * (1.0 + BOUND_SLACK):
        raise StabilityBoundError(
            f"Signal step dt = {dt:.4g} exceeds the positivity bound {bound:.4g}",
            dt=dt,
            limit=bound
        )

    r = np.sqrt(params.alpha / params.d_m)
    x = r * dx
    cosh = np.cosh(x)
    coefficient = dt * np.sqrt(params.alpha * params.d_m) / (dx * np.sinh(x))

    u = m.values
    ghosted = _with_ghosts(m)
    rho_ext = _half_points_with_ghosts(rho, u.size)
    source = params.beta / params.alpha * (cosh - 1.0) * (rho_ext[1:] + rho_ext[:-1])

    updated = u + coefficient * (ghosted[2:] - 2.0 * cosh * u + ghosted[:-2] + source)
    return m.replaced(updated)


def lspline_step_nutrient(
    n: FieldState,
    rho: np.ndarray,
    params: ModelParams,
    dt: float,
    dx: float
) -> FieldState:
    """
    One L-spline step of d_t N = D_N N'' - gamma rho N.

    Args:
        n: Nutrient on the parabolic grid
        rho: Nonnegative densities between consecutive points (length len(n) - 1)
        params: Model parameters
        dt: Time step
        dx: Grid spacing

    Raises:
        InvalidInputError: If rho is negative
        StabilityBoundError: If dt exceeds the positivity bound
    """
    u = n.values
    rho_ext = _check_density(_half_points_with_ghosts(rho, u.size))
    conductance, cosh = _nutrient_coefficients(rho_ext, params, dx)
    k_plus, c_plus = conductance[1:], cosh[1:]
    k_minus, c_minus = conductance[:-1], cosh[:-1]

    bound = float(dx / (k_plus * c_plus + k_minus * c_minus).max())
    if dt > bound * (1.0 + BOUND_SLACK):
        raise StabilityBoundError(
            f"Nutrient step dt = {dt:.4g} exceeds the positivity bound {bound:.4g}",
            dt=dt,
            limit=bound
        )

    ghosted = _with_ghosts(n, right_value=params.n_bar)
    flux_right = k_plus * (ghosted[2:] - c_plus * u)
    flux_left = k_minus * (c_minus * u - ghosted[:-2])
    updated = u + dt / dx * (flux_right - flux_left)

    if n.location == 'interfaces':
        updated[-1] = params.n_bar
    return n.replaced(updated)


def ts_step_diffusion(
    u: FieldState,
    p: Union[float, np.ndarray],
    q: Union[float, np.ndarray],
    d: float,
    dt: float,
    dx: float,
    right_value: Optional[float] = None
) -> FieldState:
    """
    Explicit step of d_t u = D u'' - p u + q.

    Args:
        u: Field on the parabolic grid
        p, q: Reaction coefficients at the field points (or scalars)
        d: Diffusivity
        dt: Time step
        dx: Grid spacing
        right_value: Dirichlet value at the right wall (Neumann if None)

    Raises:
        StabilityBoundError: If (2D/dx^2 - max(0, max p)) dt > 1
    """
    p_arr = np.broadcast_to(np.asarray(p, dtype=float), u.values.shape)
    q_arr = np.broadcast_to(np.asarray(q, dtype=float), u.values.shape)

    growth = (2.0 * d / dx ** 2 - max(0.0, float(p_arr.max()))) * dt
    if growth > 1.0 + BOUND_SLACK:
        raise StabilityBoundError(
            f"Diffusion step violates the stability bound ({growth:.4g} > 1)",
            dt=dt,
            limit=dt / growth
        )

    values = u.values
    ghosted = _with_ghosts(u, right_value=right_value)
    laplacian = ghosted[2:] - 2.0 * values + ghosted[:-2]
    updated = values + d * dt / dx ** 2 * laplacian - dt * (p_arr * values - q_arr)

    if right_value is not None and u.location == 'interfaces':
        updated[-1] = right_value
    return u.replaced(updated)
