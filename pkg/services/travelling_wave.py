"""
Travelling Wave Service.

Analysis of the kinetic model in the frame z = x - c t moving with a
candidate speed c:

* critical speeds bounding the admissible window,
* exponential decay rates on both sides of the peak,
* the stationary kinetic profile (one global sparse solve),
* the stationary signal and nutrient,
* the auxiliary function Upsilon(c) = d_z M(0), whose zeros are wave speeds,
* wave-shaped initial data for the Cauchy problem.
"""
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import spsolve
from tqdm import tqdm

from config.settings import config
from models.kinetic_state import KineticState
from models.model_params import ChemFields, ModelParams
from models.velocity_grid import VelocityGrid
from models.wave_profile import QuadrantRates, WaveProfile, WaveSpeedScan
from services.quadrature import require_normalized
from utils.error_handler import (
    ChemowaveError,
    DomainTooSmallError,
    InvalidParameterError,
    NoSignChangeError,
    ProfileError,
)
from utils.logger import get_logger
from utils.numerics import bracketed_root

logger = get_logger(__name__)

NODE_TOUCH = 1e-12
JUMP_RATIO = 0.1


# ============================================================================
# Speeds and decay rates
# ============================================================================

def _mean_drift(c: float, grid: VelocityGrid, rate_fn) -> float:
    u = grid.nodes - c
    return float(np.sum(grid.weights * u / rate_fn(u)))


def critical_speeds(grid: VelocityGrid, chi_m: float, chi_n: float) -> Tuple[float, float]:
    """
    The speeds c_* and c^* at which the mean drift sum w (v-c)/T(v-c) vanishes,
    with the rates ahead of (c_*) and behind (c^*) the peak.

    Raises:
        NoSignChangeError: If a drift does not change sign on (-1, 1)
    """
    rates = QuadrantRates(0.0, chi_m, chi_n)
    speeds = []
    for name, rate_fn in (('c_lower', rates.right), ('c_upper', rates.left)):
        def drift(c: float, rate_fn=rate_fn) -> float:
            return _mean_drift(c, grid, rate_fn)

        if not (drift(-1.0) > 0.0 > drift(1.0)):
            raise NoSignChangeError(
                f"Mean drift for {name} has no sign change on (-1, 1)",
                details={'chi_m': chi_m, 'chi_n': chi_n}
            )
        speeds.append(bracketed_root(drift, -1.0, 1.0, open_ends=False))

    return speeds[0], speeds[1]


def _shifted_velocities(c: float, grid: VelocityGrid) -> np.ndarray:
    u = grid.nodes - c
    if np.any(np.abs(u) < NODE_TOUCH):
        raise ProfileError(f"Speed c = {c} coincides with a velocity node", speed=c)
    return u


def decay_rates(c: float, grid: VelocityGrid, rates: QuadrantRates) -> Dict[str, object]:
    """
    Smallest positive decay exponents behind (lambda_minus) and ahead of
    (lambda_plus) the peak, with the corresponding velocity profiles.

    Returns:
        Dict with lambda_minus, F_minus, lambda_plus, F_plus

    Raises:
        ProfileError: If c sits on a node or outside the admissible window
    """
    u = _shifted_velocities(c, grid)
    w = grid.weights

    t_right = rates.right(u)
    poles_right = t_right / u
    first_right = float(poles_right[u > 0.0].min())

    def ahead(lam: float) -> float:
        return float(np.sum(w / (poles_right - lam)))

    if not ahead(0.0) < 0.0:
        raise ProfileError(f"No decay ahead of the peak at c = {c} (c <= c_*)", speed=c)
    lambda_plus = bracketed_root(ahead, 0.0, first_right)

    t_left = rates.left(u)
    poles_left = t_left / u
    first_left = float((-poles_left[u < 0.0]).min())

    def behind(lam: float) -> float:
        return float(np.sum(w / (poles_left + lam)))

    if not behind(0.0) > 0.0:
        raise ProfileError(f"No decay behind the peak at c = {c} (c >= c^*)", speed=c)
    lambda_minus = bracketed_root(behind, 0.0, first_left)

    return {
        'lambda_minus': lambda_minus,
        'F_minus': 1.0 / (t_left + lambda_minus * u),
        'lambda_plus': lambda_plus,
        'F_plus': 1.0 / (t_right - lambda_plus * u),
    }


def default_half_width(lambda_minus: float, lambda_plus: float) -> float:
    """max(min_half_width, decay_lengths / min(lambda)), capped by max_half_width."""
    settings = config.waves
    width = max(settings.min_half_width, settings.decay_lengths / min(lambda_minus, lambda_plus))
    return min(width, settings.max_half_width)


# ============================================================================
# Stationary problems
# ============================================================================

def _box_blocks(u: np.ndarray, t: np.ndarray, w: np.ndarray, dz: float) -> Tuple[np.ndarray, np.ndarray]:
    """Cell blocks acting on (f_i, f_{i+1}) of the box scheme times dz."""
    half = 0.5 * dz
    coupling = np.outer(np.ones_like(t), w * t)
    on_next = np.diag(u + half * t) - half * coupling
    on_current = np.diag(-u + half * t) - half * coupling
    return on_current, on_next


def stationary_profile(
    c: float,
    grid: VelocityGrid,
    params: ModelParams,
    half_width: Optional[float] = None,
    dz: Optional[float] = None,
    mass: float = 1.0
) -> WaveProfile:
    """
    Stationary kinetic profile in the moving frame.

    Solves (v - c) f' = sum_l w_l T_l f_l - T f on [-L, L] with the
    quadrant rates, a box scheme on every cell, zero inflow at both ends and
    sum(rho) dz = mass. The zero-inflow condition of the fastest rightward
    velocity at the left end gives way to the mass condition.

    Args:
        c: Candidate speed inside (c_*, c^*), not a node
        grid: Velocity grid
        params: Model parameters
        half_width: L; defaults to max(15, 12/min(lambda))
        dz: Grid spacing (z = 0 is always a grid point)
        mass: Total mass

    Returns:
        WaveProfile (without signal/nutrient)

    Raises:
        ProfileError: On singular systems or negative density
    """
    require_normalized(grid)
    rates = QuadrantRates(c, params.chi_m, params.chi_n)
    decay = decay_rates(c, grid, rates)
    lambda_minus, lambda_plus = decay['lambda_minus'], decay['lambda_plus']

    dz = dz or config.waves.dz
    if half_width is None:
        half_width = default_half_width(lambda_minus, lambda_plus)
    if half_width < 10.0 / min(lambda_minus, lambda_plus):
        logger.warning(
            "Half width %.3g is shorter than ten decay lengths at c = %.4f; tails are truncated",
            half_width, c
        )

    n_half = int(math.ceil(half_width / dz))
    z = dz * np.arange(-n_half, n_half + 1)
    num_points = z.size
    num_cells = num_points - 1
    size = grid.size

    u = _shifted_velocities(c, grid)
    w = grid.weights
    left_current, left_next = _box_blocks(u, rates.left(u), w, dz)
    right_current, right_next = _box_blocks(u, rates.right(u), w, dz)

    is_left = (np.arange(num_cells) < n_half).astype(float)
    is_right = 1.0 - is_left
    shift_current = sparse.eye(num_cells, num_points, k=0, format='csr')
    shift_next = sparse.eye(num_cells, num_points, k=1, format='csr')
    left_rows = sparse.diags(is_left)
    right_rows = sparse.diags(is_right)

    interior = (
        sparse.kron(left_rows @ shift_current, left_current)
        + sparse.kron(left_rows @ shift_next, left_next)
        + sparse.kron(right_rows @ shift_current, right_current)
        + sparse.kron(right_rows @ shift_next, right_next)
    )

    # Closing rows: zero inflow, one of them replaced by the mass condition
    fastest = int(np.argmax(u))
    rows, cols, vals = [], [], []
    row = 0
    for k in np.flatnonzero(u > 0.0):
        if k == fastest:
            continue
        rows.append(row)
        cols.append(k)
        vals.append(1.0)
        row += 1
    for k in np.flatnonzero(u < 0.0):
        rows.append(row)
        cols.append((num_points - 1) * size + k)
        vals.append(1.0)
        row += 1
    mass_row = row
    for i in range(num_points):
        rows.extend([mass_row] * size)
        cols.extend(range(i * size, (i + 1) * size))
        vals.extend((w * dz).tolist())

    closing = sparse.csr_matrix((vals, (rows, cols)), shape=(size, num_points * size))
    system = sparse.vstack([interior, closing], format='csc')

    rhs = np.zeros(num_points * size)
    rhs[num_cells * size + mass_row] = mass

    solution = spsolve(system, rhs)
    if not np.all(np.isfinite(solution)):
        raise ProfileError(f"Stationary system is singular at c = {c}", speed=c)

    f = solution.reshape(num_points, size)
    rho = f @ w
    peak = float(rho.max())
    if rho.min() < -1e-10 * peak:
        raise ProfileError(
            f"Stationary profile has negative density {rho.min():.3e} at c = {c}",
            speed=c
        )

    return WaveProfile(
        c=c,
        z=z,
        f=f,
        weights=w.copy(),
        lambda_minus=lambda_minus,
        lambda_plus=lambda_plus,
    )


def _tridiagonal_solve(lower: np.ndarray, diagonal: np.ndarray, upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve with sub-diagonal lower[1:], super-diagonal upper[:-1]."""
    banded = np.zeros((3, diagonal.size))
    banded[0, 1:] = upper[:-1]
    banded[1] = diagonal
    banded[2, :-1] = lower[1:]
    return linalg.solve_banded((1, 1), banded, rhs)


def elliptic_signal(
    rho: np.ndarray,
    c: float,
    params: ModelParams,
    dz: float,
    advection: Optional[str] = None
) -> np.ndarray:
    """
    Solve -c M' - D_M M'' + alpha M = beta rho with Neumann ends.

    Args:
        rho: Density on the z grid
        c: Speed
        params: Model parameters (alpha > 0)
        dz: Grid spacing
        advection: "centered" (default from settings) or "upwind"
    """
    if params.alpha <= 0.0:
        raise InvalidParameterError("The stationary signal needs alpha > 0", field='alpha')
    advection = advection or config.waves.signal_advection
    rho = np.asarray(rho, dtype=float)
    size = rho.size

    diffusion = params.d_m / dz ** 2
    lower = np.full(size, -diffusion)
    upper = np.full(size, -diffusion)
    diagonal = np.full(size, 2.0 * diffusion + params.alpha)

    if advection == 'centered':
        lower += c / (2.0 * dz)
        upper -= c / (2.0 * dz)
    elif advection == 'upwind':
        if c >= 0.0:
            diagonal += c / dz
            upper -= c / dz
        else:
            diagonal -= c / dz
            lower += c / dz
    else:
        raise InvalidParameterError(f"Unknown advection discretization: {advection}", field='advection')

    # Mirror ghosts
    upper[0] += lower[0]
    lower[-1] += upper[-1]

    return _tridiagonal_solve(lower, diagonal, upper, params.beta * rho)


def stationary_nutrient(rho: np.ndarray, c: float, params: ModelParams, dz: float) -> np.ndarray:
    """
    Solve -c N' - D_N N'' + gamma rho N = 0 with N = 0 at the left end and
    N = N_bar at the right end.

    Raises:
        ProfileError: On negative density, negative speed or a singular system
    """
    rho = np.asarray(rho, dtype=float)
    if c < 0.0:
        raise ProfileError("The stationary nutrient needs c >= 0", speed=c)
    if rho.min() < -1e-10 * max(1.0, float(rho.max())):
        raise ProfileError("Negative density fed to the stationary nutrient", speed=c)
    rho = np.maximum(rho, 0.0)

    inner = rho[1:-1]
    size = inner.size
    diffusion = params.d_n / dz ** 2
    lower = np.full(size, c / (2.0 * dz) - diffusion)
    upper = np.full(size, -c / (2.0 * dz) - diffusion)
    diagonal = 2.0 * diffusion + params.gamma * inner

    rhs = np.zeros(size)
    rhs[-1] = -upper[-1] * params.n_bar

    try:
        values = _tridiagonal_solve(lower, diagonal, upper, rhs)
    except linalg.LinAlgError as e:
        raise ProfileError(f"Stationary nutrient system is singular: {e}", speed=c) from e

    return np.concatenate([[0.0], values, [params.n_bar]])


def upsilon_from_profile(profile: WaveProfile, params: ModelParams, advection: Optional[str] = None) -> float:
    """Centered slope of the stationary signal at z = 0."""
    signal = elliptic_signal(profile.rho, profile.c, params, profile.dz, advection)
    profile.signal = signal
    i = profile.center_index
    return float((signal[i + 1] - signal[i - 1]) / (2.0 * profile.dz))


def upsilon(
    c: float,
    grid: VelocityGrid,
    params: ModelParams,
    half_width: Optional[float] = None,
    dz: Optional[float] = None,
    mass: float = 1.0
) -> float:
    """Upsilon(c) = d_z M(0) for the stationary profile at speed c."""
    profile = stationary_profile(c, grid, params, half_width=half_width, dz=dz, mass=mass)
    return upsilon_from_profile(profile, params)


# ============================================================================
# Root search
# ============================================================================

def _safe_upsilon(c: float, grid: VelocityGrid, params: ModelParams, dz: Optional[float]) -> float:
    try:
        return upsilon(c, grid, params, dz=dz)
    except ChemowaveError as e:
        logger.warning("Upsilon evaluation failed at c = %.6f: %s", c, e.message)
        return float('nan')


def _refine(
    c_a: float,
    y_a: float,
    c_b: float,
    y_b: float,
    grid: VelocityGrid,
    params: ModelParams,
    dz: Optional[float]
) -> Tuple[str, float]:
    """Refine a sign change with Brent's method; report ("root", c) or ("jump", c)."""
    settings = config.waves
    initial_gap = abs(y_b - y_a)
    visited = [0.5 * (c_a + c_b)]

    def evaluate(c: float) -> float:
        visited.append(c)
        y = _safe_upsilon(c, grid, params, dz)
        if math.isnan(y):
            raise ProfileError(f"Upsilon undefined at c = {c}", speed=c)
        return y

    try:
        location = bracketed_root(
            evaluate, c_a, c_b, open_ends=False,
            xtol=settings.width_tol, rtol=0.0,
            max_iter=config.schemes.bisection_max_iter
        )
        if abs(evaluate(location)) <= settings.root_tol:
            return 'root', location
        # The final bracket is narrower than width_tol
        left = evaluate(max(c_a, location - 2.0 * settings.width_tol))
        right = evaluate(min(c_b, location + 2.0 * settings.width_tol))
    except ProfileError:
        return 'jump', visited[-1]

    # A gap that does not close under refinement is a discontinuity
    if abs(right - left) > JUMP_RATIO * initial_gap:
        return 'jump', location
    return 'root', location


def find_wave_speeds(
    grid: VelocityGrid,
    params: ModelParams,
    scan_points: Optional[int] = None,
    dz: Optional[float] = None,
    progress: bool = False
) -> WaveSpeedScan:
    """
    Scan Upsilon over (max(0, c_*), c^*) and locate its zeros.

    Speeds within the guard band of a velocity node are skipped; sign changes
    across a node, and sign changes whose gap does not close under bisection,
    are reported as jumps.

    Args:
        grid: Velocity grid
        params: Model parameters
        scan_points: Number of scan speeds (at least 50)
        dz: Grid spacing of the stationary problems
        progress: Show a progress bar

    Returns:
        WaveSpeedScan with the table, roots and jumps
    """
    settings = config.waves
    scan_points = scan_points or settings.scan_points
    if scan_points < 50:
        raise InvalidParameterError(f"scan_points must be at least 50, got {scan_points}", field='scan_points')

    c_lower, c_upper = critical_speeds(grid, params.chi_m, params.chi_n)
    start = max(0.0, c_lower)
    speeds = np.linspace(start, c_upper, scan_points + 2)[1:-1]
    near_node = np.min(np.abs(speeds[:, None] - grid.nodes[None, :]), axis=1) <= settings.node_guard
    speeds = speeds[~near_node]

    values = np.array([
        _safe_upsilon(c, grid, params, dz)
        for c in tqdm(speeds, desc="Upsilon scan", disable=not progress)
    ])

    scan = WaveSpeedScan(c_lower=c_lower, c_upper=c_upper, speeds=speeds, upsilon=values)
    scan.failed = speeds[np.isnan(values)].tolist()

    valid = np.flatnonzero(~np.isnan(values))
    for i in valid[values[valid] == 0.0]:
        scan.roots.append(float(speeds[i]))

    for a, b in zip(valid[:-1], valid[1:]):
        y_a, y_b = values[a], values[b]
        if y_a == 0.0 or y_b == 0.0 or np.sign(y_a) == np.sign(y_b):
            continue
        c_a, c_b = speeds[a], speeds[b]
        nodes_between = grid.nodes[(grid.nodes > c_a) & (grid.nodes < c_b)]
        if nodes_between.size:
            scan.jumps.append(float(nodes_between[0]))
            continue
        kind, location = _refine(c_a, y_a, c_b, y_b, grid, params, dz)
        (scan.roots if kind == 'root' else scan.jumps).append(float(location))

    scan.roots.sort()
    scan.jumps.sort()
    logger.info(str(scan))
    return scan


# ============================================================================
# Initial data
# ============================================================================

def wave_initial_data(
    c: float,
    grid: VelocityGrid,
    params: ModelParams,
    x_left: float,
    x_right: float,
    dx: float,
    peak_position: float,
    dt: float,
    mass: float = 1.0,
    field_location: str = 'interfaces',
    dz: Optional[float] = None
) -> Tuple[KineticState, ChemFields, WaveProfile]:
    """
    Place the stationary wave at speed c on the simulation grid.

    The previous chemical level is the profile shifted back by c dt, so the
    material derivatives at t = 0 already see a travelling wave.

    Raises:
        DomainTooSmallError: If the profile does not fit between the walls
    """
    profile = stationary_profile(c, grid, params, dz=dz, mass=mass)
    rho_profile = profile.rho
    profile.signal = elliptic_signal(rho_profile, c, params, profile.dz)
    profile.nutrient = stationary_nutrient(rho_profile, c, params, profile.dz)

    z_peak = float(profile.z[int(np.argmax(rho_profile))])
    x_profile = peak_position - z_peak + profile.z

    outside = (x_profile < x_left) | (x_profile > x_right)
    peak = float(rho_profile.max())
    if np.any(outside) and float(np.abs(rho_profile[outside]).max()) > 1e-8 * peak:
        raise DomainTooSmallError(
            f"Wave profile at c = {c} does not fit in [{x_left}, {x_right}] around {peak_position}",
            speed=c
        )

    num_cells = int(round((x_right - x_left) / dx))
    centers = x_left + (np.arange(num_cells) + 0.5) * dx
    f = np.column_stack([
        np.interp(centers, x_profile, profile.f[:, k], left=0.0, right=0.0)
        for k in range(grid.size)
    ])
    f = np.maximum(f, 0.0)
    factor = mass / float((f @ grid.weights).sum() * dx)
    f *= factor
    state = KineticState(f=f, grid=grid, dx=dx, x0=x_left)

    if field_location == 'interfaces':
        points = x_left + np.arange(num_cells + 1) * dx
    else:
        points = centers

    def sample(values: np.ndarray, shift: float, right: float) -> np.ndarray:
        return np.interp(points + shift, x_profile, values, left=0.0, right=right)

    m_now = factor * sample(profile.signal, 0.0, 0.0)
    m_prev = factor * sample(profile.signal, c * dt, 0.0)
    n_now = sample(profile.nutrient, 0.0, params.n_bar)
    n_prev = sample(profile.nutrient, c * dt, params.n_bar)
    if field_location == 'interfaces':
        n_now[-1] = params.n_bar
        n_prev[-1] = params.n_bar

    fields = ChemFields(m_now, m_prev, n_now, n_prev, dt)
    logger.info(
        f"Wave initial data at c={c:.4f}: lambda-={profile.lambda_minus:.4f}, "
        f"lambda+={profile.lambda_plus:.4f}, L={profile.half_width:.2f}"
    )
    return state, fields, profile
