"""
Quadrature Service for symmetric discrete velocity sets.
Builds Gauss-Legendre and explicit velocity grids and evaluates the
macroscopic moments of a velocity distribution.

Gauss-Legendre nodes come from Newton iteration on the three-term recurrence;
numpy.polynomial.legendre.leggauss serves as the reference in the tests.
"""
from typing import Sequence, Tuple, Union

import numpy as np

from models.velocity_grid import VelocityGrid
from utils.error_handler import InvalidGridError
from utils.logger import get_logger

logger = get_logger(__name__)

NEWTON_TOL = 1e-15
NEWTON_MAX_ITER = 100


def _legendre_with_derivative(n: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def gauss_legendre(half_count: int) -> VelocityGrid:
    """
    Build the 2K-point Gauss-Legendre grid with weights normalized to 1.

    Positive nodes are found by Newton iteration on the Legendre polynomial;
    the negative half is produced by negation so the symmetry is exact.

    Args:
        half_count: K, number of positive nodes

    Returns:
        VelocityGrid with 2K nodes

    Raises:
        InvalidGridError: If K < 1 or Newton iteration stalls
    """
    if half_count < 1:
        raise InvalidGridError(f"K must be at least 1, got {half_count}", field='half_count')

    n = 2 * half_count
    i = np.arange(1, half_count + 1)
    # Largest roots first
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))

    for _ in range(NEWTON_MAX_ITER):
        p, dp = _legendre_with_derivative(n, x)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) <= NEWTON_TOL:
            break
    else:
        raise InvalidGridError(f"Newton iteration for Gauss-Legendre nodes stalled at K={half_count}")

    _, dp = _legendre_with_derivative(n, x)
    w = 1.0 / ((1.0 - x * x) * dp * dp)  # half of the classical weight

    positive = x[::-1]
    positive_weights = w[::-1]
    nodes = np.concatenate([-positive[::-1], positive])
    weights = np.concatenate([positive_weights[::-1], positive_weights])
    weights = weights / weights.sum()

    logger.debug(f"Gauss-Legendre grid built: K={half_count}, vmin={positive[0]:.6g}")
    return VelocityGrid(nodes=nodes, weights=weights, kind='gauss', normalized=True)


def explicit_symmetric(
    values: Sequence[float],
    weights: Union[str, Sequence[float]] = 'uniform',
    normalize: bool = True
) -> VelocityGrid:
    """
    Build a grid from the positive speeds, mirrored about zero.

    Args:
        values: Positive speeds, strictly increasing, at most 1
        weights: Positive weights for ``values`` (mirrored), or "uniform"
        normalize: Scale weights to sum to 1; otherwise uniform means 1/K each

    Returns:
        VelocityGrid

    Raises:
        InvalidGridError: If values are not positive and strictly increasing
    """
    speeds = np.asarray(values, dtype=float)
    if speeds.ndim != 1 or speeds.size == 0:
        raise InvalidGridError("At least one speed is required", field='values')
    if np.any(speeds <= 0.0) or np.any(speeds > 1.0):
        raise InvalidGridError(f"Speeds must lie in (0, 1], got {speeds.tolist()}", field='values')
    if np.any(np.diff(speeds) <= 0.0):
        raise InvalidGridError(
            f"Speeds must be strictly increasing without duplicates, got {speeds.tolist()}",
            field='values'
        )

    if isinstance(weights, str):
        if weights != 'uniform':
            raise InvalidGridError(f"Unknown weight rule: {weights}", field='weights')
        half = np.full(speeds.size, 1.0 / speeds.size)
    else:
        half = np.asarray(weights, dtype=float)
        if half.shape != speeds.shape or np.any(half <= 0.0):
            raise InvalidGridError("Weights must be positive and match the speeds", field='weights')

    full = np.concatenate([half[::-1], half])
    if normalize:
        full = full / full.sum()

    nodes = np.concatenate([-speeds[::-1], speeds])
    return VelocityGrid(nodes=nodes, weights=full, kind='explicit', normalized=normalize)


def moments(grid: VelocityGrid, f: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Density and flux of a velocity distribution.

    ``f`` may carry leading axes; the last axis runs over the 2K velocities.

    Returns:
        (rho, flux) with the leading shape of ``f``
    """
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != grid.size:
        raise InvalidGridError(
            f"Distribution has {f.shape[-1]} velocities, grid has {grid.size}",
            field='f'
        )
    rho = f @ grid.weights
    flux = f @ (grid.weights * grid.nodes)
    return rho, flux


def require_normalized(grid: VelocityGrid) -> None:
    """Reject grids whose weights do not sum to 1 (tumbling would not conserve mass)."""
    if not grid.normalized:
        raise InvalidGridError(
            "Kinetic solvers need normalized weights; build the grid with normalize=True",
            field='weights'
        )
