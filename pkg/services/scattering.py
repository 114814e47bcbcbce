"""
Scattering Service for interface S-matrices.

An S-matrix maps the incoming half-fluxes at an interface, stacked as
(left cell, positive velocities; right cell, negative velocities), to the
outgoing interface states in the same (positive; negative) order. Within each
half the velocities run v_1 < ... < v_K and -v_1, ..., -v_K.

Two constructions are available:

* ``case``: exact solutions of the stationary transport-tumbling problem on
  the staggered cell, spanned by Case's elementary modes.
* ``fd``: a second-order box discretization of the same problem.
"""
import threading
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from config.settings import config
from models.scattering import InterfaceRates, SecularRoots, SMatrix, SMatrixDiagnostics
from models.velocity_grid import VelocityGrid
from services.quadrature import require_normalized
from utils.error_handler import (
    InvalidInputError,
    NonResonanceError,
    ScatteringError,
    SingularMatrixError,
    StochasticityError,
)
from utils.logger import get_logger
from utils.numerics import bracketed_root

logger = get_logger(__name__)

POLE_SEPARATION = 1e-12
DEGENERATE_FLUX = 1e-15


def _as_rates(rates, grid: VelocityGrid) -> np.ndarray:
    values = rates.values if isinstance(rates, InterfaceRates) else np.asarray(rates, dtype=float)
    if values.shape != (grid.size,):
        raise InvalidInputError(
            f"Expected {grid.size} rates, got shape {values.shape}",
            field='rates'
        )
    if np.any(values <= 0.0):
        raise InvalidInputError("Tumbling rates must be positive", field='rates')
    return values


def secular_function(lam: float, poles: np.ndarray, weights: np.ndarray) -> float:
    """sum_k w_k / (T_k/v_k - lambda)."""
    return float(np.sum(weights / (poles - lam)))


def secular_roots(rates, grid: VelocityGrid) -> SecularRoots:
    """
    All real roots of the secular function, one per gap between sorted poles.

    The gap around zero holds lambda_0; its side is fixed by the sign of the
    mean flux sum w v / T. A vanishing mean flux gives lambda_0 = 0 exactly
    and the degenerate flag.

    Raises:
        ScatteringError: If two poles coincide
        BisectionError: If the root search fails to converge
    """
    t = _as_rates(rates, grid)
    poles = t / grid.nodes
    order = np.argsort(poles)
    p = poles[order]
    w = grid.weights[order]

    gaps = np.diff(p)
    if np.any(gaps <= POLE_SEPARATION * np.maximum(1.0, np.abs(p[1:]))):
        raise ScatteringError("Coincident poles T_k/v_k; the mode set is incomplete", rates=t)

    tol = config.schemes.bisection_tol
    max_iter = config.schemes.bisection_max_iter

    def g(lam: float) -> float:
        return secular_function(lam, p, w)

    lambda0_index = grid.half_count - 1
    mean_flux = float(np.sum(grid.weights * grid.nodes / t))
    scale = float(np.sum(w / np.abs(p)))
    degenerate = abs(mean_flux) <= DEGENERATE_FLUX * scale

    roots = np.empty(grid.size - 1)
    for i in range(grid.size - 1):
        lo, hi = p[i], p[i + 1]
        if i == lambda0_index:
            if degenerate:
                roots[i] = 0.0
                continue
            # g is increasing between poles and g(0) equals the mean flux
            if mean_flux > 0.0:
                hi = 0.0
            else:
                lo = 0.0
        roots[i] = bracketed_root(g, lo, hi, xtol=tol, rtol=tol, max_iter=max_iter)

    return SecularRoots(roots=roots, poles=p, lambda0_index=lambda0_index, degenerate=degenerate)


def secular_roots_by_eigenvalues(rates, grid: VelocityGrid) -> np.ndarray:
    """
    Eigenvalues of P = diag(T/v) - (w T)(1/v)^T, sorted.

    They are the secular roots together with lambda = 0 (the conservation mode).
    """
    t = _as_rates(rates, grid)
    p_matrix = np.diag(t / grid.nodes) - np.outer(grid.weights * t, 1.0 / grid.nodes)
    eigenvalues = linalg.eigvals(p_matrix)
    return np.sort(eigenvalues.real)


def _mode_columns(t: np.ndarray, v: np.ndarray, zeta: np.ndarray, roots: SecularRoots) -> np.ndarray:
    """
    Values of the 2K elementary modes at points (zeta_s, v_s).

    Columns: conservation mode 1/T, the lambda_0 difference-quotient mode,
    then exp(-lambda zeta)/(T - lambda v) for the remaining roots.
    """
    columns = [1.0 / t]

    lam0 = roots.lambda0
    if lam0 == 0.0:
        growth = -zeta
    else:
        growth = np.expm1(-lam0 * zeta) / lam0
    columns.append((t * growth + v) / (t * (t - lam0 * v)))

    for i, lam in enumerate(roots.roots):
        if i == roots.lambda0_index:
            continue
        columns.append(np.exp(-lam * zeta) / (t - lam * v))

    return np.column_stack(columns)


def current_weights(grid: VelocityGrid) -> np.ndarray:
    """Gamma = w|v| in stacked order."""
    stacked = grid.stacked_index
    return grid.weights[stacked] * np.abs(grid.nodes[stacked])


def stochastic_defect(matrix: np.ndarray, grid: VelocityGrid) -> float:
    """max over columns of |column sum of Gamma S Gamma^-1 - 1|."""
    gamma = current_weights(grid)
    column_sums = gamma @ matrix / gamma
    return float(np.max(np.abs(column_sums - 1.0)))


def case_smatrix(rates, grid: VelocityGrid, dx: float) -> SMatrix:
    """
    S-matrix from exact Case modes on the staggered cell.

    Coordinates are centered on the interface: inflow for v > 0 sits at
    -dx/2 and for v < 0 at +dx/2; each outgoing state is read at the opposite
    end, where that velocity leaves the cell.

    Raises:
        SingularMatrixError: If the inflow matrix is numerically singular
        StochasticityError: If the result does not preserve the current
    """
    require_normalized(grid)
    if dx <= 0.0:
        raise InvalidInputError(f"dx must be positive, got {dx}", field='dx')
    t_nodes = _as_rates(rates, grid)
    roots = secular_roots(t_nodes, grid)

    stacked = grid.stacked_index
    t = t_nodes[stacked]
    v = grid.nodes[stacked]
    half = 0.5 * dx
    zeta_in = np.where(v > 0.0, -half, half)
    zeta_out = -zeta_in

    m_in = _mode_columns(t, v, zeta_in, roots)
    m_out = _mode_columns(t, v, zeta_out, roots)

    scale = np.max(np.abs(m_in), axis=0)
    m_in = m_in / scale
    m_out = m_out / scale

    condition = float(np.linalg.cond(m_in))
    if not np.isfinite(condition) or condition > config.schemes.condition_limit:
        raise SingularMatrixError(
            f"Case inflow matrix is singular (condition {condition:.3e})",
            condition=condition,
            rates=t_nodes
        )

    matrix = linalg.solve(m_in.T, m_out.T).T

    defect = stochastic_defect(matrix, grid)
    if defect > config.schemes.stochastic_tol:
        raise StochasticityError(
            f"Case S-matrix does not preserve the current (defect {defect:.3e})",
            rates=t_nodes
        )

    return SMatrix(matrix=matrix, variant='case', dx=dx)


def fd_smatrix(
    rates,
    grid: VelocityGrid,
    dx: float,
    chi_total: Optional[float] = None,
    check_resonance: bool = True
) -> SMatrix:
    """
    S-matrix from the box discretization of the staggered-cell problem.

    Q = diag(|W| + dx/2 T) - dx/2 (1)(w T)^T, Q~ = diag(|W| - dx/2 T) + dx/2 (1)(w T)^T,
    S = Q^-1 Q~.

    Args:
        rates: Interface rates in node order
        grid: Velocity grid
        dx: Cell width
        chi_total: chi_M + chi_N; when given, the guard is v_min > dx chi_total
        check_resonance: Enforce the non-resonance guard

    Raises:
        NonResonanceError: If the guard fails
    """
    require_normalized(grid)
    t_nodes = _as_rates(rates, grid)

    if check_resonance:
        spread = dx * chi_total if chi_total is not None else 0.5 * dx * float(t_nodes.max() - t_nodes.min())
        if grid.min_speed <= spread:
            raise NonResonanceError(
                f"Non-resonance violated: v_min = {grid.min_speed:.4g} <= {spread:.4g}; "
                f"refine the velocity grid or coarsen dx",
                rates=t_nodes
            )

    stacked = grid.stacked_index
    t = t_nodes[stacked]
    speed = np.abs(grid.nodes[stacked])
    coupling = np.outer(np.ones_like(t), grid.weights[stacked] * t)
    half = 0.5 * dx

    q = np.diag(speed + half * t) - half * coupling
    q_tilde = np.diag(speed - half * t) + half * coupling

    try:
        matrix = linalg.solve(q, q_tilde)
    except linalg.LinAlgError as e:
        raise SingularMatrixError(f"Q is singular: {e}", rates=t_nodes) from e

    return SMatrix(matrix=matrix, variant='fd', dx=dx)


def smatrix_diagnostics(smatrix, grid: VelocityGrid) -> SMatrixDiagnostics:
    """Condition number, smallest entry and current defect of an S-matrix."""
    matrix = smatrix.matrix if isinstance(smatrix, SMatrix) else np.asarray(smatrix, dtype=float)
    singular_values = linalg.svdvals(matrix)
    smallest = singular_values[-1]
    condition = float(singular_values[0] / smallest) if smallest > 0.0 else float('inf')
    return SMatrixDiagnostics(
        condition_number=condition,
        min_entry=float(matrix.min()),
        stochastic_defect=stochastic_defect(matrix, grid)
    )


class SMatrixCache:
    """
    Memo of S-matrices keyed by construction variant, dx and the exact rates.

    Rates only take a handful of values, so a run reuses a small set of
    matrices. Reads are lock-free; inserts are serialized.
    """

    def __init__(
        self,
        grid: VelocityGrid,
        dx: float,
        variant: str = 'case',
        chi_total: Optional[float] = None
    ):
        """
        Initialize the cache.

        Args:
            grid: Velocity grid shared by all entries
            dx: Cell width
            variant: "case" or "fd"
            chi_total: Sensitivity sum used by the FD resonance guard
        """
        if variant not in ('case', 'fd'):
            raise InvalidInputError(f"Unknown S-matrix variant: {variant}", field='smatrix_variant')
        self.grid = grid
        self.dx = dx
        self.variant = variant
        self.chi_total = chi_total
        self._entries: Dict[Tuple[float, ...], np.ndarray] = {}
        self._lock = threading.Lock()
        logger.debug(f"S-matrix cache initialized ({variant}, dx={dx})")

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, rates) -> np.ndarray:
        """Matrix for one rate pattern (node order)."""
        values = _as_rates(rates, self.grid)
        key = tuple(values.tolist())
        matrix = self._entries.get(key)
        if matrix is not None:
            return matrix

        if self.variant == 'case':
            matrix = case_smatrix(values, self.grid, self.dx).matrix
        else:
            matrix = fd_smatrix(values, self.grid, self.dx, chi_total=self.chi_total).matrix
        matrix.setflags(write=False)

        with self._lock:
            matrix = self._entries.setdefault(key, matrix)
        logger.debug(f"New S-matrix pattern cached ({len(self._entries)} total)")
        return matrix

    def for_interfaces(self, rates: np.ndarray) -> np.ndarray:
        """
        Stack of matrices for an array of per-interface rates.

        Args:
            rates: Array (num_interfaces, 2K) in node order

        Returns:
            Array (num_interfaces, 2K, 2K)
        """
        patterns, inverse = np.unique(rates, axis=0, return_inverse=True)
        unique = np.stack([self.get(pattern) for pattern in patterns])
        return unique[inverse.reshape(-1)]
