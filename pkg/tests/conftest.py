"""Shared fixtures."""
import numpy as np
import pytest
from scipy import linalg

from config.settings import config
from models.model_params import ModelParams
from services.quadrature import explicit_symmetric, gauss_legendre


@pytest.fixture(autouse=True)
def results_dir(tmp_path, monkeypatch):
    """Keep every written file inside the test's temporary directory."""
    monkeypatch.setattr(config.output, 'output_dir', str(tmp_path / 'results'))
    return tmp_path / 'results'


@pytest.fixture
def two_stream():
    """Velocities {-1, 1}."""
    return explicit_symmetric([1.0])


@pytest.fixture
def four_speed():
    """Velocities {-1, -0.5, 0.5, 1} with uniform weights."""
    return explicit_symmetric([0.5, 1.0])


@pytest.fixture
def gauss4():
    return gauss_legendre(4)


@pytest.fixture
def gauss8():
    return gauss_legendre(8)


@pytest.fixture
def wave_params():
    return ModelParams(chi_m=0.48, chi_n=0.44, d_m=0.5, d_n=1.0, alpha=40.0, beta=1.0, gamma=1.0, n_bar=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def stationary_matrix(grid, rates):
    """A with f' = A f for v f' = sum_l w_l T_l f_l - T f (node order)."""
    v = grid.nodes
    return (np.outer(np.ones_like(v), grid.weights * rates) - np.diag(rates)) / v[:, None]


def exact_smatrix(grid, rates, dx):
    """
    Reference S-matrix from the matrix exponential of the stationary system
    on [-dx/2, dx/2]: inflow v > 0 at the left end, v < 0 at the right end.
    """
    propagator = linalg.expm(stationary_matrix(grid, rates) * dx)
    pos = grid.positive_index
    neg = grid.negative_index
    size = grid.size
    half = grid.half_count

    matrix = np.empty((size, size))
    for column in range(size):
        incoming = np.zeros(size)
        incoming[column] = 1.0
        start = np.zeros(size)
        start[pos] = incoming[:half]
        # Unknown left-end values of v < 0 follow from the right-end inflow
        rhs = incoming[half:] - propagator[np.ix_(neg, pos)] @ incoming[:half]
        start[neg] = np.linalg.solve(propagator[np.ix_(neg, neg)], rhs)
        end = propagator @ start
        matrix[:half, column] = end[pos]
        matrix[half:, column] = start[neg]
    return matrix
