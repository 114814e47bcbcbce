"""Tests for secular roots and interface S-matrices."""
import numpy as np
import pytest

from conftest import exact_smatrix, stationary_matrix
from data.presets import two_speed_grid
from services.scattering import (
    SMatrixCache,
    case_smatrix,
    fd_smatrix,
    secular_roots,
    secular_roots_by_eigenvalues,
    smatrix_diagnostics,
    stochastic_defect,
)
from services.quadrature import explicit_symmetric, gauss_legendre
from utils.error_handler import InvalidGridError, InvalidInputError, NonResonanceError, ScatteringError

CHI_M, CHI_N = 0.48, 0.44


def four_value_rates(grid, cut_m=0.3, cut_n=-0.2):
    """Rates taking all four values 1 +- chi_M +- chi_N across the velocity range."""
    v = grid.nodes
    return 1.0 - CHI_M * np.sign(v - cut_m) - CHI_N * np.sign(v - cut_n)


def random_rates(grid, rng):
    values = np.array([1.0 - CHI_M - CHI_N, 1.0 - CHI_M + CHI_N, 1.0 + CHI_M - CHI_N, 1.0 + CHI_M + CHI_N])
    return rng.choice(values, size=grid.size)


# ============================================================================
# Secular roots
# ============================================================================

def test_two_stream_root(two_stream):
    # rates in node order: T(-1) = b, T(+1) = a
    a, b = 1.5, 0.5
    roots = secular_roots([b, a], two_stream)
    assert roots.roots.shape == (1,)
    assert roots.lambda0 == pytest.approx((a - b) / 2.0, abs=1e-13)
    assert not roots.degenerate


def test_two_stream_root_negative_side(two_stream):
    roots = secular_roots([1.7, 0.3], two_stream)
    assert roots.lambda0 == pytest.approx((0.3 - 1.7) / 2.0, abs=1e-13)


def test_degenerate_flux_gives_zero_root(two_stream):
    roots = secular_roots([0.8, 0.8], two_stream)
    assert roots.degenerate
    assert roots.lambda0 == 0.0


@pytest.mark.parametrize("half_count", [1, 2, 4, 8])
def test_roots_match_eigenvalues(half_count, rng):
    grid = gauss_legendre(half_count)
    for _ in range(5):
        rates = random_rates(grid, rng)
        roots = secular_roots(rates, grid)
        expected = secular_roots_by_eigenvalues(rates, grid)
        computed = np.sort(np.append(roots.roots, 0.0))
        np.testing.assert_allclose(computed, expected, rtol=1e-8, atol=1e-8 * np.max(np.abs(roots.poles)))


@pytest.mark.parametrize("half_count", [2, 4, 8])
def test_roots_interlace_poles(half_count):
    grid = gauss_legendre(half_count)
    rates = four_value_rates(grid)
    roots = secular_roots(rates, grid)
    assert np.all(roots.poles[:-1] < roots.roots)
    assert np.all(roots.roots < roots.poles[1:])
    assert roots.poles[roots.lambda0_index] < 0.0 < roots.poles[roots.lambda0_index + 1]


def cut_pattern(grid, rng):
    """Rates 1 +- chi_M sgn(v - a) +- chi_N sgn(v - b) with random cuts, signs and sensitivities."""
    chi_m = rng.uniform(0.0, 0.95)
    chi_n = rng.uniform(0.0, 0.99 - chi_m)
    cut_m, cut_n = rng.uniform(-1.1, 1.1, size=2)
    sign_m, sign_n = rng.choice([-1.0, 1.0], size=2)
    v = grid.nodes
    return 1.0 + sign_m * chi_m * np.sign(v - cut_m) + sign_n * chi_n * np.sign(v - cut_n)


def test_roots_interlace_poles_for_every_cut_pattern():
    rng = np.random.default_rng(20240611)
    grids = [gauss_legendre(k) for k in (1, 2, 3, 4, 8)]
    grids.append(explicit_symmetric([0.2, 0.55, 1.0]))
    flux_signs = set()

    for draw in range(600):
        grid = grids[draw % len(grids)]
        rates = cut_pattern(grid, rng)
        roots = secular_roots(rates, grid)

        assert np.all(roots.poles[:-1] < roots.roots), draw
        assert np.all(roots.roots < roots.poles[1:]), draw
        assert roots.poles[roots.lambda0_index] < 0.0 < roots.poles[roots.lambda0_index + 1]

        mean_flux = np.sum(grid.weights * grid.nodes / rates)
        flux_signs.add(np.sign(mean_flux))
        if not roots.degenerate:
            assert np.sign(roots.lambda0) == -np.sign(mean_flux), draw

        expected = secular_roots_by_eigenvalues(rates, grid)
        computed = np.sort(np.append(roots.roots, 0.0))
        np.testing.assert_allclose(computed, expected, rtol=1e-7, atol=1e-7 * np.max(np.abs(roots.poles)))

    assert flux_signs >= {-1.0, 1.0}


def test_lambda0_side_follows_mean_flux(gauss4):
    rates = four_value_rates(gauss4)
    roots = secular_roots(rates, gauss4)
    mean_flux = np.sum(gauss4.weights * gauss4.nodes / rates)
    assert np.sign(roots.lambda0) == -np.sign(mean_flux)


def test_coincident_poles_rejected(four_speed):
    # T/v equal for v = 0.5 and v = 1
    with pytest.raises(ScatteringError):
        secular_roots([1.0, 1.0, 0.5, 1.0], four_speed)


def test_rates_validated(four_speed):
    with pytest.raises(InvalidInputError):
        secular_roots([1.0, 1.0], four_speed)
    with pytest.raises(InvalidInputError):
        secular_roots([1.0, -1.0, 1.0, 1.0], four_speed)


# ============================================================================
# Case S-matrix
# ============================================================================

def test_case_identity_limit(gauss4):
    matrix = case_smatrix(four_value_rates(gauss4), gauss4, 1e-8).matrix
    assert np.max(np.abs(matrix - np.eye(gauss4.size))) <= 1e-6


@pytest.mark.parametrize("dx", [0.1, 0.5])
def test_case_matches_matrix_exponential(four_speed, dx):
    rates = four_value_rates(four_speed)
    matrix = case_smatrix(rates, four_speed, dx).matrix
    np.testing.assert_allclose(matrix, exact_smatrix(four_speed, rates, dx), atol=1e-10)


def test_case_two_stream_against_exponential(two_stream):
    rates = np.array([0.5, 1.5])
    matrix = case_smatrix(rates, two_stream, 0.3).matrix
    np.testing.assert_allclose(matrix, exact_smatrix(two_stream, rates, 0.3), atol=1e-12)


def test_case_degenerate_rates(four_speed):
    rates = np.array([0.7, 1.3, 1.3, 0.7])
    matrix = case_smatrix(rates, four_speed, 0.2).matrix
    np.testing.assert_allclose(matrix, exact_smatrix(four_speed, rates, 0.2), atol=1e-10)


@pytest.mark.parametrize("half_count", [2, 4])
def test_case_preserves_current(half_count, rng):
    grid = gauss_legendre(half_count)
    for _ in range(3):
        matrix = case_smatrix(random_rates(grid, rng), grid, 0.05).matrix
        assert stochastic_defect(matrix, grid) <= 1e-10


def test_case_is_well_balanced(four_speed, rng):
    """Exact stationary solutions sampled at the inflow ends are mapped to their outflow values."""
    from scipy import linalg

    rates = four_value_rates(four_speed)
    dx = 0.25
    propagator = linalg.expm(stationary_matrix(four_speed, rates) * dx)
    pos, neg = four_speed.positive_index, four_speed.negative_index
    for _ in range(3):
        left_end = rng.uniform(0.5, 1.5, four_speed.size)
        right_end = propagator @ left_end
        incoming = np.concatenate([left_end[pos], right_end[neg]])
        outgoing = case_smatrix(rates, four_speed, dx).matrix @ incoming
        np.testing.assert_allclose(outgoing, np.concatenate([right_end[pos], left_end[neg]]), atol=1e-10)


def test_case_rejects_unnormalized():
    grid = explicit_symmetric([0.5, 1.0], normalize=False)
    with pytest.raises(InvalidGridError):
        case_smatrix(np.ones(4), grid, 0.1)


# ============================================================================
# Finite-difference S-matrix
# ============================================================================

def test_fd_identity_limit(gauss4):
    matrix = fd_smatrix(four_value_rates(gauss4), gauss4, 1e-8).matrix
    assert np.max(np.abs(matrix - np.eye(gauss4.size))) <= 1e-6


def test_fd_preserves_current_for_any_rates(gauss8, rng):
    for _ in range(3):
        matrix = fd_smatrix(random_rates(gauss8, rng), gauss8, 0.001).matrix
        assert stochastic_defect(matrix, gauss8) <= 1e-10


def test_fd_resonance_guard():
    grid = two_speed_grid(0.5)
    rates = four_value_rates(grid)
    with pytest.raises(NonResonanceError):
        fd_smatrix(rates, grid, 0.6, chi_total=0.92)
    fd_smatrix(rates, grid, 0.6, chi_total=0.92, check_resonance=False)
    fd_smatrix(rates, grid, 0.5, chi_total=0.92)


def test_fd_second_order(four_speed):
    rates = four_value_rates(four_speed)
    errors = []
    for dx in (0.1, 0.05):
        matrix = fd_smatrix(rates, four_speed, dx).matrix
        errors.append(np.max(np.abs(matrix - exact_smatrix(four_speed, rates, dx))))
    # Local error of the box scheme is O(dx^3)
    assert errors[0] / errors[1] > 6.0


# ============================================================================
# Diagnostics and cache
# ============================================================================

def test_diagnostics_of_identity(gauss4):
    report = smatrix_diagnostics(np.eye(gauss4.size), gauss4)
    assert report.condition_number == pytest.approx(1.0)
    assert report.min_entry == 0.0
    assert report.stochastic_defect == 0.0
    assert report.is_nonnegative
    assert set(report.to_dict()) == {'condition_number', 'min_entry', 'stochastic_defect'}


def test_cache_reuses_patterns(four_speed):
    cache = SMatrixCache(four_speed, 0.1, variant='case')
    rates = four_value_rates(four_speed)
    first = cache.get(rates)
    second = cache.get(rates.copy())
    assert first is second
    assert len(cache) == 1

    stacked = cache.for_interfaces(np.vstack([rates, np.ones(4), rates]))
    assert stacked.shape == (3, 4, 4)
    assert len(cache) == 2
    np.testing.assert_array_equal(stacked[0], stacked[2])
    np.testing.assert_array_equal(stacked[0], first)


def test_cache_fd_variant_applies_guard():
    grid = two_speed_grid(0.5)
    cache = SMatrixCache(grid, 0.6, variant='fd', chi_total=0.92)
    with pytest.raises(NonResonanceError):
        cache.get(four_value_rates(grid))


def test_cache_rejects_unknown_variant(four_speed):
    with pytest.raises(InvalidInputError):
        SMatrixCache(four_speed, 0.1, variant='exact')
