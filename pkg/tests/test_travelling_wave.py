"""Tests for the moving-frame analysis of travelling waves."""
import numpy as np
import pytest

from data.presets import two_speed_grid
from models.model_params import ModelParams
from models.wave_profile import QuadrantRates
from services.quadrature import gauss_legendre
from services.travelling_wave import (
    critical_speeds,
    decay_rates,
    elliptic_signal,
    find_wave_speeds,
    stationary_nutrient,
    stationary_profile,
    upsilon,
    wave_initial_data,
)
from utils.error_handler import (
    DomainTooSmallError,
    InvalidParameterError,
    ProfileError,
)


# ============================================================================
# Critical speeds and decay rates
# ============================================================================

@pytest.mark.parametrize("chi_m,chi_n", [(0.48, 0.44), (0.3, 0.1), (0.2, 0.5)])
def test_two_stream_critical_speeds(two_stream, chi_m, chi_n):
    c_lower, c_upper = critical_speeds(two_stream, chi_m, chi_n)
    assert c_upper == pytest.approx(chi_m + chi_n, abs=1e-10)
    assert c_lower == pytest.approx(chi_n - chi_m, abs=1e-10)


def test_critical_speeds_of_balanced_sensitivities(gauss8):
    c_lower, c_upper = critical_speeds(gauss8, 0.3, 0.3)
    assert c_lower == pytest.approx(0.0, abs=1e-12)
    assert 0.0 < c_upper < 1.0


def test_critical_speeds_without_chemotaxis(gauss4):
    c_lower, c_upper = critical_speeds(gauss4, 0.0, 0.0)
    assert c_lower == pytest.approx(0.0, abs=1e-12)
    assert c_upper == pytest.approx(0.0, abs=1e-12)


def test_two_stream_decay_rates(two_stream):
    chi_m, chi_n = 0.48, 0.44
    decay = decay_rates(0.0, two_stream, QuadrantRates(0.0, chi_m, chi_n))
    assert decay['lambda_plus'] == pytest.approx(chi_m - chi_n, abs=1e-10)
    assert decay['lambda_minus'] == pytest.approx(chi_m + chi_n, abs=1e-10)


def test_decay_profiles_solve_the_tail_equations(four_speed):
    c = 0.3
    rates = QuadrantRates(c, 0.48, 0.44)
    decay = decay_rates(c, four_speed, rates)
    u = four_speed.nodes - c
    w = four_speed.weights

    t_right = rates.right(u)
    ahead = (t_right - decay['lambda_plus'] * u) * decay['F_plus'] - np.sum(w * t_right * decay['F_plus'])
    assert np.max(np.abs(ahead)) <= 1e-12

    t_left = rates.left(u)
    behind = (t_left + decay['lambda_minus'] * u) * decay['F_minus'] - np.sum(w * t_left * decay['F_minus'])
    assert np.max(np.abs(behind)) <= 1e-12
    assert np.all(decay['F_plus'] > 0.0) and np.all(decay['F_minus'] > 0.0)


def test_decay_rates_outside_window(two_stream):
    with pytest.raises(ProfileError):
        decay_rates(-0.2, two_stream, QuadrantRates(-0.2, 0.48, 0.44))
    with pytest.raises(ProfileError):
        decay_rates(0.95, two_stream, QuadrantRates(0.95, 0.48, 0.44))


def test_speed_on_a_node_is_rejected(four_speed):
    with pytest.raises(ProfileError):
        decay_rates(0.5, four_speed, QuadrantRates(0.5, 0.48, 0.44))


# ============================================================================
# Stationary profile
# ============================================================================

@pytest.fixture(scope='module')
def profile_at_03():
    return stationary_profile(0.3, two_speed_grid(0.5), ModelParams(), dz=0.01)


def test_profile_mass_and_peak(profile_at_03):
    profile = profile_at_03
    assert profile.mass == pytest.approx(1.0, abs=1e-10)
    assert abs(int(np.argmax(profile.rho)) - profile.center_index) <= 1
    assert profile.rho.min() >= -1e-10 * profile.rho.max()


def test_profile_is_unimodal(profile_at_03):
    profile = profile_at_03
    rho = profile.rho
    peak = int(np.argmax(rho))
    inner = np.abs(profile.z) <= 0.5 * profile.half_width
    rising = np.diff(rho[:peak + 1])[inner[:peak]]
    falling = np.diff(rho[peak:])[inner[peak + 1:]]
    assert np.all(rising >= -1e-12 * rho[peak])
    assert np.all(falling <= 1e-12 * rho[peak])


def test_profile_tails_follow_decay_rates(profile_at_03):
    profile = profile_at_03
    log_rho = np.log(profile.rho)
    dz = profile.dz
    quarter = int(round(0.5 * profile.half_width / dz))
    i_right = profile.center_index + quarter
    i_left = profile.center_index - quarter
    slope_right = (log_rho[i_right + 1] - log_rho[i_right - 1]) / (2.0 * dz)
    slope_left = (log_rho[i_left + 1] - log_rho[i_left - 1]) / (2.0 * dz)
    assert -slope_right == pytest.approx(profile.lambda_plus, rel=0.02)
    assert slope_left == pytest.approx(profile.lambda_minus, rel=0.02)


def test_profile_scales_with_mass():
    grid = two_speed_grid(0.5)
    one = stationary_profile(0.3, grid, ModelParams(), half_width=15.0, dz=0.02)
    three = stationary_profile(0.3, grid, ModelParams(), half_width=15.0, dz=0.02, mass=3.0)
    np.testing.assert_allclose(three.f, 3.0 * one.f, rtol=1e-8, atol=1e-14)


def test_aggregation_profile_is_symmetric(two_stream):
    params = ModelParams(chi_m=0.48, chi_n=0.0)
    profile = stationary_profile(0.0, two_stream, params, half_width=40.0, dz=0.01)
    rho = profile.rho
    assert np.max(np.abs(rho - rho[::-1])) <= 1e-6 * rho.max()


# ============================================================================
# Stationary chemical fields
# ============================================================================

def test_elliptic_signal_constant_density():
    params = ModelParams(alpha=40.0, beta=2.0)
    signal = elliptic_signal(np.full(101, 3.0), 0.3, params, 0.05)
    np.testing.assert_allclose(signal, 2.0 * 3.0 / 40.0, rtol=1e-12)


def test_elliptic_signal_is_linear(rng):
    params = ModelParams()
    rho = rng.uniform(0.0, 1.0, 201)
    for advection in ('centered', 'upwind'):
        single = elliptic_signal(rho, 0.2, params, 0.02, advection)
        double = elliptic_signal(2.0 * rho, 0.2, params, 0.02, advection)
        np.testing.assert_allclose(double, 2.0 * single, rtol=1e-12)


def test_elliptic_signal_point_source():
    params = ModelParams(d_m=0.5, alpha=2.0)
    dz = 0.01
    rho = np.zeros(2001)
    rho[1000] = 1.0 / dz
    signal = elliptic_signal(rho, 0.0, params, dz)
    np.testing.assert_allclose(signal, signal[::-1], rtol=1e-8, atol=1e-12 * signal.max())
    assert int(np.argmax(signal)) == 1000
    slope = (np.log(signal[1301]) - np.log(signal[1299])) / (2.0 * dz)
    assert -slope == pytest.approx(np.sqrt(params.alpha / params.d_m), rel=0.02)


def test_elliptic_signal_options():
    with pytest.raises(InvalidParameterError):
        elliptic_signal(np.ones(10), 0.1, ModelParams(alpha=0.0), 0.1)
    with pytest.raises(InvalidParameterError):
        elliptic_signal(np.ones(10), 0.1, ModelParams(), 0.1, advection='spectral')


def test_stationary_nutrient_without_cells():
    params = ModelParams(d_n=1.0, n_bar=2.0)
    z = np.linspace(-5.0, 5.0, 1001)
    dz = z[1] - z[0]
    n = stationary_nutrient(np.zeros_like(z), 0.0, params, dz)
    np.testing.assert_allclose(n, 2.0 * (z + 5.0) / 10.0, atol=1e-9)


def test_stationary_nutrient_advected():
    params = ModelParams(d_n=1.0, n_bar=1.0)
    c, half = 0.5, 5.0
    z = np.linspace(-half, half, 1001)
    dz = z[1] - z[0]
    n = stationary_nutrient(np.zeros_like(z), c, params, dz)
    exact = (np.exp(-c * z) - np.exp(c * half)) / (np.exp(-c * half) - np.exp(c * half))
    np.testing.assert_allclose(n, exact, atol=1e-4)


def test_stationary_nutrient_is_monotone(rng):
    rho = rng.uniform(0.0, 3.0, 401)
    n = stationary_nutrient(rho, 0.4, ModelParams(), 0.025)
    assert np.all(np.diff(n) >= -1e-10)
    assert n[0] == 0.0 and n[-1] == 1.0


def test_stationary_nutrient_rejects_bad_input():
    with pytest.raises(ProfileError):
        stationary_nutrient(np.ones(20), -0.1, ModelParams(), 0.1)
    rho = np.ones(20)
    rho[3] = -1.0
    with pytest.raises(ProfileError):
        stationary_nutrient(rho, 0.1, ModelParams(), 0.1)


def test_upsilon_scales_with_mass():
    grid = two_speed_grid(0.5)
    one = upsilon(0.3, grid, ModelParams(), half_width=15.0, dz=0.02)
    many = upsilon(0.3, grid, ModelParams(), half_width=15.0, dz=0.02, mass=17.0)
    assert many == pytest.approx(17.0 * one, rel=1e-8)


def test_find_wave_speeds_needs_enough_points():
    with pytest.raises(InvalidParameterError):
        find_wave_speeds(two_speed_grid(0.5), ModelParams(), scan_points=20)


# ============================================================================
# Initial data
# ============================================================================

def test_wave_initial_data():
    grid = two_speed_grid(0.5)
    params = ModelParams()
    state, fields, profile = wave_initial_data(
        0.3, grid, params, 0.0, 150.0, 0.05, peak_position=60.0, dt=0.045, mass=2.0, dz=0.01
    )
    assert state.num_cells == 3000
    assert state.mass == pytest.approx(2.0, rel=1e-12)
    assert state.min_entry >= 0.0
    assert abs(state.cell_centers[int(np.argmax(state.rho))] - 60.0) <= 0.1
    assert fields.m_now.shape == (3001,)
    assert fields.n_now[-1] == params.n_bar
    assert fields.n_prev[-1] == params.n_bar
    assert fields.dt_used == 0.045
    # The previous signal level is the current one shifted back by c dt
    peak_now = int(np.argmax(fields.m_now))
    peak_prev = int(np.argmax(fields.m_prev))
    assert peak_prev <= peak_now
    assert profile.signal is not None and profile.nutrient is not None


def test_wave_initial_data_on_nodes():
    state, fields, _ = wave_initial_data(
        0.3, two_speed_grid(0.5), ModelParams(), 0.0, 150.0, 0.05,
        peak_position=60.0, dt=0.045, field_location='nodes', dz=0.01
    )
    assert fields.m_now.shape == (state.num_cells,)


def test_wave_initial_data_needs_room():
    with pytest.raises(DomainTooSmallError):
        wave_initial_data(0.3, two_speed_grid(0.5), ModelParams(), 0.0, 20.0, 0.05,
                          peak_position=10.0, dt=0.045, dz=0.01)


def test_gauss_grid_profile_runs():
    profile = stationary_profile(0.2, gauss_legendre(3), ModelParams(), half_width=15.0, dz=0.02)
    assert profile.mass == pytest.approx(1.0, abs=1e-10)
