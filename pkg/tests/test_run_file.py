"""Tests for YAML run files and run settings echoed into result headers."""
from dataclasses import replace

import numpy as np
import pytest

from config.run_file import load_run_file, parse_run_file
from data.presets import two_speed_grid
from models.model_params import ModelParams
from models.simulation import Diagnostics, InitialCondition, SimConfig
from services.export_service import ExportService
from services.quadrature import explicit_symmetric, gauss_legendre
from utils.error_handler import InvalidInputError, InvalidParameterError

FULL = """
grid:
  kind: explicit
  speeds: [0.5, 1.0]
params:
  chi_m: 0.3
  chi_n: 0.2
schemes:
  kinetic: ts
  parabolic: ts
  material_derivative: md1
  parabolic_substeps: "4"
domain:
  x_left: 0.0
  x_right: 10.0
  dx: 0.05
time:
  t_end: 5.0
  dt: 0.02
  snapshot_times: [1.0, 5.0]
initial:
  kind: profile
  amplitude: 3.0
  x_rate: 2.0
  nutrient: tanh_ramp
output:
  label: example
"""

MINIMAL = """
domain: {x_left: -1.0, x_right: 1.0, dx: 0.1}
time: {t_end: 1.0}
"""


def test_full_run_file():
    sim_config = parse_run_file(FULL).to_sim_config()
    assert sim_config.grid.kind == 'explicit'
    assert list(sim_config.grid.nodes) == [-1.0, -0.5, 0.5, 1.0]
    assert sim_config.params.chi_m == 0.3
    assert sim_config.kinetic_scheme == 'ts'
    assert sim_config.md_variant == 'md1'
    assert sim_config.parabolic_substeps == 4
    assert sim_config.dt == 0.02
    assert sim_config.num_cells == 200
    assert sim_config.snapshot_times == [1.0, 5.0]
    assert sim_config.initial.nutrient == 'tanh_ramp'
    assert sim_config.label == 'example'


def test_minimal_run_file_uses_settings():
    sim_config = parse_run_file(MINIMAL).to_sim_config()
    assert sim_config.grid.kind == 'gauss'
    assert sim_config.grid.half_count == 8
    assert sim_config.dt is None
    assert sim_config.parabolic_substeps is None
    assert sim_config.kinetic_scheme == 'wb'
    assert sim_config.smatrix_variant == 'case'


@pytest.mark.parametrize("text", [
    MINIMAL + "extra: 1\n",
    MINIMAL + "params: {chi_x: 0.1}\n",
    "grid: {kind: explicit}\n" + MINIMAL,
    "domain: {x_left: 0.0, x_right: 1.0}\ntime: {t_end: 1.0}\n",
    "time: {t_end: 1.0}\n",
    "domain: [1, 2\n",
    "- just a list\n",
    MINIMAL + "schemes: {kinetic: spectral}\n",
])
def test_invalid_run_files(text):
    with pytest.raises(InvalidInputError):
        parse_run_file(text)


def test_inconsistent_values_detected_on_build():
    run_file = parse_run_file("domain: {x_left: 0.0, x_right: 1.0, dx: 0.3}\ntime: {t_end: 1.0}\n")
    with pytest.raises(InvalidInputError):
        run_file.to_sim_config()


def test_sensitivities_validated_on_build():
    run_file = parse_run_file(MINIMAL + "params: {chi_m: 0.6, chi_n: 0.5}\n")
    with pytest.raises(InvalidParameterError):
        run_file.to_sim_config()


def test_load_run_file(tmp_path):
    path = tmp_path / 'run.yaml'
    path.write_text(FULL)
    assert load_run_file(path).output.label == 'example'
    with pytest.raises(InvalidInputError):
        load_run_file(tmp_path / 'absent.yaml')


# ============================================================================
# Result headers
# ============================================================================

def echo_config(**changes):
    base = SimConfig(
        grid=two_speed_grid(0.3),
        params=ModelParams(chi_m=0.3, chi_n=0.2, alpha=20.0),
        x_left=0.0,
        x_right=180.0,
        dx=0.05,
        t_end=60.0,
        kinetic_scheme='ts',
        smatrix_variant='fd',
        parabolic_scheme='ts',
        md_variant='md1',
        dt=1e-3,
        cfl_safety=0.7,
        parabolic_substeps=3,
        rho_after_kinetic=True,
        output_every=7,
        snapshot_times=[30.0, 60.0],
        initial=InitialCondition(kind='travelling_wave', wave_speed=0.214, peak_position=70.0, wave_mass=2.5),
        frozen_rate_center=90.0,
        steady_tol=1e-10,
        label='echo',
    )
    return replace(base, **changes)


@pytest.mark.parametrize("changes", [
    {},
    {'grid': gauss_legendre(3), 'dt': None, 'parabolic_substeps': None,
     'frozen_rate_center': None, 'steady_tol': None, 'snapshot_times': []},
    {'grid': explicit_symmetric([0.2, 0.7, 1.0], [0.5, 0.3, 0.2])},
])
def test_result_header_rebuilds_the_run(tmp_path, changes):
    original = echo_config(**changes)
    diagnostics = Diagnostics(label=original.label)
    diagnostics.add_record(time=0.0, mass=1.0, speed=0.0, peak_x=70.0, peak_rho=1.0, sym_err=0.0, min_f=0.0)
    path = ExportService(tmp_path).export_run(diagnostics, original)[0]

    rebuilt = load_run_file(path).to_sim_config()

    np.testing.assert_array_equal(rebuilt.grid.nodes, original.grid.nodes)
    np.testing.assert_allclose(rebuilt.grid.weights, original.grid.weights, rtol=1e-15)
    assert rebuilt.grid.kind == original.grid.kind
    expected, actual = original.to_dict(), rebuilt.to_dict()
    expected['grid'].pop('weights')
    actual['grid'].pop('weights')
    assert actual == expected


def test_bifurcation_grid_keeps_its_smallest_speed(tmp_path):
    original = echo_config(grid=two_speed_grid(0.45))
    path = ExportService(tmp_path).export_run(Diagnostics(label='echo'), original)[1]
    assert load_run_file(path).to_sim_config().grid.min_speed == 0.45


def test_header_without_run_settings(tmp_path):
    path = ExportService(tmp_path).export_table([{'a': 1}], 'table.csv', {'scenario': 'test'})
    with pytest.raises(InvalidInputError, match='no run settings'):
        load_run_file(path)
