"""
Run files for the ``run`` command.

A run file is YAML with the sections grid, params, schemes, domain, time,
initial and output. Only the domain and t_end are required; unknown keys are
rejected.
"""
from pathlib import Path
from typing import List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.settings import config
from models.model_params import ModelParams
from models.simulation import InitialCondition, SimConfig
from models.velocity_grid import VelocityGrid
from services.quadrature import explicit_symmetric, gauss_legendre
from utils.error_handler import ChemowaveError, InvalidInputError

RUN_SECTIONS = ('grid', 'params', 'schemes', 'domain', 'time', 'initial', 'output')


class _Section(BaseModel):
    model_config = ConfigDict(extra='forbid')


class GridSection(_Section):
    kind: Literal['gauss', 'explicit'] = Field(default_factory=lambda: config.quadrature.kind)
    half_count: int = Field(default_factory=lambda: config.quadrature.half_count, ge=1)
    speeds: Optional[List[float]] = None
    weights: Union[Literal['uniform'], List[float]] = 'uniform'
    normalize: bool = Field(default_factory=lambda: config.quadrature.normalize_weights)

    @model_validator(mode='after')
    def _speeds_for_explicit(self):
        if self.kind == 'explicit' and not self.speeds:
            raise ValueError("an explicit grid needs 'speeds'")
        return self

    def build(self) -> VelocityGrid:
        if self.kind == 'gauss':
            return gauss_legendre(self.half_count)
        return explicit_symmetric(self.speeds, self.weights, normalize=self.normalize)


class ParamsSection(_Section):
    chi_m: float = 0.48
    chi_n: float = 0.44
    d_m: float = 0.5
    d_n: float = 1.0
    alpha: float = 40.0
    beta: float = 1.0
    gamma: float = 1.0
    n_bar: float = 1.0


class SchemesSection(_Section):
    kinetic: Literal['wb', 'ts'] = Field(default_factory=lambda: config.schemes.kinetic)
    smatrix: Literal['case', 'fd'] = Field(default_factory=lambda: config.schemes.smatrix)
    parabolic: Literal['wb', 'ts'] = Field(default_factory=lambda: config.schemes.parabolic)
    material_derivative: Literal['md1', 'md2'] = Field(default_factory=lambda: config.schemes.material_derivative)
    cfl_safety: float = Field(default_factory=lambda: config.schemes.cfl_safety, gt=0.0, le=1.0)
    parabolic_substeps: Union[Literal['auto'], int] = Field(default_factory=lambda: config.schemes.parabolic_substeps)
    rho_after_kinetic: bool = Field(default_factory=lambda: config.schemes.rho_after_kinetic)
    frozen_rate_center: Optional[float] = None

    @field_validator('parabolic_substeps', mode='before')
    @classmethod
    def _parse_substeps(cls, value):
        if isinstance(value, str) and value.strip().isdigit():
            return int(value)
        return value


class DomainSection(_Section):
    x_left: float
    x_right: float
    dx: float = Field(gt=0.0)


class TimeSection(_Section):
    t_end: float = Field(gt=0.0)
    dt: Union[Literal['auto'], float] = 'auto'
    steady_tol: Optional[float] = None
    output_every: int = Field(default_factory=lambda: config.output.output_every, ge=1)
    snapshot_times: List[float] = Field(default_factory=list)


class InitialSection(_Section):
    kind: Literal['profile', 'travelling_wave'] = 'profile'
    amplitude: float = 1.0
    x_center: float = 0.0
    x_rate: float = 1.0
    v_rate: float = 0.0
    signal_value: float = 0.0
    nutrient: Literal['constant', 'tanh_ramp'] = 'constant'
    nutrient_value: float = 1.0
    ramp_amplitude: float = 400.0
    ramp_scale: float = 3.0
    ramp_shift: float = 3.0
    wave_speed: Optional[float] = None
    peak_position: Optional[float] = None
    wave_mass: float = 1.0


class OutputSection(_Section):
    label: str = 'run'
    directory: Optional[str] = None


class RunFile(_Section):
    """Validated contents of a run file."""

    grid: GridSection = Field(default_factory=GridSection)
    params: ParamsSection = Field(default_factory=ParamsSection)
    schemes: SchemesSection = Field(default_factory=SchemesSection)
    domain: DomainSection
    time: TimeSection
    initial: InitialSection = Field(default_factory=InitialSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def to_sim_config(self) -> SimConfig:
        """
        Build the simulation configuration.

        Raises:
            InvalidInputError: If the values are inconsistent
        """
        try:
            substeps = self.schemes.parabolic_substeps
            return SimConfig(
                grid=self.grid.build(),
                params=ModelParams(**self.params.model_dump()),
                x_left=self.domain.x_left,
                x_right=self.domain.x_right,
                dx=self.domain.dx,
                t_end=self.time.t_end,
                kinetic_scheme=self.schemes.kinetic,
                smatrix_variant=self.schemes.smatrix,
                parabolic_scheme=self.schemes.parabolic,
                md_variant=self.schemes.material_derivative,
                dt=None if self.time.dt == 'auto' else self.time.dt,
                cfl_safety=self.schemes.cfl_safety,
                parabolic_substeps=None if substeps == 'auto' else substeps,
                rho_after_kinetic=self.schemes.rho_after_kinetic,
                output_every=self.time.output_every,
                snapshot_times=list(self.time.snapshot_times),
                initial=InitialCondition(**self.initial.model_dump()),
                frozen_rate_center=self.schemes.frozen_rate_center,
                steady_tol=self.time.steady_tol,
                label=self.output.label,
            )
        except ChemowaveError:
            raise
        except ValueError as e:
            raise InvalidInputError(f"Inconsistent run file: {e}", field='run_file') from e


def parse_run_file(text: str) -> RunFile:
    """
    Parse and validate YAML text.

    Raises:
        InvalidInputError: On YAML syntax errors, unknown keys or bad values
    """
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        raise InvalidInputError(f"Run file is not valid YAML: {e}", field='run_file') from e
    if not isinstance(data, dict):
        raise InvalidInputError("Run file must be a mapping of sections", field='run_file')
    return _validate(data)


def load_run_file(path: Union[str, Path]) -> RunFile:
    """Read and validate a run file from disk; a .csv result file is read through its header."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise InvalidInputError(f"Cannot read run file {path}: {e}", field='run_file') from e
    if path.suffix == '.csv':
        return parse_run_echo(text)
    return parse_run_file(text)


def parse_run_echo(text: str) -> RunFile:
    """
    Rebuild a run file from the ``# key: value`` header of a result file.

    Only keys under the run-file sections are read; the dotted keys are nested
    back into sections and each value is read as YAML.

    Raises:
        InvalidInputError: If the header holds no run settings or they are invalid
    """
    data = {}
    for line in text.splitlines():
        if not line.startswith('# '):
            break
        key, _, raw = line[2:].partition(': ')
        path = key.split('.')
        if path[0] not in RUN_SECTIONS or len(path) < 2:
            continue
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise InvalidInputError(f"Unreadable header value for {key}: {e}", field='run_file') from e
        section = data
        for name in path[:-1]:
            section = section.setdefault(name, {})
        section[path[-1]] = value

    if not data:
        raise InvalidInputError("Result header holds no run settings", field='run_file')
    return _validate(data)


def _validate(data: dict) -> RunFile:
    try:
        return RunFile.model_validate(data)
    except ValidationError as e:
        raise InvalidInputError(f"Invalid run file: {e}", field="run_file",
                                details={'errors': e.errors(include_url=False)}) from e
