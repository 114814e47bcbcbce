"""Kinetic density and chemical field containers."""

from dataclasses import dataclass
from typing import Literal

import numpy as np

from models.velocity_grid import VelocityGrid


@dataclass(eq=False)
class KineticState:
    """Cell averages f[j, k] of the kinetic density on a uniform grid.

    Cell j covers [x0 + j*dx, x0 + (j+1)*dx]; k runs over ascending nodes.
    """

    f: np.ndarray
    grid: VelocityGrid
    dx: float
    x0: float = 0.0

    def __post_init__(self):
        """Validate the state."""
        self.f = np.asarray(self.f, dtype=float)
        if self.f.ndim != 2 or self.f.shape[1] != self.grid.size:
            raise ValueError(f"f must have shape (num_cells, {self.grid.size})")
        if self.f.shape[0] < 2:
            raise ValueError("At least two cells are required")
        if self.dx <= 0.0:
            raise ValueError("dx must be positive")

    @property
    def num_cells(self) -> int:
        return self.f.shape[0]

    @property
    def length(self) -> float:
        return self.num_cells * self.dx

    @property
    def cell_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.num_cells) + 0.5) * self.dx

    @property
    def interfaces(self) -> np.ndarray:
        """All cell faces including both walls."""
        return self.x0 + np.arange(self.num_cells + 1) * self.dx

    @property
    def rho(self) -> np.ndarray:
        """Macroscopic density per cell."""
        return self.f @ self.grid.weights

    @property
    def flux(self) -> np.ndarray:
        """Macroscopic flux per cell."""
        return self.f @ (self.grid.weights * self.grid.nodes)

    @property
    def mass(self) -> float:
        return float(self.rho.sum() * self.dx)

    @property
    def min_entry(self) -> float:
        return float(self.f.min())

    def with_density(self, f: np.ndarray) -> 'KineticState':
        """Same geometry, new density."""
        return KineticState(f, self.grid, self.dx, self.x0)


FieldLocation = Literal['interfaces', 'nodes']


@dataclass(eq=False)
class FieldState:
    """A chemical field sampled on the parabolic grid.

    ``interfaces``: kinetic cell faces, walls included (first and last points
    lie on the walls). ``nodes``: kinetic cell centers.
    """

    values: np.ndarray
    location: FieldLocation = 'interfaces'

    def __post_init__(self):
        """Validate the field."""
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 3:
            raise ValueError("A field needs at least three points")
        if self.location not in ('interfaces', 'nodes'):
            raise ValueError(f"Unknown field location: {self.location}")

    def __len__(self) -> int:
        return self.values.size

    def replaced(self, values: np.ndarray) -> 'FieldState':
        """Same location, new values."""
        return FieldState(values, self.location)

    def to_cell_centers(self) -> np.ndarray:
        """Values at kinetic cell centers."""
        if self.location == 'nodes':
            return self.values.copy()
        return 0.5 * (self.values[1:] + self.values[:-1])
