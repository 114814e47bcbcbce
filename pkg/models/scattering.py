"""Data models for interface scattering matrices."""

from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class InterfaceRates:
    """Tumbling rates T(v_k) at one interface, in ascending node order."""

    values: np.ndarray

    def __post_init__(self):
        """Validate rates."""
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("Interface rates must be a 1-D array")
        if np.any(~np.isfinite(values)) or np.any(values <= 0.0):
            raise ValueError("Interface rates must be finite and positive")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def key(self) -> Tuple[float, ...]:
        """Hashable pattern used for caching."""
        return tuple(self.values.tolist())

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class SecularRoots:
    """The 2K-1 roots of the secular function, sorted ascending."""

    roots: np.ndarray
    poles: np.ndarray
    lambda0_index: int
    degenerate: bool

    @property
    def lambda0(self) -> float:
        """The root bracketed by the largest negative and smallest positive pole."""
        return float(self.roots[self.lambda0_index])


@dataclass(frozen=True, eq=False)
class SMatrix:
    """Interface scattering matrix in stacked (positive; negative) ordering."""

    matrix: np.ndarray
    variant: str
    dx: float

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SMatrixDiagnostics:
    """Quality figures of one S-matrix."""

    condition_number: float
    min_entry: float
    stochastic_defect: float

    @property
    def is_nonnegative(self) -> bool:
        return self.min_entry >= 0.0

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'condition_number': self.condition_number,
            'min_entry': self.min_entry,
            'stochastic_defect': self.stochastic_defect,
        }
