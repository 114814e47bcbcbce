"""Model parameters and chemical field history."""

from dataclasses import dataclass, asdict, replace
from typing import Any, Dict

import numpy as np

from utils.error_handler import InputValidator


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the coupled kinetic-parabolic model.

    Defaults are the parameter set of the two-speed bistability study.
    """

    chi_m: float = 0.48
    chi_n: float = 0.44
    d_m: float = 0.5
    d_n: float = 1.0
    alpha: float = 40.0
    beta: float = 1.0
    gamma: float = 1.0
    n_bar: float = 1.0

    def __post_init__(self):
        """Validate parameter ranges."""
        InputValidator.validate_sensitivities(self.chi_m, self.chi_n)
        InputValidator.validate_positive(self.d_m, 'd_m')
        InputValidator.validate_positive(self.d_n, 'd_n')
        InputValidator.validate_non_negative(self.alpha, 'alpha')
        InputValidator.validate_non_negative(self.beta, 'beta')
        InputValidator.validate_non_negative(self.gamma, 'gamma')
        InputValidator.validate_positive(self.n_bar, 'n_bar')

    @property
    def chi_total(self) -> float:
        """Sum of both sensitivities."""
        return self.chi_m + self.chi_n

    def with_updates(self, **changes) -> 'ModelParams':
        """Return a copy with some parameters replaced."""
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return asdict(self)


@dataclass
class ChemFields:
    """Signal and nutrient at the current and previous time level.

    ``dt_used`` is the time step that separates the two levels.
    """

    m_now: np.ndarray
    m_prev: np.ndarray
    n_now: np.ndarray
    n_prev: np.ndarray
    dt_used: float

    def __post_init__(self):
        """Validate field shapes."""
        shape = np.shape(self.m_now)
        for name in ('m_prev', 'n_now', 'n_prev'):
            if np.shape(getattr(self, name)) != shape:
                raise ValueError(f"{name} must have shape {shape}")
        if self.dt_used <= 0.0:
            raise ValueError("dt_used must be positive")

    @classmethod
    def at_rest(cls, m: np.ndarray, n: np.ndarray, dt: float) -> 'ChemFields':
        """Fields with no history (previous level equal to current)."""
        m = np.asarray(m, dtype=float)
        n = np.asarray(n, dtype=float)
        return cls(m.copy(), m.copy(), n.copy(), n.copy(), dt)

    def advance(self, m_new: np.ndarray, n_new: np.ndarray, dt: float) -> 'ChemFields':
        """Shift the history by one step."""
        return ChemFields(m_new, self.m_now, n_new, self.n_now, dt)
