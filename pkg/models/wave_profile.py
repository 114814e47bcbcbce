"""Data models for travelling-wave analysis."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np


@dataclass(frozen=True)
class QuadrantRates:
    """Piecewise-constant tumbling rates in the moving frame.

    Behind the wave (z < 0) both chemicals increase towards the front; ahead of
    it (z > 0) the signal decreases and the nutrient increases.
    """

    c: float
    chi_m: float
    chi_n: float

    def left(self, u: np.ndarray) -> np.ndarray:
        """Rates for z < 0 at shifted velocities u = v - c."""
        return 1.0 - (self.chi_m + self.chi_n) * np.sign(u)

    def right(self, u: np.ndarray) -> np.ndarray:
        """Rates for z > 0 at shifted velocities u = v - c."""
        return 1.0 + (self.chi_m - self.chi_n) * np.sign(u)


@dataclass(eq=False)
class WaveProfile:
    """Stationary kinetic profile in the moving frame z = x - c t."""

    c: float
    z: np.ndarray
    f: np.ndarray
    weights: np.ndarray
    lambda_minus: float
    lambda_plus: float
    signal: Optional[np.ndarray] = None
    nutrient: Optional[np.ndarray] = None

    @property
    def dz(self) -> float:
        return float(self.z[1] - self.z[0])

    @property
    def half_width(self) -> float:
        return float(self.z[-1])

    @property
    def center_index(self) -> int:
        return self.z.size // 2

    @property
    def rho(self) -> np.ndarray:
        return self.f @ self.weights

    @property
    def mass(self) -> float:
        """Mass as the plain sum rho*dz."""
        return float(self.rho.sum() * self.dz)

    def to_dict(self) -> Dict[str, Any]:
        """Scalar metadata."""
        return {
            'c': self.c,
            'lambda_minus': self.lambda_minus,
            'lambda_plus': self.lambda_plus,
            'half_width': self.half_width,
            'dz': self.dz,
        }


@dataclass
class WaveSpeedScan:
    """Result of scanning Upsilon(c) over the admissible speed window."""

    c_lower: float
    c_upper: float
    speeds: np.ndarray
    upsilon: np.ndarray
    roots: List[float] = field(default_factory=list)
    jumps: List[float] = field(default_factory=list)
    failed: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'c_lower': self.c_lower,
            'c_upper': self.c_upper,
            'roots': list(self.roots),
            'jumps': list(self.jumps),
            'failed': list(self.failed),
        }

    def __str__(self) -> str:
        roots = ", ".join(f"{c:.4f}" for c in self.roots) or "none"
        jumps = ", ".join(f"{c:.4f}" for c in self.jumps) or "none"
        return (
            f"Speed window ({self.c_lower:.4f}, {self.c_upper:.4f}) | "
            f"roots: {roots} | jumps: {jumps}"
        )
