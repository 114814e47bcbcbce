"""Velocity grid data model."""

from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np


@dataclass(frozen=True, eq=False)
class VelocityGrid:
    """Symmetric discrete velocity set with quadrature weights.

    Nodes are stored in ascending order. Node ``K-1-i`` is the mirror image of
    node ``K+i``, so ``nodes[negative_index] == -nodes[positive_index]``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "explicit"
    normalized: bool = True
    half_count: int = field(init=False)

    def __post_init__(self):
        """Validate grid data."""
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)

        if nodes.ndim != 1 or nodes.size == 0 or nodes.size % 2:
            raise ValueError("Velocity grid needs an even, non-zero number of nodes")
        if weights.shape != nodes.shape:
            raise ValueError("Weights must match nodes in length")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("Nodes must be strictly increasing")
        if np.any(np.abs(nodes) > 1.0) or np.any(nodes == 0.0):
            raise ValueError("Nodes must be non-zero and lie in [-1, 1]")
        if not np.array_equal(nodes, -nodes[::-1]):
            raise ValueError("Nodes must be symmetric about zero")
        if not np.array_equal(weights, weights[::-1]):
            raise ValueError("Weights must be symmetric")
        if np.any(weights <= 0.0):
            raise ValueError("Weights must be positive")
        if self.normalized and abs(weights.sum() - 1.0) > 1e-14:
            raise ValueError(f"Normalized weights must sum to 1, got {weights.sum():.17g}")

        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'half_count', nodes.size // 2)

    @property
    def size(self) -> int:
        """Number of velocities (2K)."""
        return self.nodes.size

    @property
    def positive_index(self) -> np.ndarray:
        """Indices of v_1 < ... < v_K (positive half, ascending)."""
        return np.arange(self.half_count, self.size)

    @property
    def negative_index(self) -> np.ndarray:
        """Indices of -v_1, ..., -v_K (mirror of ``positive_index``)."""
        return np.arange(self.half_count - 1, -1, -1)

    @property
    def stacked_index(self) -> np.ndarray:
        """Node indices in S-matrix order: positive half, then mirrored negatives."""
        return np.concatenate([self.positive_index, self.negative_index])

    @property
    def speeds(self) -> np.ndarray:
        """Positive speeds v_1 < ... < v_K."""
        return self.nodes[self.positive_index]

    @property
    def min_speed(self) -> float:
        """Smallest speed |v|."""
        return float(self.speeds[0])

    @property
    def max_speed(self) -> float:
        """Largest speed |v|."""
        return float(self.speeds[-1])

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'kind': self.kind,
            'half_count': self.half_count,
            'normalized': self.normalized,
            'nodes': self.nodes.tolist(),
            'weights': self.weights.tolist(),
        }

    def __str__(self) -> str:
        """String representation of the grid."""
        return f"VelocityGrid({self.kind}, K={self.half_count}, vmin={self.min_speed:.4g})"
