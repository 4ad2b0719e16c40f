"""Uniform staggered mesh on [0, 1] and its discrete calculus.

Density lives at the ``n`` cell centres, velocity at the ``n + 1`` faces.
Fields are plain numpy arrays; their role is inferred from their length:

* ``n``      cell field (midpoint quadrature)
* ``n + 1``  face field (trapezoidal quadrature, the end faces get half weight)
* ``n - 1``  interior-face field, e.g. a density gradient (weight ``dx`` each)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4:
            raise ValueError(f"grid needs an integer cell count n >= 4, got {self.n!r}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    @cached_property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) / self.n

    @cached_property
    def faces(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    @cached_property
    def interior_faces(self) -> np.ndarray:
        return self.faces[1:-1]

    def _weights(self, m):
        if m == self.n or m == self.n - 1:
            return None
        if m == self.n + 1:
            w = np.ones(m)
            w[0] = w[-1] = 0.5
            return w
        raise ValueError(
            f"field of length {m} does not live on a grid with n={self.n} "
            f"(expected {self.n - 1}, {self.n} or {self.n + 1})"
        )


def _check_len(field, m, grid, what):
    field = np.asarray(field, dtype=float)
    if field.shape != (m,):
        raise ValueError(f"{what}: expected {m} samples on n={grid.n}, got shape {field.shape}")
    return field


def integrate(field, grid: Grid) -> float:
    """Midpoint rule for a cell field."""
    field = _check_len(field, grid.n, grid, "integrate")
    return float(grid.dx * np.sum(field))


def lp_norm(field, p, grid: Grid) -> float:
    """Discrete L^p norm, ``p`` in [1, inf]."""
    if not p >= 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p!r}")
    v = np.abs(np.asarray(field, dtype=float))
    w = grid._weights(v.size)
    if np.isinf(p):
        return float(np.max(v)) if v.size else 0.0
    s = np.sum(v**p) if w is None else np.sum(w * v**p)
    return float((grid.dx * s) ** (1.0 / p))


def face_gradient(u, grid: Grid) -> np.ndarray:
    """u_x at cell centres from a face field."""
    u = _check_len(u, grid.n + 1, grid, "face_gradient")
    return np.diff(u) / grid.dx


def cell_gradient(rho, grid: Grid) -> np.ndarray:
    """rho_x at the interior faces (boundary faces carry no information)."""
    rho = _check_len(rho, grid.n, grid, "cell_gradient")
    return np.diff(rho) / grid.dx


def w1p_norm(u, p, grid: Grid) -> float:
    """||u||_{L^p} + ||u_x||_{L^p} for a face field."""
    return lp_norm(u, p, grid) + lp_norm(face_gradient(u, grid), p, grid)
