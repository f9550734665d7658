"""Periodic spatial grids and the semiclassical momentum lattice.

All fields live on a torus [-L_a/2, L_a/2) per axis with a power-of-two
number of points, so every transform is a plain FFT.  The momentum lattice
conjugate to the semiclassical transform is p_k = 2*pi*hbar*k/L_a.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError


def _is_pow2(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: per-axis extent `box` and point count `npts`."""

    box: tuple[float, ...]
    npts: tuple[int, ...]

    def __post_init__(self):
        if len(self.box) != len(self.npts):
            raise DomainError("box and npts must have the same length")
        if not 1 <= self.dim <= 3:
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim}")
        if any(L <= 0 for L in self.box):
            raise DomainError("box extents must be positive")
        if any(not _is_pow2(n) for n in self.npts):
            raise DomainError("grid points per axis must be a power of two")

    @classmethod
    def cubic(cls, dim: int, length: float, n: int) -> "Grid":
        return cls(box=(float(length),) * dim, npts=(int(n),) * dim)

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.box, self.npts))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.box))

    @property
    def size(self) -> int:
        return int(np.prod(self.npts))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """Per-axis coordinates x_j = -L/2 + j*dx."""
        return tuple(
            -L / 2 + np.arange(n) * (L / n) for L, n in zip(self.box, self.npts)
        )

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes, indexing="ij", sparse=True))

    def momentum_axes(self, hbar: float) -> tuple[np.ndarray, ...]:
        """FFT-ordered lattice p_k = 2*pi*hbar*k/L per axis."""
        return tuple(
            2 * np.pi * hbar * np.fft.fftfreq(n, d=L / n)
            for L, n in zip(self.box, self.npts)
        )

    def momentum_mesh(self, hbar: float) -> tuple[np.ndarray, ...]:
        return tuple(
            np.meshgrid(*self.momentum_axes(hbar), indexing="ij", sparse=True)
        )

    def nyquist_momentum(self, hbar: float) -> float:
        """Largest |p| representable per axis, pi*hbar*N/L."""
        return max(np.pi * hbar * n / L for L, n in zip(self.box, self.npts))

    def l2_norm(self, field: np.ndarray) -> float:
        """sqrt of the grid quadrature of |field|^2."""
        return float(np.sqrt(np.sum(np.abs(field) ** 2) * self.cell_volume))

    def boundary_mass(self, field: np.ndarray, cells: int = 2) -> float:
        """Fraction of |field|^2 mass within `cells` grid cells of any wrap edge."""
        total = np.sum(np.abs(field) ** 2)
        if total == 0:
            return 0.0
        interior = field
        for ax in range(self.dim):
            sl = [slice(None)] * self.dim
            sl[ax] = slice(cells, self.npts[ax] - cells)
            interior = interior[tuple(sl)]
        inner = np.sum(np.abs(interior) ** 2)
        return float((total - inner) / total)
