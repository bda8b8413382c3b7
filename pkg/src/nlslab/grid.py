"""Periodic-box geometry, wavenumber lattice, and field containers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridSpec:
    """Uniform periodic grid on the centered box [-L/2, L/2)^dim.

    Wavenumbers follow the FFT convention k_j = 2*pi*m_j/L with integer
    frequencies m_j in [-n/2, n/2); the single m_j = -n/2 entry per axis
    is the unpaired Nyquist mode.  All spatial integrals use the flat
    quadrature weight dx^dim, which is spectrally accurate on periodic data.
    """

    def __init__(self, n: int, L: float, dim: int = 3):
        if dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2, or 3, got {dim}")
        if n < 4 or n % 2 != 0:
            raise ValueError(f"n must be even and >= 4, got {n}")
        if L <= 0:
            raise ValueError(f"L must be positive, got {L}")
        self.dim = dim
        self.n = int(n)
        self.L = float(L)
        self.dx = self.L / self.n
        self.shape = (self.n,) * dim
        self.cell_volume = self.dx**dim
        self.volume = self.L**dim

        self.axis_wavenumbers = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        kmesh = np.meshgrid(*([self.axis_wavenumbers] * dim), indexing="ij")
        self.k = np.stack(kmesh)
        self.k_sq = sum(c**2 for c in kmesh)
        self.k_mag = np.sqrt(self.k_sq)
        self.k_max = float(self.k_mag.max())

        self.axis_coords = -self.L / 2 + self.dx * np.arange(self.n)
        self.x = np.stack(np.meshgrid(*([self.axis_coords] * dim), indexing="ij"))

    def displacement(self, y) -> tuple[np.ndarray, np.ndarray]:
        """Plain (non-wrapped) displacement field x - y and its magnitude.

        y must lie inside the box; Morawetz diagnostics use these with the
        convention that the singular point x = y is handled by the caller.
        """
        y = np.asarray(y, dtype=float).reshape(self.dim)
        if np.any(np.abs(y) > self.L / 2):
            raise ValueError(f"center {y} lies outside the box [-L/2, L/2)^dim")
        r = self.x - y.reshape((self.dim,) + (1,) * self.dim)
        return r, np.sqrt(np.sum(r**2, axis=0))

    def nearest_node(self, y) -> tuple[int, ...]:
        y = np.asarray(y, dtype=float).reshape(self.dim)
        idx = np.rint((y - self.axis_coords[0]) / self.dx).astype(int) % self.n
        return tuple(int(i) for i in idx)

    def __eq__(self, other):
        return (
            isinstance(other, GridSpec)
            and self.dim == other.dim
            and self.n == other.n
            and self.L == other.L
        )

    def __repr__(self):
        return f"GridSpec(n={self.n}, L={self.L}, dim={self.dim})"


@dataclass
class FieldState:
    """A complex field sample u(., t) on a GridSpec."""

    values: np.ndarray
    t: float
    grid: GridSpec

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values.view(np.float64))):
            raise ValueError("field contains non-finite entries")

    def copy(self) -> "FieldState":
        return FieldState(self.values.copy(), self.t, self.grid)

    def with_values(self, values: np.ndarray, t: float | None = None) -> "FieldState":
        return FieldState(values, self.t if t is None else t, self.grid)


@dataclass(frozen=True)
class SobolevSpec:
    """Regularity exponent and homogeneous/inhomogeneous flag for H^s norms.

    Homogeneous norms weight by |k|^s and drop the k=0 mode (on a box the
    mean is tracked separately by the mass); inhomogeneous norms weight by
    <k>^s = (1+|k|^2)^(s/2).
    """

    s: float
    homogeneous: bool = False

    def __post_init__(self):
        if not np.isfinite(self.s):
            raise ValueError("s must be finite")
