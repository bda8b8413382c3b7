"""Built-in initial data family: periodized (chirped) Gaussians, two-bump
collisions, plane waves, and seeded band-limited random fields."""

from __future__ import annotations

import numpy as np

from .grid import FieldState, GridSpec


def _image_offsets(dim: int, images: int) -> np.ndarray:
    rng = np.arange(-images, images + 1)
    mesh = np.meshgrid(*([rng] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def free_gaussian(
    grid: GridSpec,
    t: float = 0.0,
    amplitude: float = 1.0,
    width: float = 1.0,
    chirp: float = 0.0,
    center=None,
    alpha: float = 1.0,
    velocity=None,
    images: int = 1,
) -> FieldState:
    """Closed-form free evolution of a periodized chirped Gaussian.

    The t=0 profile per image is A exp(-|x-c|^2/(2 w^2)) exp(i chirp |x-c|^2),
    i.e. a complex-width Gaussian q0 = 1/w^2 - 2i*chirp, and the free flow of
    i u_t + alpha Lap u = 0 maps q0 -> q0/(1 + 2i alpha q0 t) with the matching
    amplitude factor.  An optional velocity kick multiplies by e^{i v.x} at
    t=0 and translates the image centers by 2 alpha v t.  The box proxy for
    the whole space sums over (2*images+1)^dim lattice images; one layer is
    ample for widths resolved by the box.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    if center is None:
        center = np.zeros(grid.dim)
    center = np.asarray(center, dtype=float).reshape(grid.dim)

    q0 = 1.0 / width**2 - 2j * chirp
    denom = 1.0 + 2j * alpha * q0 * t
    q = q0 / denom
    pref = amplitude * denom ** (-grid.dim / 2.0)

    if velocity is not None:
        v = np.asarray(velocity, dtype=float).reshape(grid.dim)
    else:
        v = np.zeros(grid.dim)
    drift = 2.0 * alpha * v * t
    vphase = np.tensordot(v, grid.x, axes=(0, 0))

    out = np.zeros(grid.shape, dtype=np.complex128)
    for off in _image_offsets(grid.dim, images):
        c = center + drift + grid.L * off
        r2 = np.zeros(grid.shape)
        for j in range(grid.dim):
            r2 += (grid.x[j] - c[j]) ** 2
        out += pref * np.exp(-q * r2 / 2.0)
    if velocity is not None:
        out *= np.exp(1j * (vphase - alpha * np.dot(v, v) * t))
    return FieldState(out, t, grid)


def gaussian(
    grid: GridSpec,
    amplitude: float = 1.0,
    width: float = 1.0,
    chirp: float = 0.0,
    center=None,
    velocity=None,
    images: int = 1,
) -> FieldState:
    """Periodized (optionally chirped, boosted) Gaussian at t = 0."""
    return free_gaussian(
        grid,
        t=0.0,
        amplitude=amplitude,
        width=width,
        chirp=chirp,
        center=center,
        velocity=velocity,
        images=images,
    )


def two_bump(
    grid: GridSpec,
    amplitude: float = 1.0,
    width: float = 1.0,
    separation: float = 3.0,
    kick: float = 1.0,
    images: int = 1,
) -> FieldState:
    """Two Gaussians straddling the origin along axis 0 with opposing
    velocity kicks, so they collide under the linear flow."""
    offset = np.zeros(grid.dim)
    offset[0] = separation / 2.0
    vel = np.zeros(grid.dim)
    vel[0] = kick
    left = free_gaussian(
        grid, amplitude=amplitude, width=width, center=-offset, velocity=vel, images=images
    )
    right = free_gaussian(
        grid, amplitude=amplitude, width=width, center=offset, velocity=-vel, images=images
    )
    return FieldState(left.values + right.values, 0.0, grid)


def plane_wave(grid: GridSpec, amplitude: complex = 1.0, mode=None) -> FieldState:
    """A exp(i k.x) with k = 2*pi*mode/L on the lattice (exact eigenfunction)."""
    if mode is None:
        mode = [1] + [0] * (grid.dim - 1)
    mode = np.asarray(mode, dtype=int).reshape(grid.dim)
    if np.any(np.abs(mode) > grid.n // 2):
        raise ValueError(f"mode {mode} exceeds the lattice")
    k = 2.0 * np.pi * mode / grid.L
    phase = np.tensordot(k, grid.x, axes=(0, 0))
    return FieldState(amplitude * np.exp(1j * phase), 0.0, grid)


def random_band_limited(
    grid: GridSpec,
    kmax: float,
    seed: int = 0,
    amplitude: float = 1.0,
    spectral_decay: float = 0.0,
) -> FieldState:
    """Seeded complex Gaussian spectrum supported on |k| <= kmax.

    spectral_decay > 0 shapes the modulus like <k>^-decay, which produces
    rough data marginally in H^(decay - dim/2); decay 0 gives a flat band.
    The result is normalized to the requested L-infinity amplitude.
    """
    rng = np.random.default_rng(seed)
    coeff = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    keep = grid.k_mag <= kmax
    coeff[~keep] = 0.0
    if spectral_decay > 0:
        coeff *= (1.0 + grid.k_sq) ** (-spectral_decay / 2.0)
    values = np.fft.ifftn(coeff)
    peak = np.abs(values).max()
    if peak > 0:
        values *= amplitude / peak
    return FieldState(values, 0.0, grid)
