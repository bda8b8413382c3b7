"""Mass current, Morawetz actions, the interaction potential via padded
FFT convolution, and numerical verification of the associated identities,
monotonicity, and spacetime L4 inequality."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import NLSParams, TrajectoryStore
from .grid import FieldState, GridSpec


@dataclass
class MassCurrent:
    """The L2-mass current p(x) = Im[conj(u) grad u] (one real array per axis)."""

    components: np.ndarray
    t: float


def _spectral_gradient(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    vhat = np.fft.fftn(values)
    return np.stack([np.fft.ifftn(1j * grid.k[j] * vhat) for j in range(grid.dim)])


def mass_current(field: FieldState) -> MassCurrent:
    grad = _spectral_gradient(field.values, field.grid)
    comps = np.imag(np.conj(field.values)[None, ...] * grad)
    return MassCurrent(components=comps, t=field.t)


def continuity_check(before: FieldState, after: FieldState, alpha: float) -> float:
    """Residual of d/dt |u|^2 = -2 alpha div p between two time-adjacent fields.

    Centered difference in t against the divergence of the averaged current;
    returns the L2 residual relative to the L2 size of d/dt |u|^2.
    """
    dt = after.t - before.t
    if dt <= 0:
        raise ValueError("fields must be time-ordered")
    grid = before.grid
    ddt = (np.abs(after.values) ** 2 - np.abs(before.values) ** 2) / dt
    p_mid = 0.5 * (mass_current(before).components + mass_current(after).components)
    div = np.zeros(grid.shape)
    for j in range(grid.dim):
        div += np.real(np.fft.ifftn(1j * grid.k[j] * np.fft.fftn(p_mid[j])))
    resid = ddt + 2.0 * alpha * div
    scale = np.sqrt(np.sum(ddt**2)) or 1.0
    return float(np.sqrt(np.sum(resid**2)) / scale)


def _unit_displacement(grid: GridSpec, y) -> tuple[np.ndarray, np.ndarray]:
    """(x-y)/|x-y| with the zero vector at x = y, and |x-y| alongside."""
    r, rmag = grid.displacement(y)
    safe = np.where(rmag == 0.0, 1.0, rmag)
    unit = r / safe
    unit[:, rmag == 0.0] = 0.0
    return unit, rmag


def angular_gradient(field: FieldState, y) -> np.ndarray:
    """Angular (about y) component of the gradient:
    grad u - rhat (rhat . grad u), with the projector set to 0 at x = y."""
    grid = field.grid
    grad = _spectral_gradient(field.values, grid)
    unit, _ = _unit_displacement(grid, y)
    radial = np.sum(unit * grad, axis=0)
    return grad - unit * radial[None, ...]


def morawetz_action(field: FieldState, y) -> float:
    """Spatial average of the radial-about-y component of the mass current."""
    grid = field.grid
    p = mass_current(field).components
    unit, _ = _unit_displacement(grid, y)
    return float(np.sum(p * unit) * grid.cell_volume)


class InteractionKernel:
    """Cached zero-padded transforms of the odd kernel K(z) = z/|z|.

    Padding to a doubled grid makes the FFT convolution linear (aperiodic),
    which matters because K is long range and periodic wraparound corrupts
    the interaction potential at the percent level.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        n2 = 2 * grid.n
        disp1 = np.fft.fftfreq(n2, d=1.0 / n2) * grid.dx
        mesh = np.meshgrid(*([disp1] * grid.dim), indexing="ij")
        rmag = np.sqrt(sum(c**2 for c in mesh))
        safe = np.where(rmag == 0.0, 1.0, rmag)
        self.component_ffts = []
        for c in mesh:
            comp = c / safe
            comp[rmag == 0.0] = 0.0
            self.component_ffts.append(np.fft.fftn(comp))
        self._pad_shape = (n2,) * grid.dim

    def convolve(self, density: np.ndarray) -> np.ndarray:
        """K * density on the original grid (one array per axis), including
        the quadrature weight dx^dim."""
        grid = self.grid
        pad = np.zeros(self._pad_shape, dtype=np.complex128)
        pad[(slice(0, grid.n),) * grid.dim] = density
        rho_hat = np.fft.fftn(pad)
        out = np.empty((grid.dim,) + grid.shape)
        core = (slice(0, grid.n),) * grid.dim
        for j, khat in enumerate(self.component_ffts):
            out[j] = np.real(np.fft.ifftn(khat * rho_hat)[core])
        return out * grid.cell_volume


_kernel_cache: dict[tuple, InteractionKernel] = {}


def _kernel_for(grid: GridSpec) -> InteractionKernel:
    key = (grid.dim, grid.n, grid.L)
    if key not in _kernel_cache:
        _kernel_cache[key] = InteractionKernel(grid)
    return _kernel_cache[key]


def interaction_potential(field: FieldState, kernel: InteractionKernel | None = None) -> float:
    """M(t) = integral of |u(y)|^2 p(x).(x-y)/|x-y| dx dy via FFT convolution."""
    grid = field.grid
    if kernel is None:
        kernel = _kernel_for(grid)
    rho = np.abs(field.values) ** 2
    conv = kernel.convolve(rho)
    p = mass_current(field).components
    return float(np.sum(p * conv) * grid.cell_volume)


def interaction_potential_direct(field: FieldState) -> float:
    """O(n^(2 dim)) double-sum oracle for the interaction potential.

    Only sensible on tiny grids (n <= 8); used to validate the padded
    convolution path on exhaustive small instances.
    """
    grid = field.grid
    pts = grid.x.reshape(grid.dim, -1).T
    p = mass_current(field).components.reshape(grid.dim, -1).T
    rho = (np.abs(field.values) ** 2).ravel()
    diff = pts[:, None, :] - pts[None, :, :]
    rmag = np.sqrt(np.sum(diff**2, axis=2))
    safe = np.where(rmag == 0.0, 1.0, rmag)
    unit = diff / safe[..., None]
    radial = np.einsum("xd,xyd->xy", p, unit)
    return float(np.einsum("y,xy->", rho, radial) * grid.cell_volume**2)


@dataclass
class MorawetzReport:
    """Finite-difference check of the Morawetz action identity per center.

    Arrays are indexed (center, interior snapshot); t_samples holds the
    interior times where the centered difference of M_y is formed.
    """

    centers: np.ndarray
    snapshot_times: np.ndarray
    t_samples: np.ndarray
    m_values: np.ndarray
    m_interaction_values: np.ndarray
    fd_derivative: np.ndarray
    term_point: np.ndarray
    term_angular: np.ndarray
    term_nonlinear: np.ndarray
    residuals: np.ndarray

    @property
    def dominant_rhs(self) -> np.ndarray:
        return np.maximum.reduce(
            [self.term_point, self.term_angular, np.abs(self.term_nonlinear)]
        )

    @property
    def relative_residuals(self) -> np.ndarray:
        return self.residuals / np.where(self.dominant_rhs == 0.0, 1.0, self.dominant_rhs)


def _identity_terms(field: FieldState, params: NLSParams, y) -> tuple[float, float, float]:
    grid = field.grid
    _, rmag = grid.displacement(y)
    safe = np.where(rmag == 0.0, 1.0, rmag)
    inv_r = np.where(rmag == 0.0, 0.0, 1.0 / safe)
    node = grid.nearest_node(y)
    point = 4.0 * np.pi * params.alpha * float(np.abs(field.values[node]) ** 2)
    ang = angular_gradient(field, y)
    ang_sq = np.sum(np.abs(ang) ** 2, axis=0)
    angular = 2.0 * params.alpha * float(np.sum(inv_r * ang_sq)) * grid.cell_volume
    z = np.abs(field.values) ** 2
    repulsive = z * params.f(z) - params.F(z)
    nonlinear = 2.0 * params.mu * float(np.sum(inv_r * repulsive)) * grid.cell_volume
    return point, angular, nonlinear


def identity_check(trajectory: TrajectoryStore, params: NLSParams, centers,
                   kernel: InteractionKernel | None = None) -> MorawetzReport:
    """Compare the centered time difference of M_y against the identity's
    three right-hand-side terms at every interior snapshot.

    Requires >= 3 snapshots at uniform cadence on a 3d grid; centers must
    sit on grid nodes (off-node centers would need an interpolation rule
    with no reference convention).
    """
    snaps = trajectory.snapshots
    if len(snaps) < 3:
        raise ValueError(f"identity check needs >= 3 snapshots, got {len(snaps)}")
    grid = snaps[0].grid
    if grid.dim != 3:
        raise ValueError("the Morawetz identity check is specific to dim = 3")
    times = np.array([f.t for f in snaps])
    spacing = np.diff(times)
    if spacing.min() <= 0 or (spacing.max() - spacing.min()) > 1e-9 * spacing.max():
        raise ValueError("snapshots must be at uniform, increasing cadence")
    dt = float(spacing[0])

    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    for y in centers:
        node = grid.nearest_node(y)
        node_pos = np.array([grid.axis_coords[i] for i in node])
        if np.max(np.abs(node_pos - y)) > 1e-9 * grid.dx:
            raise ValueError(f"center {y} is not a grid node")

    m_vals = np.array([[morawetz_action(f, y) for f in snaps] for y in centers])
    if kernel is None:
        kernel = _kernel_for(grid)
    m_int = np.array([interaction_potential(f, kernel) for f in snaps])

    interior = range(1, len(snaps) - 1)
    fd = np.array([
        [(m_vals[ci, i + 1] - m_vals[ci, i - 1]) / (2.0 * dt) for i in interior]
        for ci in range(len(centers))
    ])
    pt = np.zeros_like(fd)
    ang = np.zeros_like(fd)
    nl = np.zeros_like(fd)
    for ci, y in enumerate(centers):
        for col, i in enumerate(interior):
            pt[ci, col], ang[ci, col], nl[ci, col] = _identity_terms(snaps[i], params, y)
    resid = np.abs(fd - (pt + ang + nl))
    return MorawetzReport(
        centers=centers,
        snapshot_times=times,
        t_samples=times[1:-1],
        m_values=m_vals,
        m_interaction_values=m_int,
        fd_derivative=fd,
        term_point=pt,
        term_angular=ang,
        term_nonlinear=nl,
        residuals=resid,
    )


@dataclass
class MonotonicityReport:
    violations: list
    max_decrease: float
    tolerance: float
    window_records: int


def monotonicity_report(trajectory: TrajectoryStore,
                        column: str = "M_interaction") -> MonotonicityReport:
    """Scan consecutive interaction-potential values inside the validity
    window; a violation is a decrease beyond tau = 1e-6 (max|M| + 1)."""
    count = trajectory.valid_count()
    times = trajectory.times()[:count]
    m = trajectory.column(column)[:count]
    tol = 1e-6 * (float(np.max(np.abs(m))) + 1.0) if count else 1e-6
    violations = []
    max_dec = 0.0
    for i in range(1, count):
        dec = m[i - 1] - m[i]
        max_dec = max(max_dec, dec)
        if dec > tol:
            violations.append({"t_before": float(times[i - 1]), "t": float(times[i]),
                               "decrease": float(dec)})
    return MonotonicityReport(violations=violations, max_decrease=float(max_dec),
                              tolerance=tol, window_records=count)


@dataclass
class InteractionInequalityReport:
    lhs: float
    rhs: float
    ratio: float


def interaction_inequality_report(trajectory: TrajectoryStore,
                                  mass_column: str = "mass",
                                  l4_column: str = "l4x_fourth",
                                  hhalf_column: str = "hdot_half") -> InteractionInequalityReport:
    """Spacetime L4 mass against its conserved-quantity bound:
    lhs = int_0^T |u|_L4^4 dt, rhs = mass(0) * sup_t |u|_{Hdot 1/2}^2."""
    count = trajectory.valid_count()
    if count == 0:
        raise ValueError("trajectory has no valid records")
    times = trajectory.times()[:count]
    l4 = trajectory.column(l4_column)[:count]
    hh = trajectory.column(hhalf_column)[:count]
    lhs = float(np.trapezoid(l4, times)) if count > 1 else 0.0
    rhs = float(trajectory.column(mass_column)[0] * np.max(hh**2))
    ratio = lhs / rhs if rhs > 0 else 0.0
    return InteractionInequalityReport(lhs=lhs, rhs=rhs, ratio=ratio)
