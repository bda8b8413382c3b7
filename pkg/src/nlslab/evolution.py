"""Strang-split time evolution of the generalized NLS
i u_t + alpha Lap u = mu f(|u|^2) u, trajectory capture, and structural
checks on the nonlinearity."""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

import numpy as np

from .grid import FieldState
from .spectral import boundary_mass_fraction, dealias_mask


class BlowupError(RuntimeError):
    """Field left the trusted range (NaN/overflow or L-infinity ceiling)."""

    def __init__(self, last_good_t: float, message: str):
        super().__init__(message)
        self.last_good_t = last_good_t


@dataclass(frozen=True)
class NLSParams:
    """Dispersion/nonlinearity coefficients for i u_t + alpha Lap u = mu f(|u|^2) u.

    Pure power nonlinearity: f(z) = z^((p-1)/2), F(z) = 2/(p+1) z^((p+1)/2),
    so p=3, mu=1, alpha=1 is the cubic defocusing equation. F' = f and the
    repulsivity combination z f(z) - F(z) equals (p-1)/2 * F(z).
    """

    alpha: float = 1.0
    mu: float = 1.0
    p: float = 3.0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"power p must be >= 1, got {self.p}")

    def f(self, z):
        return np.asarray(z) ** ((self.p - 1) / 2.0)

    def F(self, z):
        return (2.0 / (self.p + 1)) * np.asarray(z) ** ((self.p + 1) / 2.0)

    @property
    def repulsive(self) -> bool:
        return self.mu >= 0


@dataclass(frozen=True)
class StepperConfig:
    """Step size, horizon, and capture cadences (multiples of dt)."""

    dt: float
    T: float
    snapshot_cadence: float | None = None
    record_cadence: float | None = None
    dealias: bool = True
    linf_ceiling: float = 1e6

    def __post_init__(self):
        if not 0 < self.dt <= self.T:
            raise ValueError(f"need 0 < dt <= T, got dt={self.dt}, T={self.T}")
        for name in ("snapshot_cadence", "record_cadence"):
            val = getattr(self, name)
            if val is None:
                object.__setattr__(self, name, self.dt)
                continue
            mult = val / self.dt
            if val <= 0 or abs(mult - round(mult)) > 1e-9 * max(1.0, mult):
                raise ValueError(f"{name}={val} is not a positive multiple of dt={self.dt}")

    @property
    def n_steps(self) -> int:
        steps = round(self.T / self.dt)
        if abs(steps * self.dt - self.T) > 1e-9 * self.T:
            steps = int(np.ceil(self.T / self.dt - 1e-12))
        return max(1, steps)

    def every(self, cadence: float) -> int:
        return max(1, round(cadence / self.dt))


@dataclass
class TrajectoryStore:
    """Snapshots and diagnostic rows captured along one evolution."""

    snapshots: list = dfield(default_factory=list)
    records: list = dfield(default_factory=list)
    metadata: dict = dfield(default_factory=dict)
    truncated: bool = False
    last_valid_time: float = 0.0

    def column(self, name: str) -> np.ndarray:
        return np.array([rec[name] for rec in self.records])

    def times(self) -> np.ndarray:
        return self.column("t")

    def valid_count(self) -> int:
        """Length of the initial run of validity-flagged records."""
        count = 0
        for rec in self.records:
            if not rec["valid"]:
                break
            count += 1
        return count

    @property
    def validity_horizon(self) -> float:
        count = self.valid_count()
        return self.records[count - 1]["t"] if count else 0.0

    def valid_snapshots(self) -> list:
        horizon = self.validity_horizon
        return [f for f in self.snapshots if f.t <= horizon + 1e-12]


def step(field: FieldState, params: NLSParams, dt: float, dealias: bool = True,
         linf_ceiling: float | None = 1e6, _mask=None) -> FieldState:
    """One Strang step: half linear flow, exact nonlinear phase rotation,
    half linear flow.

    The nonlinear substep u <- u exp(-i mu f(|u|^2) dt) leaves |u| pointwise
    invariant, so every substep is L2-unitary and mass is conserved to
    roundoff.  The 2/3 dealias mask is applied in the same transform as the
    second half step (both are Fourier-diagonal, so the fusion is exact).
    """
    grid = field.grid
    half = np.exp(-0.5j * params.alpha * grid.k_sq * dt)

    vhat = np.fft.fftn(field.values)
    u = np.fft.ifftn(half * vhat)
    if params.mu != 0.0:
        u *= np.exp(-1j * params.mu * dt * params.f(np.abs(u) ** 2))
    vhat = np.fft.fftn(u)
    if dealias:
        if _mask is None:
            _mask = dealias_mask(grid)
        vhat *= _mask
    u = np.fft.ifftn(half * vhat)

    if not np.all(np.isfinite(u.view(np.float64))):
        raise BlowupError(field.t, f"non-finite field after step from t={field.t}")
    if linf_ceiling is not None and np.abs(u).max() > linf_ceiling:
        raise BlowupError(field.t, f"|u| exceeded ceiling {linf_ceiling} after t={field.t}")
    return FieldState(u, field.t + dt, grid)


def evolve(field: FieldState, params: NLSParams, cfg: StepperConfig,
           sinks=(), spillover_tol: float = 1e-6) -> TrajectoryStore:
    """Run the stepper, invoking diagnostic sinks at the record cadence and
    storing field snapshots at the snapshot cadence.

    Each sink is a callable FieldState -> mapping of column name to value;
    evolve adds the t and valid columns (valid = boundary mass fraction at
    or below the spillover tolerance).  A blowup truncates the store and
    records the last good time.
    """
    store = TrajectoryStore(metadata={
        "alpha": params.alpha, "mu": params.mu, "p": params.p,
        "dt": cfg.dt, "T": cfg.T, "spillover_tol": spillover_tol,
    })
    rec_every = cfg.every(cfg.record_cadence)
    snap_every = cfg.every(cfg.snapshot_cadence)
    mask = dealias_mask(field.grid) if cfg.dealias else None

    def capture(state: FieldState, index: int):
        if index % snap_every == 0:
            store.snapshots.append(state.copy())
        if index % rec_every == 0:
            rec = {"t": state.t,
                   "valid": boundary_mass_fraction(state) <= spillover_tol}
            for sink in sinks:
                rec.update(sink(state))
            store.records.append(rec)

    current = field
    capture(current, 0)
    for i in range(1, cfg.n_steps + 1):
        try:
            current = step(current, params, cfg.dt, dealias=cfg.dealias,
                           linf_ceiling=cfg.linf_ceiling, _mask=mask)
        except BlowupError as err:
            store.truncated = True
            store.last_valid_time = err.last_good_t
            store.metadata["abort"] = str(err)
            return store
        capture(current, i)
    store.last_valid_time = current.t
    return store


def energy(field: FieldState, params: NLSParams) -> float:
    """Generalized energy: integral of alpha/2 |grad u|^2 + mu/2 F(|u|^2).

    Reduces to 1/2 |grad u|^2 + 1/4 |u|^4 for the cubic defocusing equation;
    conserved by the flow (the stepper drifts at O(dt^2))."""
    grid = field.grid
    vhat = np.fft.fftn(field.values)
    grad_sq = float(np.sum(grid.k_sq * np.abs(vhat) ** 2)) * grid.cell_volume**2 / grid.volume
    pot = float(np.sum(params.F(np.abs(field.values) ** 2))) * grid.cell_volume
    return 0.5 * params.alpha * grad_sq + 0.5 * params.mu * pot


@dataclass(frozen=True)
class RepulsivityReport:
    holds: bool
    min_value: float


def repulsivity_check(params: NLSParams, z_samples) -> RepulsivityReport:
    """Evaluate mu (z f(z) - F(z)) on the samples and at z = 0.

    Nonnegative everywhere is the defocusing hypothesis behind Morawetz
    monotonicity; for pure powers the quantity equals mu (p-1)/2 F(z).
    """
    z = np.atleast_1d(np.asarray(z_samples, dtype=float))
    if np.any(z < 0):
        raise ValueError("samples must be nonnegative")
    z = np.concatenate([[0.0], z])
    vals = params.mu * (z * params.f(z) - params.F(z))
    mn = float(vals.min())
    return RepulsivityReport(holds=mn >= -1e-12, min_value=mn)
