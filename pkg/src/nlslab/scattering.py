"""Linear-flow pullbacks toward asymptotic states, Strichartz-norm monitors
over admissible exponent pairs, and the running spacetime L4 accumulator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import TrajectoryStore
from .grid import SobolevSpec
from .spectral import bessel_derivative, lebesgue_norm, linear_propagate, sobolev_norm


@dataclass(frozen=True)
class AdmissiblePair:
    """Exponents (q, r) with 1/q + 3/(2r) = 3/4 and q, r >= 2 (3d scaling)."""

    q: float
    r: float

    def __post_init__(self):
        if self.q < 2 or self.r < 2:
            raise ValueError(f"admissible pairs need q, r >= 2, got ({self.q}, {self.r})")
        inv_q = 0.0 if math.isinf(self.q) else 1.0 / self.q
        defect = inv_q + 3.0 / (2.0 * self.r) - 0.75
        if abs(defect) > 1e-12:
            raise ValueError(
                f"({self.q}, {self.r}) is not Schrodinger admissible: "
                f"1/q + 3/(2r) - 3/4 = {defect:.3e}"
            )

    def label(self) -> str:
        q = "inf" if math.isinf(self.q) else f"{self.q:g}"
        return f"{q}_{self.r:g}"


DEFAULT_PAIRS = (
    AdmissiblePair(math.inf, 2.0),
    AdmissiblePair(10.0 / 3.0, 10.0 / 3.0),
    AdmissiblePair(2.0, 6.0),
)


@dataclass
class ScatteringReport:
    """Cauchy increments of the linear pullbacks S^L(-t) u(t) in H^s."""

    times: np.ndarray
    increments: np.ndarray
    monotone_tail: bool


def asymptotic_state_probe(trajectory: TrajectoryStore, s: float,
                           alpha: float | None = None) -> ScatteringReport:
    """Pull every snapshot back to t = 0 with the linear flow and measure
    successive H^s differences.

    A decreasing last-three tail is the operational scattering signature;
    the pullbacks of a linear run are all identical to roundoff.
    """
    if alpha is None:
        alpha = float(trajectory.metadata.get("alpha", 1.0))
    snaps = trajectory.valid_snapshots()
    if len(snaps) < 3:
        raise ValueError(f"scattering probe needs >= 3 snapshots in the validity "
                         f"window, got {len(snaps)}")
    spec = SobolevSpec(s=s, homogeneous=False)
    pullbacks = [linear_propagate(f, -f.t, alpha) for f in snaps]
    incs = []
    for before, after in zip(pullbacks, pullbacks[1:]):
        diff = after.with_values(after.values - before.values)
        incs.append(sobolev_norm(diff, spec))
    incs = np.array(incs)
    tail = bool(len(incs) >= 3 and incs[-3] > incs[-2] > incs[-1])
    return ScatteringReport(times=np.array([f.t for f in snaps]),
                            increments=incs, monotone_tail=tail)


def strichartz_monitor(trajectory: TrajectoryStore, pairs=DEFAULT_PAIRS,
                       s: float = 0.0) -> dict[str, float]:
    """Accumulated mixed norms ( int |<grad>^s u(t)|_{L^r}^q dt )^(1/q) per
    admissible pair, by trapezoid over the snapshots; q = inf takes the sup.

    The supremum over all admissible pairs is monitored through this finite
    list; the three defaults span the interpolation range."""
    snaps = trajectory.valid_snapshots()
    if not snaps:
        raise ValueError("trajectory has no snapshots in the validity window")
    times = np.array([f.t for f in snaps])
    out = {}
    for pair in pairs:
        g = np.array([
            lebesgue_norm(bessel_derivative(f, s) if s != 0.0 else f, pair.r)
            for f in snaps
        ])
        if math.isinf(pair.q):
            out[pair.label()] = float(np.max(g))
        else:
            out[pair.label()] = float(np.trapezoid(g**pair.q, times) ** (1.0 / pair.q))
    return out


@dataclass
class SpacetimeL4Accumulation:
    times: np.ndarray
    running: np.ndarray
    intervals: list

    @property
    def final(self) -> float:
        return float(self.running[-1]) if self.running.size else 0.0


def spacetime_l4_accumulator(trajectory: TrajectoryStore, epsilon: float = 1.0,
                             column: str = "l4x_fourth") -> SpacetimeL4Accumulation:
    """Running trapezoid of the |u|_L4^4 column and the greedy subdivision of
    the window into maximal intervals with accumulated L4 norm <= epsilon.

    The interval count is the numerical analogue of the slab count in the
    smallness bootstrap."""
    count = trajectory.valid_count()
    times = trajectory.times()[:count]
    col = trajectory.column(column)[:count]
    running = np.zeros(count)
    for i in range(1, count):
        running[i] = running[i - 1] + 0.5 * (col[i] + col[i - 1]) * (times[i] - times[i - 1])

    budget = epsilon**4
    intervals = []
    if count:
        start = 0
        acc = 0.0
        for i in range(1, count):
            seg = running[i] - running[i - 1]
            if acc + seg > budget and i - 1 > start:
                intervals.append((float(times[start]), float(times[i - 1])))
                start = i - 1
                acc = 0.0
            acc += seg
        intervals.append((float(times[start]), float(times[count - 1])))
    return SpacetimeL4Accumulation(times=times, running=running, intervals=intervals)
