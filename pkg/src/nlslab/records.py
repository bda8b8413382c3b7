"""Persistence: the records.csv schema, summary.json, the raw snapshot
format, and the standard per-record diagnostic suite."""

from __future__ import annotations

import csv
import json
import math
import struct

import numpy as np

from .evolution import NLSParams, energy
from .grid import FieldState, GridSpec, SobolevSpec
from .imethod import IMultiplierSpec
from .morawetz import InteractionKernel, _kernel_for, _unit_displacement, mass_current
from .scattering import DEFAULT_PAIRS
from .spectral import lebesgue_norm, sobolev_norm

SCHEMA_VERSION = 1
_MAGIC = b"NLSFLD1\0"
_HEADER = struct.Struct("<8sIIIIdd")  # magic, version, dim, n, bytes/value, L, t


class DiagnosticSuite:
    """Stateful sink producing one row of monitored scalars per record time.

    Columns: mass, energy, modified_energy, M_interaction, M_y_<i> per
    center, hdot_half, hs_norm, l4x_fourth, running_spacetime_l4, and one
    strichartz_<q>_<r> accumulator per admissible pair.  Running columns
    keep trapezoid state, so use a fresh suite per run.
    """

    def __init__(self, params: NLSParams, imspec: IMultiplierSpec, centers=(),
                 pairs=DEFAULT_PAIRS, strichartz_s: float = 0.0,
                 grid: GridSpec | None = None,
                 kernel: InteractionKernel | None = None,
                 interaction: bool = True):
        self.params = params
        self.imspec = imspec
        self.centers = [np.asarray(c, dtype=float) for c in centers]
        self.pairs = list(pairs)
        self.strichartz_s = strichartz_s
        self.interaction = interaction
        self._kernel = kernel
        self._units = None
        self._grid = None
        self._prev_t = None
        self._prev_l4 = 0.0
        self._running_l4 = 0.0
        self._st_state = {}
        if grid is not None:
            self._prepare(grid)

    def _prepare(self, grid: GridSpec):
        self._grid = grid
        self._units = [_unit_displacement(grid, c)[0] for c in self.centers]
        if self.interaction and self._kernel is None:
            self._kernel = _kernel_for(grid)

    def __call__(self, field: FieldState) -> dict:
        grid = field.grid
        if self._grid is None or grid != self._grid:
            self._prepare(grid)
        params, imspec = self.params, self.imspec
        values = field.values
        vhat = np.fft.fftn(values)
        spectral_weight = grid.cell_volume**2 / grid.volume
        mod2 = np.abs(values) ** 2

        rec = {}
        rec["mass"] = float(np.sum(mod2)) * grid.cell_volume
        grad_sq = float(np.sum(grid.k_sq * np.abs(vhat) ** 2)) * spectral_weight
        pot = float(np.sum(params.F(mod2))) * grid.cell_volume
        rec["energy"] = 0.5 * params.alpha * grad_sq + 0.5 * params.mu * pot

        if imspec.is_identity_on(grid):
            rec["modified_energy"] = rec["energy"]
        else:
            m = imspec.profile(grid.k_mag)
            smooth_grad = float(np.sum(grid.k_sq * (m * np.abs(vhat)) ** 2)) * spectral_weight
            smooth_vals = np.fft.ifftn(m * vhat)
            smooth_pot = float(np.sum(params.F(np.abs(smooth_vals) ** 2))) * grid.cell_volume
            rec["modified_energy"] = (0.5 * params.alpha * smooth_grad
                                      + 0.5 * params.mu * smooth_pot)

        p = None
        if self.interaction or self.centers:
            p = mass_current(field).components
        if self.interaction:
            conv = self._kernel.convolve(mod2)
            rec["M_interaction"] = float(np.sum(p * conv) * grid.cell_volume)
        for i, unit in enumerate(self._units):
            rec[f"M_y_{i}"] = float(np.sum(p * unit) * grid.cell_volume)

        power = np.abs(vhat) ** 2
        nz = grid.k_mag > 0
        rec["hdot_half"] = float(
            np.sqrt(np.sum(grid.k_mag[nz] * power[nz]) * spectral_weight))
        s = imspec.s
        rec["hs_norm"] = float(
            np.sqrt(np.sum((1.0 + grid.k_sq) ** s * power) * spectral_weight))
        l4_fourth = float(np.sum(mod2**2)) * grid.cell_volume
        rec["l4x_fourth"] = l4_fourth

        if self._prev_t is not None:
            self._running_l4 += 0.5 * (l4_fourth + self._prev_l4) * (field.t - self._prev_t)
        rec["running_spacetime_l4"] = self._running_l4

        if self.pairs:
            ss = self.strichartz_s
            if ss != 0.0:
                su = np.fft.ifftn((1.0 + grid.k_sq) ** (ss / 2.0) * vhat)
                sf = field.with_values(su)
            else:
                sf = field
            for pair in self.pairs:
                g = lebesgue_norm(sf, pair.r)
                key = pair.label()
                if math.isinf(pair.q):
                    prev = self._st_state.get(key, 0.0)
                    self._st_state[key] = max(prev, g)
                    rec[f"strichartz_{key}"] = self._st_state[key]
                else:
                    prev_g, integral = self._st_state.get(key, (None, 0.0))
                    if prev_g is not None:
                        integral += 0.5 * (g**pair.q + prev_g**pair.q) * (field.t - self._prev_t)
                    self._st_state[key] = (g, integral)
                    rec[f"strichartz_{key}"] = integral ** (1.0 / pair.q)

        self._prev_t = field.t
        self._prev_l4 = l4_fourth
        return rec


def write_records_csv(path, records, schema_version: int = SCHEMA_VERSION):
    """One record per row, RFC-4180 quoting, full-precision floats, with a
    schema comment line ahead of the header."""
    if not records:
        raise ValueError("no records to write")
    columns = [k for k in records[0] if k != "valid"] + ["valid"]
    with open(path, "w", newline="") as fh:
        fh.write(f"# nlslab records schema v{schema_version}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in records:
            row = []
            for col in columns:
                val = rec[col]
                if isinstance(val, bool):
                    row.append(int(val))
                elif isinstance(val, float):
                    row.append(repr(val))
                else:
                    row.append(val)
            writer.writerow(row)


def read_records_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            fh.seek(0)
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            rec = {}
            for key, text in row.items():
                if key == "valid":
                    rec[key] = bool(int(text))
                else:
                    rec[key] = float(text)
            out.append(rec)
    return out


def write_summary(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def check_entry(name: str, value, threshold, passed: bool, asserted: bool = True) -> dict:
    return {"name": name, "value": value, "threshold": threshold,
            "pass": bool(passed), "asserted": bool(asserted)}


def write_snapshot(path, field: FieldState):
    """Raw little-endian field dump: a 64-byte header (magic NLSFLD1\\0,
    version, dim, n, bytes per value, box side L, time t) followed by the
    complex128 values in C order."""
    header = _HEADER.pack(_MAGIC, SCHEMA_VERSION, field.grid.dim, field.grid.n,
                          16, field.grid.L, field.t)
    header += b"\0" * (64 - len(header))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.values, dtype="<c16").tobytes())


def read_snapshot(path) -> FieldState:
    with open(path, "rb") as fh:
        header = fh.read(64)
        if len(header) < 64:
            raise ValueError(f"{path}: truncated snapshot header")
        magic, version, dim, n, itemsize, L, t = _HEADER.unpack(header[:_HEADER.size])
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if itemsize not in (8, 16):
            raise ValueError(f"{path}: unsupported item size {itemsize}")
        dtype = "<c16" if itemsize == 16 else "<c8"
        count = n**dim
        raw = np.frombuffer(fh.read(count * itemsize), dtype=dtype, count=count)
    grid = GridSpec(n=n, L=L, dim=dim)
    return FieldState(raw.astype(np.complex128).reshape(grid.shape), t, grid)
