"""Experiment configuration: a flat sectioned key-value file format with
strict validation, defaults, and a canonical content hash."""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .evolution import NLSParams, StepperConfig
from .grid import GridSpec
from .imethod import IMultiplierSpec
from .scattering import AdmissiblePair
from . import initial_data as data


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    val = text.strip().lower()
    if val in ("true", "yes", "on", "1"):
        return True
    if val in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_number(text: str) -> float:
    val = text.strip().lower()
    if val in ("inf", "+inf", "infinity"):
        return math.inf
    if "/" in val:
        return float(Fraction(val))
    return float(val)


def _parse_floats(text: str) -> list[float]:
    return [_parse_number(tok) for tok in text.split(",") if tok.strip()]


def _parse_points(text: str) -> list[list[float]]:
    return [_parse_floats(chunk) for chunk in text.split(";") if chunk.strip()]


def _parse_str(text: str) -> str:
    return text.strip()


def _parse_int(text: str) -> int:
    return int(text.strip())


_REQUIRED = object()

# section -> key -> (parser, default); _REQUIRED marks keys with no default.
_SCHEMA = {
    "grid": {
        "dim": (_parse_int, 3),
        "n": (_parse_int, _REQUIRED),
        "l": (_parse_number, _REQUIRED),
    },
    "params": {
        "alpha": (_parse_number, 1.0),
        "mu": (_parse_number, 1.0),
        "p": (_parse_number, 3.0),
    },
    "stepper": {
        "dt": (_parse_number, 1e-3),
        "t": (_parse_number, 0.1),
        "snapshot_cadence": (_parse_number, None),
        "record_cadence": (_parse_number, None),
        "dealias": (_parse_bool, True),
        "linf_ceiling": (_parse_number, 1e6),
    },
    "imethod": {
        "s": (_parse_number, 0.85),
        "n": (_parse_number, 8.0),
        "n_list": (_parse_floats, (4.0, 8.0, 16.0, 32.0)),
        "lambda_constant": (_parse_number, 1.0),
    },
    "initial_data": {
        "kind": (_parse_str, "gaussian"),
        "amplitude": (_parse_number, 1.0),
        "width": (_parse_number, 1.0),
        "chirp": (_parse_number, 0.0),
        "center": (_parse_floats, None),
        "velocity": (_parse_floats, None),
        "mode": (_parse_floats, None),
        "separation": (_parse_number, 3.0),
        "kick": (_parse_number, 1.0),
        "seed": (_parse_int, 0),
        "path": (_parse_str, ""),
    },
    "diagnostics": {
        "centers": (_parse_points, None),
        "pairs": (_parse_points, ((math.inf, 2.0), (10.0 / 3.0, 10.0 / 3.0), (2.0, 6.0))),
        "epsilon": (_parse_number, 1.0),
        "spillover_tol": (_parse_number, 1e-6),
        "strichartz_s": (_parse_number, None),
    },
    "output": {
        "directory": (_parse_str, "nlslab-out"),
        "formats": (_parse_str, "csv,json"),
        "snapshots": (_parse_bool, False),
    },
}

_KINDS = ("gaussian", "chirped-gaussian", "two-bump", "plane-wave", "file")


@dataclass
class ExperimentConfig:
    """Validated experiment settings plus the hash of the source content."""

    values: dict
    config_hash: str

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def grid(self) -> GridSpec:
        g = self.values["grid"]
        return GridSpec(n=g["n"], L=g["l"], dim=g["dim"])

    def params(self) -> NLSParams:
        p = self.values["params"]
        return NLSParams(alpha=p["alpha"], mu=p["mu"], p=p["p"])

    def stepper(self) -> StepperConfig:
        st = self.values["stepper"]
        dt, T = st["dt"], st["t"]
        steps = max(1, round(T / dt))
        record = st["record_cadence"]
        if record is None:
            record = max(1, steps // 200) * dt
        snapshot = st["snapshot_cadence"]
        if snapshot is None:
            snapshot = max(1, steps // 8) * dt
        return StepperConfig(dt=dt, T=T, snapshot_cadence=snapshot,
                             record_cadence=record, dealias=st["dealias"],
                             linf_ceiling=st["linf_ceiling"])

    def imultiplier(self) -> IMultiplierSpec:
        im = self.values["imethod"]
        return IMultiplierSpec(s=im["s"], N=im["n"])

    def centers(self) -> np.ndarray:
        dim = self.values["grid"]["dim"]
        raw = self.values["diagnostics"]["centers"]
        if raw is None:
            return np.zeros((1, dim))
        pts = np.asarray(raw, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise ConfigError(f"diagnostics.centers must be {dim}-dimensional points")
        return pts

    def pairs(self) -> list[AdmissiblePair]:
        out = []
        for q, r in self.values["diagnostics"]["pairs"]:
            try:
                out.append(AdmissiblePair(q=q, r=r))
            except ValueError as err:
                raise ConfigError(f"diagnostics.pairs: {err}") from err
        return out

    def strichartz_s(self) -> float:
        s = self.values["diagnostics"]["strichartz_s"]
        return self.values["imethod"]["s"] if s is None else s

    def initial_field(self, grid: GridSpec, seed: int | None = None):
        init = self.values["initial_data"]
        kind = init["kind"]
        if kind in ("gaussian", "chirped-gaussian"):
            chirp = init["chirp"]
            if kind == "chirped-gaussian" and chirp == 0.0:
                chirp = 1.0
            return data.gaussian(grid, amplitude=init["amplitude"], width=init["width"],
                                 chirp=chirp, center=init["center"],
                                 velocity=init["velocity"])
        if kind == "two-bump":
            return data.two_bump(grid, amplitude=init["amplitude"], width=init["width"],
                                 separation=init["separation"], kick=init["kick"])
        if kind == "plane-wave":
            mode = init["mode"]
            mode = [1] + [0] * (grid.dim - 1) if mode is None else [int(v) for v in mode]
            return data.plane_wave(grid, amplitude=init["amplitude"], mode=mode)
        if kind == "file":
            from .records import read_snapshot
            if not init["path"]:
                raise ConfigError("initial_data.path is required for kind=file")
            field = read_snapshot(init["path"])
            if field.grid != grid:
                raise ConfigError(
                    f"snapshot grid {field.grid} does not match configured {grid}")
            return field
        raise ConfigError(f"initial_data.kind must be one of {_KINDS}, got {kind!r}")


def _validate(values: dict):
    g = values["grid"]
    if g["dim"] not in (1, 2, 3):
        raise ConfigError("grid.dim must be 1, 2, or 3")
    if g["n"] < 4 or g["n"] % 2:
        raise ConfigError("grid.n must be even and >= 4")
    if g["l"] <= 0:
        raise ConfigError("grid.L must be positive")
    if values["params"]["p"] < 1:
        raise ConfigError("params.p must be >= 1")
    st = values["stepper"]
    if st["dt"] <= 0 or st["t"] < st["dt"]:
        raise ConfigError("stepper requires 0 < dt <= T")
    im = values["imethod"]
    if not 0.5 < im["s"] <= 1.0:
        raise ConfigError("imethod.s must exceed 1/2 (and be at most 1)")
    if im["n"] < 1:
        raise ConfigError("imethod.N must be >= 1")
    if any(N < 1 for N in im["n_list"]):
        raise ConfigError("imethod.N_list entries must be >= 1")
    init = values["initial_data"]
    if init["kind"] not in _KINDS:
        raise ConfigError(f"initial_data.kind must be one of {_KINDS}, got {init['kind']!r}")
    if init["width"] <= 0:
        raise ConfigError("initial_data.width must be positive")
    diag = values["diagnostics"]
    if diag["epsilon"] <= 0:
        raise ConfigError("diagnostics.epsilon must be positive")
    if not 0 < diag["spillover_tol"] < 1:
        raise ConfigError("diagnostics.spillover_tol must lie in (0, 1)")


def load_config(path: str) -> ExperimentConfig:
    """Parse, validate, and hash a sectioned key-value config file.

    Unknown sections or keys are rejected; missing keys take the documented
    defaults; grid.n and grid.L are required.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except configparser.Error as err:
        raise ConfigError(f"config parse error: {err}") from err

    raw_items = []
    values = {}
    actual = {}
    for section in parser.sections():
        sec = section.lower()
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        actual[sec] = section
        for key, text in parser.items(section):
            if key not in _SCHEMA[sec]:
                raise ConfigError(f"unknown key {section}.{key}")
            raw_items.append(f"{sec}.{key}={text.strip()}")

    for sec, keys in _SCHEMA.items():
        values[sec] = {}
        for key, (fn, default) in keys.items():
            if sec in actual and parser.has_option(actual[sec], key):
                text = parser.get(actual[sec], key)
                try:
                    values[sec][key] = fn(text)
                except (ValueError, ZeroDivisionError) as err:
                    raise ConfigError(f"bad value for {sec}.{key}: {text!r} ({err})") from err
            else:
                if default is _REQUIRED:
                    raise ConfigError(f"missing required key {sec}.{key}")
                values[sec][key] = list(default) if isinstance(default, tuple) else default

    _validate(values)
    digest = hashlib.sha256("\n".join(sorted(raw_items)).encode()).hexdigest()
    return ExperimentConfig(values=values, config_hash=digest)
