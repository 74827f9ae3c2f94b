"""TOML run configuration.

Files use GHz for qubit/coupler frequencies, MHz for detunings, couplings,
weights and Rabi rates, and microseconds for times. Every value is
converted to rad/s or seconds once, in :func:`resolve`.

Schema (all tables and keys optional; defaults shown in ``DEFAULTS``)::

    [device]        omega1_ghz, omega2_ghz, omega_c_ghz, alpha{1,2,_c}_mhz,
                    g1c_mhz, g2c_mhz, truncation
    [pulse]         T_us, span_mhz, omega0_mhz, family, sech_window
    [perceptron]    weights_mhz (list), bias_mhz
    [zz_sweep]      start_ghz, stop_ghz, points
    [activation]    T_us (list), inputs (list of bitstrings), start_mhz, stop_mhz, points
    [weight_sweep]  biases_mhz (list), start_mhz, stop_mhz, points
    [negativity]    start_mhz, stop_mhz, points, t1_us (optional)
    [decompose]     thetas (table bitstring -> rad), f_2q, t_2q_ns
    [fit]           T_us, input, start_mhz, stop_mhz, points
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import units
from .device import DeviceParams, device_from_dict
from .dynamics import PerceptronConfig
from .pulse import FAMILIES, PulseParams


class ConfigFileError(ValueError):
    pass


DEFAULTS: dict = {
    "device": {
        "omega1_ghz": 6.189, "omega2_ghz": 5.089, "omega_c_ghz": 7.8,
        "alpha1_mhz": -286.0, "alpha2_mhz": -310.0, "alpha_c_mhz": -300.0,
        "g1c_mhz": 142.0, "g2c_mhz": 116.0, "truncation": 4,
    },
    "pulse": {"T_us": 1.67, "span_mhz": 80.0, "omega0_mhz": 19.7, "family": "chirp",
              "sech_window": 4.0},
    "perceptron": {"weights_mhz": [-5.2], "bias_mhz": 0.0},
    "zz_sweep": {"start_ghz": 5.6, "stop_ghz": 7.8, "points": 100},
    "activation": {"T_us": [0.42, 0.83, 1.67, 3.33], "inputs": ["0"],
                   "start_mhz": -15.0, "stop_mhz": 15.0, "points": 121},
    "weight_sweep": {"biases_mhz": [0.8, 4.0], "start_mhz": -10.0, "stop_mhz": 0.0,
                     "points": 51},
    "negativity": {"start_mhz": -5.0, "stop_mhz": 10.0, "points": 61, "t1_us": 20.0},
    "decompose": {"thetas": {"0": 0.0, "1": 3.141592653589793}, "f_2q": 0.997,
                  "t_2q_ns": 60.0},
    "fit": {"T_us": 1.67, "input": "0", "start_mhz": -15.0, "stop_mhz": 15.0, "points": 121},
}


def read_toml(path) -> dict:
    with Path(path).open("rb") as fh:
        return tomllib.load(fh)


def merge(base: dict, override: dict) -> dict:
    """Recursive merge; unknown tables or keys are rejected."""
    out = copy.deepcopy(base)
    for table, values in override.items():
        if table not in out:
            raise ConfigFileError(f"unknown config table [{table}]")
        if not isinstance(values, dict):
            raise ConfigFileError(f"[{table}] must be a table")
        for key, v in values.items():
            if key not in out[table]:
                raise ConfigFileError(f"unknown key {key!r} in [{table}]")
            out[table][key] = v
    return out


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 2:
            raise ConfigFileError(f"sweep needs points >= 2, got {self.points!r}")
        if not self.start < self.stop:
            raise ConfigFileError(f"sweep needs start < stop, got {self.start!r} >= {self.stop!r}")

    def values(self, scale: float = 1.0):
        import numpy as np

        return np.linspace(self.start, self.stop, int(self.points)) * scale


def parse_bits(s) -> tuple[int, ...]:
    s = str(s)
    if s in ("", "-"):
        return ()
    if any(c not in "01" for c in s):
        raise ConfigFileError(f"bitstring {s!r} must contain only 0 and 1")
    return tuple(int(c) for c in s)


def grid_of(table: dict, unit: str) -> Grid:
    return Grid(float(table[f"start_{unit}"]), float(table[f"stop_{unit}"]), table["points"])


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration; ``raw`` keeps the merged file values."""

    raw: dict
    device: DeviceParams
    perceptron: PerceptronConfig

    def pulse_with_duration(self, T_us: float) -> PulseParams:
        from dataclasses import replace

        return replace(self.perceptron.pulse, duration_T=float(T_us) * units.US)


def resolve(raw: dict) -> RunConfig:
    try:
        device = device_from_dict(raw["device"])
        p = raw["pulse"]
        if p["family"] not in FAMILIES:
            raise ConfigFileError(f"unknown pulse family {p['family']!r}")
        omega_q = device.omega1
        pulse = PulseParams(duration_T=float(p["T_us"]) * units.US,
                            omega_i=omega_q - float(p["span_mhz"]) * units.MHZ,
                            omega_f=omega_q, omega0=float(p["omega0_mhz"]) * units.MHZ,
                            family=p["family"], sech_window=float(p["sech_window"]))
        pc = raw["perceptron"]
        weights = tuple(float(w) * units.MHZ for w in pc["weights_mhz"])
        perceptron = PerceptronConfig(weights, float(pc["bias_mhz"]) * units.MHZ, pulse, omega_q)
    except (KeyError, TypeError) as exc:
        raise ConfigFileError(f"malformed config: {exc}") from exc
    return RunConfig(raw, device, perceptron)


def load(path=None) -> RunConfig:
    raw = DEFAULTS if path is None else merge(DEFAULTS, read_toml(path))
    return resolve(copy.deepcopy(raw))
