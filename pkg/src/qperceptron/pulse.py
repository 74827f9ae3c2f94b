"""Chirped and hyperbolic-secant drive schedules.

A schedule is described by two dimensionless shape functions of time: the
sweep fraction ``s(t)`` (drive frequency ``omega_i + (omega_f - omega_i) s``)
and the envelope ``e(t)`` (Rabi amplitude ``omega0 * e``). Keeping the shapes
separate from the absolute frequencies lets the dynamics work with detunings
only.

Families
--------
chirp
    ``s = sin^2(pi t / 2T)``, ``e = sin(pi t / T)`` on ``[0, T]``.
sech_printed
    ``s = tanh^2(pi t / T)``, ``e = sech(pi t / T)`` on ``[-wT, wT]``.
    Not monotone: the drive starts and ends at ``omega_f``.
sech_monotonic
    ``s = (1 + tanh(pi t / T)) / 2``, same envelope. This is the chirp after
    the substitution ``tanh(pi t / T) = -cos(pi t' / T)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import units

FAMILIES = ("chirp", "sech_printed", "sech_monotonic")


class PulseError(ValueError):
    pass


@dataclass(frozen=True)
class PulseParams:
    duration_T: float = 1.67 * units.US
    omega_i: float = 6.189 * units.GHZ - 80.0 * units.MHZ
    omega_f: float = 6.189 * units.GHZ
    omega0: float = 19.7 * units.MHZ
    family: str = "chirp"
    sech_window: float = 4.0

    def __post_init__(self):
        if not self.duration_T > 0:
            raise PulseError(f"duration_T must be positive, got {self.duration_T!r}")
        if not self.omega0 >= 0:
            raise PulseError(f"omega0 must be non-negative, got {self.omega0!r}")
        if self.family not in FAMILIES:
            raise PulseError(f"unknown pulse family {self.family!r}; expected one of {FAMILIES}")
        if self.family != "chirp" and not self.sech_window >= 3:
            raise PulseError(f"sech_window must be >= 3, got {self.sech_window!r}")

    @property
    def span(self) -> float:
        """Total frequency excursion ``omega_f - omega_i``."""
        return self.omega_f - self.omega_i

    def with_final(self, omega_f: float) -> "PulseParams":
        """Same pulse shape and span, moved so the sweep ends at ``omega_f``."""
        return replace(self, omega_f=omega_f, omega_i=omega_f - self.span)


@dataclass(frozen=True)
class PulseSchedule:
    omega_i: float
    omega_f: float
    omega0: float
    t_start: float
    t_end: float
    sweep: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    envelope: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    family: str = "custom"

    @property
    def span(self) -> float:
        return self.omega_f - self.omega_i

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def omega_p(self, t):
        return self.omega_i + self.span * self.sweep(np.asarray(t, dtype=float))

    def amplitude(self, t):
        return self.omega0 * self.envelope(np.asarray(t, dtype=float))

    def sample(self, t):
        """``(omega_p(t), amplitude(t))``."""
        return self.omega_p(t), self.amplitude(t)

    def detuning_from_final(self, t):
        """``omega_p(t) - omega_f``, evaluated without the large absolute offset."""
        return -self.span * (1.0 - self.sweep(np.asarray(t, dtype=float)))

    def reparametrized(self, time_map, t_start: float, t_end: float) -> "PulseSchedule":
        """Schedule ``u -> self(time_map(u))`` on ``[t_start, t_end]``."""
        sweep, env = self.sweep, self.envelope
        return replace(self, t_start=t_start, t_end=t_end,
                       sweep=lambda u: sweep(time_map(u)),
                       envelope=lambda u: env(time_map(u)),
                       family=f"{self.family}@reparametrized")


def _sech(x):
    return 1.0 / np.cosh(x)


def chirp_schedule(p: PulseParams) -> PulseSchedule:
    if p.family != "chirp":
        raise PulseError(f"chirp_schedule needs family 'chirp', got {p.family!r}")
    T = p.duration_T
    return PulseSchedule(p.omega_i, p.omega_f, p.omega0, 0.0, T,
                         sweep=lambda t: np.sin(np.pi * t / (2 * T)) ** 2,
                         envelope=lambda t: np.sin(np.pi * t / T),
                         family="chirp")


def sech_schedule(p: PulseParams) -> PulseSchedule:
    T = p.duration_T
    if p.family == "sech_printed":
        sweep = lambda t: np.tanh(np.pi * t / T) ** 2  # noqa: E731
    elif p.family == "sech_monotonic":
        sweep = lambda t: 0.5 * (1.0 + np.tanh(np.pi * t / T))  # noqa: E731
    else:
        raise PulseError(f"sech_schedule needs a sech family, got {p.family!r}")
    w = p.sech_window * T
    return PulseSchedule(p.omega_i, p.omega_f, p.omega0, -w, w, sweep=sweep,
                         envelope=lambda t: _sech(np.pi * t / T), family=p.family)


def make_schedule(p: PulseParams) -> PulseSchedule:
    return chirp_schedule(p) if p.family == "chirp" else sech_schedule(p)


def time_transform(t_prime, T: float, scaled: bool = False):
    """Map chirp time ``t'`` in ``(0, T)`` onto sech time.

    ``artanh(-cos(pi t'/T)) * T``; with ``scaled=True`` the result is divided
    by pi, which is the variant that carries the chirp envelope exactly onto
    ``sech(pi t / T)``.
    """
    tp = np.asarray(t_prime, dtype=float)
    if np.any((tp <= 0) | (tp >= T)):
        raise PulseError("time_transform needs 0 < t' < T (the endpoints map to infinity)")
    out = np.arctanh(-np.cos(np.pi * tp / T)) * T
    if scaled:
        out = out / np.pi
    return out if out.ndim else float(out)


def _peak_time(s: PulseSchedule) -> float:
    grid = np.linspace(s.t_start, s.t_end, 2001)
    env = s.envelope(grid)
    k = int(np.argmax(env))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(lambda t: -float(s.envelope(t)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14 * s.duration})
    return float(res.x)


def _branch_time(s: PulseSchedule, level: float, a: float, b: float) -> float:
    f = lambda t: float(s.amplitude(t)) - level  # noqa: E731
    return brentq(f, a, b, xtol=1e-15 * s.duration, rtol=4 * np.finfo(float).eps, maxiter=500)


def trajectory_compare(a: PulseSchedule, b: PulseSchedule, n: int = 200) -> float:
    """Largest drive-frequency mismatch between two schedules at equal amplitude.

    Both trajectories are split at their amplitude peak into a rising and a
    falling branch, on which the amplitude is monotone and so serves as the
    common parameter. ``n`` amplitude levels inside the shared range are
    matched by root finding on each branch; the result (rad/s) is the largest
    ``|omega_p,a - omega_p,b|`` found. Invariant under any monotone time
    reparametrization of either schedule.
    """
    if n < 1:
        raise PulseError("n must be >= 1")
    peaks = []
    for s in (a, b):
        tp = _peak_time(s)
        peaks.append((tp, float(s.amplitude(tp)),
                      float(s.amplitude(s.t_start)), float(s.amplitude(s.t_end))))
    hi = min(p[1] for p in peaks)
    lo_rise = max(p[2] for p in peaks)
    lo_fall = max(p[3] for p in peaks)
    if not (lo_rise < hi and lo_fall < hi):
        raise PulseError("amplitude ranges of the two schedules do not overlap")

    worst = 0.0
    for branch, lo in (("rise", lo_rise), ("fall", lo_fall)):
        levels = lo + (hi - lo) * (np.arange(n) + 0.5) / n
        for level in levels:
            freqs = []
            for s, (tp, _, _, _) in zip((a, b), peaks):
                if branch == "rise":
                    t = _branch_time(s, level, s.t_start, tp)
                else:
                    t = _branch_time(s, level, tp, s.t_end)
                # detuning form keeps precision next to the large absolute frequency
                freqs.append(float(s.detuning_from_final(t)) + (s.omega_f - a.omega_f))
            worst = max(worst, abs(freqs[0] - freqs[1]))
    return worst


def export_schedule_csv(s: PulseSchedule, freq_path, amp_path, n: int = 501) -> None:
    """Write ``(time_ns, freq_GHz)`` and ``(time_ns, amp_MHz)`` tables."""
    t = np.linspace(s.t_start, s.t_end, n)
    w, amp = s.sample(t)
    for path, header, values in ((freq_path, "freq_GHz", units.to_ghz(w)),
                                 (amp_path, "amp_MHz", units.to_mhz(amp))):
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["time_ns", header])
            for ti, v in zip(t, values):
                writer.writerow([f"{ti / units.NS:.9g}", f"{v:.12g}"])
