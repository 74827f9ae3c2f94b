"""Rotating-frame dynamics of the perceptron output qubit.

In the frame co-rotating with the instantaneous drive phase, the output
qubit sees

    H(t) = -Delta(t) |1><1| + (Omega(t) / 2) (|0><1| + |1><0|),

with ``Delta(t) = omega_p(t) - omega_q,eff``. Input qubits in state ``x``
shift the output frequency to ``omega_q,eff = omega_q - sum_j w_j x_j``, so
the final detuning is ``Delta(T) = sum_j w_j x_j + b``. The N-input gate is
block diagonal with one 2x2 block per input bitstring; input qubits come
first in the tensor ordering, the output qubit last.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels, units
from .numerics import (MAX_PHASE_STEP, DensityMatrix, NumericsError, Operator, QuantumState,
                       choose_steps, is_unitary)
from .pulse import PulseParams, PulseSchedule, make_schedule

MAX_INPUTS = 12
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |0><1|
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PerceptronConfig:
    """Gate instance: weights and bias in rad/s, plus the pulse shape.

    The bias is primary: the pulse is re-anchored so that it ends at
    ``omega_q + bias_b``, keeping the pulse's own span and shape.
    """

    weights: tuple[float, ...] = ()
    bias_b: float = 0.0
    pulse: PulseParams = field(default_factory=PulseParams)
    omega_q: float = 6.189 * units.GHZ

    def __post_init__(self):
        w = tuple(float(v) for v in np.atleast_1d(np.asarray(self.weights, dtype=float)))
        object.__setattr__(self, "weights", w)
        if len(w) > MAX_INPUTS:
            raise ConfigError(f"at most {MAX_INPUTS} inputs supported, got {len(w)}")
        if not all(math.isfinite(v) for v in w + (self.bias_b,)):
            raise ConfigError("weights and bias must be finite")

    @property
    def n_inputs(self) -> int:
        return len(self.weights)

    @property
    def anchored_pulse(self) -> PulseParams:
        return self.pulse.with_final(self.omega_q + self.bias_b)

    def schedule(self) -> PulseSchedule:
        return make_schedule(self.anchored_pulse)

    def bitstrings(self):
        return list(itertools.product((0, 1), repeat=self.n_inputs))

    def final_detuning(self, x: Sequence[int]) -> float:
        if len(x) != self.n_inputs:
            raise ConfigError(f"bitstring {x} does not match {self.n_inputs} inputs")
        return self.bias_b + sum(w * int(b) for w, b in zip(self.weights, x))


@dataclass(frozen=True)
class EffectiveTwoLevelFrame:
    """Detuning and drive amplitude seen by the output qubit."""

    schedule: PulseSchedule
    final_detuning: float

    @classmethod
    def for_input(cls, cfg: PerceptronConfig, x: Sequence[int] = ()) -> "EffectiveTwoLevelFrame":
        return cls(cfg.schedule(), cfg.final_detuning(tuple(x)))

    @property
    def t_start(self) -> float:
        return self.schedule.t_start

    @property
    def t_end(self) -> float:
        return self.schedule.t_end

    def detuning(self, t):
        return self.final_detuning + self.schedule.detuning_from_final(t)

    def amplitude(self, t):
        return self.schedule.amplitude(t)

    def hamiltonian(self, t) -> np.ndarray:
        d = float(self.detuning(t))
        a = 0.5 * float(self.amplitude(t))
        return np.array([[0.0, a], [a, -d]], dtype=complex)


def _half_step_samples(schedule: PulseSchedule, n_steps: int):
    t = np.linspace(schedule.t_start, schedule.t_end, 2 * n_steps + 1)
    base = np.ascontiguousarray(schedule.detuning_from_final(t), dtype=float)
    amp = np.ascontiguousarray(schedule.amplitude(t), dtype=float)
    if not (np.all(np.isfinite(base)) and np.all(np.isfinite(amp))):
        raise NumericsError("drive schedule produced NaN or Inf")
    return base, amp


def step_count(schedule: PulseSchedule, offsets, extra_rate: float = 0.0,
               max_phase_step: float = MAX_PHASE_STEP) -> int:
    """Steps such that ``max(|Delta|, Omega) * dt <= max_phase_step``."""
    probe = np.linspace(schedule.t_start, schedule.t_end, 4001)
    base = schedule.detuning_from_final(probe)
    off = np.asarray(offsets, dtype=float)
    max_det = float(np.max(np.abs(base))) + float(np.max(np.abs(off), initial=0.0))
    rate = max(max_det, float(np.max(schedule.amplitude(probe)))) + extra_rate
    return choose_steps(schedule.duration, rate, max_phase_step)


def propagators(schedule: PulseSchedule, final_detunings, n_steps: int | None = None,
                max_phase_step: float = MAX_PHASE_STEP) -> np.ndarray:
    """2x2 propagators, one per final detuning, all on the same time grid."""
    offs = np.ascontiguousarray(np.atleast_1d(final_detunings), dtype=float)
    if n_steps is None:
        n_steps = step_count(schedule, offs, max_phase_step=max_phase_step)
    base, amp = _half_step_samples(schedule, int(n_steps))
    dt = schedule.duration / n_steps
    u = kernels.propagate_two_level(base, amp, offs, dt)
    if not np.all(np.isfinite(u)):
        raise NumericsError("two-level integration diverged")
    return u


def evolve_two_level(frame: EffectiveTwoLevelFrame, initial: QuantumState,
                     n_steps: int | None = None,
                     max_phase_step: float = MAX_PHASE_STEP) -> tuple[QuantumState, Operator]:
    """Final state and propagator of the driven output qubit."""
    if initial.amplitudes.size != 2:
        raise ConfigError("evolve_two_level needs a single-qubit state")
    u = propagators(frame.schedule, [frame.final_detuning], n_steps, max_phase_step)[0]
    op = Operator(u, (2,), "unitary")
    return op @ initial, op


def perceptron_blocks(cfg: PerceptronConfig, n_steps: int | None = None,
                      max_phase_step: float = MAX_PHASE_STEP) -> np.ndarray:
    """Blocks ``V(x)`` of shape ``(2**N, 2, 2)`` in binary order of ``x``."""
    offs = [cfg.final_detuning(x) for x in cfg.bitstrings()]
    return propagators(cfg.schedule(), offs, n_steps, max_phase_step)


def block_diagonal(blocks: np.ndarray) -> np.ndarray:
    nb = blocks.shape[0]
    u = np.zeros((2 * nb, 2 * nb), dtype=complex)
    for k in range(nb):
        u[2 * k:2 * k + 2, 2 * k:2 * k + 2] = blocks[k]
    return u


def perceptron_unitary(cfg: PerceptronConfig, n_steps: int | None = None,
                       max_phase_step: float = MAX_PHASE_STEP) -> Operator:
    """Block-diagonal gate on ``N`` input qubits followed by the output qubit."""
    u = block_diagonal(perceptron_blocks(cfg, n_steps, max_phase_step))
    if not is_unitary(u, atol=1e-7):
        raise NumericsError("assembled perceptron gate is not unitary within 1e-7")
    return Operator(u, (2,) * cfg.n_inputs + (2,))


# --- open-system evolution ---------------------------------------------------

def _rates(times, n_qubits, name):
    if times is None:
        return [0.0] * n_qubits
    times = list(np.broadcast_to(np.asarray(times, dtype=float), (n_qubits,)))
    if any(not t > 0 for t in times):
        raise ConfigError(f"{name} must be positive (use inf for no decay)")
    return [0.0 if math.isinf(t) else 1.0 / t for t in times]


def collapse_operators(n_qubits: int, t1_times=None, t_phi_times=None) -> np.ndarray:
    """Amplitude damping ``sqrt(1/T1) sigma-`` and pure dephasing ``sqrt(1/2Tphi) sigma_z``.

    Qubit 0 is the first tensor factor; the output qubit is last.
    """
    ops = []
    for rates, single in ((_rates(t1_times, n_qubits, "t1_times"), SIGMA_MINUS),
                          (_rates(t_phi_times, n_qubits, "t_phi_times"), SIGMA_Z)):
        for q, g in enumerate(rates):
            if g == 0.0:
                continue
            factors = [np.eye(2)] * n_qubits
            factors[q] = single
            op = factors[0]
            for f in factors[1:]:
                op = np.kron(op, f)
            scale = math.sqrt(g) if single is SIGMA_MINUS else math.sqrt(0.5 * g)
            ops.append(scale * op)
    d = 2**n_qubits
    return np.array(ops, dtype=complex).reshape(len(ops), d, d)


def lindblad_batch(cfg: PerceptronConfig, rhos: np.ndarray, t1_times=None, t_phi_times=None,
                   n_steps: int | None = None,
                   max_phase_step: float = MAX_PHASE_STEP) -> np.ndarray:
    """Evolve a stack of (not necessarily physical) matrices under the master equation."""
    nq = cfg.n_inputs + 1
    jumps = collapse_operators(nq, t1_times, t_phi_times)
    schedule = cfg.schedule()
    offs = np.ascontiguousarray([cfg.final_detuning(x) for x in cfg.bitstrings()], dtype=float)
    if n_steps is None:
        extra = sum(float(np.linalg.norm(L, 2)) ** 2 for L in jumps)
        n_steps = step_count(schedule, offs, extra_rate=extra, max_phase_step=max_phase_step)
    base, amp = _half_step_samples(schedule, int(n_steps))
    rhos = np.ascontiguousarray(rhos, dtype=complex)
    out = kernels.lindblad_rk4(base, amp, offs, jumps, rhos, schedule.duration / n_steps)
    if not np.all(np.isfinite(out)):
        raise NumericsError("Lindblad integration diverged")
    return out


def evolve_lindblad(cfg: PerceptronConfig, rho0: DensityMatrix, t1_times=None,
                    t_phi_times=None, n_steps: int | None = None,
                    max_phase_step: float = MAX_PHASE_STEP) -> DensityMatrix:
    """Final state of the input+output register with amplitude damping (and optional dephasing).

    ``t1_times`` gives one T1 per qubit (inputs first, output last); a scalar
    applies to all, ``inf`` switches decay off.
    """
    d = 2 ** (cfg.n_inputs + 1)
    if rho0.entries.shape != (d, d):
        raise ConfigError(f"rho0 must be {d}x{d} for {cfg.n_inputs} input(s)")
    out = lindblad_batch(cfg, rho0.entries[None], t1_times, t_phi_times, n_steps,
                         max_phase_step)[0]
    return DensityMatrix(out, rho0.dims)
