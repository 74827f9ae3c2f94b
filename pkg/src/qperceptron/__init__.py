"""Adiabatic quantum perceptron simulator.

Submodules: :mod:`numerics` (states, operators, RK4), :mod:`device`
(transmon-coupler Hamiltonian and ZZ coupling), :mod:`pulse` (chirp and
sech schedules), :mod:`dynamics` (gate propagation, Lindblad),
:mod:`analysis` (activation, fits, channels, negativity), :mod:`circuits`
(gate-model decomposition and cost table) and :mod:`cli`.
"""

from .kernels import BACKEND
from .device import DeviceParams, zz_numeric, zz_perturbative
from .pulse import PulseParams, make_schedule
from .dynamics import PerceptronConfig, perceptron_unitary, evolve_lindblad
from .analysis import activation_sweep, fit_activation, negativity
from .circuits import decompose_perceptron, gate_count, estimate

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DeviceParams", "zz_numeric", "zz_perturbative", "PulseParams", "make_schedule",
    "PerceptronConfig", "perceptron_unitary", "evolve_lindblad", "activation_sweep",
    "fit_activation", "negativity", "decompose_perceptron", "gate_count", "estimate",
]
