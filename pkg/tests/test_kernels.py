import os
import subprocess
import sys

import numpy as np
import pytest

from qperceptron import _kernels_py, kernels, units
from qperceptron.dynamics import PerceptronConfig, _half_step_samples, collapse_operators

compiled = pytest.importorskip("qperceptron._kernels")


@pytest.fixture(scope="module")
def samples():
    cfg = PerceptronConfig(weights=(-5.2 * units.MHZ,), bias_b=2.0 * units.MHZ)
    sched = cfg.schedule()
    n = 3000
    base, amp = _half_step_samples(sched, n)
    return cfg, base, amp, sched.duration / n


def test_default_backend_is_compiled():
    assert kernels.BACKEND == "compiled"


def test_two_level_backends_agree(samples):
    _, base, amp, dt = samples
    offs = np.linspace(-10, 10, 9) * units.MHZ
    a = compiled.propagate_two_level(base, amp, offs, dt)
    b = _kernels_py.propagate_two_level(base, amp, offs, dt)
    assert np.abs(a - b).max() < 1e-13


def test_lindblad_backends_agree(samples):
    cfg, base, amp, dt = samples
    offs = np.array([cfg.final_detuning(x) for x in cfg.bitstrings()])
    jumps = collapse_operators(2, 20e-6, 15e-6)
    rho = np.zeros((16, 4, 4), dtype=complex)
    for k in range(16):
        rho[k, k // 4, k % 4] = 1
    a = compiled.lindblad_rk4(base, amp, offs, jumps, rho, dt)
    b = _kernels_py.lindblad_rk4(base, amp, offs, jumps, rho, dt)
    assert np.abs(a - b).max() < 1e-12


def test_lindblad_without_jumps_matches_two_level(samples):
    # RK4 on rho and on U differ at O(dt^4), so use a production-density grid
    cfg = samples[0]
    sched = cfg.schedule()
    n = 90_000
    base, amp = _half_step_samples(sched, n)
    dt = sched.duration / n
    offs = np.array([cfg.final_detuning(x) for x in cfg.bitstrings()])
    u = compiled.propagate_two_level(base, amp, offs, dt)
    big = np.zeros((4, 4), dtype=complex)
    big[:2, :2], big[2:, 2:] = u
    rho = np.full((1, 4, 4), 0.25, dtype=complex)
    out = compiled.lindblad_rk4(base, amp, offs, np.zeros((0, 4, 4), complex), rho, dt)[0]
    # ~1e-9 here, scaling as dt^4 (1e-3 at 3000 steps)
    assert np.abs(out - big @ rho[0] @ big.conj().T).max() < 1e-8


def test_env_var_forces_fallback():
    env = dict(os.environ, QPERCEPTRON_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import qperceptron; print(qperceptron.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
