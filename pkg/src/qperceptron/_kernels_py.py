"""Pure NumPy versions of the compiled RK4 kernels.

Same call signatures and sampling conventions as ``_kernels.pyx``; the batch
dimension is vectorized instead of looped.
"""

import numpy as np


def propagate_two_level(base, amp, offsets, dt):
    """Propagators of shape ``(len(offsets), 2, 2)``, one per detuning offset."""
    base = np.asarray(base, dtype=float)
    amp = np.asarray(amp, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    n_steps = (base.shape[0] - 1) // 2
    m = offsets.shape[0]
    # columns of U: psi[:, 0, :] is |0>-amplitude, psi[:, 1, :] is |1>-amplitude
    psi = np.zeros((m, 2, 2), dtype=complex)
    psi[:, 0, 0] = 1.0
    psi[:, 1, 1] = 1.0

    def rhs(p, d, a):
        h = 0.5 * a
        out = np.empty_like(p)
        out[:, 0, :] = -1j * (h * p[:, 1, :])
        out[:, 1, :] = -1j * (h * p[:, 0, :] - d[:, None] * p[:, 1, :])
        return out

    half = 0.5 * dt
    for k in range(n_steps):
        i0 = 2 * k
        d0 = base[i0] + offsets
        d1 = base[i0 + 1] + offsets
        d2 = base[i0 + 2] + offsets
        k1 = rhs(psi, d0, amp[i0])
        k2 = rhs(psi + half * k1, d1, amp[i0 + 1])
        k3 = rhs(psi + half * k2, d1, amp[i0 + 1])
        k4 = rhs(psi + dt * k3, d2, amp[i0 + 2])
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi


def _heff(decay, block_offsets, base, amp):
    h = -0.5j * decay
    for x, off in enumerate(block_offsets):
        h[2 * x, 2 * x + 1] += 0.5 * amp
        h[2 * x + 1, 2 * x] += 0.5 * amp
        h[2 * x + 1, 2 * x + 1] -= base + off
    return h


def lindblad_rk4(base, amp, block_offsets, jumps, rho0, dt):
    """Evolve a batch of ``d x d`` matrices, ``d = 2 * len(block_offsets)``."""
    base = np.asarray(base, dtype=float)
    amp = np.asarray(amp, dtype=float)
    block_offsets = np.asarray(block_offsets, dtype=float)
    jumps = np.asarray(jumps, dtype=complex)
    rho = np.array(rho0, dtype=complex, copy=True)
    d = rho.shape[1]
    decay = np.zeros((d, d), dtype=complex)
    for L in jumps:
        decay += L.conj().T @ L
    jumps_dag = jumps.conj().transpose(0, 2, 1)
    n_steps = (base.shape[0] - 1) // 2

    def rhs(r, h):
        out = -1j * (h @ r - r @ h.conj().T)
        for L, Ld in zip(jumps, jumps_dag):
            out += L @ r @ Ld
        return out

    half = 0.5 * dt
    for k in range(n_steps):
        i0 = 2 * k
        h0 = _heff(decay, block_offsets, base[i0], amp[i0])
        h1 = _heff(decay, block_offsets, base[i0 + 1], amp[i0 + 1])
        h2 = _heff(decay, block_offsets, base[i0 + 2], amp[i0 + 2])
        k1 = rhs(rho, h0)
        k2 = rhs(rho + half * k1, h1)
        k3 = rhs(rho + half * k2, h1)
        k4 = rhs(rho + dt * k3, h2)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho
