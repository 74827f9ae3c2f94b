# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 kernels for the rotating-frame output-qubit dynamics.

Both kernels take the drive sampled on a half-step grid of length
``2 * n_steps + 1``: entry ``2k`` is the start of step ``k``, ``2k + 1`` its
midpoint. ``base`` is the drive detuning measured from the final drive
frequency, ``amp`` the Rabi amplitude. A block with offset ``o`` sees the
Hamiltonian ``-(base + o) |1><1| + (amp / 2) sigma_x``.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _tl_rhs(double complex p0, double complex p1, double d, double a,
                         double complex *k0, double complex *k1) noexcept nogil:
    # d/dt psi = -i H psi
    cdef double h = 0.5 * a
    k0[0] = -1j * (h * p1)
    k1[0] = -1j * (h * p0 - d * p1)


def propagate_two_level(const double[::1] base, const double[::1] amp,
                        const double[::1] offsets, double dt):
    """Propagators of shape ``(len(offsets), 2, 2)``, one per detuning offset."""
    cdef Py_ssize_t n_samples = base.shape[0]
    cdef Py_ssize_t n_steps = (n_samples - 1) // 2
    cdef Py_ssize_t m = offsets.shape[0]
    out = np.empty((m, 2, 2), dtype=np.complex128)
    cdef double complex[:, :, ::1] res = out
    cdef Py_ssize_t j, col, k, i0
    cdef double off, d0, d1, d2, a0, a1, a2
    cdef double complex p0, p1, q0, q1
    cdef double complex k10, k11, k20, k21, k30, k31, k40, k41
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0

    with nogil:
        for j in range(m):
            off = offsets[j]
            for col in range(2):
                if col == 0:
                    p0 = 1.0
                    p1 = 0.0
                else:
                    p0 = 0.0
                    p1 = 1.0
                for k in range(n_steps):
                    i0 = 2 * k
                    d0 = base[i0] + off
                    d1 = base[i0 + 1] + off
                    d2 = base[i0 + 2] + off
                    a0 = amp[i0]
                    a1 = amp[i0 + 1]
                    a2 = amp[i0 + 2]
                    _tl_rhs(p0, p1, d0, a0, &k10, &k11)
                    q0 = p0 + half * k10
                    q1 = p1 + half * k11
                    _tl_rhs(q0, q1, d1, a1, &k20, &k21)
                    q0 = p0 + half * k20
                    q1 = p1 + half * k21
                    _tl_rhs(q0, q1, d1, a1, &k30, &k31)
                    q0 = p0 + dt * k30
                    q1 = p1 + dt * k31
                    _tl_rhs(q0, q1, d2, a2, &k40, &k41)
                    p0 = p0 + sixth * (k10 + 2.0 * k20 + 2.0 * k30 + k40)
                    p1 = p1 + sixth * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
                res[j, 0, col] = p0
                res[j, 1, col] = p1
    return out


cdef void _lindblad_rhs(double complex[:, ::1] rho, double complex[:, ::1] heff,
                        double complex[:, :, ::1] jumps, double complex[:, ::1] out,
                        double complex[:, ::1] tmp) noexcept nogil:
    # out = -i (Heff rho - rho Heff^dagger) + sum_k L rho L^dagger
    cdef Py_ssize_t d = rho.shape[0]
    cdef Py_ssize_t nj = jumps.shape[0]
    cdef Py_ssize_t a, b, c, k
    cdef double complex s
    for a in range(d):
        for b in range(d):
            s = 0.0
            for c in range(d):
                s = s + heff[a, c] * rho[c, b] - rho[a, c] * heff[b, c].conjugate()
            out[a, b] = -1j * s
    for k in range(nj):
        for a in range(d):
            for b in range(d):
                s = 0.0
                for c in range(d):
                    s = s + jumps[k, a, c] * rho[c, b]
                tmp[a, b] = s
        for a in range(d):
            for b in range(d):
                s = 0.0
                for c in range(d):
                    s = s + tmp[a, c] * jumps[k, b, c].conjugate()
                out[a, b] = out[a, b] + s


cdef void _fill_heff(double complex[:, ::1] heff, double complex[:, ::1] decay,
                     const double[::1] block_offsets, double base, double amp) noexcept nogil:
    cdef Py_ssize_t d = heff.shape[0]
    cdef Py_ssize_t a, b, x
    for a in range(d):
        for b in range(d):
            heff[a, b] = -0.5j * decay[a, b]
    for x in range(block_offsets.shape[0]):
        heff[2 * x, 2 * x + 1] = heff[2 * x, 2 * x + 1] + 0.5 * amp
        heff[2 * x + 1, 2 * x] = heff[2 * x + 1, 2 * x] + 0.5 * amp
        heff[2 * x + 1, 2 * x + 1] = heff[2 * x + 1, 2 * x + 1] - (base + block_offsets[x])


def lindblad_rk4(const double[::1] base, const double[::1] amp,
                 const double[::1] block_offsets, jumps_in, rho0_in, double dt):
    """Evolve a batch of ``d x d`` matrices, ``d = 2 * len(block_offsets)``."""
    cdef double complex[:, :, ::1] jumps = np.ascontiguousarray(jumps_in, dtype=np.complex128)
    rho_all = np.array(rho0_in, dtype=np.complex128, order="C", copy=True)
    cdef double complex[:, :, ::1] rhos = rho_all
    cdef Py_ssize_t d = rhos.shape[1]
    cdef Py_ssize_t n_steps = (base.shape[0] - 1) // 2
    cdef Py_ssize_t m = rhos.shape[0]
    decay_np = np.zeros((d, d), dtype=np.complex128)
    for L in np.asarray(jumps_in, dtype=np.complex128):
        decay_np += L.conj().T @ L
    cdef double complex[:, ::1] decay = decay_np
    cdef double complex[:, ::1] h0 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] h1 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] h2 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] k1 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] k2 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] k3 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] k4 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] q = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] tmp = np.empty((d, d), dtype=np.complex128)
    cdef Py_ssize_t j, k, a, b, i0
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0

    with nogil:
        for k in range(n_steps):
            i0 = 2 * k
            _fill_heff(h0, decay, block_offsets, base[i0], amp[i0])
            _fill_heff(h1, decay, block_offsets, base[i0 + 1], amp[i0 + 1])
            _fill_heff(h2, decay, block_offsets, base[i0 + 2], amp[i0 + 2])
            for j in range(m):
                _lindblad_rhs(rhos[j], h0, jumps, k1, tmp)
                for a in range(d):
                    for b in range(d):
                        q[a, b] = rhos[j, a, b] + half * k1[a, b]
                _lindblad_rhs(q, h1, jumps, k2, tmp)
                for a in range(d):
                    for b in range(d):
                        q[a, b] = rhos[j, a, b] + half * k2[a, b]
                _lindblad_rhs(q, h1, jumps, k3, tmp)
                for a in range(d):
                    for b in range(d):
                        q[a, b] = rhos[j, a, b] + dt * k3[a, b]
                _lindblad_rhs(q, h2, jumps, k4, tmp)
                for a in range(d):
                    for b in range(d):
                        rhos[j, a, b] = rhos[j, a, b] + sixth * (
                            k1[a, b] + 2.0 * k2[a, b] + 2.0 * k3[a, b] + k4[a, b])
    return rho_all
