"""Dense complex linear algebra and fixed-step time stepping.

The containers here are thin, immutable wrappers around NumPy arrays that
carry the tensor-product structure (``dims``) alongside the entries. All
functions are pure; inputs are never modified.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

log = logging.getLogger(__name__)

#: Default bound on ``max(|detuning|, amplitude) * dt`` (radians per step).
MAX_PHASE_STEP = 0.01
MIN_STEPS = 200
MAX_STEPS = 2_000_000


class NumericsError(ValueError):
    """Raised for malformed operators or failed integration."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def _check_dims(dims: Iterable[int], size: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or math.prod(dims) != size:
        raise NumericsError(f"dims {dims} do not factor size {size}")
    return dims


@dataclass(frozen=True)
class QuantumState:
    """Pure state vector on a tensor product of subsystems."""

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        amps = _freeze(self.amplitudes).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", _check_dims(self.dims, amps.size))

    @classmethod
    def basis(cls, dims, index) -> "QuantumState":
        """Computational basis state; ``index`` is a flat index or a digit tuple."""
        dims = tuple(dims)
        if not isinstance(index, (int, np.integer)):
            index = int(np.ravel_multi_index(tuple(index), dims))
        v = np.zeros(math.prod(dims), dtype=complex)
        v[index] = 1.0
        return cls(v, dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density_matrix(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.dims)


@dataclass(frozen=True)
class Operator:
    """Square complex matrix; ``tag`` may be ``"hermitian"`` or ``"unitary"``."""

    entries: np.ndarray
    dims: tuple[int, ...]
    tag: str | None = None

    def __post_init__(self):
        m = _freeze(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NumericsError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dims", _check_dims(self.dims, m.shape[0]))
        if self.tag == "hermitian":
            if not is_hermitian(m, atol=1e-12):
                raise NumericsError("operator tagged hermitian is not Hermitian")
        elif self.tag == "unitary":
            if not is_unitary(m, atol=1e-8):
                raise NumericsError("operator tagged unitary is not unitary")
        elif self.tag is not None:
            raise NumericsError(f"unknown operator tag {self.tag!r}")

    @classmethod
    def identity(cls, dims) -> "Operator":
        dims = tuple(dims)
        return cls(np.eye(math.prod(dims)), dims, "unitary")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.entries @ other.entries, self.dims)
        if isinstance(other, QuantumState):
            return QuantumState(self.entries @ other.amplitudes, self.dims)
        return NotImplemented

    def dag(self) -> "Operator":
        return Operator(self.entries.conj().T, self.dims, self.tag)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    entries: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = _freeze(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NumericsError(f"density matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dims", _check_dims(self.dims, m.shape[0]))
        if not is_hermitian(m, atol=1e-10):
            raise NumericsError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-9:
            raise NumericsError(f"density matrix trace {tr!r} != 1")
        lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if lam[0] < -1e-9:
            raise NumericsError(f"density matrix has eigenvalue {lam[0]:.3e} < 0")

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))


def _entries(m) -> np.ndarray:
    if isinstance(m, (Operator, DensityMatrix)):
        return m.entries
    return np.asarray(m, dtype=complex)


def _dims_of(m) -> tuple[int, ...]:
    if isinstance(m, (Operator, DensityMatrix)):
        return m.dims
    return (np.asarray(m).shape[0],)


def is_hermitian(m, atol: float = 1e-12) -> bool:
    """Entrywise check of ``M == M^dagger``; ``atol`` is relative to ``max|M|``."""
    m = _entries(m)
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    return bool(np.abs(m - m.conj().T).max(initial=0.0) <= atol * scale)


def is_unitary(m, atol: float = 1e-8) -> bool:
    m = _entries(m)
    return bool(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max(initial=0.0) < atol)


def kron(a, b) -> Operator:
    """Kronecker product with the subsystem lists concatenated."""
    return Operator(np.kron(_entries(a), _entries(b)), _dims_of(a) + _dims_of(b))


def hermitian_eig(m) -> tuple[np.ndarray, Operator]:
    """Ascending eigenvalues and eigenvector columns of a Hermitian matrix.

    Each eigenvector is multiplied by a phase so that its largest-magnitude
    component is real and positive; this makes the output reproducible for
    state tracking.
    """
    a = _entries(m)
    if not is_hermitian(a, atol=1e-12):
        dev = float(np.abs(a - a.conj().T).max())
        raise NumericsError(f"hermitian_eig: input is not Hermitian (max |M - M^dag| = {dev:.3e})")
    if not np.all(np.isfinite(a)):
        raise NumericsError("hermitian_eig: input contains NaN or Inf")
    evals, evecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    lead = np.argmax(np.abs(evecs), axis=0)
    ph = evecs[lead, np.arange(evecs.shape[1])]
    evecs = evecs * (np.abs(ph) / ph)[None, :]
    return evals, Operator(evecs, _dims_of(m))


def schrodinger_rhs(h: np.ndarray, psi: np.ndarray) -> np.ndarray:
    return -1j * (h @ psi)


def evolve_step(h_of_t: Callable[[float], np.ndarray], state: QuantumState, t: float,
                dt: float) -> QuantumState:
    """One classical RK4 step of ``i d|psi>/dt = H(t)|psi>`` (hbar = 1).

    No renormalization is applied; norm drift is left visible.
    """
    if not dt > 0:
        raise NumericsError(f"dt must be positive, got {dt!r}")
    psi = state.amplitudes
    h0 = np.asarray(h_of_t(t), dtype=complex)
    h1 = np.asarray(h_of_t(t + 0.5 * dt), dtype=complex)
    h2 = np.asarray(h_of_t(t + dt), dtype=complex)
    for h in (h0, h1, h2):
        if not np.all(np.isfinite(h)):
            raise NumericsError(f"generator is not finite near t={t!r}")
    k1 = schrodinger_rhs(h0, psi)
    k2 = schrodinger_rhs(h1, psi + 0.5 * dt * k1)
    k3 = schrodinger_rhs(h1, psi + 0.5 * dt * k2)
    k4 = schrodinger_rhs(h2, psi + dt * k3)
    return QuantumState(psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4), state.dims)


def evolve(h_of_t, state: QuantumState, t0: float, t1: float, n_steps: int) -> QuantumState:
    """Repeated :func:`evolve_step` over ``[t0, t1]`` with ``n_steps`` equal steps."""
    dt = (t1 - t0) / n_steps
    for k in range(n_steps):
        state = evolve_step(h_of_t, state, t0 + k * dt, dt)
    return state


def choose_steps(duration: float, max_rate: float, max_phase_step: float = MAX_PHASE_STEP,
                 min_steps: int = MIN_STEPS, max_steps: int = MAX_STEPS) -> int:
    """Number of equal RK4 steps so that ``max_rate * dt <= max_phase_step``."""
    if not (np.isfinite(duration) and np.isfinite(max_rate)):
        raise NumericsError("non-finite duration or rate in step selection")
    n = max(min_steps, math.ceil(duration * max_rate / max_phase_step))
    if n > max_steps:
        log.warning("step count %d exceeds cap %d; clamping", n, max_steps)
        n = max_steps
    return int(n)


def _subsystem_axes(dims, which):
    n = len(dims)
    which = sorted({int(i) for i in which})
    if any(i < 0 or i >= n for i in which):
        raise NumericsError(f"subsystem indices {which} out of range for dims {dims}")
    return which


def partial_trace(rho, keep) -> DensityMatrix:
    """Reduced state on the subsystems listed in ``keep``."""
    m = _entries(rho)
    dims = _dims_of(rho)
    if isinstance(keep, (int, np.integer)):
        keep = [keep]
    keep = _subsystem_axes(dims, keep)
    n = len(dims)
    t = m.reshape(dims + dims)
    # trace out from the highest index so earlier axis numbers stay valid
    cur = n
    for i in reversed(range(n)):
        if i in keep:
            continue
        t = np.trace(t, axis1=i, axis2=i + cur)
        cur -= 1
    kd = tuple(dims[i] for i in keep)
    size = math.prod(kd)
    return DensityMatrix(t.reshape(size, size), kd)


def partial_transpose(rho, subsystem) -> Operator:
    """Transpose of ``rho`` on ``subsystem`` (an index, or an index collection).

    For more than two subsystems the transposed set must be given explicitly
    as a collection.
    """
    m = _entries(rho)
    dims = _dims_of(rho)
    if isinstance(subsystem, (int, np.integer)):
        if len(dims) > 2:
            raise NumericsError(
                f"{len(dims)} subsystems: pass an explicit collection of indices to transpose")
        subsystem = [subsystem]
    which = _subsystem_axes(dims, subsystem)
    n = len(dims)
    t = m.reshape(dims + dims)
    axes = list(range(2 * n))
    for i in which:
        axes[i], axes[i + n] = axes[i + n], axes[i]
    out = t.transpose(axes).reshape(m.shape)
    return Operator(out, dims)
