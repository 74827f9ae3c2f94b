"""Derived quantities: activation curves, analytic fits, channel metrics, negativity."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import units
from .dynamics import PerceptronConfig, lindblad_batch, propagators, step_count
from .numerics import MAX_PHASE_STEP, DensityMatrix, Operator, partial_transpose
from .pulse import PulseParams


class AnalysisError(ValueError):
    pass


class FitError(AnalysisError):
    """Fit did not converge; ``best`` holds the best parameters found."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


# --- activation curves -------------------------------------------------------

@dataclass(frozen=True)
class ActivationCurve:
    bias_points: np.ndarray
    populations: np.ndarray
    pulse: PulseParams
    input_string: tuple[int, ...] = ()

    def __post_init__(self):
        b = np.asarray(self.bias_points, dtype=float)
        p = np.asarray(self.populations, dtype=float)
        if b.shape != p.shape:
            raise AnalysisError("bias_points and populations differ in length")
        if np.any(p < -1e-9) or np.any(p > 1 + 1e-9):
            raise AnalysisError("populations outside [0, 1]")
        object.__setattr__(self, "bias_points", b)
        object.__setattr__(self, "populations", p)
        object.__setattr__(self, "input_string", tuple(int(v) for v in self.input_string))

    @property
    def label(self) -> str:
        return "".join(str(v) for v in self.input_string) or "-"


def activation_sweep(cfg: PerceptronConfig, bias_grid, input_string: Sequence[int] = (),
                     n_steps: int | None = None,
                     max_phase_step: float = MAX_PHASE_STEP) -> ActivationCurve:
    """Excited population of the output qubit, started in |0>, versus bias."""
    bias = np.asarray(bias_grid, dtype=float)
    if bias.ndim != 1 or bias.size == 0 or np.any(np.diff(bias) <= 0):
        raise AnalysisError("bias grid must be a non-empty ascending vector")
    x = tuple(input_string)
    shift = cfg.final_detuning(x) - cfg.bias_b
    u = propagators(cfg.schedule(), bias + shift, n_steps, max_phase_step)
    pops = np.clip(np.abs(u[:, 1, 0]) ** 2, 0.0, 1.0)
    return ActivationCurve(bias, pops, cfg.pulse, x)


def level_crossing(curve: ActivationCurve, level: float) -> float:
    """Bias where the population first reaches ``level`` (linear interpolation)."""
    b, p = curve.bias_points, curve.populations
    above = np.nonzero(p >= level)[0]
    if above.size == 0 or above[0] == 0:
        raise AnalysisError(f"curve does not cross population {level} inside the grid")
    k = above[0]
    return float(b[k - 1] + (level - p[k - 1]) * (b[k] - b[k - 1]) / (p[k] - p[k - 1]))


def rise_width(curve: ActivationCurve, lo: float = 0.1, hi: float = 0.9) -> float:
    """Bias interval between the 10% and 90% population crossings."""
    return level_crossing(curve, hi) - level_crossing(curve, lo)


def weight_sweep(cfg: PerceptronConfig, weight_grid, n_steps: int | None = None,
                 max_phase_step: float = MAX_PHASE_STEP):
    """Output populations for input 0 and input 1 of a one-input perceptron versus weight.

    Each weight defines its own gate, whose two blocks are propagated
    independently; all gates share one time grid so the columns are
    comparable point by point. Returns ``(pop0, pop1, n_steps)``.
    """
    w = np.asarray(weight_grid, dtype=float)
    if w.ndim != 1 or w.size < 2 or not np.all(np.diff(w) > 0):
        raise AnalysisError("weight grid needs at least two ascending points")
    if cfg.n_inputs != 1:
        raise AnalysisError("weight sweep needs a one-input perceptron")
    gates = [replace(cfg, weights=(float(wk),)) for wk in w]
    offsets = np.array([[g.final_detuning((0,)), g.final_detuning((1,))] for g in gates])
    schedule = cfg.schedule()
    if n_steps is None:
        n_steps = step_count(schedule, offsets.ravel(), max_phase_step=max_phase_step)
    u = propagators(schedule, offsets.ravel(), n_steps).reshape(w.size, 2, 2, 2)
    pops = np.clip(np.abs(u[:, :, 1, 0]) ** 2, 0.0, 1.0)
    return pops[:, 0], pops[:, 1], int(n_steps)


# --- analytic sech-pulse transfer ---------------------------------------------

def _log_sech(a):
    a = np.abs(a)
    return math.log(2.0) - a - np.log1p(np.exp(-2.0 * a))


def analytic_transfer(omega_i_det, delta_f, omega0, T):
    """Closed-form population transfer of the chirped sech pulse.

    ``sech[(w_i + D) T/2] sech[(w_i - D) T/2] (sin^2(sqrt(W0^2 + D^2) T/2)
    + sinh^2(D T/2))`` with all frequencies angular. Evaluated in log form so
    large arguments do not overflow. Values within 1e-9 of [0, 1] are clipped;
    anything further out raises.
    """
    wi = np.asarray(omega_i_det, dtype=float)
    d = np.asarray(delta_f, dtype=float)
    a1 = (wi + d) * T / 2
    a2 = (wi - d) * T / 2
    h = np.abs(d * T / 2)
    log_pref = _log_sech(a1) + _log_sech(a2)
    sin_term = np.sin(np.sqrt(omega0**2 + d**2) * T / 2) ** 2
    # sinh^2(h) = exp(2h) (1 - exp(-2h))^2 / 4
    sinh_part = np.exp(log_pref + 2 * h - math.log(4.0)) * (-np.expm1(-2 * h)) ** 2
    p = np.exp(log_pref) * sin_term + sinh_part
    if np.any(~np.isfinite(p)) or np.any(p < -1e-9) or np.any(p > 1 + 1e-9):
        raise AnalysisError(
            f"formula out of range: P={p!r} for omega_i={wi!r}, delta_f={d!r}, "
            f"omega0={omega0!r}, T={T!r}")
    p = np.clip(p, 0.0, 1.0)
    return p if p.ndim else float(p)


def activation_model(bias, t_fit: float, delta: float, span: float, omega0: float):
    """Analytic activation curve for a sweep of total excursion ``span``.

    The sweep is written as a centre detuning ``bias - span/2`` (shifted by
    ``delta``) plus a half-excursion ``span/2``; the transfer formula then
    rises from 0 to 1 around ``bias = -delta`` with width ``~1/t_fit``.
    """
    bias = np.asarray(bias, dtype=float)
    return analytic_transfer(bias - 0.5 * span + delta, 0.5 * span, omega0, t_fit)


@dataclass(frozen=True)
class FitResult:
    t_fit: float
    delta_offset: float
    residual_rms: float
    iterations: int = 0

    def __post_init__(self):
        if not self.t_fit > 0:
            raise AnalysisError(f"t_fit must be positive, got {self.t_fit!r}")


def _fit_objective(curve: ActivationCurve):
    T0 = curve.pulse.duration_T
    span, omega0 = curve.pulse.span, curve.pulse.omega0
    b, p = curve.bias_points, curve.populations

    def sse(z):
        t_fit = z[0] * T0
        if t_fit <= 0:
            return 1e6
        return float(np.sum((activation_model(b, t_fit, z[1] / T0, span, omega0) - p) ** 2))

    return sse


def fit_activation(curve: ActivationCurve, max_iter: int = 2000, tol: float = 1e-10) -> FitResult:
    """Least-squares fit of :func:`activation_model` with free ``(t_fit, delta)``.

    Nelder-Mead in the scaled coordinates ``(t_fit / T, delta * T)`` started
    from ``(1, 0)``.
    """
    p = curve.populations
    if not (p.min() < 0.2 and p.max() > 0.8):
        raise AnalysisError("curve must span both plateaus (min < 0.2, max > 0.8) to be fitted")
    T0 = curve.pulse.duration_T
    sse = _fit_objective(curve)
    res = minimize(sse, x0=np.array([1.0, 0.0]), method="Nelder-Mead",
                   options={"maxiter": max_iter, "xatol": tol, "fatol": tol * max(sse([1.0, 0.0]), 1e-30),
                            "initial_simplex": np.array([[1.0, 0.0], [1.1, 0.0], [1.0, 0.5]])})
    rms = math.sqrt(res.fun / p.size)
    best = FitResult(float(res.x[0] * T0), float(res.x[1] / T0), rms, int(res.nit))
    if not res.success:
        raise FitError(f"fit did not converge after {res.nit} iterations: {res.message}", best)
    return best


def fitted_curve(curve: ActivationCurve, fit: FitResult) -> np.ndarray:
    return activation_model(curve.bias_points, fit.t_fit, fit.delta_offset, curve.pulse.span,
                            curve.pulse.omega0)


# --- channels ----------------------------------------------------------------

def _matrix_units(d: int) -> np.ndarray:
    e = np.zeros((d * d, d, d), dtype=complex)
    for k in range(d * d):
        e[k, k // d, k % d] = 1.0
    return e


class QuantumChannel:
    """Linear map on ``d x d`` matrices stored as its images of the matrix units.

    ``images[k]`` is ``M(|i><j|)`` with ``k = i * d + j``. For the perceptron
    the ordering is (input qubit, output qubit).
    """

    def __init__(self, images, dims=(2, 2)):
        images = np.array(images, dtype=complex)
        d = math.prod(dims)
        if images.shape != (d * d, d, d):
            raise AnalysisError(f"expected images of shape {(d * d, d, d)}, got {images.shape}")
        images.setflags(write=False)
        self.images = images
        self.dims = tuple(dims)
        self.dim = d

    def __call__(self, rho):
        r = rho.entries if isinstance(rho, (DensityMatrix, Operator)) else np.asarray(rho)
        return np.einsum("ij,ijab->ab", r, self.images.reshape(self.dim, self.dim, self.dim,
                                                                self.dim))

    def choi(self) -> np.ndarray:
        """``sum_ij |i><j| (x) M(|i><j|)``; positive semidefinite iff the map is CP."""
        d = self.dim
        c = np.zeros((d * d, d * d), dtype=complex)
        for k in range(d * d):
            i, j = divmod(k, d)
            c[i * d:(i + 1) * d, j * d:(j + 1) * d] = self.images[k]
        return c

    def trace_deviation(self) -> float:
        d = self.dim
        traces = np.trace(self.images, axis1=1, axis2=2).reshape(d, d)
        return float(np.abs(traces - np.eye(d)).max())

    def hermiticity_deviation(self) -> float:
        d = self.dim
        im = self.images.reshape(d, d, d, d)
        return float(np.abs(im - im.transpose(1, 0, 3, 2).conj()).max())

    def min_choi_eigenvalue(self) -> float:
        c = self.choi()
        return float(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0])

    def validate(self, tp_tol=1e-8, herm_tol=1e-8, cp_tol=1e-7) -> "QuantumChannel":
        if self.trace_deviation() > tp_tol:
            raise AnalysisError(f"channel not trace preserving ({self.trace_deviation():.2e})")
        if self.hermiticity_deviation() > herm_tol:
            raise AnalysisError("channel not Hermiticity preserving")
        if self.min_choi_eigenvalue() < -cp_tol:
            raise AnalysisError(f"channel not completely positive ({self.min_choi_eigenvalue():.2e})")
        return self


def channel_from_unitary(u) -> QuantumChannel:
    """Channel ``rho -> U rho U^dagger``."""
    m = u.entries if isinstance(u, Operator) else np.asarray(u, dtype=complex)
    dims = u.dims if isinstance(u, Operator) else (2,) * int(round(math.log2(m.shape[0])))
    e = _matrix_units(m.shape[0])
    return QuantumChannel(m[None] @ e @ m.conj().T[None], dims).validate()


def channel_from_lindblad(cfg: PerceptronConfig, t1_times=None, t_phi_times=None,
                          n_steps: int | None = None,
                          max_phase_step: float = MAX_PHASE_STEP) -> QuantumChannel:
    """Process of the open-system perceptron, built from the evolved matrix units."""
    d = 2 ** (cfg.n_inputs + 1)
    images = lindblad_batch(cfg, _matrix_units(d), t1_times, t_phi_times, n_steps, max_phase_step)
    return QuantumChannel(images, (2,) * (cfg.n_inputs + 1)).validate()


_KET0 = np.array([1.0, 0.0], dtype=complex)
_KET1 = np.array([0.0, 1.0], dtype=complex)


def avg_controlled_fidelity(m: QuantumChannel) -> float:
    """How well the input qubit is left in its basis state, averaged over outputs.

    ``(1/2) sum_i Tr[(|i><i| (x) 1) M(|i><i| (x) 1/2)]``.
    """
    if m.dims != (2, 2):
        raise AnalysisError("controlled-gate fidelity is defined for (input, output) qubit pairs")
    total = 0.0
    for ket in (_KET0, _KET1):
        proj = np.kron(np.outer(ket, ket.conj()), np.eye(2))
        total += np.real(np.trace(proj @ m(np.kron(np.outer(ket, ket.conj()), np.eye(2) / 2))))
    return float(total / 2)


def pauli_eigenstates() -> list[np.ndarray]:
    s = 1 / math.sqrt(2)
    return [_KET0, _KET1,
            np.array([s, s], dtype=complex), np.array([s, -s], dtype=complex),
            np.array([s, 1j * s]), np.array([s, -1j * s])]


def avg_purity(m: QuantumChannel) -> float:
    """Output purity averaged over the 36 products of single-qubit Pauli eigenstates."""
    states = pauli_eigenstates()
    vals = []
    for a, b in itertools.product(states, repeat=2):
        v = np.kron(a, b)
        out = m(np.outer(v, v.conj()))
        vals.append(np.real(np.trace(out @ out)))
    return float(np.mean(vals))


def negativity(rho, subsystem: int = 1) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose."""
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(np.asarray(rho, dtype=complex), (2, 2))
    pt = partial_transpose(rho, subsystem).entries
    lam = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return float(np.sum(np.abs(np.minimum(lam, 0.0))))


def superposition_input_state(n_inputs: int = 1) -> DensityMatrix:
    """Input qubit(s) in ``(|0> + |1>)/sqrt(2)``, output in |0>."""
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    v = np.array([1.0])
    for _ in range(n_inputs):
        v = np.kron(v, plus)
    v = np.kron(v, _KET0)
    return DensityMatrix(np.outer(v, v.conj()), (2,) * (n_inputs + 1))


def negativity_sweep(cfg: PerceptronConfig, bias_grid, t1_times=None, t_phi_times=None,
                     max_phase_step: float = MAX_PHASE_STEP):
    """Negativity after the gate for the superposition input, unitary and (optionally) open.

    Returns ``(unitary, open_or_None)`` arrays over ``bias_grid``.
    """
    if cfg.n_inputs != 1:
        raise AnalysisError("negativity sweep needs exactly one input weight")
    bias = np.asarray(bias_grid, dtype=float)
    rho0 = superposition_input_state(1)
    unitary, lossy = [], []
    for b in bias:
        c = replace(cfg, bias_b=float(b))
        u = propagators(c.schedule(), [c.final_detuning((0,)), c.final_detuning((1,))],
                        max_phase_step=max_phase_step)
        big = np.zeros((4, 4), dtype=complex)
        big[:2, :2], big[2:, 2:] = u[0], u[1]
        unitary.append(negativity(DensityMatrix(big @ rho0.entries @ big.conj().T, (2, 2))))
        if t1_times is not None or t_phi_times is not None:
            out = lindblad_batch(c, rho0.entries[None], t1_times, t_phi_times,
                                 max_phase_step=max_phase_step)[0]
            lossy.append(negativity(DensityMatrix(out, (2, 2))))
    return np.array(unitary), (np.array(lossy) if lossy else None)


def write_activation_csv(curves: Sequence[ActivationCurve], path, comment: str = "") -> None:
    with Path(path).open("w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bias_MHz", "population", "input_string", "pulse_T_us"])
        for c in curves:
            for b, p in zip(c.bias_points, c.populations):
                w.writerow([f"{units.to_mhz(b):.9g}", f"{p:.12g}", c.label,
                            f"{c.pulse.duration_T / units.US:.9g}"])
