"""Two transmons coupled through a tunable transmon coupler.

Mode order in every operator and basis label is ``(qubit 1, qubit 2,
coupler)``; qubit 1 is the perceptron output, qubit 2 the input. Each mode
is truncated to ``truncation`` levels.

The ZZ coupling is ``J = E11 + E00 - E10 - E01`` where ``Exy`` is the dressed
energy connected to the bare state ``|x y 0_c>``. The perceptron weight is
``w = -J``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import units
from .numerics import Operator, hermitian_eig

# bare labels (x1, x2) used for the ZZ extraction
_ZZ_LABELS = ((0, 0), (1, 0), (0, 1), (1, 1))


class DeviceError(ValueError):
    pass


class AmbiguousAssignmentError(DeviceError):
    """Two bare labels map onto the same dressed eigenstate."""


class PerturbationError(DeviceError):
    """A denominator of the fourth-order expression is near resonance."""

    def __init__(self, message, factor_name, factor_value):
        super().__init__(message)
        self.factor_name = factor_name
        self.factor_value = factor_value


class DispersiveWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DeviceParams:
    """Circuit parameters in rad/s. Defaults are the measured two-qubit device.

    ``alpha_c`` is not a measured value; -2*pi*300 MHz is an assumed,
    transmon-typical anharmonicity.
    """

    omega1: float = 6.189 * units.GHZ
    omega2: float = 5.089 * units.GHZ
    omega_c: float = 7.8 * units.GHZ
    alpha1: float = -286.0 * units.MHZ
    alpha2: float = -310.0 * units.MHZ
    alpha_c: float = -300.0 * units.MHZ
    g1c: float = 142.0 * units.MHZ
    g2c: float = 116.0 * units.MHZ
    truncation: int = 4

    def __post_init__(self):
        if int(self.truncation) != self.truncation or self.truncation < 3:
            raise DeviceError(f"truncation must be an integer >= 3, got {self.truncation!r}")
        for name in ("omega1", "omega2", "omega_c", "alpha1", "alpha2", "alpha_c", "g1c", "g2c"):
            if not math.isfinite(getattr(self, name)):
                raise DeviceError(f"{name} must be finite")

    @property
    def delta1(self) -> float:
        return self.omega_c - self.omega1

    @property
    def delta2(self) -> float:
        return self.omega_c - self.omega2

    def with_coupler(self, omega_c: float) -> "DeviceParams":
        return replace(self, omega_c=float(omega_c))

    def is_dispersive(self, factor: float = 3.0) -> bool:
        return min(abs(self.delta1), abs(self.delta2)) > factor * max(abs(self.g1c), abs(self.g2c))


@dataclass(frozen=True)
class ZZResult:
    j: float
    method: str

    @property
    def weight(self) -> float:
        return -self.j


def _lowering(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)


def build_hamiltonian(p: DeviceParams) -> Operator:
    """Full Hamiltonian (hbar = 1) on ``truncation**3`` levels.

    ``sum_i w_i n_i + (alpha_i / 2) a_i^dag a_i^dag a_i a_i
    + sum_{i=1,2} g_ic (a_i - a_i^dag)(a_c - a_c^dag)``, counter-rotating terms
    included.
    """
    d = int(p.truncation)
    a = _lowering(d)
    eye = np.eye(d)
    n = a.T @ a
    kerr = a.T @ a.T @ a @ a

    def embed(op, mode):
        ops = [eye, eye, eye]
        ops[mode] = op
        return np.kron(np.kron(ops[0], ops[1]), ops[2])

    h = np.zeros((d**3, d**3))
    for mode, (w, alpha) in enumerate(((p.omega1, p.alpha1), (p.omega2, p.alpha2),
                                       (p.omega_c, p.alpha_c))):
        h += embed(w * n + 0.5 * alpha * kerr, mode)
    x_c = embed(a - a.T, 2)
    h += p.g1c * embed(a - a.T, 0) @ x_c
    h += p.g2c * embed(a - a.T, 1) @ x_c
    return Operator(h, (d, d, d), "hermitian")


def bare_index(p: DeviceParams, n1: int, n2: int, nc: int = 0) -> int:
    d = int(p.truncation)
    return (n1 * d + n2) * d + nc


def dressed_energies(p: DeviceParams, hamiltonian: Operator | None = None,
                     floor: float = 0.5) -> dict[tuple[int, int], float]:
    """Dressed energies for the bare labels ``|x1 x2 0_c>``, x in {0, 1}.

    Assignment is greedy by descending overlap ``|<bare|dressed>|^2``. A label
    whose best dressed state was already claimed raises
    :class:`AmbiguousAssignmentError`; an assigned overlap at or below
    ``floor`` raises :class:`DeviceError`.
    """
    h = build_hamiltonian(p) if hamiltonian is None else hamiltonian
    evals, vecs = hermitian_eig(h)
    v = vecs.entries
    idx = [bare_index(p, x1, x2) for x1, x2 in _ZZ_LABELS]
    overlap = np.abs(v[idx, :]) ** 2  # (label, dressed)

    order = np.dstack(np.unravel_index(np.argsort(-overlap, axis=None), overlap.shape))[0]
    best = overlap.argmax(axis=1)
    owner: dict[int, int] = {}
    assigned: dict[int, int] = {}
    for li, k in order:
        li, k = int(li), int(k)
        if li in assigned:
            continue
        if k in owner:
            if best[li] == k:
                raise AmbiguousAssignmentError(
                    f"bare states {_ZZ_LABELS[owner[k]]} and {_ZZ_LABELS[li]} both map to "
                    f"dressed state {k} (overlaps {overlap[owner[k], k]:.3f}, {overlap[li, k]:.3f})")
            continue
        owner[k] = li
        assigned[li] = k
        if len(assigned) == len(_ZZ_LABELS):
            break

    out = {}
    for li, label in enumerate(_ZZ_LABELS):
        k = assigned[li]
        if overlap[li, k] <= floor:
            raise DeviceError(
                f"bare state {label} has maximal dressed overlap {overlap[li, k]:.3f} <= {floor}")
        out[label] = float(evals[k])
    return out


def zz_numeric(p: DeviceParams) -> ZZResult:
    """ZZ coupling from exact diagonalization of :func:`build_hamiltonian`."""
    if not p.is_dispersive(3.0):
        warnings.warn(
            f"coupler at {units.to_ghz(p.omega_c):.4f} GHz is not dispersive "
            "(min |Delta| <= 3 max g); dressed-state labels may be unreliable",
            DispersiveWarning, stacklevel=2)
    h = build_hamiltonian(p)
    e = dressed_energies(p, h)
    # shifts from the bare energies; the bare part of the sum cancels exactly
    bare = np.diag(h.entries).real
    s = {k: e[k] - bare[bare_index(p, *k)] for k in e}
    j = (s[(1, 1)] - s[(1, 0)]) - (s[(0, 1)] - s[(0, 0)])
    return ZZResult(float(j), "numeric")


def fourth_order_expression(p: DeviceParams, min_factor: float = units.MHZ) -> float:
    """The closed-form fourth-order ZZ expression, evaluated as printed.

    Any denominator factor smaller in magnitude than ``min_factor`` raises
    :class:`PerturbationError`.
    """
    d1, d2 = p.delta1, p.delta2
    a1, a2, ac = p.alpha1, p.alpha2, p.alpha_c
    factors = {
        "Delta1": d1,
        "Delta2": d2,
        "Delta1+Delta2+alpha_c": d1 + d2 + ac,
        "Delta2-Delta1-alpha2": d2 - d1 - a2,
        "Delta1-Delta2-alpha1": d1 - d2 - a1,
    }
    for name, val in factors.items():
        if abs(val) < min_factor:
            raise PerturbationError(
                f"near-resonant, perturbation theory invalid: {name} = "
                f"{units.to_mhz(val):.4f} MHz x 2pi", name, val)
    s = d1 + d2
    num = (a1 * a2 * s**2 + a2 * ac * d1**2 + a1 * d1**2 * s + a2 * d2**2 * s
           + ac * s * (d1 - d2) ** 2)
    den = d1**2 * d2**2 * (s + ac) * (d2 - d1 - a2) * (d1 - d2 - a1)
    return 2.0 * p.g1c**2 * p.g2c**2 * num / den


def zz_perturbative(p: DeviceParams, min_factor: float = units.MHZ) -> ZZResult:
    """Fourth-order perturbative ZZ coupling, ``Delta_i = omega_c - omega_i``.

    The closed form comes out with the opposite sign to
    ``E11 + E00 - E10 - E01`` (checked against diagonalization of the same
    Hamiltonian in the rotating-wave approximation), so it is negated here to
    share the convention of :func:`zz_numeric`.
    """
    return ZZResult(-float(fourth_order_expression(p, min_factor)), "perturbative")


def zero_crossings(x, y) -> list[float]:
    """Linearly interpolated sign changes of ``y(x)``; ``None`` entries break the series."""
    out = []
    for (x0, y0), (x1, y1) in zip(zip(x, y), zip(x[1:], y[1:])):
        if y0 is None or y1 is None:
            continue
        if y0 == 0.0:
            out.append(float(x0))
        elif y0 * y1 < 0:
            out.append(float(x0 + (x1 - x0) * y0 / (y0 - y1)))
    return out


@dataclass(frozen=True)
class ZZSweepRow:
    omega_c: float
    j_numeric: float | None
    j_perturbative: float | None
    dispersive: bool
    reason: str = ""


def coupler_sweep(p: DeviceParams, omega_c_grid) -> list[ZZSweepRow]:
    """Numeric and perturbative J on a coupler-frequency grid.

    Failures at single points are recorded as ``None`` with a reason rather
    than raised.
    """
    grid = np.asarray(omega_c_grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise DeviceError("omega_c grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise DeviceError("omega_c grid must be strictly ascending")
    rows = []
    for wc in grid:
        q = p.with_coupler(wc)
        reasons = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DispersiveWarning)
            try:
                jn = zz_numeric(q).j
            except DeviceError as exc:
                jn = None
                reasons.append(f"numeric: {exc}")
        try:
            jp = zz_perturbative(q).j
        except PerturbationError as exc:
            jp = None
            reasons.append(f"perturbative: {exc}")
        rows.append(ZZSweepRow(float(wc), jn, jp, q.is_dispersive(3.0), "; ".join(reasons)))
    return rows


# --- configuration file --------------------------------------------------

_FILE_KEYS = {
    "omega1_ghz": ("omega1", units.GHZ),
    "omega2_ghz": ("omega2", units.GHZ),
    "omega_c_ghz": ("omega_c", units.GHZ),
    "alpha1_mhz": ("alpha1", units.MHZ),
    "alpha2_mhz": ("alpha2", units.MHZ),
    "alpha_c_mhz": ("alpha_c", units.MHZ),
    "g1c_mhz": ("g1c", units.MHZ),
    "g2c_mhz": ("g2c", units.MHZ),
}


def device_to_dict(p: DeviceParams) -> dict:
    """File representation: frequencies in GHz, anharmonicities and couplings in MHz."""
    fields = asdict(p)
    out = {key: fields[attr] / scale for key, (attr, scale) in _FILE_KEYS.items()}
    out["truncation"] = int(p.truncation)
    return out


def device_from_dict(d: dict) -> DeviceParams:
    known = set(_FILE_KEYS) | {"truncation"}
    unknown = set(d) - known
    if unknown:
        raise DeviceError(f"unknown device keys: {sorted(unknown)}")
    kwargs = {attr: float(d[key]) * scale for key, (attr, scale) in _FILE_KEYS.items() if key in d}
    if "truncation" in d:
        kwargs["truncation"] = int(d["truncation"])
    return DeviceParams(**kwargs)


def save_device(p: DeviceParams, path) -> None:
    import tomli_w

    Path(path).write_text(tomli_w.dumps({"device": device_to_dict(p)}))


def load_device(path) -> DeviceParams:
    from .config import read_toml

    data = read_toml(path)
    return device_from_dict(data.get("device", data))
