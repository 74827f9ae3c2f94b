"""Gate-model equivalent of the perceptron gate and its cost scaling.

Conventions
-----------
* ``RY(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]`` (the usual rotation).
  The perceptron block ``v_of_theta(t) = [[c, s], [-s, c]]`` is therefore
  ``RY(-t)``.
* Wires ``0 .. N-1`` are the inputs (most significant bit first), wire ``N``
  is the output. Unitaries are in the same big-endian order as
  :func:`qperceptron.dynamics.perceptron_unitary`.

Text format
-----------
One gate per line, wires zero-indexed, angles in radians written with
``repr`` so that emit/parse round-trips exactly::

    CNOT c t
    RY q theta
    RZ q theta
    PHASE q theta
    U1Q q m00r m00i m01r m01i m10r m10i m11r m11i

Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .numerics import Operator, is_unitary

KINDS = ("CNOT", "RY", "RZ", "PHASE", "GENERIC_1Q")
_TEXT_NAMES = {"CNOT": "CNOT", "RY": "RY", "RZ": "RZ", "PHASE": "PHASE", "GENERIC_1Q": "U1Q"}
_X = np.array([[0, 1], [1, 0]], dtype=complex)


class CircuitError(ValueError):
    pass


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def phase(theta: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * theta)])


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    wires: tuple[int, ...]
    params: object = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        wires = tuple(int(w) for w in self.wires)
        object.__setattr__(self, "wires", wires)
        if any(w < 0 for w in wires):
            raise CircuitError("wire indices must be non-negative")
        if self.kind == "CNOT":
            if len(wires) != 2 or wires[0] == wires[1]:
                raise CircuitError("CNOT needs two distinct wires")
        elif len(wires) != 1:
            raise CircuitError(f"{self.kind} acts on exactly one wire")
        if self.kind in ("RY", "RZ", "PHASE"):
            theta = float(self.params)
            if not math.isfinite(theta):
                raise CircuitError("rotation angle must be finite")
            object.__setattr__(self, "params", theta)
        elif self.kind == "GENERIC_1Q":
            m = np.array(self.params, dtype=complex)
            if m.shape != (2, 2) or not is_unitary(m, atol=1e-10):
                raise CircuitError("GENERIC_1Q needs a 2x2 unitary within 1e-10")
            m.setflags(write=False)
            object.__setattr__(self, "params", m)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if (self.kind, self.wires) != (other.kind, other.wires):
            return False
        if self.kind == "GENERIC_1Q":
            return bool(np.array_equal(self.params, other.params))
        return self.params == other.params

    def __hash__(self):
        p = self.params.tobytes() if self.kind == "GENERIC_1Q" else self.params
        return hash((self.kind, self.wires, p))

    def matrix(self) -> np.ndarray:
        """2x2 matrix of a single-qubit gate."""
        if self.kind == "RY":
            return ry(self.params)
        if self.kind == "RZ":
            return rz(self.params)
        if self.kind == "PHASE":
            return phase(self.params)
        if self.kind == "GENERIC_1Q":
            return np.array(self.params)
        raise CircuitError("CNOT has no single-qubit matrix")

    def inverse(self) -> "Gate":
        if self.kind == "CNOT":
            return self
        if self.kind == "GENERIC_1Q":
            return Gate(self.kind, self.wires, np.array(self.params).conj().T)
        return Gate(self.kind, self.wires, -self.params)


@dataclass(frozen=True)
class Circuit:
    n_wires: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if int(self.n_wires) != self.n_wires or self.n_wires < 1:
            raise CircuitError("n_wires must be a positive integer")
        gates = tuple(self.gates)
        for g in gates:
            if not isinstance(g, Gate):
                raise CircuitError(f"not a Gate: {g!r}")
            if max(g.wires) >= self.n_wires:
                raise CircuitError(f"gate {g.kind} on wire {max(g.wires)} outside {self.n_wires} wires")
        object.__setattr__(self, "gates", gates)

    @property
    def n_cnots(self) -> int:
        return sum(g.kind == "CNOT" for g in self.gates)

    @property
    def n_single(self) -> int:
        return len(self.gates) - self.n_cnots

    def inverse(self) -> "Circuit":
        return Circuit(self.n_wires, tuple(g.inverse() for g in reversed(self.gates)))

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_wires != self.n_wires:
            raise CircuitError("cannot concatenate circuits of different width")
        return Circuit(self.n_wires, self.gates + other.gates)


def _apply(state: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply a gate to a (2,)*n tensor whose trailing axis indexes columns."""
    if gate.kind == "CNOT":
        c, t = gate.wires
        idx = [slice(None)] * (n + 1)
        idx[c] = 1
        sub = state[tuple(idx)]
        t_axis = t if t < c else t - 1
        state = state.copy()
        state[tuple(idx)] = np.flip(sub, axis=t_axis)
        return state
    q = gate.wires[0]
    out = np.tensordot(gate.matrix(), state, axes=([1], [q]))
    return np.moveaxis(out, 0, q)


def circuit_unitary(c: Circuit) -> Operator:
    """Unitary of ``c``, gates applied in list order (first gate acts first)."""
    dim = 2**c.n_wires
    state = np.eye(dim, dtype=complex).reshape((2,) * c.n_wires + (dim,))
    for g in c.gates:
        state = _apply(state, g, c.n_wires)
    return Operator(state.reshape(dim, dim), (2,) * c.n_wires, "unitary")


def equivalence_fidelity(u, v) -> float:
    """Global-phase-insensitive overlap ``|Tr(U^dag V)| / dim``."""
    a = u.entries if isinstance(u, Operator) else np.asarray(u, dtype=complex)
    b = v.entries if isinstance(v, Operator) else np.asarray(v, dtype=complex)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise CircuitError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(abs(np.trace(a.conj().T @ b)) / a.shape[0])


def v_of_theta(theta: float) -> Operator:
    """Perceptron block for real ``c(x)``: ``[[cos t/2, sin t/2], [-sin t/2, cos t/2]]``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return Operator(np.array([[c, s], [-s, c]], dtype=complex), (2,), "unitary")


def target_unitary(thetas: Mapping[tuple[int, ...], float], n_inputs: int) -> np.ndarray:
    """Block-diagonal ``sum_x |x><x| (x) V(theta_x)``."""
    nb = 2**n_inputs
    u = np.zeros((2 * nb, 2 * nb), dtype=complex)
    for k, x in enumerate(itertools.product((0, 1), repeat=n_inputs)):
        u[2 * k:2 * k + 2, 2 * k:2 * k + 2] = v_of_theta(thetas[x]).entries
    return u


def _controlled_ry(controls: Sequence[int], target: int, phi: float) -> list[Gate]:
    """Controlled ``RY(phi)`` with one or two controls, all controls on |1>."""
    if len(controls) == 1:
        (c,) = controls
        # A = RY(phi/2), B = RY(-phi/2), C = 1
        return [Gate("RY", (target,), phi / 2), Gate("CNOT", (c, target)),
                Gate("RY", (target,), -phi / 2), Gate("CNOT", (c, target))]
    if len(controls) == 2:
        c1, c2 = controls
        # Gray-code multiplexor: the four CNOT parities leave the target
        # rotated by phi only when both controls are 1
        q = phi / 4
        return [Gate("RY", (target,), q), Gate("CNOT", (c2, target)),
                Gate("RY", (target,), -q), Gate("CNOT", (c1, target)),
                Gate("RY", (target,), q), Gate("CNOT", (c2, target)),
                Gate("RY", (target,), -q), Gate("CNOT", (c1, target))]
    raise CircuitError("controlled rotations implemented for one or two controls")


def _is_identity_angle(phi: float, atol: float = 1e-12) -> bool:
    return abs(math.remainder(phi, 4 * math.pi)) < atol


def decompose_perceptron(thetas: Mapping, n_inputs: int) -> Circuit:
    """CNOT + single-qubit circuit for the block-diagonal perceptron gate.

    ``V(0...0)`` is applied unconditionally to the output, then for every
    other bitstring ``x`` the multi-controlled ``W(x) = V(x) V(0...0)^dag``
    is applied, with X gates flipping the controls whose bit is 0. Since all
    blocks are rotations about Y, ``W(x)`` is ``RY(theta_0 - theta_x)``;
    controlled rotations with vanishing angle are dropped.
    """
    if n_inputs < 1:
        raise CircuitError("n_inputs must be >= 1")
    if n_inputs > 2:
        raise CircuitError("decomposition implemented only for N <= 2; use gate_count for scaling")
    keys = list(itertools.product((0, 1), repeat=n_inputs))
    th = {}
    for x in keys:
        for k in (x, "".join(map(str, x))):
            if k in thetas:
                th[x] = float(thetas[k])
                break
        else:
            raise CircuitError(f"missing theta for bitstring {''.join(map(str, x))}")

    out = n_inputs
    zero = keys[0]
    gates: list[Gate] = []
    if not _is_identity_angle(th[zero]):
        gates.append(Gate("RY", (out,), -th[zero]))
    for x in keys[1:]:
        phi = th[zero] - th[x]
        if _is_identity_angle(phi):
            continue
        flips = [Gate("GENERIC_1Q", (q,), _X) for q, bit in enumerate(x) if bit == 0]
        gates += flips
        gates += _controlled_ry(list(range(n_inputs)), out, phi)
        gates += flips
    return Circuit(n_inputs + 1, tuple(gates))


def aligned_thetas(blocks: np.ndarray) -> dict[tuple[int, ...], float]:
    """Rotation angle of each simulated block once its phases are discarded.

    Any 2x2 unitary is ``D_L [[c, s], [-s, c]] D_R`` with diagonal phase
    matrices ``D_L, D_R``, so ``theta = 2 atan2(|V10|, |V00|)``.
    """
    n = int(round(math.log2(blocks.shape[0])))
    return {x: 2.0 * math.atan2(abs(blocks[k][1, 0]), abs(blocks[k][0, 0]))
            for k, x in enumerate(itertools.product((0, 1), repeat=n))}


def phase_aligned_fidelity(blocks: np.ndarray, circuit: Circuit) -> float:
    """Worst per-block fidelity between ``circuit`` and ``blocks`` under free diagonal phases.

    With optimal ``D_L, D_R`` every entry of ``D_L V D_R`` can be aligned
    with the real block ``R`` of the circuit, which gives
    ``max |Tr(R^T D_L V D_R)| / 2 = sum_ij |R_ij| |V_ij| / 2``.
    """
    u = circuit_unitary(circuit).entries
    if u.shape[0] != 2 * blocks.shape[0]:
        raise CircuitError("circuit width does not match the number of blocks")
    worst = 1.0
    for k in range(blocks.shape[0]):
        r = u[2 * k:2 * k + 2, 2 * k:2 * k + 2]
        worst = min(worst, float(np.sum(np.abs(r) * np.abs(blocks[k])) / 2))
    return worst


# --- cost scaling -------------------------------------------------------------

def gate_count(n_inputs: int) -> int:
    """CNOT count ``(2^N - 1)(2^(N+1) - 2)`` of the generic gate-model equivalent."""
    n = int(n_inputs)
    if n != n_inputs or n < 1:
        raise CircuitError("n_inputs must be an integer >= 1")
    if n > 30:
        raise CircuitError("gate_count limited to n_inputs <= 30")
    return (2**n - 1) * (2 ** (n + 1) - 2)


@dataclass(frozen=True)
class CostEstimate:
    n_inputs: int
    n_cnots: int
    total_time: float
    fidelity_estimate: float


def estimate(n_inputs: int, f_2q: float = 0.997, t_2q: float = 60e-9) -> CostEstimate:
    if not 0 < f_2q <= 1:
        raise CircuitError("f_2q must be in (0, 1]")
    if not t_2q > 0:
        raise CircuitError("t_2q must be positive")
    ng = gate_count(n_inputs)
    return CostEstimate(int(n_inputs), ng, ng * t_2q, f_2q**ng)


# --- text format -------------------------------------------------------------

def emit_text(c: Circuit, header: str | None = None) -> str:
    lines = []
    if header:
        lines += [f"# {h}" for h in header.splitlines()]
    lines.append(f"# wires {c.n_wires}")
    for g in c.gates:
        name = _TEXT_NAMES[g.kind]
        if g.kind == "CNOT":
            lines.append(f"CNOT {g.wires[0]} {g.wires[1]}")
        elif g.kind == "GENERIC_1Q":
            m = np.asarray(g.params).reshape(-1)
            vals = " ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in m)
            lines.append(f"{name} {g.wires[0]} {vals}")
        else:
            lines.append(f"{name} {g.wires[0]} {g.params!r}")
    return "\n".join(lines) + "\n"


def parse_text(text: str, n_wires: int | None = None) -> Circuit:
    """Inverse of :func:`emit_text`. ``n_wires`` overrides the ``# wires`` comment."""
    gates = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "wires":
                declared = int(parts[1])
            continue
        tok = line.split()
        try:
            if tok[0] == "CNOT" and len(tok) == 3:
                gates.append(Gate("CNOT", (int(tok[1]), int(tok[2]))))
            elif tok[0] in ("RY", "RZ", "PHASE") and len(tok) == 3:
                gates.append(Gate(tok[0], (int(tok[1]),), float(tok[2])))
            elif tok[0] == "U1Q" and len(tok) == 10:
                v = [float(t) for t in tok[2:]]
                m = np.array([complex(v[i], v[i + 1]) for i in range(0, 8, 2)]).reshape(2, 2)
                gates.append(Gate("GENERIC_1Q", (int(tok[1]),), m))
            else:
                raise CircuitError("unrecognized gate")
        except (ValueError, CircuitError) as exc:
            raise CircuitError(f"line {lineno}: {raw!r}: {exc}") from exc
    n = n_wires or declared
    if n is None:
        n = 1 + max((max(g.wires) for g in gates), default=0)
    return Circuit(n, tuple(gates))


def write_circuit(c: Circuit, path, header: str | None = None) -> None:
    Path(path).write_text(emit_text(c, header))


def read_circuit(path) -> Circuit:
    return parse_text(Path(path).read_text())
