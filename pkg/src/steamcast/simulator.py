"""Dense statevector simulation with exact expectations and gradients.

Conventions (the reference point for every analytic value in the
tests):

* RX(t) = exp(-i t X / 2), RZ(t) = exp(-i t Z / 2),
  RZZ(t) = exp(-i t (Z x Z) / 2).
* Qubit 0 is the leftmost / most-significant bit of a basis label, so
  |10> on two qubits is index 2.

States are numpy complex128 arrays.  The batched entry points take a
(B, 2**n) array and per-sample angle columns; the scalar API wraps a
batch of one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .backend import kernels as K

MAX_QUBITS = 20

GATE_KINDS = ("H", "RX", "RZ", "RZZ", "CNOT")
_PARAMETRIC = {"RX", "RZ", "RZZ"}


class SimulatorError(Exception):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple
    angle: Optional[float] = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise SimulatorError(f"unknown gate kind {self.kind!r}")
        n_targets = 2 if self.kind in ("RZZ", "CNOT") else 1
        if len(self.targets) != n_targets:
            raise SimulatorError(
                f"{self.kind} takes {n_targets} target(s), got {self.targets}")
        if n_targets == 2 and self.targets[0] == self.targets[1]:
            raise SimulatorError(f"{self.kind} targets must be distinct")
        if self.kind in _PARAMETRIC:
            if self.angle is None:
                raise SimulatorError(f"{self.kind} requires an angle")
        elif self.angle is not None:
            raise SimulatorError(f"{self.kind} carries no angle")


@dataclass(frozen=True)
class BoundGate:
    """A gate plus provenance of its angle: grad_index marks trainables."""
    kind: str
    targets: tuple
    angle: float = 0.0
    grad_index: Optional[int] = None

    def __post_init__(self):
        if self.grad_index is not None and self.kind not in _PARAMETRIC:
            raise SimulatorError(
                f"trainable flag on non-parameterized gate {self.kind}")


@dataclass(frozen=True)
class Observable:
    """Z_on_qubit(q) or a computational-basis projector |bits><bits|."""
    kind: str
    qubit: int = 0
    bitstring: str = ""

    @staticmethod
    def z(qubit: int) -> "Observable":
        return Observable(kind="Z", qubit=qubit)

    @staticmethod
    def projector(bitstring: str) -> "Observable":
        return Observable(kind="projector", bitstring=bitstring)


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.amplitudes is None:
            self.amplitudes = np.zeros(1 << self.n_qubits, dtype=np.complex128)
            self.amplitudes[0] = 1.0
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise SimulatorError("amplitude length does not match qubit count")


def new_zero_state(n_qubits: int) -> Statevector:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise SimulatorError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")
    return Statevector(n_qubits=n_qubits)


def _check_targets(gate, n: int) -> None:
    for q in gate.targets:
        if not 0 <= q < n:
            raise SimulatorError(f"target {q} out of range for {n} qubits")


def _apply(states: np.ndarray, n: int, kind: str, targets, angle) -> None:
    if kind == "H":
        K.apply_h(states, n, targets[0])
    elif kind == "RX":
        K.apply_rx(states, n, targets[0], angle)
    elif kind == "RZ":
        K.apply_rz(states, n, targets[0], angle)
    elif kind == "RZZ":
        K.apply_rzz(states, n, targets[0], targets[1], angle)
    elif kind == "CNOT":
        K.apply_cnot(states, n, targets[0], targets[1])
    else:  # pragma: no cover - kinds validated at construction
        raise SimulatorError(f"unknown gate kind {kind!r}")


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    _check_targets(gate, state.n_qubits)
    batch = state.amplitudes.reshape(1, -1)
    _apply(batch, state.n_qubits, gate.kind, gate.targets, gate.angle)
    return state


def run_circuit(n_qubits: int, gates: Sequence[Gate]) -> Statevector:
    state = new_zero_state(n_qubits)
    for g in gates:
        apply_gate(state, g)
    return state


def _expectation_batch(states: np.ndarray, n: int, obs: Observable) -> np.ndarray:
    if obs.kind == "Z":
        if not 0 <= obs.qubit < n:
            raise SimulatorError(f"Z observable qubit {obs.qubit} out of range")
        return np.asarray(K.z_expectation(states, n, obs.qubit))
    if obs.kind == "projector":
        if len(obs.bitstring) != n:
            raise SimulatorError(
                f"projector bitstring length {len(obs.bitstring)} != {n} qubits")
        idx = int(obs.bitstring, 2)
        return np.abs(states[:, idx]) ** 2
    raise SimulatorError(f"unknown observable kind {obs.kind!r}")


def expectation(state: Statevector, obs: Observable) -> float:
    return float(_expectation_batch(state.amplitudes.reshape(1, -1),
                                    state.n_qubits, obs)[0])


def probabilities(state: Statevector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


# ---------------------------------------------------------------------------
# gradients


def _obs_times_batch(states: np.ndarray, n: int, obs: Observable) -> np.ndarray:
    """Return O|psi> for each batch row."""
    if obs.kind == "Z":
        out = states.copy()
        K.mult_z(out, n, obs.qubit)
        return out
    if obs.kind == "projector":
        idx = int(obs.bitstring, 2)
        out = np.zeros_like(states)
        out[:, idx] = states[:, idx]
        return out
    raise SimulatorError(f"unknown observable kind {obs.kind!r}")


def _mult_generator(states: np.ndarray, n: int, kind: str, targets) -> None:
    """Multiply by the Hermitian generator G where U = exp(-i t G / 2)."""
    if kind == "RX":
        K.apply_x(states, n, targets[0])
    elif kind == "RZ":
        K.mult_z(states, n, targets[0])
    elif kind == "RZZ":
        K.mult_zz(states, n, targets[0], targets[1])
    else:  # pragma: no cover
        raise SimulatorError(f"gate {kind} has no generator")


def _n_grad_params(circuit: Sequence[BoundGate]) -> int:
    idxs = [g.grad_index for g in circuit if g.grad_index is not None]
    return 0 if not idxs else max(idxs) + 1


def run_bound_batch(n_qubits: int, circuit: Sequence[BoundGate],
                    angles: np.ndarray) -> np.ndarray:
    """Simulate a bound circuit for a batch of per-sample angle columns.

    angles has shape (B, len(circuit)); column j is ignored for
    angle-free gates.  Returns the (B, 2**n) final states.
    """
    nb = angles.shape[0]
    states = np.zeros((nb, 1 << n_qubits), dtype=np.complex128)
    states[:, 0] = 1.0
    for j, g in enumerate(circuit):
        _check_targets(g, n_qubits)
        _apply(states, n_qubits, g.kind, g.targets,
               np.ascontiguousarray(angles[:, j]))
    return states


def adjoint_gradient_batch(n_qubits: int, circuit: Sequence[BoundGate],
                           angles: np.ndarray, obs: Observable) -> np.ndarray:
    """Per-sample gradient of <obs> w.r.t. each trainable index.

    One forward pass plus one backward sweep; O(gates) generator
    applications instead of O(gates^2) re-simulations.
    """
    nb = angles.shape[0]
    n_params = _n_grad_params(circuit)
    grads = np.zeros((nb, n_params))
    psi = run_bound_batch(n_qubits, circuit, angles)
    lam = _obs_times_batch(psi, n_qubits, obs)
    for j in range(len(circuit) - 1, -1, -1):
        g = circuit[j]
        if g.grad_index is not None:
            mu = psi.copy()
            _mult_generator(mu, n_qubits, g.kind, g.targets)
            # d<obs>/dt for U = exp(-i t G / 2): 2 Re <lam| (-i/2) G |psi>
            inner = np.einsum("bi,bi->b", lam.conj(), mu)
            grads[:, g.grad_index] += np.imag(inner)
        if g.kind in _PARAMETRIC:
            inv = -np.ascontiguousarray(angles[:, j])
            _apply(psi, n_qubits, g.kind, g.targets, inv)
            _apply(lam, n_qubits, g.kind, g.targets, inv)
        else:  # H and CNOT are self-inverse
            _apply(psi, n_qubits, g.kind, g.targets, None)
            _apply(lam, n_qubits, g.kind, g.targets, None)
    return grads


def _angles_row(circuit: Sequence[BoundGate]) -> np.ndarray:
    return np.array([[g.angle if g.angle is not None else 0.0 for g in circuit]])


def adjoint_gradient(circuit: Sequence[BoundGate], obs: Observable,
                     n_qubits: int) -> np.ndarray:
    """Gradient of <obs> on the circuit applied to |0...0>."""
    return adjoint_gradient_batch(n_qubits, circuit, _angles_row(circuit), obs)[0]


def param_shift_gradient_batch(n_qubits: int, circuit: Sequence[BoundGate],
                               angles: np.ndarray, obs: Observable) -> np.ndarray:
    """Independent gradient oracle: two evaluations per trainable gate.

    All supported generators (X, Z, ZZ) have eigenvalues +-1, so the
    shift is +-pi/2 with prefactor 1/2 for every gate.
    """
    nb = angles.shape[0]
    n_params = _n_grad_params(circuit)
    grads = np.zeros((nb, n_params))
    for j, g in enumerate(circuit):
        if g.grad_index is None:
            continue
        for sign in (1.0, -1.0):
            shifted = angles.copy()
            shifted[:, j] += sign * np.pi / 2.0
            states = run_bound_batch(n_qubits, circuit, shifted)
            val = _expectation_batch(states, n_qubits, obs)
            grads[:, g.grad_index] += 0.5 * sign * val
    return grads


def param_shift_gradient(circuit: Sequence[BoundGate], obs: Observable,
                         n_qubits: int) -> np.ndarray:
    return param_shift_gradient_batch(n_qubits, circuit, _angles_row(circuit), obs)[0]


# ---------------------------------------------------------------------------
# brute-force oracle

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_CNOT = np.array([[1, 0, 0, 0],
                  [0, 1, 0, 0],
                  [0, 0, 0, 1],
                  [0, 0, 1, 0]], dtype=np.complex128)


def _gate_matrix(kind: str, angle) -> np.ndarray:
    if kind == "H":
        return _H
    if kind == "RX":
        return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * _X
    if kind == "RZ":
        return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * _Z
    if kind == "RZZ":
        zz = np.kron(_Z, _Z)
        return np.cos(angle / 2) * np.eye(4) - 1j * np.sin(angle / 2) * zz
    if kind == "CNOT":
        return _CNOT
    raise SimulatorError(f"unknown gate kind {kind!r}")


def _embed(mat: np.ndarray, targets, n: int) -> np.ndarray:
    """Embed a 1- or 2-qubit matrix into the full 2**n space."""
    dim = 1 << n
    full = np.zeros((dim, dim), dtype=np.complex128)
    pos = [n - 1 - q for q in targets]
    k = len(targets)
    for col in range(dim):
        sub_col = 0
        for a, p in enumerate(pos):
            sub_col |= ((col >> p) & 1) << (k - 1 - a)
        base = col
        for p in pos:
            base &= ~(1 << p)
        for sub_row in range(1 << k):
            row = base
            for a, p in enumerate(pos):
                row |= ((sub_row >> (k - 1 - a)) & 1) << p
            full[row, col] = mat[sub_row, sub_col]
    return full


def dense_unitary_oracle(circuit: Sequence, n_qubits: int) -> np.ndarray:
    """Full-matrix product of embedded gate matrices (n <= 4 only)."""
    if n_qubits > 4:
        raise SimulatorError("dense oracle limited to 4 qubits")
    u = np.eye(1 << n_qubits, dtype=np.complex128)
    for g in circuit:
        _check_targets(g, n_qubits)
        u = _embed(_gate_matrix(g.kind, g.angle), g.targets, n_qubits) @ u
    return u
