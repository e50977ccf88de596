"""Ansatz construction: symbolic gate lists with parameter/feature bindings.

Two builders are provided: the 5-qubit production circuit used inside
the forecasting model, and the 2-qubit diagnostic circuit used by the
information-geometry and Fourier studies.  Both follow the same
pattern: Hadamard wall, per-qubit variational rotations, angle
encoding of the input features, then an entangling section.

The diagnostic circuit's entangling section is a stack of N identical
blocks [RZZ, RZ, RZ, CNOT].  Because a CNOT conjugates diagonal gates
to diagonal gates, consecutive blocks collapse to a single
three-parameter diagonal family: stacking more blocks adds trainable
parameters (P = 4 + 3N) without adding new functional directions.
Fixed RX mixers before and after the blocks make the measured
distribution sensitive to both features and to all three diagonal
directions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import simulator as sim
from .simulator import BoundGate, Observable

BRIDGE_ANGLE = np.pi / 4
END_ANGLE = np.pi / 4


class CircuitConfigError(Exception):
    pass


@dataclass(frozen=True)
class ParamBinding:
    """Trainable(index) | Feature(index) | Fixed(value)."""
    kind: str  # "trainable" | "feature" | "fixed"
    index: int = 0
    value: float = 0.0

    @staticmethod
    def trainable(index: int) -> "ParamBinding":
        return ParamBinding(kind="trainable", index=index)

    @staticmethod
    def feature(index: int) -> "ParamBinding":
        return ParamBinding(kind="feature", index=index)

    @staticmethod
    def fixed(value: float) -> "ParamBinding":
        return ParamBinding(kind="fixed", value=value)


@dataclass(frozen=True)
class AnsatzGate:
    kind: str
    targets: tuple
    binding: Optional[ParamBinding] = None


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    n_features: int
    gates: Tuple[AnsatzGate, ...]
    observable: Observable

    @property
    def n_params(self) -> int:
        idxs = [g.binding.index for g in self.gates
                if g.binding is not None and g.binding.kind == "trainable"]
        return 0 if not idxs else max(idxs) + 1

    def validate(self) -> None:
        idxs = sorted({g.binding.index for g in self.gates
                       if g.binding is not None and g.binding.kind == "trainable"})
        if idxs != list(range(len(idxs))):
            raise CircuitConfigError("trainable indices must be contiguous from 0")
        for g in self.gates:
            if g.binding is not None and g.binding.kind == "feature":
                if not 0 <= g.binding.index < self.n_features:
                    raise CircuitConfigError(
                        f"feature index {g.binding.index} out of range")


def build_production_ansatz() -> AnsatzSpec:
    """The 5-qubit, 5-feature, 20-parameter forecasting circuit."""
    n = 5
    gates = []
    for q in range(n):
        gates.append(AnsatzGate("H", (q,)))
    p = 0
    for q in range(n):
        gates.append(AnsatzGate("RZ", (q,), ParamBinding.trainable(p))); p += 1
        gates.append(AnsatzGate("RX", (q,), ParamBinding.trainable(p))); p += 1
    for q in range(n):
        gates.append(AnsatzGate("RZ", (q,), ParamBinding.feature(q)))
    for q in range(n):
        gates.append(AnsatzGate("RZZ", (q, (q + 1) % n), ParamBinding.trainable(p)))
        p += 1
    for q in range(n):
        gates.append(AnsatzGate("RX", (q,), ParamBinding.trainable(p))); p += 1
    for q in range(n):
        gates.append(AnsatzGate("CNOT", (q, (q + 1) % n)))
    spec = AnsatzSpec(n_qubits=n, n_features=n, gates=tuple(gates),
                      observable=Observable.z(0))
    spec.validate()
    return spec


def build_toy_ansatz(n_reps: int) -> AnsatzSpec:
    """The 2-qubit diagnostic circuit with P = 4 + 3*n_reps parameters."""
    if n_reps < 1:
        raise CircuitConfigError(f"n_reps must be >= 1, got {n_reps}")
    gates = [AnsatzGate("H", (0,)), AnsatzGate("H", (1,))]
    p = 0
    for q in (0, 1):
        gates.append(AnsatzGate("RZ", (q,), ParamBinding.trainable(p))); p += 1
        gates.append(AnsatzGate("RX", (q,), ParamBinding.trainable(p))); p += 1
    gates.append(AnsatzGate("RZ", (0,), ParamBinding.feature(0)))
    gates.append(AnsatzGate("RZ", (1,), ParamBinding.feature(1)))
    gates.append(AnsatzGate("RX", (1,), ParamBinding.fixed(BRIDGE_ANGLE)))
    for _ in range(n_reps):
        gates.append(AnsatzGate("RZZ", (0, 1), ParamBinding.trainable(p))); p += 1
        gates.append(AnsatzGate("RZ", (0,), ParamBinding.trainable(p))); p += 1
        gates.append(AnsatzGate("RZ", (1,), ParamBinding.trainable(p))); p += 1
        gates.append(AnsatzGate("CNOT", (1, 0)))
    gates.append(AnsatzGate("RX", (0,), ParamBinding.fixed(END_ANGLE)))
    gates.append(AnsatzGate("RX", (1,), ParamBinding.fixed(END_ANGLE)))
    spec = AnsatzSpec(n_qubits=2, n_features=2, gates=tuple(gates),
                      observable=Observable.z(0))
    spec.validate()
    return spec


# ---------------------------------------------------------------------------
# binding and evaluation


def bind(spec: AnsatzSpec) -> list:
    """BoundGate skeleton: angles filled per sample by angle_matrix."""
    out = []
    for g in spec.gates:
        idx = None
        if g.binding is not None and g.binding.kind == "trainable":
            idx = g.binding.index
        out.append(BoundGate(kind=g.kind, targets=g.targets, angle=0.0,
                             grad_index=idx))
    return out


def angle_matrix(spec: AnsatzSpec, params: np.ndarray,
                 features: np.ndarray) -> np.ndarray:
    """Per-sample gate angles, shape (B, n_gates).

    features is (B, n_features); params is shared across the batch.
    """
    params = np.asarray(params, dtype=np.float64)
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if params.shape != (spec.n_params,):
        raise CircuitConfigError(
            f"expected {spec.n_params} parameters, got {params.shape}")
    if features.shape[1] != spec.n_features:
        raise CircuitConfigError(
            f"expected {spec.n_features} features, got {features.shape[1]}")
    nb = features.shape[0]
    angles = np.zeros((nb, len(spec.gates)))
    for j, g in enumerate(spec.gates):
        if g.binding is None:
            continue
        if g.binding.kind == "trainable":
            angles[:, j] = params[g.binding.index]
        elif g.binding.kind == "feature":
            angles[:, j] = features[:, g.binding.index]
        else:
            angles[:, j] = g.binding.value
    return angles


def evaluate_batch(spec: AnsatzSpec, params, features) -> np.ndarray:
    angles = angle_matrix(spec, params, features)
    states = sim.run_bound_batch(spec.n_qubits, bind(spec), angles)
    return sim._expectation_batch(states, spec.n_qubits, spec.observable)


def evaluate(spec: AnsatzSpec, params, features) -> float:
    return float(evaluate_batch(spec, params, np.atleast_2d(features))[0])


def gradient_batch(spec: AnsatzSpec, params, features,
                   observable: Optional[Observable] = None) -> np.ndarray:
    """Per-sample adjoint gradient of the observable w.r.t. params."""
    angles = angle_matrix(spec, params, features)
    obs = observable if observable is not None else spec.observable
    return sim.adjoint_gradient_batch(spec.n_qubits, bind(spec), angles, obs)


def circuit_probabilities(spec: AnsatzSpec, params, features) -> np.ndarray:
    angles = angle_matrix(spec, params, np.atleast_2d(features))
    states = sim.run_bound_batch(spec.n_qubits, bind(spec), angles)
    return np.abs(states[0]) ** 2


def states_batch(spec: AnsatzSpec, params, features) -> np.ndarray:
    angles = angle_matrix(spec, params, features)
    return sim.run_bound_batch(spec.n_qubits, bind(spec), angles)


# ---------------------------------------------------------------------------
# JSON serialization


def spec_to_json(spec: AnsatzSpec) -> str:
    gates = []
    for g in spec.gates:
        rec = {"kind": g.kind, "targets": list(g.targets)}
        if g.binding is not None:
            b = g.binding
            if b.kind == "fixed":
                rec["binding"] = {"kind": "fixed", "value": b.value}
            else:
                rec["binding"] = {"kind": b.kind, "index": b.index}
        gates.append(rec)
    obs = spec.observable
    doc = {
        "n_qubits": spec.n_qubits,
        "n_features": spec.n_features,
        "gates": gates,
        "observable": ({"kind": "Z", "qubit": obs.qubit} if obs.kind == "Z"
                       else {"kind": "projector", "bitstring": obs.bitstring}),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def spec_from_json(text: str) -> AnsatzSpec:
    doc = json.loads(text)
    gates = []
    for rec in doc["gates"]:
        binding = None
        if "binding" in rec:
            b = rec["binding"]
            if b["kind"] == "fixed":
                binding = ParamBinding.fixed(b["value"])
            elif b["kind"] == "trainable":
                binding = ParamBinding.trainable(b["index"])
            elif b["kind"] == "feature":
                binding = ParamBinding.feature(b["index"])
            else:
                raise CircuitConfigError(f"unknown binding kind {b['kind']!r}")
        gates.append(AnsatzGate(rec["kind"], tuple(rec["targets"]), binding))
    o = doc["observable"]
    obs = (Observable.z(o["qubit"]) if o["kind"] == "Z"
           else Observable.projector(o["bitstring"]))
    spec = AnsatzSpec(n_qubits=doc["n_qubits"], n_features=doc["n_features"],
                      gates=tuple(gates), observable=obs)
    spec.validate()
    return spec
