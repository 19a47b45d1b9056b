"""Gate-level construction of the three-qubit embedding evolution.

The evolution exp(-i * phi * Y(x)Z(x)Z) is built from controlled-sign (CZ)
gates and one local y-rotation on the ancilla.  Gate lists read left to
right in application order; written as an operator product the rightmost
factor is the first gate of the list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .qstate import StateVector, UnitaryMatrix, apply_unitary

GATE_NAMES = ("cz", "ry", "x", "z")


@dataclass(frozen=True)
class Gate:
    """One gate: ``cz`` (two distinct qubits), ``ry`` (qubit, angle), ``x`` or ``z``."""

    name: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.name not in GATE_NAMES:
            raise ValueError(f"unknown gate {self.name!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.name == "cz":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError("cz needs two distinct qubit indices")
        elif len(self.qubits) != 1:
            raise ValueError(f"{self.name} acts on exactly one qubit")
        if self.name == "ry" and self.angle is None:
            raise ValueError("ry needs an angle")
        if self.name != "ry" and self.angle is not None:
            raise ValueError(f"{self.name} takes no angle")


def cz(control: int, target: int) -> Gate:
    return Gate("cz", (control, target))


def ry(qubit: int, angle: float) -> Gate:
    return Gate("ry", (qubit,), float(angle))


def x(qubit: int) -> Gate:
    return Gate("x", (qubit,))


def z(qubit: int) -> Gate:
    return Gate("z", (qubit,))


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over a fixed register; first gate is applied first."""

    n_qubits: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(q < 0 or q >= self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} is out of range for {self.n_qubits} qubits")


def _ry2(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


def gate_unitary(g: Gate, n_qubits: int) -> UnitaryMatrix:
    """Full-register matrix of one gate, identity on untouched qubits."""
    if any(q < 0 or q >= n_qubits for q in g.qubits):
        raise ValueError(f"gate {g} is out of range for {n_qubits} qubits")
    dim = 2**n_qubits
    if g.name == "cz":
        # Symmetric in control/target: sign -1 exactly when both bits are 1.
        c, t = g.qubits
        diag = np.ones(dim, dtype=complex)
        for k in range(dim):
            if (k >> (n_qubits - 1 - c)) & 1 and (k >> (n_qubits - 1 - t)) & 1:
                diag[k] = -1.0
        return UnitaryMatrix(np.diag(diag))
    (q,) = g.qubits
    if g.name == "ry":
        block = _ry2(g.angle)
    elif g.name == "x":
        block = np.array([[0, 1], [1, 0]], dtype=complex)
    else:
        block = np.array([[1, 0], [0, -1]], dtype=complex)
    left = np.eye(2**q, dtype=complex)
    right = np.eye(2 ** (n_qubits - 1 - q), dtype=complex)
    return UnitaryMatrix(np.kron(np.kron(left, block), right))


def circuit_unitary(c: Circuit) -> UnitaryMatrix:
    """Composite unitary; the leftmost gate of the list acts first."""
    u = np.eye(2**c.n_qubits, dtype=complex)
    for g in c.gates:
        u = gate_unitary(g, c.n_qubits).matrix @ u
    return UnitaryMatrix(u)


def apply_circuit(c: Circuit, state: StateVector) -> StateVector:
    return apply_unitary(circuit_unitary(c), state)


def full_circuit(phi: float) -> Circuit:
    """Four CZ gates around one ancilla rotation.

    The composite equals cos(phi) I - i sin(phi) Y(x)Z(x)Z on the whole
    register, i.e. exp(-i * phi * Y(x)Z(x)Z), for every input.
    """
    return Circuit(3, (cz(0, 2), cz(0, 1), ry(0, phi), cz(0, 1), cz(0, 2)))


def reduced_circuit(phi: float) -> Circuit:
    """Two-CZ reduction valid on inputs with the ancilla (qubit 0) in |0>.

    On the ancilla-|0> subspace the composite agrees with ``full_circuit``;
    on ancilla-|1> inputs the two circuits may differ.  The two CZ gates
    commute, so their relative order is free.
    """
    return Circuit(3, (ry(0, phi), cz(0, 1), cz(0, 2)))


def circuit_to_json(c: Circuit) -> list[dict]:
    return [
        {"gate": g.name, "qubits": list(g.qubits), "angle": g.angle}
        for g in c.gates
    ]


def circuit_from_json(records: Sequence[Mapping], n_qubits: int) -> Circuit:
    gates = []
    for rec in records:
        angle = rec.get("angle")
        gates.append(
            Gate(rec["gate"], tuple(rec["qubits"]), None if angle is None else float(angle))
        )
    return Circuit(n_qubits, tuple(gates))
