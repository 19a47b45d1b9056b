"""Dense complex linear algebra and Pauli algebra over few-qubit registers.

Conventions used throughout the package:

* Qubit 0 is the most significant (leftmost) tensor factor, so the bit of
  qubit ``q`` in a basis index ``k`` over ``n`` qubits is
  ``(k >> (n - 1 - q)) & 1``.
* All values are immutable after construction (backing arrays are marked
  read-only) and all operations are pure functions, so concurrent reads
  need no coordination.
* Construction-time invariants are enforced at 1e-12, physical positivity
  at 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

ATOL_CONSTRUCT = 1e-12
ATOL_UNITARY = 1e-10
ATOL_POSITIVITY = 1e-10
ATOL_PHASE_EQUAL = 1e-10

PAULI_LABELS = ("I", "X", "Y", "Z")

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Single-qubit measurement eigenstates, named by the polarization labels used
# for photonic qubits (h = |0>, v = |1>).
PROJECTOR_STATES = {
    "h": np.array([1, 0], dtype=complex),
    "v": np.array([0, 1], dtype=complex),
    "d": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "a": np.array([1, -1], dtype=complex) / math.sqrt(2),
    "r": np.array([1, 1j], dtype=complex) / math.sqrt(2),
    "l": np.array([1, -1j], dtype=complex) / math.sqrt(2),
}

# (+1 eigenstate, -1 eigenstate) of each Pauli.
PAULI_EIGENBASIS = {"X": ("d", "a"), "Y": ("r", "l"), "Z": ("h", "v")}
PROJECTOR_SIGNS = {"h": +1, "v": -1, "d": +1, "a": -1, "r": +1, "l": -1}

_KET_1Q = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
}


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


def _n_qubits_for(dim: int, what: str) -> int:
    n = int(round(math.log2(dim)))
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"{what} dimension {dim} is not a power of two")
    return n


class StateVector:
    """Normalized pure state over ``n_qubits`` qubits."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, amplitudes: Sequence[complex] | np.ndarray):
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = _n_qubits_for(vec.size, "state vector")
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"state vector norm {norm} is not 1")
        object.__setattr__(self, "n_qubits", n)
        object.__setattr__(self, "amplitudes", _readonly(vec / norm))

    def __setattr__(self, name, value):  # immutable
        raise AttributeError("StateVector is immutable")

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits})"

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "re": self.amplitudes.real.tolist(),
            "im": self.amplitudes.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "StateVector":
        vec = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        if vec.size != 2 ** int(obj["n_qubits"]):
            raise ValueError("serialized length does not match n_qubits")
        return cls(vec)


class DensityMatrix:
    """Hermitian, unit-trace operator; positive semidefinite unless flagged.

    ``require_positive=False`` admits the indefinite output of linear
    inversion on noisy data; ``positive`` records whether the spectrum is
    nonnegative (within 1e-10).
    """

    __slots__ = ("n_qubits", "matrix", "positive")

    def __init__(self, matrix: np.ndarray, *, require_positive: bool = True):
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        n = _n_qubits_for(mat.shape[0], "density matrix")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-9:
            raise ValueError("density matrix is not Hermitian")
        mat = 0.5 * (mat + mat.conj().T)
        tr = np.trace(mat).real
        if abs(tr - 1.0) > 1e-6:
            raise ValueError(f"density matrix trace {tr} is not 1")
        mat = mat / tr
        min_eig = float(np.min(np.linalg.eigvalsh(mat)))
        positive = min_eig >= -ATOL_POSITIVITY
        if require_positive and not positive:
            raise ValueError(f"density matrix has negative eigenvalue {min_eig}")
        object.__setattr__(self, "n_qubits", n)
        object.__setattr__(self, "matrix", _readonly(mat))
        object.__setattr__(self, "positive", positive)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def __repr__(self):
        return f"DensityMatrix(n_qubits={self.n_qubits}, positive={self.positive})"

    @classmethod
    def from_pure(cls, psi: StateVector) -> "DensityMatrix":
        return psi.density_matrix()

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        dim = 2**n_qubits
        return cls(np.eye(dim, dtype=complex) / dim)

    def to_json(self) -> dict:
        flat = self.matrix.reshape(-1)
        return {"n_qubits": self.n_qubits, "re": flat.real.tolist(), "im": flat.imag.tolist()}

    @classmethod
    def from_json(cls, obj: Mapping, *, require_positive: bool = True) -> "DensityMatrix":
        dim = 2 ** int(obj["n_qubits"])
        flat = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        return cls(flat.reshape(dim, dim), require_positive=require_positive)


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, one label per qubit."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("Pauli string must be non-empty")
        bad = set(self.labels) - set(PAULI_LABELS)
        if bad:
            raise ValueError(f"invalid Pauli labels {sorted(bad)}")
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def from_str(cls, s: str) -> "PauliString":
        return cls(tuple(s.upper()))

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def is_identity(self) -> bool:
        return all(l == "I" for l in self.labels)

    def matrix(self) -> np.ndarray:
        return _readonly(reduce(np.kron, (_PAULI_1Q[l] for l in self.labels)))

    def __str__(self):
        return "".join(self.labels)


class UnitaryMatrix:
    """Unitary operator over a power-of-two dimension."""

    __slots__ = ("dimension", "matrix")

    def __init__(self, matrix: np.ndarray):
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("unitary must be square")
        _n_qubits_for(mat.shape[0], "unitary")
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if dev > ATOL_UNITARY:
            raise ValueError(f"matrix is not unitary (deviation {dev:.2e})")
        object.__setattr__(self, "dimension", mat.shape[0])
        object.__setattr__(self, "matrix", _readonly(mat))

    def __setattr__(self, name, value):
        raise AttributeError("UnitaryMatrix is immutable")

    @property
    def n_qubits(self) -> int:
        return _n_qubits_for(self.dimension, "unitary")

    def __repr__(self):
        return f"UnitaryMatrix(dimension={self.dimension})"

    def to_json(self) -> dict:
        flat = self.matrix.reshape(-1)
        return {"n_qubits": self.n_qubits, "re": flat.real.tolist(), "im": flat.imag.tolist()}

    @classmethod
    def from_json(cls, obj: Mapping) -> "UnitaryMatrix":
        dim = 2 ** int(obj["n_qubits"])
        flat = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        return cls(flat.reshape(dim, dim))


TensorOperand = Union[StateVector, DensityMatrix, UnitaryMatrix, np.ndarray]


def basis_state(n_qubits: int, index: int) -> StateVector:
    vec = np.zeros(2**n_qubits, dtype=complex)
    vec[index] = 1.0
    return StateVector(vec)


def ket(labels: str) -> StateVector:
    """Product state from single-qubit labels, e.g. ``ket("0++")``.

    Accepted labels: 0, 1, +, - and the polarization/eigenstate names
    h, v, d, a, r, l.
    """
    factors = []
    for c in labels:
        if c in _KET_1Q:
            factors.append(_KET_1Q[c])
        elif c in PROJECTOR_STATES:
            factors.append(PROJECTOR_STATES[c])
        else:
            raise ValueError(f"unknown ket label {c!r}")
    return StateVector(reduce(np.kron, factors))


def _raw(x: TensorOperand) -> np.ndarray:
    if isinstance(x, StateVector):
        return x.amplitudes
    if isinstance(x, DensityMatrix):
        return x.matrix
    if isinstance(x, UnitaryMatrix):
        return x.matrix
    return np.asarray(x, dtype=complex)


def tensor(a: TensorOperand, b: TensorOperand) -> TensorOperand:
    """Kronecker product; the left operand owns the most significant qubits."""
    prod = np.kron(_raw(a), _raw(b))
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(prod)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(prod)
    if isinstance(a, UnitaryMatrix) and isinstance(b, UnitaryMatrix):
        return UnitaryMatrix(prod)
    return prod


def pauli_matrix(p: PauliString | str) -> UnitaryMatrix:
    """Full-register matrix of a Pauli string (Hermitian and unitary)."""
    if isinstance(p, str):
        p = PauliString.from_str(p)
    return UnitaryMatrix(p.matrix())


def expectation(state: StateVector | DensityMatrix, p: PauliString | str) -> float:
    """<psi|P|psi> or Tr(rho P); asserts the imaginary residue is below 1e-10."""
    if isinstance(p, str):
        p = PauliString.from_str(p)
    mat = p.matrix()
    if isinstance(state, StateVector):
        if state.n_qubits != p.n_qubits:
            raise ValueError(
                f"state has {state.n_qubits} qubits but observable has {p.n_qubits}"
            )
        val = complex(np.vdot(state.amplitudes, mat @ state.amplitudes))
    elif isinstance(state, DensityMatrix):
        if state.n_qubits != p.n_qubits:
            raise ValueError(
                f"state has {state.n_qubits} qubits but observable has {p.n_qubits}"
            )
        val = complex(np.trace(state.matrix @ mat))
    else:
        raise TypeError(f"unsupported state type {type(state).__name__}")
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary residue {val.imag:.2e}")
    return float(val.real)


def apply_unitary(u: UnitaryMatrix | np.ndarray, state: StateVector) -> StateVector:
    """Apply a unitary to a pure state; the output is renormalized."""
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    if u.dimension != state.amplitudes.size:
        raise ValueError(
            f"unitary dimension {u.dimension} does not match state dimension "
            f"{state.amplitudes.size}"
        )
    return StateVector(u.matrix @ state.amplitudes)


def matrix_exponential_hermitian_involution(
    h_direction: PauliString | str, angle: float
) -> UnitaryMatrix:
    """exp(-i * angle * P) for an involutory Pauli direction P.

    Because P squares to the identity the exponential closes in two terms,
    cos(angle) I - i sin(angle) P, with no eigendecomposition.
    """
    if isinstance(h_direction, str):
        h_direction = PauliString.from_str(h_direction)
    mat = h_direction.matrix()
    dim = mat.shape[0]
    return UnitaryMatrix(math.cos(angle) * np.eye(dim) - 1j * math.sin(angle) * mat)


def states_equal(a: StateVector, b: StateVector, atol: float = ATOL_PHASE_EQUAL) -> bool:
    """Phase-insensitive equality: |<a|b>| = 1 within ``atol``."""
    if a.n_qubits != b.n_qubits:
        return False
    return abs(abs(np.vdot(a.amplitudes, b.amplitudes)) - 1.0) <= atol


def projector_state(labels: Iterable[str]) -> np.ndarray:
    """Product state vector for per-qubit projector labels from {h,v,d,a,r,l}."""
    factors = []
    for l in labels:
        if l not in PROJECTOR_STATES:
            raise ValueError(f"unknown projector label {l!r}")
        factors.append(PROJECTOR_STATES[l])
    return reduce(np.kron, factors)
