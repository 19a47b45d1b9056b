import numpy as np
import pytest

from eqsim.qstate import DensityMatrix, StateVector


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_state(rng, n_qubits):
    vec = rng.standard_normal(2**n_qubits) + 1j * rng.standard_normal(2**n_qubits)
    return StateVector(vec / np.linalg.norm(vec))


def random_density(rng, n_qubits):
    dim = 2**n_qubits
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    mat = g @ g.conj().T
    return DensityMatrix(mat / np.trace(mat).real)


def random_unitary(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases
