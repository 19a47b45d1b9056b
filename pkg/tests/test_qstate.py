import math

import numpy as np
import pytest
import scipy.linalg

from conftest import random_state, random_unitary
from eqsim.qstate import (
    DensityMatrix,
    PauliString,
    StateVector,
    UnitaryMatrix,
    apply_unitary,
    basis_state,
    expectation,
    ket,
    matrix_exponential_hermitian_involution,
    pauli_matrix,
    states_equal,
    tensor,
)


class TestTensor:
    def test_zz_on_00_is_plus(self):
        zz = tensor(pauli_matrix("Z"), pauli_matrix("Z"))
        out = apply_unitary(zz, ket("00"))
        assert np.allclose(out.amplitudes, ket("00").amplitudes)

    def test_zz_on_01_is_minus(self):
        zz = tensor(pauli_matrix("Z"), pauli_matrix("Z"))
        out = apply_unitary(zz, ket("01"))
        assert np.allclose(out.amplitudes, -ket("01").amplitudes)

    def test_product_state(self):
        got = tensor(ket("0"), ket("+"))
        want = np.array([1, 1, 0, 0]) / math.sqrt(2)
        assert np.allclose(got.amplitudes, want)

    def test_left_operand_is_most_significant(self):
        got = tensor(ket("1"), ket("0"))
        assert np.allclose(got.amplitudes, basis_state(2, 0b10).amplitudes)

    def test_associative(self, rng):
        mats = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(3)]
        a, b, c = mats
        assert np.allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))


class TestPauliMatrix:
    def test_z(self):
        assert np.allclose(pauli_matrix("Z").matrix, np.diag([1, -1]))

    def test_y(self):
        assert np.allclose(pauli_matrix("Y").matrix, np.array([[0, -1j], [1j, 0]]))

    def test_xyy_squares_to_identity(self):
        m = pauli_matrix("XYY").matrix
        assert np.allclose(m @ m, np.eye(8))

    @pytest.mark.parametrize("labels", ["X", "ZZ", "XYZ", "IYI", "YY"])
    def test_hermitian_unitary_traceless(self, labels):
        m = pauli_matrix(labels).matrix
        assert np.allclose(m, m.conj().T)
        assert np.allclose(m.conj().T @ m, np.eye(m.shape[0]))
        if not PauliString.from_str(labels).is_identity:
            assert abs(np.trace(m)) < 1e-12

    def test_identity_string_has_full_trace(self):
        assert np.trace(pauli_matrix("II").matrix).real == pytest.approx(4.0)

    def test_rejects_bad_label(self):
        with pytest.raises(ValueError):
            PauliString.from_str("XQ")


class TestExpectation:
    def test_plus_is_x_eigenstate(self):
        assert expectation(ket("+"), "X") == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed_traceless_observable(self):
        assert expectation(DensityMatrix.maximally_mixed(2), "ZZ") == pytest.approx(
            0.0, abs=1e-12
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            expectation(ket("0"), "ZZ")

    def test_real_for_random_mixed_states(self, rng):
        from conftest import random_density

        for _ in range(50):
            rho = random_density(rng, 2)
            val = expectation(rho, "XY")
            assert isinstance(val, float)
            assert -1.0 <= val <= 1.0


class TestApplyUnitary:
    def test_identity(self, rng):
        psi = random_state(rng, 2)
        out = apply_unitary(UnitaryMatrix(np.eye(4)), psi)
        assert np.allclose(out.amplitudes, psi.amplitudes)

    def test_x_flips(self):
        assert np.allclose(apply_unitary(pauli_matrix("X"), ket("0")).amplitudes,
                           ket("1").amplitudes)

    def test_involution_evolution_on_product_state(self):
        # Expanding cos(pi/4) I - i sin(pi/4) Y(x)Z(x)Z term by term on |0,+,+>
        # gives (|0,+,+> + |1,-,->)/sqrt(2).
        u = matrix_exponential_hermitian_involution("YZZ", math.pi / 4)
        got = apply_unitary(u, ket("0++"))
        want = (ket("0++").amplitudes + ket("1--").amplitudes) / math.sqrt(2)
        assert np.allclose(got.amplitudes, want, atol=1e-12)

    def test_norm_preserved_for_random_unitaries(self, rng):
        for _ in range(1000):
            n = int(rng.integers(1, 4))
            u = random_unitary(rng, 2**n)
            psi = random_state(rng, n)
            out = apply_unitary(UnitaryMatrix(u), psi)
            assert abs(np.linalg.norm(out.amplitudes) - 1.0) < 1e-12

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            apply_unitary(np.diag([1.0, 2.0]), ket("0"))

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_unitary(UnitaryMatrix(np.eye(4)), ket("0"))


class TestInvolutionExponential:
    def test_angle_zero_is_identity(self):
        u = matrix_exponential_hermitian_involution("XYZ", 0.0)
        assert np.allclose(u.matrix, np.eye(8))

    def test_right_angle_is_minus_i_pauli(self):
        u = matrix_exponential_hermitian_involution("ZZ", math.pi / 2)
        assert np.allclose(u.matrix, -1j * pauli_matrix("ZZ").matrix, atol=1e-12)

    @pytest.mark.parametrize("angle", [0.1, 0.7, 1.9, 3.3, -0.4])
    def test_matches_scaling_and_squaring_oracle(self, angle):
        p = pauli_matrix("YZZ").matrix
        want = scipy.linalg.expm(-1j * angle * p)
        got = matrix_exponential_hermitian_involution("YZZ", angle).matrix
        assert np.max(np.abs(got - want)) < 1e-12


class TestValueSemantics:
    def test_state_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            StateVector(np.array([1.0, 1.0]))

    def test_state_is_immutable(self):
        psi = ket("0")
        with pytest.raises((ValueError, AttributeError)):
            psi.amplitudes[0] = 0.0

    def test_density_matrix_rejects_non_hermitian(self):
        mat = np.array([[0.5, 0.4], [0.1, 0.5]], dtype=complex)
        with pytest.raises(ValueError):
            DensityMatrix(mat)

    def test_density_matrix_rejects_negative(self):
        mat = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValueError):
            DensityMatrix(mat)

    def test_density_matrix_flags_negative_when_allowed(self):
        mat = np.diag([1.5, -0.5]).astype(complex)
        rho = DensityMatrix(mat, require_positive=False)
        assert not rho.positive

    def test_phase_insensitive_equality(self, rng):
        psi = random_state(rng, 2)
        rotated = StateVector(np.exp(0.321j) * psi.amplitudes)
        assert states_equal(psi, rotated)
        assert not states_equal(psi, ket("00")) or np.allclose(
            np.abs(psi.amplitudes), [1, 0, 0, 0]
        )


class TestSerialization:
    def test_state_round_trip(self, rng):
        psi = random_state(rng, 3)
        back = StateVector.from_json(psi.to_json())
        assert np.allclose(back.amplitudes, psi.amplitudes)

    def test_unitary_round_trip(self, rng):
        u = UnitaryMatrix(random_unitary(rng, 8))
        back = UnitaryMatrix.from_json(u.to_json())
        assert np.allclose(back.matrix, u.matrix)

    def test_density_round_trip(self, rng):
        from conftest import random_density

        rho = random_density(rng, 2)
        back = DensityMatrix.from_json(rho.to_json())
        assert np.allclose(back.matrix, rho.matrix)

    def test_json_is_re_im_split(self):
        obj = ket("r").to_json()
        assert set(obj) == {"n_qubits", "re", "im"}
        assert obj["im"][1] == pytest.approx(1 / math.sqrt(2))
