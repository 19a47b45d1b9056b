"""Embedding quantum simulator toolkit.

Simulates the measurement of two-qubit concurrence with one ancilla qubit:
the real embedding of the dynamics, the three-qubit gate circuit, its
post-selected linear-optics realization, and the noise and counting
statistics that shape measured curves.
"""

from .qstate import (
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
from .embedding import (
    EmbeddedHamiltonian,
    EmbeddedState,
    SimulatedHamiltonian,
    antilinear_expectation,
    concurrence_embedded,
    concurrence_pure,
    conjugate_via_gate,
    decode,
    embed,
    embed_hamiltonian,
    protocol_embedded_state,
    protocol_initial_state,
    protocol_state,
)
from .circuits import (
    Circuit,
    Gate,
    apply_circuit,
    circuit_unitary,
    cz,
    full_circuit,
    gate_unitary,
    reduced_circuit,
    ry,
)
from .optics import (
    Element,
    FockAmplitudeMap,
    OpticalMode,
    build_eqs_optics,
    dual_rail_state,
    fock_basis_input,
    hwp_mode_transform,
    postselect_coincidence,
    ppbs_mode_transform,
    propagate,
)
from .tomography import (
    ExpectationSet,
    ProjectionSetting,
    concurrence_mixed,
    expectations_from_state,
    linear_inversion,
    nearest_positive,
    reconstruct_from_counts,
    simulate_tomography_counts,
)
from .noise import (
    CountRecord,
    RatePipeline,
    RateStage,
    WhiteNoiseModel,
    apply_white_noise,
    concurrence_from_counts,
    expected_concurrence_embedded,
    pump_model_fit,
    rate_pipeline_evaluate,
    sample_observable,
)

__version__ = "0.1.0"
