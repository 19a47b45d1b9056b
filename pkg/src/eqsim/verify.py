"""Self-contained invariant suite behind the ``verify`` CLI command.

Every check is fast (the whole suite runs in a few seconds) and returns a
named result, so a corrupted build points at the broken layer directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import circuits, embedding, noise, optics
from .qstate import (
    PauliString,
    StateVector,
    expectation,
    matrix_exponential_hermitian_involution,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))


def _random_state(rng: np.random.Generator, n_qubits: int) -> StateVector:
    vec = rng.standard_normal(2**n_qubits) + 1j * rng.standard_normal(2**n_qubits)
    return StateVector(vec / np.linalg.norm(vec))


def check_circuit_identity(grid_points: int = 200) -> CheckResult:
    worst = 0.0
    yzz = PauliString.from_str("YZZ").matrix()
    for phi in np.linspace(0.0, 2.0 * math.pi, grid_points):
        got = circuits.circuit_unitary(circuits.full_circuit(phi)).matrix
        want = math.cos(phi) * np.eye(8) - 1j * math.sin(phi) * yzz
        worst = max(worst, float(np.max(np.abs(got - want))))
    return CheckResult(
        "circuit-identity", worst < 1e-12, f"max deviation {worst:.2e} over {grid_points} angles"
    )


def check_reduced_circuit(trials: int = 25, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        phi = rng.uniform(0.0, 2.0 * math.pi)
        chi = _random_state(rng, 2)
        full_u = circuits.circuit_unitary(circuits.full_circuit(phi)).matrix
        red_u = circuits.circuit_unitary(circuits.reduced_circuit(phi)).matrix
        inp = np.concatenate([chi.amplitudes, np.zeros(4)])
        worst = max(worst, float(np.max(np.abs(full_u @ inp - red_u @ inp))))
    return CheckResult(
        "reduced-circuit-equivalence",
        worst < 1e-12,
        f"max deviation {worst:.2e} on {trials} ancilla-|0> inputs",
    )


def check_sign_table() -> CheckResult:
    table = optics.network_sign_table()
    cz_pair = circuits.circuit_unitary(
        circuits.Circuit(3, (circuits.cz(0, 1), circuits.cz(0, 2)))
    ).matrix
    worst = 0.0
    for k in range(8):
        pols = "".join(optics.POLARIZATIONS[(k >> (2 - q)) & 1] for q in range(3))
        want = cz_pair[k, k].real * optics.NETWORK_BASIS_AMPLITUDE
        worst = max(worst, abs(table[pols] - want))
    return CheckResult(
        "ppbs-sign-table",
        worst < 1e-12,
        f"max row deviation {worst:.2e} from the gate-level signs",
    )


def check_success_probability() -> CheckResult:
    worst = 0.0
    elements = optics.cz_network_elements()
    for k in range(8):
        pols = "".join(optics.POLARIZATIONS[(k >> (2 - q)) & 1] for q in range(3))
        out = optics.propagate(optics.fock_basis_input(pols), elements)
        _, success = optics.postselect_coincidence(out)
        worst = max(worst, abs(success - 1.0 / 27.0))
    return CheckResult(
        "postselect-success-probability",
        worst < 1e-12,
        f"max |p - 1/27| = {worst:.2e} over the 8 basis inputs",
    )


def check_embed_roundtrip(trials: int = 100, seed: int = 13) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        psi = _random_state(rng, 2)
        back = embedding.decode(embedding.embed(psi))
        worst = max(worst, float(np.max(np.abs(back.amplitudes - psi.amplitudes))))
    return CheckResult(
        "embed-decode-roundtrip", worst < 1e-12, f"max deviation {worst:.2e}"
    )


def check_two_observable_identity(trials: int = 100, seed: int = 17) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        psi = _random_state(rng, 2)
        direct = embedding.concurrence_pure(psi)
        via_pair = embedding.concurrence_embedded(embedding.embed(psi))
        worst = max(worst, abs(direct - via_pair))
    return CheckResult(
        "two-observable-identity", worst < 1e-12, f"max deviation {worst:.2e}"
    )


def check_noise_attenuation() -> CheckResult:
    worst = 0.0
    for eps in (0.0, 0.37, 0.57, 0.70, 1.0):
        model = noise.WhiteNoiseModel(eps)
        for gt in np.linspace(0.0, math.pi, 13):
            rho = noise.apply_white_noise(
                embedding.protocol_embedded_state(gt).inner.density_matrix(), model
            )
            got = abs(expectation(rho, "ZYY") - 1j * expectation(rho, "XYY"))
            worst = max(worst, abs(got - eps * abs(math.sin(2 * gt))))
    return CheckResult(
        "white-noise-attenuation", worst < 1e-12, f"max deviation {worst:.2e}"
    )


def check_optics_circuit_agreement(points: int = 7) -> CheckResult:
    worst = 0.0
    start = embedding.embed(embedding.protocol_initial_state()).inner
    for phi in np.linspace(0.0, math.pi, points):
        conditional, _ = optics.postselect_coincidence(
            optics.propagate(optics.dual_rail_state(start), optics.build_eqs_optics(phi))
        )
        target = circuits.apply_circuit(circuits.reduced_circuit(phi), start)
        worst = max(
            worst, float(np.max(np.abs(conditional.amplitudes - target.amplitudes)))
        )
    return CheckResult(
        "optics-circuit-agreement", worst < 1e-10, f"max deviation {worst:.2e}"
    )


def check_probability_conservation(trials: int = 5, seed: int = 19) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        psi = _random_state(rng, 3)
        out = optics.propagate(
            optics.dual_rail_state(psi), optics.build_eqs_optics(rng.uniform(0, math.pi))
        )
        worst = max(worst, abs(out.total_probability() - 1.0))
    return CheckResult(
        "probability-conservation", worst < 1e-12, f"max drift {worst:.2e}"
    )


def check_fixture_round_trips(seed: int = 29) -> CheckResult:
    import json

    from .circuits import circuit_from_json, circuit_to_json
    from .optics import FockAmplitudeMap, element_from_json, element_to_json
    from .qstate import UnitaryMatrix

    rng = np.random.default_rng(seed)
    worst = 0.0
    psi = _random_state(rng, 3)
    back = type(psi).from_json(json.loads(json.dumps(psi.to_json())))
    worst = max(worst, float(np.max(np.abs(back.amplitudes - psi.amplitudes))))
    u = circuits.circuit_unitary(circuits.full_circuit(0.61))
    back_u = UnitaryMatrix.from_json(json.loads(json.dumps(u.to_json())))
    worst = max(worst, float(np.max(np.abs(back_u.matrix - u.matrix))))
    circ = circuits.reduced_circuit(1.23)
    if circuit_from_json(json.loads(json.dumps(circuit_to_json(circ))), 3) != circ:
        return CheckResult("fixture-round-trips", False, "circuit record mismatch")
    for el in optics.build_eqs_optics(0.4):
        if element_from_json(json.loads(json.dumps(element_to_json(el)))) != el:
            return CheckResult("fixture-round-trips", False, "element record mismatch")
    fock = optics.dual_rail_state(psi)
    back_f = FockAmplitudeMap.from_json(json.loads(json.dumps(fock.to_json())))
    for occ, amp in fock.entries.items():
        occupation = {m: n for m, n in zip(fock.modes, occ)}
        worst = max(worst, abs(back_f.amplitude(occupation) - amp))
    return CheckResult("fixture-round-trips", worst < 1e-12, f"max deviation {worst:.2e}")


def check_pauli_involution(seed: int = 23) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        labels = tuple(rng.choice(("I", "X", "Y", "Z"), size=rng.integers(1, 4)))
        p = PauliString(labels)
        mat = p.matrix()
        worst = max(worst, float(np.max(np.abs(mat @ mat - np.eye(mat.shape[0])))))
        u = matrix_exponential_hermitian_involution(p, 0.0)
        worst = max(worst, float(np.max(np.abs(u.matrix - np.eye(mat.shape[0])))))
    return CheckResult("pauli-involution", worst < 1e-12, f"max deviation {worst:.2e}")


ALL_CHECKS = (
    check_circuit_identity,
    check_reduced_circuit,
    check_sign_table,
    check_success_probability,
    check_embed_roundtrip,
    check_two_observable_identity,
    check_noise_attenuation,
    check_optics_circuit_agreement,
    check_probability_conservation,
    check_fixture_round_trips,
    check_pauli_involution,
)


def run_checks() -> list[CheckResult]:
    results = []
    for check in ALL_CHECKS:
        try:
            results.append(check())
        except Exception as exc:  # a crash is a failed invariant, not a crash of verify
            name = check.__name__.removeprefix("check_").replace("_", "-")
            results.append(CheckResult(name, False, f"raised {type(exc).__name__}: {exc}"))
    return results
