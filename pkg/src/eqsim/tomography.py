"""Two-qubit state tomography baseline and mixed-state concurrence.

The comparator protocol reconstructs the full two-qubit density matrix
from 15 Pauli expectations (or, as measured, from 36 overcomplete
projection settings built from the six single-qubit eigenstates) and then
evaluates the mixed-state concurrence.  Reconstruction is plain linear
inversion; an explicit nearest-positive projection is available for noisy
inputs.  Counts are Poissonian per setting because each projector is
measured on its own.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .noise import CountRecord
from .qstate import (
    DensityMatrix,
    PAULI_EIGENBASIS,
    PROJECTOR_SIGNS,
    pauli_matrix,
    projector_state,
)

PROJECTION_LABELS = ("h", "v", "d", "a", "r", "l")
_NONTRIVIAL_PAULIS = ("X", "Y", "Z")


@dataclass(frozen=True)
class ProjectionSetting:
    """Per-qubit projector labels from {h, v, d, a, r, l}."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        bad = set(self.labels) - set(PROJECTION_LABELS)
        if bad:
            raise ValueError(f"invalid projector labels {sorted(bad)}")

    def state(self) -> np.ndarray:
        return projector_state(self.labels)


def two_qubit_pauli_labels() -> tuple[str, ...]:
    """The 15 non-identity two-qubit Pauli labels, in a fixed order."""
    labels = [
        a + b for a, b in product(("I",) + _NONTRIVIAL_PAULIS, repeat=2) if a + b != "II"
    ]
    return tuple(labels)


class ExpectationSet:
    """Exactly the 15 non-identity two-qubit Pauli expectations."""

    __slots__ = ("table",)

    def __init__(self, table: Mapping[str, float]):
        expected = set(two_qubit_pauli_labels())
        got = set(table)
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise ValueError(
                f"expectation set must hold the 15 non-identity strings; "
                f"missing {missing}, unexpected {extra}"
            )
        object.__setattr__(
            self, "table", {k: float(table[k]) for k in two_qubit_pauli_labels()}
        )

    def __setattr__(self, name, value):
        raise AttributeError("ExpectationSet is immutable")

    def __getitem__(self, label: str) -> float:
        return self.table[label]

    def items(self):
        return self.table.items()


def expectations_from_state(rho: DensityMatrix) -> ExpectationSet:
    """All 15 Tr(rho sigma_i (x) sigma_j) values."""
    if rho.n_qubits != 2:
        raise ValueError("tomography baseline covers two qubits")
    table = {}
    for label in two_qubit_pauli_labels():
        val = complex(np.trace(rho.matrix @ pauli_matrix(label).matrix))
        table[label] = val.real
    return ExpectationSet(table)


def linear_inversion(expectations: ExpectationSet) -> DensityMatrix:
    """rho = (1/4) sum <P> P over all 16 Paulis, with <II> = 1.

    The output is Hermitian with unit trace by construction.  With noisy
    inputs it can be indefinite; the ``positive`` flag records this and
    ``nearest_positive`` projects it back onto physical states.
    """
    mat = np.eye(4, dtype=complex)
    for label, value in expectations.items():
        mat = mat + value * pauli_matrix(label).matrix
    return DensityMatrix(mat / 4.0, require_positive=False)


def nearest_positive(rho: DensityMatrix) -> DensityMatrix:
    """Clip negative eigenvalues to zero and renormalize the trace."""
    eigvals, eigvecs = np.linalg.eigh(rho.matrix)
    clipped = np.clip(eigvals, 0.0, None)
    total = clipped.sum()
    if total <= 0.0:
        raise ValueError("state has no positive spectral weight")
    mat = (eigvecs * (clipped / total)) @ eigvecs.conj().T
    return DensityMatrix(mat)


def concurrence_mixed(rho: DensityMatrix) -> float:
    """Mixed-state two-qubit concurrence.

    With rho~ = (Y(x)Y) rho* (Y(x)Y) and lambda_i the decreasing square
    roots of the eigenvalues of rho rho~, the concurrence is
    max(0, l1 - l2 - l3 - l4).  The lambdas are evaluated as the singular
    values of M = sqrt(rho) (Y(x)Y) sqrt(rho)* (the same spectrum, since
    sqrt(rho) rho~ sqrt(rho) = M M-dagger): eigenvalues of the plain
    product lose half the working precision near zero under the square
    root, which would break pure-state agreement at 1e-10.
    """
    if rho.n_qubits != 2:
        raise ValueError("concurrence is defined for two qubits")
    yy = pauli_matrix("YY").matrix
    eigvals, eigvecs = np.linalg.eigh(rho.matrix)
    sqrt_rho = (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.conj().T
    m = sqrt_rho @ yy @ sqrt_rho.conj()
    lams = np.linalg.svd(m, compute_uv=False)
    return float(max(0.0, lams[0] - lams[1] - lams[2] - lams[3]))


def tomography_settings() -> tuple[ProjectionSetting, ...]:
    """The 36 overcomplete settings: all pairs of the six projectors."""
    return tuple(
        ProjectionSetting((a, b)) for a, b in product(PROJECTION_LABELS, repeat=2)
    )


def born_probability(rho: DensityMatrix, setting: ProjectionSetting) -> float:
    proj = setting.state()
    return float(max(np.real(np.vdot(proj, rho.matrix @ proj)), 0.0))


def simulate_tomography_counts(
    rho: DensityMatrix, shots_per_setting: int, seed: int
) -> list[CountRecord]:
    """Poisson counts for each of the 36 settings, deterministic per seed."""
    if shots_per_setting <= 0:
        raise ValueError("shots_per_setting must be positive")
    rng = np.random.default_rng(seed)
    records = []
    for setting in tomography_settings():
        mean = shots_per_setting * born_probability(rho, setting)
        records.append(
            CountRecord(setting.labels, int(rng.poisson(mean)), shots_per_setting)
        )
    return records


def expectations_from_counts(records: Sequence[CountRecord]) -> ExpectationSet:
    """Estimate the 15 expectations from overcomplete projection counts.

    Two-Pauli terms combine the four sign-weighted outcome fractions of the
    matching eigenbases; single-Pauli terms marginalize the partner qubit
    and average over its three bases to use all of the data.
    """
    fractions: dict[tuple[str, str], float] = {}
    for rec in records:
        if len(rec.setting) != 2:
            raise ValueError("two-qubit tomography needs two-label settings")
        fractions[rec.setting] = rec.counts / rec.total_shots
    needed = {(a, b) for a, b in product(PROJECTION_LABELS, repeat=2)}
    missing = needed - set(fractions)
    if missing:
        raise ValueError(f"missing projection settings {sorted(missing)[:4]}...")

    table: dict[str, float] = {}
    for p1, p2 in product(_NONTRIVIAL_PAULIS, repeat=2):
        total = 0.0
        for l1 in PAULI_EIGENBASIS[p1]:
            for l2 in PAULI_EIGENBASIS[p2]:
                total += (
                    PROJECTOR_SIGNS[l1] * PROJECTOR_SIGNS[l2] * fractions[(l1, l2)]
                )
        table[p1 + p2] = total
    for p1 in _NONTRIVIAL_PAULIS:
        acc = 0.0
        for partner in _NONTRIVIAL_PAULIS:
            for l1 in PAULI_EIGENBASIS[p1]:
                for l2 in PAULI_EIGENBASIS[partner]:
                    acc += PROJECTOR_SIGNS[l1] * fractions[(l1, l2)]
        table[p1 + "I"] = acc / 3.0
    for p2 in _NONTRIVIAL_PAULIS:
        acc = 0.0
        for partner in _NONTRIVIAL_PAULIS:
            for l1 in PAULI_EIGENBASIS[partner]:
                for l2 in PAULI_EIGENBASIS[p2]:
                    acc += PROJECTOR_SIGNS[l2] * fractions[(l1, l2)]
        table["I" + p2] = acc / 3.0
    return ExpectationSet(table)


def reconstruct_from_counts(records: Sequence[CountRecord]) -> DensityMatrix:
    """Counts -> expectations -> linear inversion -> physical projection."""
    rho = linear_inversion(expectations_from_counts(records))
    if rho.positive:
        return DensityMatrix(rho.matrix)
    return nearest_positive(rho)


def concurrence_sigma_mc(
    records: Sequence[CountRecord], resamples: int, seed: int
) -> float:
    """Concurrence error bar from Poisson-resampled reconstructions."""
    rng = np.random.default_rng(seed)
    values = np.empty(resamples)
    for i in range(resamples):
        resampled = [
            CountRecord(r.setting, int(rng.poisson(r.counts)), r.total_shots)
            for r in records
        ]
        values[i] = concurrence_mixed(reconstruct_from_counts(resampled))
    return float(np.std(values))


def counts_to_csv(records: Sequence[CountRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["setting_q1", "setting_q2", "counts", "shots"])
    for rec in records:
        writer.writerow([rec.setting[0], rec.setting[1], rec.counts, rec.total_shots])
    return buf.getvalue()


def counts_from_csv(text: str) -> list[CountRecord]:
    reader = csv.DictReader(io.StringIO(text))
    return [
        CountRecord(
            (row["setting_q1"], row["setting_q2"]),
            int(row["counts"]),
            int(row["shots"]),
        )
        for row in reader
    ]
