"""Imperfection models: white noise, Poissonian counting, rate pipelines.

The single-parameter white-noise model mixes the ideal state with the
maximally mixed one.  Because the concurrence observables are traceless,
the extracted concurrence attenuates to epsilon * |sin(2gt)| exactly.
Counting statistics are Poissonian per projection setting (one projector
is measured at a time), propagated to first order; near the modulus's
non-differentiable point a Monte-Carlo fallback takes over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .qstate import (
    DensityMatrix,
    PAULI_EIGENBASIS,
    PROJECTOR_SIGNS,
    PauliString,
    projector_state,
)

# Reported sigma switches to Monte-Carlo resampling when the point estimate
# sits within this many first-order sigmas of zero.
MC_FALLBACK_SIGMA_FACTOR = 3.0


@dataclass(frozen=True)
class WhiteNoiseModel:
    """Mixing weight of the ideal state; 1 - epsilon goes to white noise."""

    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon {self.epsilon} outside [0, 1]")


@dataclass(frozen=True)
class CountRecord:
    """Event counts for one projection setting, Poisson statistics implied."""

    setting: tuple[str, ...]
    counts: int
    total_shots: int

    def __post_init__(self):
        object.__setattr__(self, "setting", tuple(self.setting))
        if self.counts < 0:
            raise ValueError("counts must be nonnegative")
        if self.total_shots <= 0:
            raise ValueError("total_shots must be positive")


@dataclass(frozen=True)
class RateStage:
    """One pipeline stage: a source rate in Hz or a dimensionless factor."""

    label: str
    value: float
    unit: str = ""  # "Hz" for the source stage, "" for factors

    def __post_init__(self):
        if self.unit not in ("", "Hz"):
            raise ValueError(f"unknown unit {self.unit!r}")
        if self.unit == "Hz":
            if self.value <= 0:
                raise ValueError("rate must be positive")
        elif not 0.0 < self.value <= 1.0:
            raise ValueError(f"factor {self.value} outside (0, 1]")


@dataclass(frozen=True)
class RatePipeline:
    stages: tuple[RateStage, ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        n_rates = sum(1 for s in self.stages if s.unit == "Hz")
        if n_rates != 1:
            raise ValueError(f"pipeline needs exactly one Hz stage, found {n_rates}")


def apply_white_noise(rho_id: DensityMatrix, model: WhiteNoiseModel) -> DensityMatrix:
    """epsilon * rho + (1 - epsilon) I / 2^n; positive by construction."""
    dim = 2**rho_id.n_qubits
    mixed = np.eye(dim, dtype=complex) / dim
    return DensityMatrix(model.epsilon * rho_id.matrix + (1.0 - model.epsilon) * mixed)


def expected_concurrence_embedded(model: WhiteNoiseModel, gt: float) -> float:
    """Concurrence the simulator extracts from a white-noised input.

    Both concurrence observables are traceless, so each expectation scales
    by epsilon and the modulus becomes epsilon * |sin(2gt)|.
    """
    return model.epsilon * abs(math.sin(2.0 * gt))


def observable_settings(p: PauliString) -> list[tuple[str, ...]]:
    """The 2^n eigenprojector settings of a Pauli string without identities."""
    if any(l == "I" for l in p.labels):
        raise ValueError("eigenprojector settings need a non-identity Pauli per qubit")
    bases = [PAULI_EIGENBASIS[l] for l in p.labels]
    return [tuple(combo) for combo in product(*bases)]


def setting_sign(setting: Iterable[str]) -> int:
    sign = 1
    for label in setting:
        sign *= PROJECTOR_SIGNS[label]
    return sign


def outcome_probabilities(
    state: DensityMatrix, p: PauliString
) -> dict[tuple[str, ...], float]:
    """Born probabilities of the eigenprojector outcomes of an observable."""
    if state.n_qubits != p.n_qubits:
        raise ValueError("state and observable sizes differ")
    probs = {}
    for setting in observable_settings(p):
        proj = projector_state(setting)
        val = float(np.real(np.vdot(proj, state.matrix @ proj)))
        probs[setting] = max(val, 0.0)
    return probs


def sample_observable_counts(
    state: DensityMatrix,
    p: PauliString,
    shots: int,
    seed: int,
) -> list[CountRecord]:
    """Poisson counts per eigenprojector setting, mean shots * probability."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    records = []
    for setting, prob in outcome_probabilities(state, p).items():
        counts = int(rng.poisson(shots * prob))
        records.append(CountRecord(setting, counts, shots))
    return records


def expectation_from_records(
    records: Sequence[CountRecord],
) -> tuple[float, float]:
    """Sign-weighted mean of normalized count fractions with Poisson error.

    With fractions f_k = n_k / N, the estimate is sum s_k f_k and the
    propagated variance sum n_k (s_k - estimate)^2 / N^2.
    """
    total = sum(r.counts for r in records)
    if total == 0:
        return 0.0, float("inf")
    estimate = sum(setting_sign(r.setting) * r.counts for r in records) / total
    var = sum(r.counts * (setting_sign(r.setting) - estimate) ** 2 for r in records)
    return float(estimate), float(math.sqrt(var) / total)


def sample_observable(
    state: DensityMatrix,
    p: PauliString,
    shots: int,
    seed: int,
) -> tuple[float, float]:
    """Simulated measurement of one Pauli observable: (estimate, sigma)."""
    return expectation_from_records(sample_observable_counts(state, p, shots, seed))


def combine_observable_estimates(
    z_est: float, z_sigma: float, x_est: float, x_sigma: float
) -> tuple[float, float]:
    """|z - ix| with first-order error propagation through the modulus."""
    value = math.hypot(z_est, x_est)
    if value == 0.0:
        return 0.0, math.hypot(z_sigma, x_sigma)
    sigma = math.sqrt((z_est * z_sigma) ** 2 + (x_est * x_sigma) ** 2) / value
    return value, sigma


def _setting_observable(setting: tuple[str, ...]) -> PauliString:
    by_label = {l: pauli for pauli, pair in PAULI_EIGENBASIS.items() for l in pair}
    return PauliString(tuple(by_label[l] for l in setting))


def concurrence_from_counts(
    records: Sequence[CountRecord],
    *,
    seed: int = 0,
    mc_resamples: int = 500,
) -> tuple[float, float]:
    """Concurrence and sigma from the counts of both 3-qubit observables.

    Records are grouped by the observable their settings diagonalize
    (Z(x)Y(x)Y and X(x)Y(x)Y).  First-order propagation breaks down where
    the modulus is non-differentiable, so estimates within
    ``MC_FALLBACK_SIGMA_FACTOR`` sigmas of zero report a Monte-Carlo
    (Poisson-resampled) sigma instead.
    """
    groups: dict[PauliString, list[CountRecord]] = {}
    for rec in records:
        groups.setdefault(_setting_observable(rec.setting), []).append(rec)
    z_key = PauliString.from_str("ZYY")
    x_key = PauliString.from_str("XYY")
    missing = [str(k) for k in (z_key, x_key) if k not in groups]
    if missing:
        raise ValueError(f"missing observable counts for {missing}")
    z_est, z_sigma = expectation_from_records(groups[z_key])
    x_est, x_sigma = expectation_from_records(groups[x_key])
    value, sigma = combine_observable_estimates(z_est, z_sigma, x_est, x_sigma)
    if value < MC_FALLBACK_SIGMA_FACTOR * sigma:
        rng = np.random.default_rng(seed)
        samples = np.empty(mc_resamples)
        for i in range(mc_resamples):
            z_res = [
                CountRecord(r.setting, int(rng.poisson(r.counts)), r.total_shots)
                for r in groups[z_key]
            ]
            x_res = [
                CountRecord(r.setting, int(rng.poisson(r.counts)), r.total_shots)
                for r in groups[x_key]
            ]
            z_i, _ = expectation_from_records(z_res)
            x_i, _ = expectation_from_records(x_res)
            samples[i] = math.hypot(z_i, x_i)
        sigma = float(np.std(samples))
    return value, sigma


# --- calibration data -------------------------------------------------------
#
# Bundled (pump power percent, maximum extracted concurrence) calibration
# points for the three-photon simulator run and the two-photon tomography
# run.  They define the default pump -> epsilon mapping.

EQS_PUMP_CONCURRENCE: tuple[tuple[float, float], ...] = (
    (10.0, 0.70),
    (30.0, 0.57),
    (100.0, 0.37),
)

QST_PUMP_CONCURRENCE: tuple[tuple[float, float], ...] = (
    (5.0, 0.979),
    (10.0, 0.959),
    (30.0, 0.884),
    (100.0, 0.694),
)


def pump_model_fit(
    points: Sequence[tuple[float, float]]
) -> tuple[float, float]:
    """Least-squares line through (pump percent, max concurrence) points."""
    if len(points) < 2:
        raise ValueError("need at least two points")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if np.ptp(xs) == 0.0:
        raise ValueError("degenerate abscissae: all pump values equal")
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(slope), float(intercept)


def werner_epsilon_for_target(c_max: float) -> float:
    """Mixing weight whose Werner-type state peaks at concurrence ``c_max``."""
    eps = (2.0 * c_max + 1.0) / 3.0
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"target {c_max} maps outside [0, 1]")
    return eps


def epsilon_from_pump(pump_percent: float, protocol: str = "eqs") -> float:
    """Default pump -> epsilon mapping from the bundled calibration lines.

    For the three-photon simulator the curve maximum equals epsilon itself;
    for the two-photon tomography protocol it is the Werner-type maximum
    (3 epsilon - 1)/2, inverted here.
    """
    if protocol == "eqs":
        slope, intercept = pump_model_fit(EQS_PUMP_CONCURRENCE)
        eps = slope * pump_percent + intercept
    elif protocol == "qst":
        slope, intercept = pump_model_fit(QST_PUMP_CONCURRENCE)
        eps = werner_epsilon_for_target(slope * pump_percent + intercept)
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"pump {pump_percent}% maps to epsilon {eps} outside [0, 1]")
    return float(eps)


def rate_pipeline_evaluate(pipeline: RatePipeline) -> float:
    """Product of all stages, in Hz."""
    out = 1.0
    for stage in pipeline.stages:
        out *= stage.value
    return out


def two_photon_rate_pipeline() -> RatePipeline:
    """Source pair rate through setup transmission and one gate's success."""
    return RatePipeline(
        (
            RateStage("source-pairs", 150e3, "Hz"),
            RateStage("setup-transmission", 0.8),
            RateStage("gate-success", 1.0 / 9.0),
        )
    )


def three_photon_rate_pipeline() -> RatePipeline:
    """Four-fold source rate through transmission, two gates, two filters."""
    return RatePipeline(
        (
            RateStage("source-fourfold", 500.0, "Hz"),
            RateStage("setup-transmission", 0.8),
            RateStage("two-gate-success", 1.0 / 27.0),
            RateStage("bandpass-filter-a", 0.5),
            RateStage("bandpass-filter-b", 0.5),
        )
    )
