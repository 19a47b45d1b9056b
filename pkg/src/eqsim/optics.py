"""Exact Fock-space simulation of the dual-rail linear-optics circuit.

Photonic qubits live in the polarization (h, v) of one photon per spatial
line.  Partially polarizing beam splitters (PPBS) realize the two
controlled-sign gates probabilistically: type 1 transmits h fully and v
with 1/3, type 2 the reverse.  States are sparse maps from multi-mode
occupation patterns to amplitudes, and elements act by substituting each
creation operator with its image under the (orthogonal, self-inverse)
mode transformation:

    out_i = sqrt(t) in_i + sqrt(1-t) in_j
    out_j = sqrt(1-t) in_i - sqrt(t) in_j

per polarization with transmittance t.  Half-wave plates at angle theta map
h -> cos(2 theta) h + sin(2 theta) v and v -> sin(2 theta) h - cos(2 theta) v,
so theta = pi/4 is an X gate and theta = 0 a Z gate.  Post-selecting one
photon per output line leaves the gate-level three-qubit state with success
probability 1/27, independent of the input.

Vacuum ports that balance the h amplitudes are materialized as explicit
loss modes so every element is checkably unitary on the full mode set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .qstate import StateVector

MAIN_LINES = ("0", "1", "2")
POLARIZATIONS = ("h", "v")
MAX_PHOTONS = 4

PPBS_TRANSMITTANCES = {
    "ppbs1": (1.0, 1.0 / 3.0),
    "ppbs2": (1.0 / 3.0, 1.0),
    "glan_taylor": (1.0, 0.0),
}

# Post-selected amplitude of each computational basis input through the
# two-gate network: (1/sqrt(3)) per line.
NETWORK_BASIS_AMPLITUDE = 1.0 / (3.0 * math.sqrt(3.0))
POSTSELECT_SUCCESS_PROBABILITY = NETWORK_BASIS_AMPLITUDE**2


class OpticalMode(NamedTuple):
    spatial: str
    pol: str


@dataclass(frozen=True)
class Element:
    """One linear-optical element acting on one or two spatial lines."""

    kind: str  # "ppbs1" | "ppbs2" | "ppbs" | "hwp" | "glan_taylor"
    ports: tuple[str, ...]
    theta: float | None = None
    t_h: float | None = None
    t_v: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "ports", tuple(str(p) for p in self.ports))
        if self.kind in ("ppbs1", "ppbs2", "ppbs", "glan_taylor"):
            if len(self.ports) != 2 or self.ports[0] == self.ports[1]:
                raise ValueError(f"{self.kind} needs two distinct ports")
        elif self.kind == "hwp":
            if len(self.ports) != 1:
                raise ValueError("hwp acts on one port")
            if self.theta is None:
                raise ValueError("hwp needs an angle")
        else:
            raise ValueError(f"unknown element kind {self.kind!r}")
        if self.kind == "ppbs" and (self.t_h is None or self.t_v is None):
            raise ValueError("generic ppbs needs t_h and t_v")

    def transmittances(self) -> tuple[float, float]:
        if self.kind == "ppbs":
            return (float(self.t_h), float(self.t_v))
        return PPBS_TRANSMITTANCES[self.kind]


def ppbs_mode_transform(ppbs_type: int, ports: tuple[str, str]) -> Element:
    """PPBS of type 1 (t_h=1, t_v=1/3) or type 2 (t_h=1/3, t_v=1)."""
    if ppbs_type not in (1, 2):
        raise ValueError("ppbs type must be 1 or 2")
    return Element(f"ppbs{ppbs_type}", tuple(ports))


def hwp_mode_transform(port: str, theta: float) -> Element:
    """Half-wave plate at ``theta``; pi/4 gives X, 0 gives Z."""
    return Element("hwp", (port,), theta=float(theta))


def beamsplitter(ports: tuple[str, str], t_h: float, t_v: float) -> Element:
    """Generic polarization-dependent splitter (e.g. t=1/2 for a balanced one)."""
    return Element("ppbs", tuple(ports), t_h=float(t_h), t_v=float(t_v))


def glan_taylor(port: str, dump: str) -> Element:
    """Polarizer passing h on ``port`` and routing v into the ``dump`` line."""
    return Element("glan_taylor", (port, dump))


def _splitter_block(t: float) -> np.ndarray:
    # Orthogonal and self-inverse; the reflected output carries the minus sign.
    r = math.sqrt(1.0 - t)
    s = math.sqrt(t)
    return np.array([[s, r], [r, -s]])


def _hwp_block(theta: float) -> np.ndarray:
    c, s = math.cos(2.0 * theta), math.sin(2.0 * theta)
    return np.array([[c, s], [s, -c]])


def element_modes(element: Element) -> list[OpticalMode]:
    return [OpticalMode(p, pol) for p in element.ports for pol in POLARIZATIONS]


def mode_matrix(element: Element, modes: Sequence[OpticalMode]) -> np.ndarray:
    """Unitary transformation of the full mode set induced by one element."""
    index = {m: i for i, m in enumerate(modes)}
    t = np.eye(len(modes))
    if element.kind == "hwp":
        (port,) = element.ports
        rows = [index[OpticalMode(port, "h")], index[OpticalMode(port, "v")]]
        t[np.ix_(rows, rows)] = _hwp_block(element.theta)
        return t
    ti, tj = element.transmittances()
    pi, pj = element.ports
    for pol, tp in zip(POLARIZATIONS, (ti, tj)):
        rows = [index[OpticalMode(pi, pol)], index[OpticalMode(pj, pol)]]
        t[np.ix_(rows, rows)] = _splitter_block(tp)
    return t


def single_photon_action(
    element: Element, mode: OpticalMode
) -> dict[OpticalMode, float]:
    """Image of one photon in ``mode`` under the element, as mode -> amplitude."""
    modes = element_modes(element)
    if mode not in modes:
        return {mode: 1.0}
    t = mode_matrix(element, modes)
    col = t[:, modes.index(mode)]
    return {m: float(col[i]) for i, m in enumerate(modes) if abs(col[i]) > 1e-15}


class FockAmplitudeMap:
    """Sparse bosonic state: occupation pattern per mode -> complex amplitude."""

    __slots__ = ("modes", "entries")

    def __init__(
        self,
        modes: Sequence[OpticalMode],
        entries: Mapping[tuple[int, ...], complex],
    ):
        modes = tuple(OpticalMode(*m) for m in modes)
        if len(set(modes)) != len(modes):
            raise ValueError("duplicate optical modes")
        cleaned: dict[tuple[int, ...], complex] = {}
        photon_counts = set()
        for occ, amp in entries.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != len(modes):
                raise ValueError("occupation length does not match mode count")
            if any(n < 0 for n in occ):
                raise ValueError("negative occupation")
            if abs(amp) == 0.0:
                continue
            photon_counts.add(sum(occ))
            cleaned[occ] = complex(amp)
        if len(photon_counts) > 1:
            raise ValueError(f"mixed total photon numbers {sorted(photon_counts)}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "entries", cleaned)

    def __setattr__(self, name, value):
        raise AttributeError("FockAmplitudeMap is immutable")

    def photon_number(self) -> int:
        if not self.entries:
            return 0
        return sum(next(iter(self.entries)))

    def total_probability(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.entries.values()))

    def amplitude(self, occupation: Mapping[OpticalMode, int]) -> complex:
        occ = tuple(occupation.get(m, 0) for m in self.modes)
        return self.entries.get(occ, 0.0 + 0.0j)

    def with_modes(self, modes: Sequence[OpticalMode]) -> "FockAmplitudeMap":
        """Re-index onto a superset of modes (new modes start in vacuum)."""
        modes = tuple(OpticalMode(*m) for m in modes)
        missing = set(self.modes) - set(modes)
        if missing:
            raise ValueError(f"target mode set drops occupied modes {sorted(missing)}")
        pos = {m: i for i, m in enumerate(modes)}
        entries = {}
        for occ, amp in self.entries.items():
            new_occ = [0] * len(modes)
            for m, n in zip(self.modes, occ):
                new_occ[pos[m]] = n
            entries[tuple(new_occ)] = amp
        return FockAmplitudeMap(modes, entries)

    def to_json(self) -> list[dict]:
        out = []
        for occ, amp in sorted(self.entries.items()):
            occupations = {
                f"{m.spatial}:{m.pol}": n for m, n in zip(self.modes, occ) if n
            }
            out.append({"occupations": occupations, "re": amp.real, "im": amp.imag})
        return out

    @classmethod
    def from_json(cls, records: Sequence[Mapping]) -> "FockAmplitudeMap":
        modes: list[OpticalMode] = []
        parsed = []
        for rec in records:
            occ = {}
            for key, n in rec["occupations"].items():
                spatial, pol = key.split(":")
                m = OpticalMode(spatial, pol)
                if m not in modes:
                    modes.append(m)
                occ[m] = int(n)
            parsed.append((occ, complex(rec["re"], rec["im"])))
        modes = canonical_mode_order(modes)
        entries = {
            tuple(occ.get(m, 0) for m in modes): amp for occ, amp in parsed
        }
        return cls(modes, entries)


def canonical_mode_order(modes: Iterable[OpticalMode]) -> tuple[OpticalMode, ...]:
    """Main lines first in numeric order, then auxiliary lines by name."""
    return tuple(
        sorted(set(modes), key=lambda m: (m.spatial not in MAIN_LINES, m.spatial, m.pol))
    )


def fock_basis_input(pols: str) -> FockAmplitudeMap:
    """One photon per main line with the given polarizations, e.g. ``"hvh"``."""
    if len(pols) != len(MAIN_LINES) or set(pols) - set(POLARIZATIONS):
        raise ValueError(f"need one of h/v per line, got {pols!r}")
    modes = canonical_mode_order(
        OpticalMode(line, pol) for line in MAIN_LINES for pol in POLARIZATIONS
    )
    occ = {OpticalMode(line, pol): 1 for line, pol in zip(MAIN_LINES, pols)}
    return FockAmplitudeMap(modes, {tuple(occ.get(m, 0) for m in modes): 1.0})


def dual_rail_state(psi: StateVector) -> FockAmplitudeMap:
    """Dual-rail encoding of an n-qubit state: qubit q -> photon on line q."""
    n = psi.n_qubits
    lines = tuple(str(q) for q in range(n))
    modes = canonical_mode_order(
        OpticalMode(line, pol) for line in lines for pol in POLARIZATIONS
    )
    pos = {m: i for i, m in enumerate(modes)}
    entries: dict[tuple[int, ...], complex] = {}
    for k, amp in enumerate(psi.amplitudes):
        if abs(amp) == 0.0:
            continue
        occ = [0] * len(modes)
        for q in range(n):
            bit = (k >> (n - 1 - q)) & 1
            occ[pos[OpticalMode(str(q), POLARIZATIONS[bit])]] = 1
        entries[tuple(occ)] = complex(amp)
    return FockAmplitudeMap(modes, entries)


def _occupancy_factorial(occ: tuple[int, ...]) -> float:
    out = 1.0
    for n in occ:
        out *= math.factorial(n)
    return out


def _apply_mode_matrix(
    state: FockAmplitudeMap, transform: np.ndarray
) -> FockAmplitudeMap:
    n_modes = len(state.modes)
    zero = (0,) * n_modes
    out: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.entries.items():
        poly = {zero: amp / math.sqrt(_occupancy_factorial(occ))}
        for m, count in enumerate(occ):
            if count == 0:
                continue
            column = [
                (k, transform[k, m])
                for k in range(n_modes)
                if abs(transform[k, m]) > 1e-15
            ]
            for _ in range(count):
                nxt: dict[tuple[int, ...], complex] = {}
                for mono, coeff in poly.items():
                    for k, t in column:
                        key = mono[:k] + (mono[k] + 1,) + mono[k + 1 :]
                        nxt[key] = nxt.get(key, 0.0j) + coeff * t
                poly = nxt
        for mono, coeff in poly.items():
            out[mono] = out.get(mono, 0.0j) + coeff * math.sqrt(
                _occupancy_factorial(mono)
            )
    pruned = {occ: amp for occ, amp in out.items() if abs(amp) > 1e-15}
    return FockAmplitudeMap(state.modes, pruned)


def propagate(
    state: FockAmplitudeMap, elements: Sequence[Element]
) -> FockAmplitudeMap:
    """Push a bosonic state through an ordered element list, exactly.

    Each creation-operator monomial is expanded through the linear mode
    transformations; total probability is conserved before post-selection.
    """
    if state.photon_number() > MAX_PHOTONS:
        raise ValueError(
            f"photon number {state.photon_number()} exceeds the design bound "
            f"{MAX_PHOTONS}"
        )
    all_modes = list(state.modes)
    for el in elements:
        for m in element_modes(el):
            if m not in all_modes:
                all_modes.append(m)
    current = state.with_modes(canonical_mode_order(all_modes))
    for el in elements:
        current = _apply_mode_matrix(current, mode_matrix(el, current.modes))
    return current


def postselect_coincidence(
    state: FockAmplitudeMap,
) -> tuple[StateVector | None, float]:
    """Keep exactly-one-photon-per-main-line terms; renormalize to 3 qubits.

    Returns the conditional polarization state (h -> |0>, v -> |1>, line q ->
    qubit q) and the success probability.  A zero post-selected mass yields
    ``(None, 0.0)``.
    """
    pos = {m: i for i, m in enumerate(state.modes)}
    h_idx = [pos.get(OpticalMode(line, "h")) for line in MAIN_LINES]
    v_idx = [pos.get(OpticalMode(line, "v")) for line in MAIN_LINES]
    amps = np.zeros(8, dtype=complex)
    for occ, amp in state.entries.items():
        per_line = []
        ok = True
        for h_i, v_i in zip(h_idx, v_idx):
            n_h = occ[h_i] if h_i is not None else 0
            n_v = occ[v_i] if v_i is not None else 0
            if n_h + n_v != 1:
                ok = False
                break
            per_line.append(0 if n_h else 1)
        if not ok or sum(occ) != len(MAIN_LINES):
            continue
        k = (per_line[0] << 2) | (per_line[1] << 1) | per_line[2]
        amps[k] += amp
    success = float(np.sum(np.abs(amps) ** 2))
    if success <= 0.0:
        return None, 0.0
    return StateVector(amps / math.sqrt(success)), success


def cz_network_elements() -> tuple[Element, ...]:
    """The two concatenated controlled-sign gates as optical elements.

    Each gate interferes the control's v with a target's v at a type-1
    PPBS; a type-2 PPBS against a vacuum line balances the target's h.
    X plates around the second gate make the control's h pick up its 1/3
    there, and a final Z plate on line 2 fixes the conditioning sign.  The
    post-selected action on one-photon-per-line inputs is diagonal with
    amplitude 1/(3 sqrt(3)) and sign -1 exactly on v,h,v and v,v,h.
    """
    quarter = math.pi / 4.0
    return (
        ppbs_mode_transform(1, ("0", "1")),
        ppbs_mode_transform(2, ("1", "aux1")),
        hwp_mode_transform("0", quarter),
        ppbs_mode_transform(1, ("0", "2")),
        ppbs_mode_transform(2, ("2", "aux2")),
        hwp_mode_transform("0", quarter),
        hwp_mode_transform("2", 0.0),
    )


def ry_plate_pair(phi: float) -> tuple[Element, Element]:
    """Exact y-rotation of the line-0 qubit from two half-wave plates.

    A single plate at phi/2 equals the rotation only up to a Z (it is a
    reflection); preceding it with a plate at 0 compensates, so the pair
    acts as the rotation on every input, not just on h.
    """
    return (hwp_mode_transform("0", 0.0), hwp_mode_transform("0", phi / 2.0))


def build_eqs_optics(phi: float) -> tuple[Element, ...]:
    """Optical realization of the reduced three-qubit circuit at angle phi."""
    return ry_plate_pair(phi) + cz_network_elements()


def network_sign_table() -> dict[str, float]:
    """Post-selected diagonal amplitude of each basis input through the network.

    Keys are polarization words like ``"hvh"``; values are real amplitudes
    (the off-diagonal part of the post-selected map vanishes).
    """
    table = {}
    elements = cz_network_elements()
    for k in range(8):
        pols = "".join(POLARIZATIONS[(k >> (2 - q)) & 1] for q in range(3))
        out = propagate(fock_basis_input(pols), elements)
        conditional, success = postselect_coincidence(out)
        if conditional is None:
            table[pols] = 0.0
            continue
        amp = conditional.amplitudes[k] * math.sqrt(success)
        table[pols] = float(amp.real)
    return table


def element_to_json(element: Element) -> dict:
    rec = {"kind": element.kind, "ports": list(element.ports), "theta": element.theta}
    if element.kind == "ppbs":
        rec["t_h"] = element.t_h
        rec["t_v"] = element.t_v
    return rec


def element_from_json(rec: Mapping) -> Element:
    theta = rec.get("theta")
    return Element(
        rec["kind"],
        tuple(rec["ports"]),
        theta=None if theta is None else float(theta),
        t_h=rec.get("t_h"),
        t_v=rec.get("t_v"),
    )
