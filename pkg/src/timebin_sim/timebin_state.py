"""Amplitude algebra for a time-bin entangled pair and two delay interferometers.

The source emits ``(|1>_s|1>_i + exp(i phi)|2>_s|2>_i) / sqrt(2)``. Each
photon then passes a 1-bit delayed Mach-Zehnder interferometer that maps::

    |k> -> (|k,a> - |k,b> + e^{i theta}|k+1,a> + e^{i theta}|k+1,b>) / 2

Joint amplitudes are obtained by tensoring these branches, never by hand, and
probabilities are the squared moduli. Output slots run over {1, 2, 3} and
ports over {"a", "b"}, giving 36 joint outcomes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, NamedTuple, Tuple

import numpy as np

SLOTS = (1, 2, 3)
PORTS = ("a", "b")
INPUT_SLOTS = (1, 2)


class SingleOutcome(NamedTuple):
    """Detection outcome of one photon: output time slot and interferometer port."""

    slot: int
    port: str


ALL_SINGLE_OUTCOMES: Tuple[SingleOutcome, ...] = tuple(
    SingleOutcome(slot, port) for slot in SLOTS for port in PORTS
)

JointKey = Tuple[SingleOutcome, SingleOutcome]


@dataclass(frozen=True)
class PhaseConfig:
    """Pump relative phase and the two analyzer phases, in radians."""

    phi: float = 0.0
    theta_s: float = 0.0
    theta_i: float = 0.0

    def __post_init__(self):
        for name in ("phi", "theta_s", "theta_i"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def theta(self) -> float:
        """Total analyzer phase ``theta_s + theta_i``."""
        return self.theta_s + self.theta_i

    def with_total_theta(self, theta: float) -> "PhaseConfig":
        """Copy with ``theta_i`` moved so the analyzer phases sum to ``theta``."""
        return PhaseConfig(self.phi, self.theta_s, theta - self.theta_s)


def _check_input_slot(slot: int) -> None:
    if slot not in INPUT_SLOTS:
        raise ValueError(f"input slot must be 1 or 2, got {slot!r}")


def interferometer_amplitudes(input_slot: int, theta_x: float) -> Dict[SingleOutcome, complex]:
    """Output amplitudes of a single photon entering in ``input_slot``."""
    _check_input_slot(input_slot)
    late = cmath.exp(1j * theta_x)
    k = input_slot
    return {
        SingleOutcome(k, "a"): 0.5,
        SingleOutcome(k, "b"): -0.5,
        SingleOutcome(k + 1, "a"): 0.5 * late,
        SingleOutcome(k + 1, "b"): 0.5 * late,
    }


def single_photon_distribution(input_slot: int, theta_x: float) -> Dict[SingleOutcome, float]:
    """Outcome probabilities of one photon after its interferometer.

    Each of the four reachable outcomes has probability 1/4 whatever the
    phase; only pairs interfere.
    """
    return {o: abs(amp) ** 2 for o, amp in interferometer_amplitudes(input_slot, theta_x).items()}


def joint_amplitudes(pc: PhaseConfig) -> Dict[JointKey, complex]:
    """Amplitudes of all 36 (signal, idler) outcomes, zeros included.

    The global ``exp(i(phi + theta))`` on slot-3 coincidences is kept even
    though no probability depends on it.
    """
    amps: Dict[JointKey, complex] = {
        (s, i): 0j for s in ALL_SINGLE_OUTCOMES for i in ALL_SINGLE_OUTCOMES
    }
    components = ((1, 1.0 / math.sqrt(2)), (2, cmath.exp(1j * pc.phi) / math.sqrt(2)))
    for slot, weight in components:
        sig = interferometer_amplitudes(slot, pc.theta_s)
        idl = interferometer_amplitudes(slot, pc.theta_i)
        for s, a_s in sig.items():
            for i, a_i in idl.items():
                amps[(s, i)] += weight * a_s * a_i
    return amps


@dataclass(frozen=True)
class JointOutcomeDistribution:
    """Probability of each (signal outcome, idler outcome) for one pair."""

    probabilities: Mapping[JointKey, float]

    def __getitem__(self, key: JointKey) -> float:
        return self.probabilities[key]

    def __iter__(self) -> Iterator[JointKey]:
        return iter(self.probabilities)

    def __len__(self) -> int:
        return len(self.probabilities)

    def total(self) -> float:
        return math.fsum(self.probabilities.values())

    def prob(self, slot_s: int, port_s: str, slot_i: int, port_i: str) -> float:
        return self.probabilities[(SingleOutcome(slot_s, port_s), SingleOutcome(slot_i, port_i))]

    def signal_marginal(self) -> Dict[SingleOutcome, float]:
        out = {o: 0.0 for o in ALL_SINGLE_OUTCOMES}
        for (s, _), p in self.probabilities.items():
            out[s] += p
        return out

    def idler_marginal(self) -> Dict[SingleOutcome, float]:
        out = {o: 0.0 for o in ALL_SINGLE_OUTCOMES}
        for (_, i), p in self.probabilities.items():
            out[i] += p
        return out

    def as_array(self) -> np.ndarray:
        """Probabilities as a ``(3, 2, 3, 2)`` array indexed [slot_s-1, port_s, slot_i-1, port_i]."""
        arr = np.zeros((3, 2, 3, 2))
        for (s, i), p in self.probabilities.items():
            arr[s.slot - 1, PORTS.index(s.port), i.slot - 1, PORTS.index(i.port)] = p
        return arr


def joint_outcome_distribution(pc: PhaseConfig) -> JointOutcomeDistribution:
    """Joint detection-outcome distribution of one pair after both interferometers."""
    probs = {key: abs(amp) ** 2 for key, amp in joint_amplitudes(pc).items()}
    return JointOutcomeDistribution(probs)


def coincidence_probability_slot2(pc: PhaseConfig, port_s: str, port_i: str) -> float:
    """Probability that both photons exit in slot 2 through the given ports.

    Equal ports give ``(1 + cos(theta - phi)) / 16``, unequal ports
    ``(1 - cos(theta - phi)) / 16``.
    """
    if port_s not in PORTS or port_i not in PORTS:
        raise ValueError(f"ports must be 'a' or 'b', got {port_s!r}, {port_i!r}")
    key = (SingleOutcome(2, port_s), SingleOutcome(2, port_i))
    return abs(joint_amplitudes(pc)[key]) ** 2
