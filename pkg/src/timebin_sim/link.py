"""Per-arm link budget and gated detector parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.constants import c as speed_of_light

from .errors import ScenarioError


def db_to_linear(loss_db: float) -> float:
    """Power transmittance of a ``loss_db`` attenuation."""
    return 10.0 ** (-loss_db / 10.0)


@dataclass(frozen=True)
class DetectorParams:
    """Gated, non photon-number-resolving detector.

    Attributes:
        efficiency_eta: click probability given one incident photon.
        dark_count_per_gate: dark click probability per gated slot.
        gate_rate_hz: gate repetition frequency; one double-pulse frame per gate.
    """

    efficiency_eta: float
    dark_count_per_gate: float
    gate_rate_hz: float = 4e6

    def __post_init__(self):
        if not 0.0 <= self.efficiency_eta <= 1.0:
            raise ScenarioError(f"efficiency_eta must lie in [0, 1], got {self.efficiency_eta}")
        if not 0.0 <= self.dark_count_per_gate < 1.0:
            raise ScenarioError(
                f"dark_count_per_gate must lie in [0, 1), got {self.dark_count_per_gate}"
            )
        if not (self.gate_rate_hz > 0 and math.isfinite(self.gate_rate_hz)):
            raise ScenarioError(f"gate_rate_hz must be positive, got {self.gate_rate_hz}")


@dataclass(frozen=True)
class ChannelParams:
    """Loss budget from the source to one detector.

    ``fixed_loss_db`` lumps filters and interferometer excess loss; the
    transmission span adds ``fiber_length_km * fiber_loss_db_per_km``.
    """

    fixed_loss_db: float
    detector: DetectorParams
    fiber_length_km: float = 0.0
    fiber_loss_db_per_km: float = 0.2

    def __post_init__(self):
        for name in ("fixed_loss_db", "fiber_length_km", "fiber_loss_db_per_km"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ScenarioError(f"{name} must be finite and >= 0, got {value}")

    @property
    def total_loss_db(self) -> float:
        return self.fixed_loss_db + self.fiber_length_km * self.fiber_loss_db_per_km


def transmittance(c: ChannelParams) -> float:
    """Probability that a photon leaving the source produces a click.

    Includes the detector efficiency, so this is the ``alpha_x`` used by the
    rate formulas.

    >>> round(transmittance(ChannelParams(8.0, DetectorParams(0.08, 4e-5))), 5)
    0.01268
    """
    return c.detector.efficiency_eta * db_to_linear(c.total_loss_db)


@dataclass(frozen=True)
class FrequencyPlan:
    """Signal and idler sit symmetrically around the pump (``2 f_p = f_s + f_i``)."""

    pump_hz: float
    offset_hz: float = 400e9
    channel_bandwidth_hz: float = field(default=25e9, compare=False)

    def __post_init__(self):
        if not (self.pump_hz > 0 and self.offset_hz > 0 and self.offset_hz < self.pump_hz):
            raise ScenarioError("need 0 < offset_hz < pump_hz")

    @property
    def signal_hz(self) -> float:
        return self.pump_hz + self.offset_hz

    @property
    def idler_hz(self) -> float:
        return self.pump_hz - self.offset_hz

    @classmethod
    def from_pump_wavelength(cls, wavelength_m: float, offset_hz: float = 400e9) -> "FrequencyPlan":
        # whole-hertz frequencies keep 2 f_p == f_s + f_i exact in floating point
        return cls(pump_hz=float(round(speed_of_light / wavelength_m)), offset_hz=float(round(offset_hz)))
