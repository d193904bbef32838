"""Spontaneous Raman noise photon numbers in the pump fiber.

Stokes photons (red side of the pump) and anti-Stokes photons (blue side)
both follow the Bose-Einstein phonon occupancy at the fiber temperature::

    n_s  = g L exp(-alpha L) / (1 - exp(-h nu / k_B T))
    n_as = g L exp(-alpha L) / (exp(h nu / k_B T) - 1)

The fiber loss coefficient is taken as temperature independent, so the
ratio of noise levels between two temperatures depends only on ``nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from scipy.constants import h as PLANCK, k as BOLTZMANN

from .errors import ScenarioError

Side = Literal["stokes", "anti_stokes"]

# exp(x) overflows a double past ~709.78
_MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class RamanParams:
    """Pump fiber parameters.

    Attributes:
        gain_g: gain coefficient per meter, proportional to pump power (1/m).
        length_L: fiber length (m).
        loss_alpha: loss coefficient (1/m).
        detuning_nu: pump to channel frequency offset (Hz).
        temperature_T: fiber temperature (K).
    """

    gain_g: float
    length_L: float
    loss_alpha: float
    detuning_nu: float
    temperature_T: float

    def __post_init__(self):
        if not self.gain_g >= 0:
            raise ScenarioError(f"gain_g must be >= 0, got {self.gain_g}")
        if not self.length_L > 0:
            raise ScenarioError(f"length_L must be > 0, got {self.length_L}")
        if not self.loss_alpha >= 0:
            raise ScenarioError(f"loss_alpha must be >= 0, got {self.loss_alpha}")
        _check_positive(detuning_nu=self.detuning_nu, temperature_T=self.temperature_T)

    @property
    def prefactor(self) -> float:
        """Temperature independent part ``g L exp(-alpha L)``."""
        return self.gain_g * self.length_L * math.exp(-self.loss_alpha * self.length_L)


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not (value > 0 and math.isfinite(value)):
            raise ScenarioError(f"{name} must be positive and finite, got {value}")


def characteristic_temperature(nu: float) -> float:
    """Return ``h nu / k_B`` in kelvin (about 19.2 K at 400 GHz)."""
    _check_positive(nu=nu)
    return PLANCK * nu / BOLTZMANN


def stokes_factor(nu: float, temperature: float) -> float:
    """Bose factor ``1 / (1 - exp(-h nu / k_B T))`` of the Stokes process."""
    _check_positive(nu=nu, temperature=temperature)
    x = characteristic_temperature(nu) / temperature
    if x > _MAX_EXPONENT:
        return 1.0
    return -1.0 / math.expm1(-x)


def anti_stokes_factor(nu: float, temperature: float) -> float:
    """Bose factor ``1 / (exp(h nu / k_B T) - 1)`` of the anti-Stokes process."""
    _check_positive(nu=nu, temperature=temperature)
    x = characteristic_temperature(nu) / temperature
    if x > _MAX_EXPONENT:
        return 0.0
    return 1.0 / math.expm1(x)


def _factor(side: Side, nu: float, temperature: float) -> float:
    if side == "stokes":
        return stokes_factor(nu, temperature)
    if side == "anti_stokes":
        return anti_stokes_factor(nu, temperature)
    raise ValueError(f"side must be 'stokes' or 'anti_stokes', got {side!r}")


def stokes_mean(p: RamanParams) -> float:
    """Mean Stokes noise photons per pulse."""
    return p.prefactor * stokes_factor(p.detuning_nu, p.temperature_T)


def anti_stokes_mean(p: RamanParams) -> float:
    """Mean anti-Stokes noise photons per pulse."""
    return p.prefactor * anti_stokes_factor(p.detuning_nu, p.temperature_T)


def scale_noise_to_temperature(
    mu_ref: float, T_ref: float, T_new: float, nu: float, side: Side
) -> float:
    """Rescale a noise level measured at ``T_ref`` to the temperature ``T_new``.

    Only the occupancy factor changes; gain, length and loss are held fixed.

    >>> round(scale_noise_to_temperature(0.01, 293.0, 77.0, 400e9, "stokes"), 4)
    0.0029
    """
    if not mu_ref >= 0:
        raise ScenarioError(f"mu_ref must be >= 0, got {mu_ref}")
    if T_new == T_ref:
        _check_positive(T_ref=T_ref, nu=nu)
        _factor(side, nu, T_ref)
        return mu_ref
    return mu_ref * _factor(side, nu, T_new) / _factor(side, nu, T_ref)
